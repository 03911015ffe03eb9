/*******************************************************************************
* Copyright 2026 The straightleg Authors
*
* Licensed under the Apache License, Version 2.0 (the "License");
* you may not use this file except in compliance with the License.
* You may obtain a copy of the License at
*
*     http://www.apache.org/licenses/LICENSE-2.0
*
* Unless required by applicable law or agreed to in writing, software
* distributed under the License is distributed on an "AS IS" BASIS,
* WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
* See the License for the specific language governing permissions and
* limitations under the License.
*******************************************************************************/

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <limits>
#include <sstream>

#include "straightleg/sim_harness.hpp"

namespace straightleg::sim
{

namespace
{

struct Segment
{
  gait::PhaseKind kind;
  Side support;
  std::size_t begin;
  std::size_t end;  // one past the last row
};

std::vector<Segment> segments(const TelemetryLog& log)
{
  std::vector<Segment> out;
  for (std::size_t i = 0; i < log.size(); ++i)
  {
    if (out.empty() || log[i].phase != out.back().kind || log[i].support != out.back().support)
      out.push_back({log[i].phase, log[i].support, i, i + 1});
    else
      out.back().end = i + 1;
  }
  return out;
}

double stance_knee(const TelemetryRow& r, Side stance) { return stance == Side::Left ? r.knee_l : r.knee_r; }

double knee_torque(const TelemetryRow& r, Side s)
{
  return r.tau(model::knee_dof(s) - (model::kNumDofs - model::kNumActuated));
}

double com_range(const TelemetryLog& log, const Segment& s)
{
  double lo = std::numeric_limits<double>::infinity(), hi = -lo;
  for (std::size_t i = s.begin; i < s.end; ++i)
  {
    lo = std::min(lo, log[i].com_z);
    hi = std::max(hi, log[i].com_z);
  }
  return hi - lo;
}

double mean(const std::vector<double>& xs)
{
  if (xs.empty())
    return 0.0;
  double s = 0.0;
  for (double x : xs)
    s += x;
  return s / static_cast<double>(xs.size());
}

}  // namespace

RunMetrics compute_metrics(const TelemetryLog& log, const MetricsContext& context)
{
  RunMetrics m;
  if (log.empty())
    return m;

  double icp_sq = 0.0;
  for (const TelemetryRow& r : log)
  {
    icp_sq += (r.icp - r.icp_ref) * (r.icp - r.icp_ref);
    const double ground = context.terrain.height(r.com_x);
    if (r.com_z - ground < context.fall_height_ratio * context.nominal_height ||
        std::abs(r.q(model::kBasePitch)) > context.fall_pitch)
      m.fell = true;
  }
  m.icp_rms = std::sqrt(icp_sq / static_cast<double>(log.size()));

  const std::vector<Segment> segs = segments(log);
  std::vector<double> knees, torques, transfer_ranges, swing_ranges;
  m.max_stance_knee = 0.0;
  m.min_straight_fraction = 1.0;
  int swings_seen = 0;
  for (std::size_t k = 0; k < segs.size(); ++k)
  {
    const Segment& s = segs[k];
    const double t_end = s.end < log.size() ? log[s.end].t : log[s.end - 1].t;
    if (s.kind == gait::PhaseKind::Swing)
    {
      ++swings_seen;
      SwingStats st;
      st.t_start = log[s.begin].t;
      st.t_end = t_end;
      st.stance = s.support;
      int straight = 0;
      std::vector<double> ks;
      for (std::size_t i = s.begin; i < s.end; ++i)
      {
        const double q = stance_knee(log[i], s.support);
        straight += q <= kStraightKneeLimit ? 1 : 0;
        ks.push_back(q);
        knees.push_back(q);
        torques.push_back(std::abs(knee_torque(log[i], s.support)));
        m.max_stance_knee = std::max(m.max_stance_knee, q);
      }
      st.straight_fraction = static_cast<double>(straight) / static_cast<double>(s.end - s.begin);
      st.mean_knee = mean(ks);
      st.com_range = com_range(log, s);
      swing_ranges.push_back(st.com_range);
      m.min_straight_fraction = std::min(m.min_straight_fraction, st.straight_fraction);
      m.swings.push_back(st);
      if (s.end < log.size() && log[s.end].phase == gait::PhaseKind::Transfer)
        m.touchdown_times.push_back(log[s.end].t);
      continue;
    }
    if (s.kind != gait::PhaseKind::Transfer || swings_seen == 0)
      continue;
    if (k + 1 >= segs.size() || segs[k + 1].kind != gait::PhaseKind::Swing)
      continue;

    TransferStats tr;
    tr.t_start = log[s.begin].t;
    tr.t_end = t_end;
    tr.step = swings_seen;
    tr.terminal = k + 2 < segs.size() && segs[k + 2].kind == gait::PhaseKind::Transfer &&
                  (k + 3 >= segs.size() || segs[k + 3].kind != gait::PhaseKind::Swing);
    for (std::size_t i = s.begin; i < s.end; ++i)
      if (log[i].toe_off && !tr.toe_off)
      {
        tr.toe_off = true;
        tr.toe_off_time = log[i].t;
      }
    tr.com_range = com_range(log, s);
    transfer_ranges.push_back(tr.com_range);

    // mean vertical CoM rate over each half of the phase
    const std::size_t last = s.end < log.size() ? s.end : s.end - 1;
    const std::size_t mid = s.begin + (last - s.begin) / 2;
    if (mid > s.begin && last > mid)
    {
      tr.mean_zdot_first = (log[mid].com_z - log[s.begin].com_z) / (log[mid].t - log[s.begin].t);
      tr.mean_zdot_second = (log[last].com_z - log[mid].com_z) / (log[last].t - log[mid].t);
      tr.reverses = tr.mean_zdot_first * tr.mean_zdot_second < 0.0;
    }
    tr.rises = tr.mean_zdot_second > 0.0;
    if (tr.rises)
    {
      std::size_t run = last;
      while (run > s.begin && log[run].com_z > log[run - 1].com_z)
        --run;
      tr.rise_time = log[run].t;
      tr.toe_off_before_rise = tr.toe_off && tr.toe_off_time <= tr.rise_time;
    }
    m.toe_off_per_step.push_back(tr.toe_off);
    m.transfers.push_back(tr);
  }

  m.mean_stance_knee = mean(knees);
  m.mean_stance_knee_torque = mean(torques);
  m.com_range_transfer = mean(transfer_ranges);
  m.com_range_swing = mean(swing_ranges);
  if (m.swings.empty())
    m.min_straight_fraction = 0.0;

  if (m.swings.size() >= 2)
  {
    const auto at = [&](double t) {
      const auto it = std::lower_bound(log.begin(), log.end(), t,
                                       [](const TelemetryRow& r, double value) { return r.t < value; });
      return it == log.end() ? log.back() : *it;
    };
    // steady state: skip gait initiation and the closing step when there are enough steps
    const std::size_t n = m.swings.size();
    const std::size_t first = n >= 4 ? 1 : 0;
    const std::size_t last = n >= 4 ? n - 2 : n - 1;
    const TelemetryRow& a = at(m.swings[first].t_start);
    const TelemetryRow& b = at(m.swings[last].t_start);
    if (b.t > a.t)
      m.average_speed = (b.com_x - a.com_x) / (b.t - a.t);
  }
  return m;
}

// ---------------------------------------------------------------------------
// CSV

namespace
{

std::string phase_token(gait::PhaseKind kind, Side support)
{
  if (kind == gait::PhaseKind::Complete)
    return "complete";
  return std::string(gait::to_string(kind)) + (support == Side::Left ? "_L" : "_R");
}

void parse_phase(const std::string& token, TelemetryRow& row)
{
  if (token == "complete")
  {
    row.phase = gait::PhaseKind::Complete;
    return;
  }
  const auto cut = token.rfind('_');
  if (cut == std::string::npos)
    throw std::runtime_error("bad phase token: " + token);
  const std::string kind = token.substr(0, cut);
  const std::string side = token.substr(cut + 1);
  if (kind == "transfer")
    row.phase = gait::PhaseKind::Transfer;
  else if (kind == "swing")
    row.phase = gait::PhaseKind::Swing;
  else
    throw std::runtime_error("bad phase token: " + token);
  if (side != "L" && side != "R")
    throw std::runtime_error("bad phase token: " + token);
  row.support = side == "L" ? Side::Left : Side::Right;
}

gait::LegState parse_leg_state(const std::string& token)
{
  for (gait::LegState s : {gait::LegState::Straighten, gait::LegState::Straight, gait::LegState::Collapsed,
                           gait::LegState::Bent, gait::LegState::Extend})
    if (token == gait::to_string(s))
      return s;
  throw std::runtime_error("bad leg state token: " + token);
}

void put(std::string& line, double x)
{
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g,", x);
  line += buf;
}

}  // namespace

std::string csv_header()
{
  std::string h = "t";
  for (int i = 0; i < model::kNumDofs; ++i)
    h += ",q" + std::to_string(i);
  for (int i = 0; i < model::kNumDofs; ++i)
    h += ",v" + std::to_string(i);
  for (int i = 0; i < model::kNumActuated; ++i)
    h += ",tau" + std::to_string(i);
  h += ",com_x,com_z,icp,icp_ref,cmp_des,cop,knee_l,knee_r,leg_state_l,leg_state_r,phase,toe_off,qp_iters,"
       "qp_residual";
  return h;
}

void write_csv(const TelemetryLog& log, const std::string& path)
{
  std::ofstream out(path, std::ios::binary);
  if (!out)
    throw std::runtime_error("cannot open " + path);
  out << csv_header() << '\n';
  std::string line;
  for (const TelemetryRow& r : log)
  {
    line.clear();
    put(line, r.t);
    for (int i = 0; i < model::kNumDofs; ++i)
      put(line, r.q(i));
    for (int i = 0; i < model::kNumDofs; ++i)
      put(line, r.v(i));
    for (int i = 0; i < model::kNumActuated; ++i)
      put(line, r.tau(i));
    for (double x : {r.com_x, r.com_z, r.icp, r.icp_ref, r.cmp_des, r.cop, r.knee_l, r.knee_r})
      put(line, x);
    line += gait::to_string(r.leg_state_l);
    line += ',';
    line += gait::to_string(r.leg_state_r);
    line += ',';
    line += phase_token(r.phase, r.support);
    line += r.toe_off ? ",1," : ",0,";
    line += std::to_string(r.qp_iters);
    line += ',';
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", r.qp_residual);
    line += buf;
    out << line << '\n';
  }
  if (!out)
    throw std::runtime_error("write failed: " + path);
}

TelemetryLog read_csv(const std::string& path)
{
  std::ifstream in(path);
  if (!in)
    throw std::runtime_error("cannot open " + path);
  std::string line;
  if (!std::getline(in, line) || line != csv_header())
    throw std::runtime_error("unexpected CSV header in " + path);

  constexpr std::size_t kColumns = 1 + 2 * model::kNumDofs + model::kNumActuated + 8 + 6;
  TelemetryLog log;
  while (std::getline(in, line))
  {
    if (line.empty())
      continue;
    std::vector<std::string> f;
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ','))
      f.push_back(cell);
    if (f.size() != kColumns)
      throw std::runtime_error("wrong column count in " + path);

    std::size_t c = 0;
    const auto num = [&]() {
      std::size_t used = 0;
      const double x = std::stod(f[c], &used);
      if (used != f[c].size())
        throw std::runtime_error("bad number: " + f[c]);
      ++c;
      return x;
    };
    TelemetryRow r;
    r.t = num();
    for (int i = 0; i < model::kNumDofs; ++i)
      r.q(i) = num();
    for (int i = 0; i < model::kNumDofs; ++i)
      r.v(i) = num();
    for (int i = 0; i < model::kNumActuated; ++i)
      r.tau(i) = num();
    r.com_x = num();
    r.com_z = num();
    r.icp = num();
    r.icp_ref = num();
    r.cmp_des = num();
    r.cop = num();
    r.knee_l = num();
    r.knee_r = num();
    r.leg_state_l = parse_leg_state(f[c++]);
    r.leg_state_r = parse_leg_state(f[c++]);
    parse_phase(f[c++], r);
    r.toe_off = num() != 0.0;
    r.qp_iters = static_cast<int>(num());
    r.qp_residual = num();
    log.push_back(r);
  }
  return log;
}

// ---------------------------------------------------------------------------
// SVG plots

namespace
{

struct Series
{
  std::string label;
  std::string color;
  std::vector<double> y;
};

void write_svg(const TelemetryLog& log, const std::vector<Series>& series, const std::string& title,
               const std::string& path)
{
  constexpr double W = 900, H = 320, L = 60, R = 20, T = 30, B = 40;
  double t0 = 0, t1 = 1, y0 = std::numeric_limits<double>::infinity(), y1 = -y0;
  if (!log.empty())
  {
    t0 = log.front().t;
    t1 = std::max(log.back().t, t0 + 1e-9);
  }
  for (const Series& s : series)
    for (double y : s.y)
      if (std::isfinite(y))
      {
        y0 = std::min(y0, y);
        y1 = std::max(y1, y);
      }
  if (!std::isfinite(y0))
  {
    y0 = 0;
    y1 = 1;
  }
  if (y1 - y0 < 1e-9)
  {
    y0 -= 0.5;
    y1 += 0.5;
  }
  const double pad = 0.05 * (y1 - y0);
  y0 -= pad;
  y1 += pad;
  const auto px = [&](double t) { return L + (W - L - R) * (t - t0) / (t1 - t0); };
  const auto py = [&](double y) { return H - B - (H - T - B) * (y - y0) / (y1 - y0); };

  std::ofstream out(path);
  if (!out)
    throw std::runtime_error("cannot open " + path);
  char buf[256];
  out << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << W << "\" height=\"" << H << "\">\n";
  out << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";

  // transfer phases shaded
  for (const Segment& s : segments(log))
  {
    if (s.kind != gait::PhaseKind::Transfer)
      continue;
    const double a = px(log[s.begin].t);
    const double b = px(s.end < log.size() ? log[s.end].t : log[s.end - 1].t);
    std::snprintf(buf, sizeof buf, "<rect x=\"%.2f\" y=\"%.2f\" width=\"%.2f\" height=\"%.2f\" fill=\"#e6e6e6\"/>\n",
                  a, T, std::max(0.0, b - a), H - T - B);
    out << buf;
  }

  out << "<g stroke=\"black\" fill=\"none\">\n";
  std::snprintf(buf, sizeof buf, "<rect x=\"%.2f\" y=\"%.2f\" width=\"%.2f\" height=\"%.2f\"/>\n", L, T, W - L - R,
                H - T - B);
  out << buf << "</g>\n";
  for (int i = 0; i <= 4; ++i)
  {
    const double y = y0 + (y1 - y0) * i / 4.0;
    std::snprintf(buf, sizeof buf,
                  "<text x=\"%.2f\" y=\"%.2f\" font-size=\"11\" text-anchor=\"end\">%.3f</text>\n", L - 5, py(y) + 4,
                  y);
    out << buf;
    const double t = t0 + (t1 - t0) * i / 4.0;
    std::snprintf(buf, sizeof buf,
                  "<text x=\"%.2f\" y=\"%.2f\" font-size=\"11\" text-anchor=\"middle\">%.2f</text>\n", px(t), H - B + 15,
                  t);
    out << buf;
  }
  std::snprintf(buf, sizeof buf, "<text x=\"%.2f\" y=\"20\" font-size=\"13\">%s</text>\n", L, title.c_str());
  out << buf;
  std::snprintf(buf, sizeof buf, "<text x=\"%.2f\" y=\"%.2f\" font-size=\"11\" text-anchor=\"middle\">t (s)</text>\n",
                (W + L) / 2, H - 8);
  out << buf;

  double legend_x = W - R - 10;
  for (const Series& s : series)
  {
    out << "<polyline fill=\"none\" stroke-width=\"1.2\" stroke=\"" << s.color << "\" points=\"";
    for (std::size_t i = 0; i < log.size(); ++i)
      if (std::isfinite(s.y[i]))
      {
        std::snprintf(buf, sizeof buf, "%.2f,%.2f ", px(log[i].t), py(s.y[i]));
        out << buf;
      }
    out << "\"/>\n";
    std::snprintf(buf, sizeof buf,
                  "<text x=\"%.2f\" y=\"20\" font-size=\"12\" text-anchor=\"end\" fill=\"%s\">%s</text>\n", legend_x,
                  s.color.c_str(), s.label.c_str());
    out << buf;
    legend_x -= 12.0 + 7.0 * static_cast<double>(s.label.size());
  }

  // toe-off onsets
  for (std::size_t i = 0; i < log.size(); ++i)
    if (log[i].toe_off && (i == 0 || !log[i - 1].toe_off))
    {
      std::snprintf(buf, sizeof buf,
                    "<path d=\"M %.2f %.2f l -4 -8 l 8 0 z\" fill=\"#d62728\"/>\n", px(log[i].t), py(series[0].y[i]));
      out << buf;
    }
  out << "</svg>\n";
}

}  // namespace

void write_plots(const TelemetryLog& log, const std::string& directory)
{
  std::filesystem::create_directories(directory);
  Series icp{"icp", "#1f77b4", {}}, icp_ref{"icp_ref", "#ff7f0e", {}}, com{"com_z", "#2ca02c", {}};
  for (const TelemetryRow& r : log)
  {
    icp.y.push_back(r.icp);
    icp_ref.y.push_back(r.icp_ref);
    com.y.push_back(r.com_z);
  }
  const std::filesystem::path dir(directory);
  write_svg(log, {icp, icp_ref}, "ICP and reference (m)", (dir / "icp.svg").string());
  write_svg(log, {com}, "CoM height (m)", (dir / "com_height.svg").string());
}

}  // namespace straightleg::sim
