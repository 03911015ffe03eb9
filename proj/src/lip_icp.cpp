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

#include "straightleg/lip_icp.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace straightleg::lip
{

PendulumParams::PendulumParams(double nominal_height, double gravity)
  : z_nom_(nominal_height), g_(gravity), omega_(0.0)
{
  if (!(nominal_height > 0.0) || !std::isfinite(nominal_height))
    throw DomainError("nominal CoM height must be positive");
  if (!(gravity > 0.0) || !std::isfinite(gravity))
    throw DomainError("gravity must be positive");
  omega_ = std::sqrt(g_ / z_nom_);
}

void FootstepPlan::validate() const
{
  if (!(swing_duration > 0.0) || !(transfer_duration > 0.0) || !(initial_transfer_duration > 0.0) ||
      !(final_transfer_duration > 0.0))
    throw InfeasiblePlan("phase durations must be positive");
  if (footholds.size() < 2)
    throw InfeasiblePlan("a plan needs the two initial foot positions");
  for (std::size_t k = 1; k < footholds.size(); ++k)
  {
    if (footholds[k].side == footholds[k - 1].side)
    {
      std::ostringstream os;
      os << "footholds " << k - 1 << " and " << k << " are on the same side";
      throw InfeasiblePlan(os.str());
    }
    if (std::abs(footholds[k].x - footholds[k - 1].x) > workspace)
    {
      std::ostringstream os;
      os << "foothold " << k << " is outside the leg workspace";
      throw InfeasiblePlan(os.str());
    }
  }
}

double icp_from_state(double x, double xdot, const PendulumParams& params)
{
  return x + xdot / params.omega();
}

double icp_dynamics(double icp, double cmp, const PendulumParams& params)
{
  return params.omega() * (icp - cmp);
}

double cmp_from_ecmp(double x, double z_com, double ecmp, const PendulumParams& params)
{
  if (!(z_com > 0.0))
    throw DomainError("CoM height must be positive");
  return x - (z_com / params.nominal_height()) * (x - ecmp);
}

double max_cmp_error(double stride, double z_nom)
{
  if (!(z_nom > 0.0))
    throw DomainError("nominal height must be positive");
  if (!(stride >= 0.0) || stride >= 2.0 * z_nom)
    throw DomainError("stride must lie in [0, 2 z_nom)");
  return 0.5 * stride * (1.0 - std::sqrt(z_nom * z_nom - 0.25 * stride * stride) / z_nom);
}

namespace
{

// ICP at the start of a segment whose CMP moves linearly, given the ICP at its end.
double backward_icp(const IcpSegment& s, double omega)
{
  const double duration = s.t_end - s.t_start;
  const double rate = (s.cmp_end - s.cmp_start) / duration;
  return s.cmp_start + rate / omega + std::exp(-omega * duration) * (s.icp_end - s.cmp_end - rate / omega);
}

double center(const FootstepPlan& plan, const Foothold& f)
{
  return f.x + plan.foot_center_offset + f.cmp_offset;
}

}  // namespace

IcpPlan plan_icp(const FootstepPlan& plan, const PendulumParams& params)
{
  plan.validate();
  const double omega = params.omega();
  const auto& fh = plan.footholds;
  const int steps = plan.num_steps();

  IcpPlan out;
  out.omega = omega;
  double t = 0.0;
  auto push = [&](SegmentKind kind, int step, double duration, double r0, double r1) {
    IcpSegment s;
    s.kind = kind;
    s.step = step;
    s.t_start = t;
    s.t_end = t + duration;
    s.cmp_start = r0;
    s.cmp_end = r1;
    out.segments.push_back(s);
    t += duration;
  };

  const double both = 0.5 * (center(plan, fh[0]) + center(plan, fh[1]));
  if (steps == 0)
  {
    push(SegmentKind::Transfer, 0, plan.initial_transfer_duration, both, both);
  }
  else
  {
    push(SegmentKind::Transfer, 0, plan.initial_transfer_duration, both, center(plan, fh[1]));
    for (int k = 1; k <= steps; ++k)
    {
      const double stance = center(plan, fh[k]);
      const double landed = center(plan, fh[k + 1]);
      push(SegmentKind::Swing, k, plan.swing_duration, stance, stance);
      const double transfer = k == steps ? plan.final_transfer_duration : plan.transfer_duration;
      push(SegmentKind::Transfer, k, transfer, stance, landed);
    }
  }

  out.final_capture_point = out.segments.back().cmp_end;
  double icp_end = out.final_capture_point;
  for (auto it = out.segments.rbegin(); it != out.segments.rend(); ++it)
  {
    it->icp_end = icp_end;
    it->icp_start = backward_icp(*it, omega);
    icp_end = it->icp_start;
  }
  return out;
}

IcpPlan plan_icp(const FootstepPlan& plan, const PendulumParams& params, double initial_icp,
                 double initial_cmp_min, double initial_cmp_max)
{
  IcpPlan out = plan_icp(plan, params);
  IcpSegment& s = out.segments.front();
  if (out.segments.size() < 2)
    return out;

  // icp_start is affine in cmp_start: icp_start = c0 + c1 * cmp_start.
  const double omega = params.omega();
  const double a = 1.0 / (omega * (s.t_end - s.t_start));
  const double e = std::exp(-omega * (s.t_end - s.t_start));
  const double c1 = 1.0 - a + a * e;
  const double c0 = s.cmp_end * (a - e - a * e) + e * s.icp_end;
  if (std::abs(c1) < 1e-6)
    return out;
  s.cmp_start = std::clamp((initial_icp - c0) / c1, initial_cmp_min, initial_cmp_max);
  s.icp_start = backward_icp(s, omega);
  return out;
}

IcpReference segment_reference(const IcpPlan& plan, int segment, double t_in_segment)
{
  const IcpSegment& s = plan.segments.at(static_cast<std::size_t>(segment));
  const double duration = s.t_end - s.t_start;
  const double tau = std::clamp(t_in_segment, 0.0, duration);
  const double rate = (s.cmp_end - s.cmp_start) / duration;
  const double omega = plan.omega;

  IcpReference ref;
  ref.cmp = s.cmp_start + rate * tau;
  ref.icp = ref.cmp + rate / omega + std::exp(omega * (tau - duration)) * (s.icp_end - s.cmp_end - rate / omega);
  if (tau >= duration)
    ref.icp = s.icp_end;
  ref.icp_rate = omega * (ref.icp - ref.cmp);
  return ref;
}

IcpReference icp_reference_at(const IcpPlan& plan, double t)
{
  if (plan.segments.empty())
    return {};
  const double tc = std::clamp(t, plan.segments.front().t_start, plan.t_end());
  std::size_t k = 0;
  while (k + 1 < plan.segments.size() && tc >= plan.segments[k].t_end)
    ++k;
  return segment_reference(plan, static_cast<int>(k), tc - plan.segments[k].t_start);
}

int find_segment(const IcpPlan& plan, SegmentKind kind, int step)
{
  for (std::size_t k = 0; k < plan.segments.size(); ++k)
    if (plan.segments[k].kind == kind && plan.segments[k].step == step)
      return static_cast<int>(k);
  return -1;
}

double icp_feedback(double icp_measured, double icp_ref, double icp_rate_ref, double gain,
                    const PendulumParams& params)
{
  if (!(gain > 0.0))
    throw DomainError("ICP feedback gain must be positive");
  const double omega = params.omega();
  return icp_measured - icp_rate_ref / omega + (gain / omega) * (icp_measured - icp_ref);
}

double desired_horizontal_momentum_rate(double x_com, double cmp_desired, double mass,
                                        const PendulumParams& params)
{
  if (!(mass > 0.0))
    throw DomainError("mass must be positive");
  const double omega = params.omega();
  return mass * omega * omega * (x_com - cmp_desired);
}

}  // namespace straightleg::lip
