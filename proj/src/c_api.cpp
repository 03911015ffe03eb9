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

#include <fstream>
#include <string>

#include <json.hpp>

#include "straightleg/sim_harness.hpp"
#include "straightleg/straightleg.h"

using straightleg::sim::CompareReport;
using straightleg::sim::ConfigError;
using straightleg::sim::RunResult;
using straightleg::sim::RunStatus;
using straightleg::sim::ScenarioConfig;

struct sl_scenario
{
  ScenarioConfig config;
};

struct sl_result
{
  RunResult run;
  std::uint64_t seed = 0;
  std::string mode;
};

struct sl_comparison
{
  CompareReport report;
  std::string text;
};

namespace
{

thread_local std::string g_error;

sl_status fail(sl_status code, const std::string& message)
{
  g_error = message;
  return code;
}

// Runs `body` and maps exceptions onto status codes.
template <typename F>
sl_status guarded(F&& body)
{
  g_error.clear();
  try
  {
    return body();
  }
  catch (const ConfigError& e)
  {
    return fail(SL_ERR_CONFIG, e.what());
  }
  catch (const std::invalid_argument& e)
  {
    return fail(SL_ERR_CONFIG, e.what());
  }
  catch (const std::exception& e)
  {
    return fail(SL_ERR_INTERNAL, e.what());
  }
  catch (...)
  {
    return fail(SL_ERR_INTERNAL, "unknown error");
  }
}

sl_outcome outcome(RunStatus s)
{
  switch (s)
  {
    case RunStatus::Ok:
      return SL_OUTCOME_OK;
    case RunStatus::Fall:
      return SL_OUTCOME_FALL;
    case RunStatus::SolverFailure:
      return SL_OUTCOME_SOLVER_FAILURE;
  }
  return SL_OUTCOME_SOLVER_FAILURE;
}

sl_status write_text(const char* path, const std::string& text)
{
  std::ofstream out(path);
  if (!out)
    return fail(SL_ERR_IO, std::string("cannot write ") + path);
  out << text;
  if (!out)
    return fail(SL_ERR_IO, std::string("write failed: ") + path);
  return SL_OK;
}

nlohmann::json metrics_json(const sl_result& r)
{
  namespace sim = straightleg::sim;
  const sim::RunMetrics& m = r.run.metrics;
  nlohmann::json j;
  j["status"] = sim::to_string(r.run.status);
  j["message"] = r.run.message;
  j["fall_tick"] = r.run.fall_tick;
  j["mode"] = r.mode;
  j["seed"] = r.seed;
  j["rows"] = r.run.log.size();
  j["average_speed"] = m.average_speed;
  j["mean_stance_knee"] = m.mean_stance_knee;
  j["max_stance_knee"] = m.max_stance_knee;
  j["min_straight_fraction"] = m.min_straight_fraction;
  j["icp_rms"] = m.icp_rms;
  j["fell"] = m.fell;
  j["toe_off_per_step"] = m.toe_off_per_step;
  j["com_range_transfer"] = m.com_range_transfer;
  j["com_range_swing"] = m.com_range_swing;
  j["mean_stance_knee_torque"] = m.mean_stance_knee_torque;
  j["touchdown_times"] = m.touchdown_times;
  nlohmann::json swings = nlohmann::json::array();
  for (const sim::SwingStats& s : m.swings)
    swings.push_back({{"t_start", s.t_start},
                      {"t_end", s.t_end},
                      {"stance", s.stance == straightleg::sim::Side::Left ? "L" : "R"},
                      {"straight_fraction", s.straight_fraction},
                      {"mean_knee", s.mean_knee},
                      {"com_range", s.com_range}});
  j["swings"] = swings;
  nlohmann::json transfers = nlohmann::json::array();
  for (const sim::TransferStats& t : m.transfers)
    transfers.push_back({{"t_start", t.t_start},
                         {"t_end", t.t_end},
                         {"step", t.step},
                         {"terminal", t.terminal},
                         {"toe_off", t.toe_off},
                         {"toe_off_time", t.toe_off_time},
                         {"mean_zdot_first", t.mean_zdot_first},
                         {"mean_zdot_second", t.mean_zdot_second},
                         {"reverses", t.reverses},
                         {"rise_time", t.rise_time},
                         {"toe_off_before_rise", t.toe_off_before_rise}});
  j["transfers"] = transfers;
  return j;
}

nlohmann::json summary_json(const straightleg::sim::ModeSummary& s)
{
  return {{"status", straightleg::sim::to_string(s.status)},
          {"mean_stance_knee_torque", s.mean_stance_knee_torque},
          {"mean_stance_knee", s.mean_stance_knee},
          {"min_stance_knee", s.min_stance_knee},
          {"average_speed", s.average_speed}};
}

}  // namespace

extern "C" {

const char* sl_version(void)
{
  return "1.0.0";
}

const char* sl_last_error(void)
{
  return g_error.c_str();
}

sl_status sl_scenario_load(const char* path, sl_scenario** out)
{
  if (!path || !out)
    return fail(SL_ERR_INVALID_ARGUMENT, "null argument");
  return guarded([&] {
    *out = new sl_scenario{straightleg::sim::load_config(path)};
    return SL_OK;
  });
}

sl_status sl_scenario_parse(const char* yaml_text, sl_scenario** out)
{
  if (!yaml_text || !out)
    return fail(SL_ERR_INVALID_ARGUMENT, "null argument");
  return guarded([&] {
    *out = new sl_scenario{straightleg::sim::parse_config(yaml_text)};
    return SL_OK;
  });
}

sl_status sl_scenario_set_mode(sl_scenario* scenario, sl_mode mode)
{
  if (!scenario)
    return fail(SL_ERR_INVALID_ARGUMENT, "null scenario");
  if (mode != SL_MODE_STRAIGHT && mode != SL_MODE_BENT)
    return fail(SL_ERR_INVALID_ARGUMENT, "unknown mode");
  scenario->config.controller.mode =
      mode == SL_MODE_BENT ? straightleg::sim::ControllerMode::BentKnee : straightleg::sim::ControllerMode::StraightLeg;
  return SL_OK;
}

sl_status sl_scenario_set_seed(sl_scenario* scenario, uint64_t seed)
{
  if (!scenario)
    return fail(SL_ERR_INVALID_ARGUMENT, "null scenario");
  scenario->config.seed = seed;
  return SL_OK;
}

void sl_scenario_destroy(sl_scenario* scenario)
{
  delete scenario;
}

sl_status sl_run(const sl_scenario* scenario, sl_result** out)
{
  if (!scenario || !out)
    return fail(SL_ERR_INVALID_ARGUMENT, "null argument");
  return guarded([&] {
    auto* r = new sl_result;
    r->seed = scenario->config.seed;
    r->mode = straightleg::sim::to_string(scenario->config.controller.mode);
    try
    {
      r->run = straightleg::sim::run_scenario(scenario->config);
    }
    catch (...)
    {
      delete r;
      throw;
    }
    *out = r;
    return SL_OK;
  });
}

sl_outcome sl_result_outcome(const sl_result* result)
{
  return result ? outcome(result->run.status) : SL_OUTCOME_SOLVER_FAILURE;
}

const char* sl_result_message(const sl_result* result)
{
  return result ? result->run.message.c_str() : "";
}

sl_status sl_result_metrics(const sl_result* result, sl_metrics* out)
{
  if (!result || !out)
    return fail(SL_ERR_INVALID_ARGUMENT, "null argument");
  const straightleg::sim::RunMetrics& m = result->run.metrics;
  out->average_speed = m.average_speed;
  out->mean_stance_knee = m.mean_stance_knee;
  out->max_stance_knee = m.max_stance_knee;
  out->min_straight_fraction = m.min_straight_fraction;
  out->icp_rms = m.icp_rms;
  out->com_range_transfer = m.com_range_transfer;
  out->com_range_swing = m.com_range_swing;
  out->mean_stance_knee_torque = m.mean_stance_knee_torque;
  out->fell = m.fell ? 1 : 0;
  out->swings = static_cast<int>(m.swings.size());
  out->transfers = static_cast<int>(m.transfers.size());
  out->toe_off_transfers = 0;
  for (bool t : m.toe_off_per_step)
    out->toe_off_transfers += t ? 1 : 0;
  out->rows = static_cast<long>(result->run.log.size());
  return SL_OK;
}

sl_status sl_result_write_csv(const sl_result* result, const char* path)
{
  if (!result || !path)
    return fail(SL_ERR_INVALID_ARGUMENT, "null argument");
  return guarded([&] {
    try
    {
      straightleg::sim::write_csv(result->run.log, path);
    }
    catch (const std::runtime_error& e)
    {
      return fail(SL_ERR_IO, e.what());
    }
    return SL_OK;
  });
}

sl_status sl_result_write_plots(const sl_result* result, const char* directory)
{
  if (!result || !directory)
    return fail(SL_ERR_INVALID_ARGUMENT, "null argument");
  return guarded([&] {
    try
    {
      straightleg::sim::write_plots(result->run.log, directory);
    }
    catch (const std::runtime_error& e)
    {
      return fail(SL_ERR_IO, e.what());
    }
    return SL_OK;
  });
}

sl_status sl_result_write_metrics_json(const sl_result* result, const char* path)
{
  if (!result || !path)
    return fail(SL_ERR_INVALID_ARGUMENT, "null argument");
  return guarded([&] { return write_text(path, metrics_json(*result).dump(2) + "\n"); });
}

sl_status sl_result_write_qp_dump(const sl_result* result, const char* path)
{
  if (!result || !path)
    return fail(SL_ERR_INVALID_ARGUMENT, "null argument");
  if (result->run.status != RunStatus::SolverFailure)
    return fail(SL_ERR_INVALID_ARGUMENT, "run did not end in a solver failure");
  return guarded([&] { return write_text(path, result->run.qp_dump + "\n"); });
}

void sl_result_destroy(sl_result* result)
{
  delete result;
}

sl_status sl_compare(const sl_scenario* scenario, sl_comparison** out)
{
  if (!scenario || !out)
    return fail(SL_ERR_INVALID_ARGUMENT, "null argument");
  return guarded([&] {
    auto* c = new sl_comparison;
    try
    {
      c->report = straightleg::sim::compare_modes(scenario->config);
      c->text = straightleg::sim::format_report(c->report);
    }
    catch (...)
    {
      delete c;
      throw;
    }
    *out = c;
    return SL_OK;
  });
}

const char* sl_comparison_report(const sl_comparison* comparison)
{
  return comparison ? comparison->text.c_str() : "";
}

sl_outcome sl_comparison_outcome(const sl_comparison* comparison, sl_mode mode)
{
  if (!comparison)
    return SL_OUTCOME_SOLVER_FAILURE;
  return outcome(mode == SL_MODE_BENT ? comparison->report.bent.status : comparison->report.straight.status);
}

int sl_comparison_straight_lower_torque(const sl_comparison* comparison)
{
  return comparison && comparison->report.straight_has_lower_torque() ? 1 : 0;
}

sl_status sl_comparison_write_json(const sl_comparison* comparison, const char* path)
{
  if (!comparison || !path)
    return fail(SL_ERR_INVALID_ARGUMENT, "null argument");
  return guarded([&] {
    nlohmann::json j;
    j["straight"] = summary_json(comparison->report.straight);
    j["bent"] = summary_json(comparison->report.bent);
    j["straight_lower_torque"] = comparison->report.straight_has_lower_torque();
    j["identical_footholds"] = comparison->report.identical_footholds;
    return write_text(path, j.dump(2) + "\n");
  });
}

void sl_comparison_destroy(sl_comparison* comparison)
{
  delete comparison;
}

}  // extern "C"
