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

#include <cstdio>
#include <filesystem>
#include <optional>
#include <string>

#include <CLI11.hpp>

#include "straightleg/straightleg.h"

namespace
{

// Process exit codes.
constexpr int kExitOk = 0;
constexpr int kExitFall = 2;
constexpr int kExitSolver = 3;
constexpr int kExitConfig = 4;
constexpr int kExitOther = 1;

int exit_code(sl_outcome o)
{
  switch (o)
  {
    case SL_OUTCOME_OK:
      return kExitOk;
    case SL_OUTCOME_FALL:
      return kExitFall;
    case SL_OUTCOME_SOLVER_FAILURE:
      return kExitSolver;
  }
  return kExitOther;
}

int report_error(sl_status s, const char* what)
{
  std::fprintf(stderr, "straightleg: %s: %s\n", what, sl_last_error());
  return s == SL_ERR_CONFIG ? kExitConfig : kExitOther;
}

bool make_dir(const std::string& dir)
{
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec)
  {
    std::fprintf(stderr, "straightleg: cannot create %s: %s\n", dir.c_str(), ec.message().c_str());
    return false;
  }
  return true;
}

std::string join(const std::string& dir, const char* name)
{
  return (std::filesystem::path(dir) / name).string();
}

struct RunArgs
{
  std::string config;
  std::string out;
  bool csv = false;
  bool plots = false;
  std::string mode;
  std::optional<std::uint64_t> seed;
};

int cmd_run(const RunArgs& a)
{
  sl_scenario* scenario = nullptr;
  if (sl_status s = sl_scenario_load(a.config.c_str(), &scenario); s != SL_OK)
    return report_error(s, "config");
  if (!a.mode.empty())
    sl_scenario_set_mode(scenario, a.mode == "bent" ? SL_MODE_BENT : SL_MODE_STRAIGHT);
  if (a.seed)
    sl_scenario_set_seed(scenario, *a.seed);

  sl_result* result = nullptr;
  const sl_status s = sl_run(scenario, &result);
  sl_scenario_destroy(scenario);
  if (s != SL_OK)
    return report_error(s, "run");

  int code = exit_code(sl_result_outcome(result));
  if (!make_dir(a.out))
  {
    sl_result_destroy(result);
    return kExitOther;
  }
  sl_status w = sl_result_write_metrics_json(result, join(a.out, "metrics.json").c_str());
  if (w == SL_OK && a.csv)
    w = sl_result_write_csv(result, join(a.out, "telemetry.csv").c_str());
  if (w == SL_OK && a.plots)
    w = sl_result_write_plots(result, a.out.c_str());
  if (w == SL_OK && sl_result_outcome(result) == SL_OUTCOME_SOLVER_FAILURE)
    w = sl_result_write_qp_dump(result, join(a.out, "qp_dump.json").c_str());
  if (w != SL_OK)
  {
    report_error(w, "output");
    code = code == kExitOk ? kExitOther : code;
  }

  sl_metrics m{};
  sl_result_metrics(result, &m);
  const char* status = code == kExitOk ? "ok" : code == kExitFall ? "fall" : code == kExitSolver ? "solver_failure" : "error";
  std::printf("status %s  rows %ld  speed %.4f m/s  min_straight_fraction %.3f  toe_off %d/%d  icp_rms %.4f m\n", status,
              m.rows, m.average_speed, m.min_straight_fraction, m.toe_off_transfers, m.transfers, m.icp_rms);
  if (*sl_result_message(result))
    std::printf("%s\n", sl_result_message(result));
  sl_result_destroy(result);
  return code;
}

int cmd_compare(const std::string& config, const std::string& out)
{
  sl_scenario* scenario = nullptr;
  if (sl_status s = sl_scenario_load(config.c_str(), &scenario); s != SL_OK)
    return report_error(s, "config");
  sl_comparison* cmp = nullptr;
  const sl_status s = sl_compare(scenario, &cmp);
  sl_scenario_destroy(scenario);
  if (s != SL_OK)
    return report_error(s, "compare");

  int code = kExitOk;
  for (sl_mode mode : {SL_MODE_STRAIGHT, SL_MODE_BENT})
    code = std::max(code, exit_code(sl_comparison_outcome(cmp, mode)));
  if (!make_dir(out))
  {
    sl_comparison_destroy(cmp);
    return kExitOther;
  }
  if (sl_status w = sl_comparison_write_json(cmp, join(out, "compare.json").c_str()); w != SL_OK)
    report_error(w, "output");
  std::FILE* f = std::fopen(join(out, "compare.txt").c_str(), "w");
  if (f)
  {
    std::fputs(sl_comparison_report(cmp), f);
    std::fclose(f);
  }
  std::fputs(sl_comparison_report(cmp), stdout);
  sl_comparison_destroy(cmp);
  return code;
}

}  // namespace

int main(int argc, char** argv)
{
  CLI::App app{"Planar straight-leg walking simulator"};
  app.require_subcommand(1);
  app.set_version_flag("--version", sl_version());

  RunArgs run;
  CLI::App* run_cmd = app.add_subcommand("run", "Simulate one scenario");
  run_cmd->add_option("--config", run.config, "Scenario YAML file")->required();
  run_cmd->add_option("--out", run.out, "Output directory")->required();
  run_cmd->add_flag("--csv", run.csv, "Write telemetry.csv");
  run_cmd->add_flag("--plots", run.plots, "Write icp.svg and com_height.svg");
  run_cmd->add_option("--mode", run.mode, "Controller mode")->check(CLI::IsMember({"straight", "bent"}));
  run_cmd->add_option("--seed", run.seed, "Random seed recorded with the run");

  std::string cmp_config, cmp_out;
  CLI::App* cmp_cmd = app.add_subcommand("compare", "Run straight-leg and bent-knee modes on one scenario");
  cmp_cmd->add_option("--config", cmp_config, "Scenario YAML file")->required();
  cmp_cmd->add_option("--out", cmp_out, "Output directory")->required();

  try
  {
    app.parse(argc, argv);
  }
  catch (const CLI::ParseError& e)
  {
    const int code = app.exit(e);
    return code == 0 ? 0 : kExitConfig;
  }

  if (run_cmd->parsed())
    return cmd_run(run);
  return cmd_compare(cmp_config, cmp_out);
}
