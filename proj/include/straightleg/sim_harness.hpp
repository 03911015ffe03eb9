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

#ifndef STRAIGHTLEG_SIM_HARNESS_HPP_
#define STRAIGHTLEG_SIM_HARNESS_HPP_

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "straightleg/walking_controller.hpp"

namespace straightleg::sim
{

class ConfigError : public std::runtime_error
{
public:
  using std::runtime_error::runtime_error;
};

enum class TerrainKind
{
  Flat,
  Stairs,
  HeightError,
};

struct TerrainConfig
{
  TerrainKind kind = TerrainKind::Flat;
  double stair_height = 0.19685;
  int stair_count = 5;
  bool ascend = true;
  bool descend = true;
  int landing_steps = 2;        ///< footholds on the top landing between the flights
  int approach_steps = 2;       ///< flat footholds before the first stair
  double height_offset = -0.03;  ///< added to the ground under `offset_foothold`
  int offset_foothold = 4;
};

struct PlanConfig
{
  double step_length = 0.35;
  int step_count = 10;  ///< regular steps; a closing step brings the feet together
  double swing_duration = 0.6;
  double transfer_duration = 0.25;
  double initial_transfer_duration = 1.0;
  double final_transfer_duration = 1.0;
  double cmp_offset = 0.0;  ///< reference CMP ahead of the foot center on every stepped foothold
};

struct SimConfig
{
  double tick = 0.002;
  int substeps = 8;
  double settle_time = 2.0;   ///< standing time after the plan completes
  double max_overrun = 10.0;  ///< run is stalled this long past the plan horizon
  double initial_knee = 0.05;
  double fall_height_ratio = 0.55;
  double fall_pitch = 1.0;
  double gravity = 9.81;
};

struct ScenarioConfig
{
  model::RobotModel robot;
  model::ContactParams contact;
  TerrainConfig terrain;
  PlanConfig plan;
  ControllerConfig controller;
  SimConfig sim;
  std::uint64_t seed = 0;

  /// Throws ConfigError.
  void validate() const;
};

/// Reads a YAML scenario file; missing keys keep their defaults. Throws ConfigError.
ScenarioConfig load_config(const std::string& path);
ScenarioConfig parse_config(const std::string& yaml_text);

/// Footholds along +x; ground heights follow the terrain the planner knows.
lip::FootstepPlan build_plan(const ScenarioConfig& config);

/// Ground profile, including any height error the planner is not told about.
model::Terrain build_terrain(const ScenarioConfig& config, const lip::FootstepPlan& plan);

/// Both feet flat at x = 0, knees at the configured bend.
model::PlantState initial_state(const ScenarioConfig& config);

struct TelemetryRow
{
  double t = 0.0;
  VecN q = VecN::Zero();
  VecN v = VecN::Zero();
  VecA tau = VecA::Zero();
  double com_x = 0.0;
  double com_z = 0.0;
  double icp = 0.0;
  double icp_ref = 0.0;
  double cmp_des = 0.0;
  double cop = 0.0;
  double knee_l = 0.0;
  double knee_r = 0.0;
  gait::LegState leg_state_l = gait::LegState::Straight;
  gait::LegState leg_state_r = gait::LegState::Straight;
  gait::PhaseKind phase = gait::PhaseKind::Transfer;
  Side support = Side::Left;
  bool toe_off = false;
  int qp_iters = 0;
  double qp_residual = 0.0;
};

using TelemetryLog = std::vector<TelemetryRow>;

/// Context the metrics need besides the log.
struct MetricsContext
{
  double nominal_height = 0.0;
  model::Terrain terrain;
  double fall_height_ratio = 0.55;
  double fall_pitch = 1.0;
};

/// Per single-support phase.
struct SwingStats
{
  double t_start = 0.0;
  double t_end = 0.0;
  Side stance = Side::Left;
  double straight_fraction = 0.0;  ///< share of ticks with stance knee <= straight_limit
  double mean_knee = 0.0;
  double com_range = 0.0;
};

/// Per double-support phase that a swing follows.
struct TransferStats
{
  double t_start = 0.0;
  double t_end = 0.0;
  int step = 0;               ///< touchdown step that began it
  bool terminal = false;      ///< precedes the last swing of the plan, the closing step
  bool toe_off = false;
  double toe_off_time = 0.0;  ///< first tick with the toe-off flag
  double com_range = 0.0;
  double mean_zdot_first = 0.0;
  double mean_zdot_second = 0.0;
  bool reverses = false;      ///< sign change of mean CoM vertical rate between halves
  bool rises = false;
  double rise_time = 0.0;     ///< first tick of the final upward run
  bool toe_off_before_rise = false;
};

struct RunMetrics
{
  double average_speed = 0.0;
  double mean_stance_knee = 0.0;
  double max_stance_knee = 0.0;
  double min_straight_fraction = 0.0;
  double icp_rms = 0.0;
  bool fell = false;
  std::vector<bool> toe_off_per_step;
  double com_range_transfer = 0.0;
  double com_range_swing = 0.0;
  double mean_stance_knee_torque = 0.0;
  std::vector<SwingStats> swings;
  std::vector<TransferStats> transfers;
  std::vector<double> touchdown_times;
};

constexpr double kStraightKneeLimit = 0.3;

/// Pure function of the log and the context.
RunMetrics compute_metrics(const TelemetryLog& log, const MetricsContext& context);

enum class RunStatus
{
  Ok,
  Fall,
  SolverFailure,
};

const char* to_string(RunStatus status);

struct RunResult
{
  RunStatus status = RunStatus::Ok;
  long fall_tick = -1;
  std::string message;
  std::string qp_dump;  ///< JSON of the failing problem
  TelemetryLog log;
  RunMetrics metrics;
  MetricsContext context;
  lip::FootstepPlan plan;
};

/// Closed-loop run. Falls and solver failures are reported in the status.
RunResult run_scenario(const ScenarioConfig& config);

void write_csv(const TelemetryLog& log, const std::string& path);
/// Throws std::runtime_error on malformed input.
TelemetryLog read_csv(const std::string& path);
std::string csv_header();

/// Writes icp.svg and com_height.svg into `directory`.
void write_plots(const TelemetryLog& log, const std::string& directory);

struct ModeSummary
{
  RunStatus status = RunStatus::Ok;
  double mean_stance_knee_torque = 0.0;
  double mean_stance_knee = 0.0;
  double min_stance_knee = 0.0;
  double average_speed = 0.0;
};

struct CompareReport
{
  ModeSummary straight;
  ModeSummary bent;
  bool identical_footholds = false;
  bool straight_has_lower_torque() const { return straight.mean_stance_knee_torque < bent.mean_stance_knee_torque; }
};

CompareReport compare_modes(const ScenarioConfig& config);
std::string format_report(const CompareReport& report);

}  // namespace straightleg::sim

#endif  // STRAIGHTLEG_SIM_HARNESS_HPP_
