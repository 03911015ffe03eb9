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

#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include "straightleg/sim_harness.hpp"

using namespace straightleg;
using namespace straightleg::sim;

namespace
{

std::string config_path(const std::string& name)
{
  return std::string(STRAIGHTLEG_CONFIG_DIR) + "/" + name;
}

std::filesystem::path scratch_dir(const std::string& name)
{
  const std::filesystem::path p = std::filesystem::temp_directory_path() / ("straightleg_" + name);
  std::filesystem::create_directories(p);
  return p;
}

std::string slurp(const std::filesystem::path& p)
{
  std::ifstream in(p);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

// Short flat walk; two steps keep the run under a second.
ScenarioConfig short_walk()
{
  return parse_config(R"(
plan:
  step_count: 2
gait:
  legs:
    collapsed_angle: 0.25
sim:
  settle_time: 0.5
)");
}

}  // namespace

TEST(Config, EmptyDocumentKeepsDefaults)
{
  const ScenarioConfig c = parse_config("");
  EXPECT_EQ(c.plan.step_count, 10);
  EXPECT_EQ(c.plan.step_length, 0.35);
  EXPECT_EQ(c.terrain.kind, TerrainKind::Flat);
  EXPECT_EQ(c.controller.mode, ControllerMode::StraightLeg);
}

TEST(Config, NestedKeys)
{
  const ScenarioConfig c = parse_config(R"(
seed: 42
robot:
  knee:
    torque_limit: 150
terrain:
  kind: stairs
  stair_count: 3
controller:
  mode: bent
  toe_off_enabled: false
toe_off:
  icp_foothold: 0.3
)");
  EXPECT_EQ(c.seed, 42u);
  EXPECT_EQ(c.robot.torque_limit[1], 150.0);
  EXPECT_EQ(c.terrain.kind, TerrainKind::Stairs);
  EXPECT_EQ(c.terrain.stair_count, 3);
  EXPECT_EQ(c.controller.mode, ControllerMode::BentKnee);
  EXPECT_FALSE(c.controller.toe_off_enabled);
  EXPECT_EQ(c.controller.toe_off.icp_foothold, 0.3);
}

TEST(Config, Errors)
{
  EXPECT_THROW(parse_config("plan:\n  bogus: 1\n"), ConfigError);
  EXPECT_THROW(parse_config("controller:\n  mode: crouched\n"), ConfigError);
  EXPECT_THROW(parse_config("terrain:\n  kind: ice\n"), ConfigError);
  EXPECT_THROW(parse_config("plan:\n  step_count: many\n"), ConfigError);
  EXPECT_THROW(parse_config("plan:\n  step_count: -1\n"), ConfigError);
  EXPECT_THROW(parse_config("plan:\n  swing_duration: 0\n"), ConfigError);
  EXPECT_THROW(parse_config("plan: [1, 2]\n"), ConfigError);
  EXPECT_THROW(parse_config("- a\n- b\n"), ConfigError);
  EXPECT_THROW(parse_config("plan: {step_count: 1"), ConfigError);
  EXPECT_THROW(parse_config("terrain:\n  offset_foothold: 1\n"), ConfigError);
  EXPECT_THROW(load_config("/nonexistent/scenario.yaml"), ConfigError);
}

TEST(Config, ShippedScenariosLoad)
{
  for (const char* name : {"flat_nominal.yaml", "flat_hardware_timing.yaml", "stairs.yaml", "stairs_up.yaml",
                           "stairs_down.yaml", "height_error_down.yaml", "height_error_up.yaml", "standing.yaml"})
  {
    SCOPED_TRACE(name);
    EXPECT_NO_THROW(load_config(config_path(name)));
  }
}

TEST(BuildPlan, FlatWalk)
{
  ScenarioConfig c;
  c.plan.step_count = 6;
  const lip::FootstepPlan plan = build_plan(c);
  ASSERT_EQ(plan.footholds.size(), 9u);
  EXPECT_EQ(plan.num_steps(), 7);
  EXPECT_EQ(plan.footholds[0].x, plan.footholds[1].x);
  for (std::size_t k = 1; k < plan.footholds.size(); ++k)
    EXPECT_NE(plan.footholds[k].side, plan.footholds[k - 1].side);
  for (std::size_t k = 2; k < 8; ++k)
    EXPECT_NEAR(plan.footholds[k].x - plan.footholds[k - 1].x, 0.35, 1e-12);
  EXPECT_EQ(plan.footholds[8].x, plan.footholds[7].x);
  for (const lip::Foothold& f : plan.footholds)
    EXPECT_EQ(f.ground_height, 0.0);
}

TEST(BuildPlan, ZeroSteps)
{
  ScenarioConfig c;
  c.plan.step_count = 0;
  const lip::FootstepPlan plan = build_plan(c);
  EXPECT_EQ(plan.footholds.size(), 2u);
  EXPECT_EQ(plan.num_steps(), 0);
}

TEST(BuildPlan, StairLevels)
{
  ScenarioConfig c;
  c.terrain.kind = TerrainKind::Stairs;
  const double h = c.terrain.stair_height;
  // approach 2, five up, landing 2, five down, one more at the bottom, closing step
  const std::vector<double> expected = {0, 0, 0, 0, h, 2 * h, 3 * h, 4 * h, 5 * h, 5 * h, 5 * h,
                                        4 * h, 3 * h, 2 * h, h, 0, 0, 0};
  const lip::FootstepPlan plan = build_plan(c);
  ASSERT_EQ(plan.footholds.size(), expected.size());
  for (std::size_t k = 0; k < expected.size(); ++k)
    EXPECT_NEAR(plan.footholds[k].ground_height, expected[k], 1e-12) << k;

  const model::Terrain terrain = build_terrain(c, plan);
  for (std::size_t k = 0; k < expected.size(); ++k)
  {
    const double xc = plan.footholds[k].x + c.robot.foot_center();
    EXPECT_NEAR(terrain.height(xc), expected[k], 1e-12) << k;
  }
}

TEST(BuildPlan, AscendOnlyAndDescendOnly)
{
  ScenarioConfig c;
  c.terrain.kind = TerrainKind::Stairs;
  const double top = c.terrain.stair_count * c.terrain.stair_height;
  c.terrain.descend = false;
  lip::FootstepPlan plan = build_plan(c);
  EXPECT_NEAR(plan.footholds.back().ground_height, top, 1e-12);
  c.terrain.descend = true;
  c.terrain.ascend = false;
  plan = build_plan(c);
  double lowest = 0.0;
  for (const lip::Foothold& f : plan.footholds)
    lowest = std::min(lowest, f.ground_height);
  EXPECT_NEAR(lowest, -top, 1e-12);
}

TEST(BuildTerrain, HeightErrorOnlyUnderOneFoothold)
{
  ScenarioConfig c;
  c.terrain.kind = TerrainKind::HeightError;
  c.terrain.height_offset = -0.03;
  c.terrain.offset_foothold = 4;
  const lip::FootstepPlan plan = build_plan(c);
  const model::Terrain terrain = build_terrain(c, plan);
  for (std::size_t k = 0; k < plan.footholds.size(); ++k)
  {
    EXPECT_EQ(plan.footholds[k].ground_height, 0.0);
    const double xc = plan.footholds[k].x + c.robot.foot_center();
    EXPECT_NEAR(terrain.height(xc), k == 4 ? -0.03 : 0.0, 1e-12) << k;
  }
}

TEST(InitialState, KneeFollowsMode)
{
  ScenarioConfig c;
  EXPECT_NEAR(initial_state(c).q(model::kLeftKnee), c.sim.initial_knee, 1e-12);
  c.controller.mode = ControllerMode::BentKnee;
  EXPECT_NEAR(initial_state(c).q(model::kRightKnee), c.controller.bent_knee, 1e-12);
}

TEST(Run, StandingPlanCompletesImmediately)
{
  const RunResult r = run_scenario(load_config(config_path("standing.yaml")));
  EXPECT_EQ(r.status, RunStatus::Ok);
  ASSERT_EQ(r.log.size(), 1001u);
  for (const TelemetryRow& row : r.log)
    EXPECT_EQ(row.phase, gait::PhaseKind::Complete);
  EXPECT_TRUE(r.metrics.swings.empty());
  EXPECT_TRUE(r.metrics.transfers.empty());
  EXPECT_FALSE(r.metrics.fell);
}

TEST(Run, Deterministic)
{
  const ScenarioConfig c = short_walk();
  const RunResult a = run_scenario(c);
  const RunResult b = run_scenario(c);
  ASSERT_EQ(a.status, RunStatus::Ok);
  ASSERT_EQ(a.log.size(), b.log.size());
  for (std::size_t i = 0; i < a.log.size(); ++i)
  {
    ASSERT_EQ(a.log[i].q, b.log[i].q) << i;
    ASSERT_EQ(a.log[i].tau, b.log[i].tau) << i;
  }
  EXPECT_EQ(a.metrics.average_speed, b.metrics.average_speed);
}

TEST(Run, TickSpacingAndResiduals)
{
  const RunResult r = run_scenario(short_walk());
  ASSERT_EQ(r.status, RunStatus::Ok);
  ASSERT_GT(r.log.size(), 2u);
  for (std::size_t i = 1; i < r.log.size(); ++i)
    ASSERT_NEAR(r.log[i].t - r.log[i - 1].t, 0.002, 1e-9);
  for (const TelemetryRow& row : r.log)
    ASSERT_LT(row.qp_residual, 1e-8);
  EXPECT_EQ(r.log.back().phase, gait::PhaseKind::Complete);
  EXPECT_EQ(r.metrics.swings.size(), 3u);
}

TEST(Telemetry, CsvRoundTripReproducesMetrics)
{
  const RunResult r = run_scenario(short_walk());
  const std::filesystem::path csv = scratch_dir("roundtrip") / "telemetry.csv";
  write_csv(r.log, csv.string());
  const TelemetryLog back = read_csv(csv.string());
  ASSERT_EQ(back.size(), r.log.size());
  for (std::size_t i = 0; i < back.size(); ++i)
  {
    ASSERT_EQ(back[i].t, r.log[i].t);
    ASSERT_EQ(back[i].q, r.log[i].q);
    ASSERT_EQ(back[i].v, r.log[i].v);
    ASSERT_EQ(back[i].phase, r.log[i].phase);
    ASSERT_EQ(back[i].support, r.log[i].support);
    ASSERT_EQ(back[i].toe_off, r.log[i].toe_off);
  }
  const RunMetrics m = compute_metrics(back, r.context);
  EXPECT_EQ(m.average_speed, r.metrics.average_speed);
  EXPECT_EQ(m.min_straight_fraction, r.metrics.min_straight_fraction);
  EXPECT_EQ(m.mean_stance_knee_torque, r.metrics.mean_stance_knee_torque);
  EXPECT_EQ(m.toe_off_per_step, r.metrics.toe_off_per_step);
}

TEST(Telemetry, EmptyLogWritesHeaderOnly)
{
  const std::filesystem::path csv = scratch_dir("empty") / "telemetry.csv";
  write_csv({}, csv.string());
  EXPECT_EQ(slurp(csv), csv_header() + "\n");
  EXPECT_TRUE(read_csv(csv.string()).empty());
}

TEST(Telemetry, PlotsAreSvg)
{
  const RunResult r = run_scenario(load_config(config_path("standing.yaml")));
  const std::filesystem::path dir = scratch_dir("plots");
  write_plots(r.log, dir.string());
  for (const char* name : {"icp.svg", "com_height.svg"})
    EXPECT_NE(slurp(dir / name).find("<svg"), std::string::npos) << name;
}

TEST(Compare, SameFootholdsAndBentKnees)
{
  const CompareReport rep = compare_modes(short_walk());
  EXPECT_TRUE(rep.identical_footholds);
  EXPECT_EQ(rep.straight.status, RunStatus::Ok);
  EXPECT_EQ(rep.bent.status, RunStatus::Ok);
  EXPECT_GT(rep.bent.min_stance_knee, 0.5);
  EXPECT_LT(rep.straight.mean_stance_knee, rep.bent.mean_stance_knee);
  const std::string text = format_report(rep);
  EXPECT_NE(text.find("straight"), std::string::npos);
  EXPECT_NE(text.find("bent"), std::string::npos);
}
