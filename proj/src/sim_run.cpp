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

#include <cmath>
#include <cstdio>
#include <future>
#include <sstream>

#include <json.hpp>

#include "straightleg/sim_harness.hpp"

namespace straightleg::sim
{

namespace
{

// Ground height of regular foothold i (0-based, after the two start footholds).
double stair_level(const TerrainConfig& tc, int i)
{
  const double h = tc.stair_height;
  int k = i - tc.approach_steps;
  if (k < 0)
    return 0.0;
  double level = 0.0;
  if (tc.ascend)
  {
    if (k < tc.stair_count)
      return (k + 1) * h;
    level = tc.stair_count * h;
    k -= tc.stair_count;
    if (tc.descend)
    {
      if (k < tc.landing_steps)
        return level;
      k -= tc.landing_steps;
    }
  }
  if (tc.descend)
  {
    if (k < tc.stair_count)
      return level - (k + 1) * h;
    return level - tc.stair_count * h;
  }
  return level;
}

int stair_step_count(const TerrainConfig& tc)
{
  int n = tc.approach_steps;
  if (tc.ascend)
    n += tc.stair_count;
  if (tc.ascend && tc.descend)
    n += tc.landing_steps;
  if (tc.descend)
    n += tc.stair_count;
  return n + 1;
}

nlohmann::json matrix_json(const Eigen::MatrixXd& m)
{
  nlohmann::json rows = nlohmann::json::array();
  for (int r = 0; r < m.rows(); ++r)
  {
    nlohmann::json row = nlohmann::json::array();
    for (int c = 0; c < m.cols(); ++c)
      row.push_back(m(r, c));
    rows.push_back(row);
  }
  return rows;
}

nlohmann::json vector_json(const Eigen::VectorXd& v)
{
  return std::vector<double>(v.data(), v.data() + v.size());
}

std::string qp_dump(const model::RobotModel& robot, const wbc::ControlInput& in)
{
  nlohmann::json j;
  j["q"] = vector_json(in.q);
  j["v"] = vector_json(in.v);
  try
  {
    const math::QpProblem p = wbc::assemble_qp(robot, in);
    j["hessian"] = matrix_json(p.hessian);
    j["gradient"] = vector_json(p.gradient);
    j["eq_matrix"] = matrix_json(p.eq_matrix);
    j["eq_vector"] = vector_json(p.eq_vector);
    nlohmann::json lb = nlohmann::json::array();
    for (const math::VariableBound& b : p.lower_bounds)
      lb.push_back({{"index", b.index}, {"value", b.value}});
    j["lower_bounds"] = lb;
    if (p.box)
      j["box"] = {{"first", p.box->first}, {"lower", vector_json(p.box->lower)}, {"upper", vector_json(p.box->upper)}};
  }
  catch (const std::exception& e)
  {
    j["assembly_error"] = e.what();
  }
  return j.dump(2);
}

}  // namespace

lip::FootstepPlan build_plan(const ScenarioConfig& config)
{
  const PlanConfig& pc = config.plan;
  const TerrainConfig& tc = config.terrain;
  const model::PlantState init = initial_state(config);
  const double x0 = model::point_position(config.robot, init.q, model::Body::LeftFoot, model::Vec2::Zero()).x();

  lip::FootstepPlan plan;
  plan.swing_duration = pc.swing_duration;
  plan.transfer_duration = pc.transfer_duration;
  plan.initial_transfer_duration = pc.initial_transfer_duration;
  plan.final_transfer_duration = pc.final_transfer_duration;
  plan.foot_center_offset = config.robot.foot_center();

  const bool stairs = tc.kind == TerrainKind::Stairs;
  const int regular = stairs ? stair_step_count(tc) : pc.step_count;
  plan.footholds.push_back({x0, 0.0, Side::Left, 0.0});
  if (regular == 0)
  {
    plan.footholds.push_back({x0, 0.0, Side::Right, 0.0});
    plan.validate();
    return plan;
  }
  plan.footholds.push_back({x0, 0.0, Side::Right, 0.0});
  for (int i = 0; i < regular; ++i)
  {
    const lip::Foothold& prev = plan.footholds.back();
    const double ground = stairs ? stair_level(tc, i) : 0.0;
    plan.footholds.push_back({prev.x + pc.step_length, ground, lip::opposite(prev.side), pc.cmp_offset});
  }
  // closing step next to the other foot
  const lip::Foothold& prev = plan.footholds.back();
  plan.footholds.push_back({prev.x, prev.ground_height, lip::opposite(prev.side), 0.0});
  plan.validate();
  return plan;
}

model::Terrain build_terrain(const ScenarioConfig& config, const lip::FootstepPlan& plan)
{
  const TerrainConfig& tc = config.terrain;
  const model::RobotModel& r = config.robot;
  std::vector<std::pair<double, double>> ground;  // x, actual ground height, in walking order
  for (std::size_t k = 1; k < plan.footholds.size(); ++k)
  {
    double g = plan.footholds[k].ground_height;
    if (tc.kind == TerrainKind::HeightError && static_cast<int>(k) == tc.offset_foothold)
      g += tc.height_offset;
    if (!ground.empty() && plan.footholds[k].x <= ground.back().first)
      continue;
    ground.emplace_back(plan.footholds[k].x, g);
  }

  model::Terrain terrain;
  constexpr double kEdgeGap = 0.05;
  for (std::size_t k = 1; k < ground.size(); ++k)
  {
    const auto [xa, ga] = ground[k - 1];
    const auto [xb, gb] = ground[k];
    if (gb > ga)
      terrain.add_step(xb + r.heel_x - kEdgeGap, gb);
    else if (gb < ga)
      terrain.add_step(xa + r.toe_x + kEdgeGap, gb);
  }
  return terrain;
}

model::PlantState initial_state(const ScenarioConfig& config)
{
  model::PlantState s;
  const double knee =
      config.controller.mode == ControllerMode::BentKnee ? config.controller.bent_knee : config.sim.initial_knee;
  s.q = model::standing_configuration(config.robot, knee);
  return s;
}

const char* to_string(RunStatus status)
{
  switch (status)
  {
    case RunStatus::Ok:
      return "ok";
    case RunStatus::Fall:
      return "fall";
    case RunStatus::SolverFailure:
      return "solver_failure";
  }
  return "?";
}

RunResult run_scenario(const ScenarioConfig& config)
{
  config.validate();
  RunResult result;
  result.plan = build_plan(config);
  const model::Terrain terrain = build_terrain(config, result.plan);
  model::PlantState state = initial_state(config);

  WalkingController controller(config.robot, result.plan, config.controller, state);
  result.context.nominal_height = controller.nominal_height();
  result.context.terrain = terrain;
  result.context.fall_height_ratio = config.sim.fall_height_ratio;
  result.context.fall_pitch = config.sim.fall_pitch;

  const SimConfig& sc = config.sim;
  const double dt = sc.tick / sc.substeps;
  const lip::IcpPlan& icp_plan = controller.icp_plan();
  const double horizon = icp_plan.segments.empty() ? 0.0 : icp_plan.segments.back().t_end;
  const double t_max = horizon + sc.max_overrun;
  const long max_ticks = std::lround(t_max / sc.tick);
  double complete_at = -1.0;

  model::ContactForces contacts = model::contact_forces_plant(config.robot, terrain, config.contact, state);
  for (long tick = 0;; ++tick)
  {
    ControllerTick out;
    try
    {
      out = controller.step(state, contacts);
    }
    catch (const std::exception& e)
    {
      result.status = RunStatus::SolverFailure;
      result.message = std::string("tick ") + std::to_string(tick) + ": " + e.what();
      result.qp_dump = qp_dump(config.robot, controller.last_input());
      break;
    }

    TelemetryRow row;
    row.t = state.t;
    row.q = state.q;
    row.v = state.v;
    row.tau = out.tau;
    row.com_x = out.com_x;
    row.com_z = out.com_z;
    row.icp = out.icp;
    row.icp_ref = out.icp_ref;
    row.cmp_des = out.cmp_desired;
    row.cop = out.cop;
    row.knee_l = state.q(model::kLeftKnee);
    row.knee_r = state.q(model::kRightKnee);
    row.leg_state_l = out.legs[0].state;
    row.leg_state_r = out.legs[1].state;
    row.phase = out.phase.kind;
    row.support = out.phase.support;
    row.toe_off = out.toe_off;
    row.qp_iters = out.qp.iterations;
    row.qp_residual = std::max({out.qp.kkt.stationarity, out.qp.kkt.primal, out.qp.kkt.complementarity,
                                out.qp.dynamics_residual});
    result.log.push_back(row);

    const double ground = terrain.height(out.com_x);
    if (out.com_z - ground < sc.fall_height_ratio * result.context.nominal_height ||
        std::abs(state.q(model::kBasePitch)) > sc.fall_pitch)
    {
      result.status = RunStatus::Fall;
      result.fall_tick = tick;
      result.message = "fall at tick " + std::to_string(tick);
      break;
    }
    if (out.phase.kind == gait::PhaseKind::Complete && complete_at < 0.0)
      complete_at = state.t;
    if (complete_at >= 0.0 && state.t - complete_at >= sc.settle_time - 1e-9)
      break;
    if (tick >= max_ticks)
    {
      result.status = RunStatus::Fall;
      result.fall_tick = tick;
      result.message = "stalled: plan not complete at t = " + std::to_string(state.t);
      break;
    }

    try
    {
      for (int s = 0; s < sc.substeps; ++s)
        state = model::plant_step(config.robot, terrain, config.contact, state, out.tau, dt, sc.gravity);
      state.t = (tick + 1) * sc.tick;
      contacts = model::contact_forces_plant(config.robot, terrain, config.contact, state);
    }
    catch (const model::NumericalBlowup& e)
    {
      result.status = RunStatus::Fall;
      result.fall_tick = tick;
      result.message = std::string("plant diverged: ") + e.what();
      break;
    }
  }

  result.metrics = compute_metrics(result.log, result.context);
  return result;
}

namespace
{

ModeSummary summarize(const RunResult& r)
{
  ModeSummary s;
  s.status = r.status;
  s.mean_stance_knee_torque = r.metrics.mean_stance_knee_torque;
  s.mean_stance_knee = r.metrics.mean_stance_knee;
  s.average_speed = r.metrics.average_speed;
  double lo = std::numeric_limits<double>::infinity();
  for (const TelemetryRow& row : r.log)
    if (row.phase == gait::PhaseKind::Swing)
      lo = std::min(lo, row.support == Side::Left ? row.knee_l : row.knee_r);
  s.min_stance_knee = std::isfinite(lo) ? lo : 0.0;
  return s;
}

}  // namespace

CompareReport compare_modes(const ScenarioConfig& config)
{
  ScenarioConfig straight = config;
  straight.controller.mode = ControllerMode::StraightLeg;
  ScenarioConfig bent = config;
  bent.controller.mode = ControllerMode::BentKnee;

  // independent runs, one thread each
  std::future<RunResult> pending = std::async(std::launch::async, [&bent] { return run_scenario(bent); });
  const RunResult a = run_scenario(straight);
  const RunResult b = pending.get();
  CompareReport report;
  report.straight = summarize(a);
  report.bent = summarize(b);
  report.identical_footholds = a.plan.footholds.size() == b.plan.footholds.size();
  for (std::size_t k = 0; report.identical_footholds && k < a.plan.footholds.size(); ++k)
    report.identical_footholds = a.plan.footholds[k].x == b.plan.footholds[k].x &&
                                 a.plan.footholds[k].ground_height == b.plan.footholds[k].ground_height &&
                                 a.plan.footholds[k].side == b.plan.footholds[k].side;
  return report;
}

std::string format_report(const CompareReport& report)
{
  std::ostringstream os;
  char line[256];
  std::snprintf(line, sizeof line, "%-10s %-14s %22s %18s %16s %12s\n", "mode", "status", "mean_stance_knee_tau",
                "mean_stance_knee", "min_stance_knee", "speed");
  os << line;
  for (const auto& [name, s] : {std::pair{"straight", report.straight}, std::pair{"bent", report.bent}})
  {
    std::snprintf(line, sizeof line, "%-10s %-14s %22.3f %18.4f %16.4f %12.4f\n", name, to_string(s.status),
                  s.mean_stance_knee_torque, s.mean_stance_knee, s.min_stance_knee, s.average_speed);
    os << line;
  }
  os << "straight_lower_torque " << (report.straight_has_lower_torque() ? "yes" : "no") << "\n";
  os << "identical_footholds " << (report.identical_footholds ? "yes" : "no") << "\n";
  return os.str();
}

}  // namespace straightleg::sim
