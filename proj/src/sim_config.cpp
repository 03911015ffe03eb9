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
#include <map>
#include <sstream>
#include <variant>

#include <yaml-cpp/yaml.h>

#include "straightleg/sim_harness.hpp"

namespace straightleg::sim
{

void ScenarioConfig::validate() const
{
  try
  {
    robot.validate();
    controller.validate();
  }
  catch (const std::invalid_argument& e)
  {
    throw ConfigError(e.what());
  }
  const auto require = [](bool ok, const char* what) {
    if (!ok)
      throw ConfigError(what);
  };
  require(contact.stiffness > 0.0 && contact.damping >= 0.0 && contact.friction > 0.0, "contact parameters");
  require(plan.step_length >= 0.0 && plan.step_length <= 0.9, "plan.step_length must be in [0, 0.9]");
  require(plan.step_count >= 0, "plan.step_count must be >= 0");
  require(plan.swing_duration > 0.0 && plan.transfer_duration > 0.0 && plan.initial_transfer_duration > 0.0 &&
              plan.final_transfer_duration > 0.0,
          "plan durations must be positive");
  require(terrain.stair_height >= 0.0 && terrain.stair_count >= 0 && terrain.landing_steps >= 0 &&
              terrain.approach_steps >= 0,
          "terrain stair parameters");
  require(terrain.offset_foothold >= 2, "terrain.offset_foothold must be a stepped foothold (>= 2)");
  require(sim.tick > 0.0 && sim.substeps > 0 && sim.settle_time >= 0.0 && sim.max_overrun > 0.0,
          "sim timing");
  require(sim.initial_knee >= robot.joint_lower[1] && sim.initial_knee <= robot.joint_upper[1],
          "sim.initial_knee outside the knee range");
  require(sim.fall_height_ratio > 0.0 && sim.fall_height_ratio < 1.0 && sim.fall_pitch > 0.0, "fall criterion");
}

namespace
{

using Slot = std::variant<double*, int*, bool*>;

std::map<std::string, Slot> slots(ScenarioConfig& c)
{
  std::map<std::string, Slot> s;
  const auto link = [&](const std::string& name, model::LinkParams& l) {
    s["robot." + name + ".mass"] = &l.mass;
    s["robot." + name + ".length"] = &l.length;
    s["robot." + name + ".com"] = &l.com;
    s["robot." + name + ".inertia"] = &l.inertia;
  };
  link("torso", c.robot.torso);
  link("thigh", c.robot.thigh);
  link("shank", c.robot.shank);
  link("foot", c.robot.foot);
  s["robot.ankle_height"] = &c.robot.ankle_height;
  s["robot.heel_x"] = &c.robot.heel_x;
  s["robot.toe_x"] = &c.robot.toe_x;
  s["robot.foot_com_x"] = &c.robot.foot_com_x;
  s["robot.foot_com_z"] = &c.robot.foot_com_z;
  const char* joints[] = {"hip", "knee", "ankle"};
  for (std::size_t j = 0; j < 3; ++j)
  {
    const std::string p = std::string("robot.") + joints[j];
    s[p + ".lower"] = &c.robot.joint_lower[j];
    s[p + ".upper"] = &c.robot.joint_upper[j];
    s[p + ".velocity_limit"] = &c.robot.velocity_limit[j];
    s[p + ".torque_limit"] = &c.robot.torque_limit[j];
  }

  s["contact.stiffness"] = &c.contact.stiffness;
  s["contact.damping"] = &c.contact.damping;
  s["contact.friction"] = &c.contact.friction;
  s["contact.joint_limit_stiffness"] = &c.contact.joint_limit_stiffness;
  s["contact.joint_limit_damping"] = &c.contact.joint_limit_damping;

  s["terrain.stair_height"] = &c.terrain.stair_height;
  s["terrain.stair_count"] = &c.terrain.stair_count;
  s["terrain.ascend"] = &c.terrain.ascend;
  s["terrain.descend"] = &c.terrain.descend;
  s["terrain.landing_steps"] = &c.terrain.landing_steps;
  s["terrain.approach_steps"] = &c.terrain.approach_steps;
  s["terrain.height_offset"] = &c.terrain.height_offset;
  s["terrain.offset_foothold"] = &c.terrain.offset_foothold;

  s["plan.step_length"] = &c.plan.step_length;
  s["plan.step_count"] = &c.plan.step_count;
  s["plan.swing_duration"] = &c.plan.swing_duration;
  s["plan.transfer_duration"] = &c.plan.transfer_duration;
  s["plan.initial_transfer_duration"] = &c.plan.initial_transfer_duration;
  s["plan.final_transfer_duration"] = &c.plan.final_transfer_duration;
  s["plan.cmp_offset"] = &c.plan.cmp_offset;

  ControllerConfig& k = c.controller;
  for (const auto& [name, ptr] : std::initializer_list<std::pair<const char*, double*>>{
           {"icp_gain", &k.icp_gain},
           {"cmp_margin", &k.cmp_margin},
           {"momentum_weight", &k.momentum_weight},
           {"stance_weight", &k.stance_weight},
           {"stance_kp", &k.stance_kp},
           {"stance_kd", &k.stance_kd},
           {"swing_kp", &k.swing_kp},
           {"swing_kd", &k.swing_kd},
           {"pelvis_kp", &k.pelvis_kp},
           {"pelvis_kd", &k.pelvis_kd},
           {"privileged_weight", &k.privileged_weight},
           {"privileged_kp", &k.privileged_kp},
           {"privileged_kd", &k.privileged_kd},
           {"friction", &k.friction},
           {"rho_min", &k.rho_min},
           {"swing_clearance", &k.swing_clearance},
           {"swing_stagger", &k.swing_stagger},
           {"touchdown_threshold", &k.touchdown_threshold},
           {"touchdown_arm_fraction", &k.touchdown_arm_fraction},
           {"bent_knee", &k.bent_knee},
           {"height_kp", &k.height_kp},
           {"height_kd", &k.height_kd},
       })
    s[std::string("controller.") + name] = ptr;
  s["controller.touchdown_ticks"] = &k.touchdown_ticks;
  s["controller.toe_off_enabled"] = &k.toe_off_enabled;
  s["controller.toe_off_in_swing"] = &k.toe_off_in_swing;

  const auto legs = [&](const std::string& p, gait::LegParams& l) {
    s[p + ".straight_angle"] = &l.straight_angle;
    s[p + ".collapsed_angle"] = &l.collapsed_angle;
    s[p + ".bent_angle"] = &l.bent_angle;
    s[p + ".extend_angle"] = &l.extend_angle;
    s[p + ".straighten_duration"] = &l.straighten_duration;
    s[p + ".collapse_blend"] = &l.collapse_blend;
    s[p + ".bent_blend"] = &l.bent_blend;
    s[p + ".extend_blend"] = &l.extend_blend;
    s[p + ".collapse_fraction"] = &l.collapse_fraction;
    s[p + ".extend_fraction"] = &l.extend_fraction;
  };
  legs("gait.legs", k.legs);
  legs("gait.bent_legs", k.bent_legs);
  s["gait.schedule.foot_weight"] = &k.schedule.foot_weight;
  s["gait.schedule.pelvis_weight"] = &k.schedule.pelvis_weight;
  s["gait.schedule.foot_ramp"] = &k.schedule.foot_ramp;
  s["gait.schedule.pelvis_ramp"] = &k.schedule.pelvis_ramp;
  s["gait.schedule.pelvis_floor"] = &k.schedule.pelvis_floor;
  s["gait.schedule.descent_velocity"] = &k.schedule.descent_velocity;

  s["toe_off.icp_foothold"] = &k.toe_off.icp_foothold;
  s["toe_off.cop_toe"] = &k.toe_off.cop_toe;
  s["toe_off.cmp_polygon"] = &k.toe_off.cmp_polygon;
  s["toe_off.in_single_support"] = &k.toe_off.in_single_support;
  s["toe_off.late_swing_fraction"] = &k.toe_off.late_swing_fraction;
  s["toe_off.kp"] = &k.toe_gains.kp;
  s["toe_off.kd"] = &k.toe_gains.kd;
  s["toe_off.weight"] = &k.toe_gains.weight;

  s["wbc.rho_weight"] = &k.weights.rho;
  s["wbc.vdot_weight"] = &k.weights.vdot;
  s["wbc.limit_horizon"] = &k.weights.limit_horizon;

  s["sim.tick"] = &c.sim.tick;
  s["sim.substeps"] = &c.sim.substeps;
  s["sim.settle_time"] = &c.sim.settle_time;
  s["sim.max_overrun"] = &c.sim.max_overrun;
  s["sim.initial_knee"] = &c.sim.initial_knee;
  s["sim.fall_height_ratio"] = &c.sim.fall_height_ratio;
  s["sim.fall_pitch"] = &c.sim.fall_pitch;
  s["sim.gravity"] = &c.sim.gravity;
  return s;
}

void flatten(const YAML::Node& node, const std::string& prefix, std::map<std::string, YAML::Node>& out)
{
  if (node.IsMap())
  {
    for (const auto& kv : node)
    {
      const std::string key = kv.first.as<std::string>();
      flatten(kv.second, prefix.empty() ? key : prefix + "." + key, out);
    }
    return;
  }
  if (!node.IsScalar())
    throw ConfigError("expected a scalar at '" + prefix + "'");
  out[prefix] = node;
}

}  // namespace

ScenarioConfig parse_config(const std::string& yaml_text)
{
  YAML::Node root;
  try
  {
    root = YAML::Load(yaml_text);
  }
  catch (const YAML::Exception& e)
  {
    throw ConfigError(std::string("YAML: ") + e.what());
  }
  ScenarioConfig c;
  if (root.IsNull())
  {
    c.validate();
    return c;
  }
  if (!root.IsMap())
    throw ConfigError("scenario file must be a mapping");

  std::map<std::string, YAML::Node> values;
  flatten(root, "", values);
  std::map<std::string, Slot> table = slots(c);

  for (const auto& [key, node] : values)
  {
    try
    {
      if (key == "seed")
      {
        c.seed = node.as<std::uint64_t>();
        continue;
      }
      if (key == "terrain.kind")
      {
        const std::string v = node.as<std::string>();
        if (v == "flat")
          c.terrain.kind = TerrainKind::Flat;
        else if (v == "stairs")
          c.terrain.kind = TerrainKind::Stairs;
        else if (v == "height_error")
          c.terrain.kind = TerrainKind::HeightError;
        else
          throw ConfigError("terrain.kind must be flat, stairs or height_error");
        continue;
      }
      if (key == "controller.mode")
      {
        const std::string v = node.as<std::string>();
        if (v == "straight")
          c.controller.mode = ControllerMode::StraightLeg;
        else if (v == "bent")
          c.controller.mode = ControllerMode::BentKnee;
        else
          throw ConfigError("controller.mode must be straight or bent");
        continue;
      }
      const auto it = table.find(key);
      if (it == table.end())
        throw ConfigError("unknown key '" + key + "'");
      std::visit([&](auto* p) { *p = node.as<std::remove_pointer_t<decltype(p)>>(); }, it->second);
    }
    catch (const YAML::Exception& e)
    {
      throw ConfigError("bad value for '" + key + "': " + e.what());
    }
  }
  c.validate();
  return c;
}

ScenarioConfig load_config(const std::string& path)
{
  std::ifstream in(path);
  if (!in)
    throw ConfigError("cannot read " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_config(ss.str());
}

}  // namespace straightleg::sim
