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

#include "straightleg/walking_controller.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace straightleg::sim
{

using model::FootPoint;
using model::Vec2;
using wbc::PdReference;
using wbc::Vector;

const char* to_string(ControllerMode mode)
{
  return mode == ControllerMode::StraightLeg ? "straight" : "bent";
}

void ControllerConfig::validate() const
{
  const bool ok = icp_gain > 0.0 && cmp_margin >= 0.0 && momentum_weight > 0.0 && stance_weight > 0.0 &&
                  privileged_weight >= 0.0 && privileged_kp > 0.0 && privileged_kd > 0.0 && friction > 0.0 &&
                  rho_min >= 0.0 && swing_clearance >= 0.0 && swing_stagger >= 0.0 && swing_stagger < 1.0 && touchdown_threshold > 0.0 && touchdown_ticks > 0 &&
                  touchdown_arm_fraction >= 0.0 && touchdown_arm_fraction < 1.0 && bent_knee > 0.0;
  if (!ok)
    throw std::invalid_argument("invalid controller configuration");
  legs.validate();
  bent_legs.validate();
  toe_off.validate();
}

namespace
{

lip::PendulumParams make_pendulum(const model::RobotModel& model, const ControllerConfig& config,
                                  const model::PlantState& initial, const lip::FootstepPlan& plan)
{
  const double ground = 0.5 * (plan.footholds[0].ground_height + plan.footholds[1].ground_height);
  if (config.mode == ControllerMode::BentKnee)
    return lip::PendulumParams(model::center_of_mass(model, model::standing_configuration(model, config.bent_knee))
                                   .y());
  return lip::PendulumParams(model::center_of_mass(model, initial.q).y() - ground);
}

lip::SegmentKind segment_kind(gait::PhaseKind kind)
{
  return kind == gait::PhaseKind::Swing ? lip::SegmentKind::Swing : lip::SegmentKind::Transfer;
}

}  // namespace

WalkingController::WalkingController(model::RobotModel model, lip::FootstepPlan plan, ControllerConfig config,
                                     const model::PlantState& initial)
    : model_(std::move(model)),
      plan_(std::move(plan)),
      config_(std::move(config)),
      pendulum_(make_pendulum(model_, config_, initial, plan_)),
      wbc_(model_),
      detector_(config_.touchdown_threshold, config_.touchdown_ticks)
{
  config_.validate();
  plan_.validate();

  const model::Kinematics k = model::forward_kinematics(model_, initial.q);
  double lo = std::numeric_limits<double>::infinity(), hi = -lo;
  for (const Vec2& p : k.contact_points)
  {
    lo = std::min(lo, p.x());
    hi = std::max(hi, p.x());
  }
  const Vec2 com_vel = model::com_jacobian(model_, initial.q, initial.v).jacobian * initial.v;
  const double icp0 = lip::icp_from_state(k.com.x(), com_vel.x(), pendulum_);
  icp_plan_ = lip::plan_icp(plan_, pendulum_, icp0, lo + config_.cmp_margin, hi - config_.cmp_margin);

  bent_height_ = model::center_of_mass(model_, model::standing_configuration(model_, config_.bent_knee)).y();

  phase_ = gait::initial_phase(plan_, initial.t);
  const gait::LegParams& lp = config_.mode == ControllerMode::StraightLeg ? config_.legs : config_.bent_legs;
  for (auto& leg : legs_)
    leg = {gait::LegState::Straight, initial.t, lp.straight_angle};
  for (Side s : {Side::Left, Side::Right})
    hold_[leg_index(s)] = foot_pose(initial.q, s);
}

gait::FootPose WalkingController::foot_pose(const VecN& q, Side side) const
{
  const model::Body foot = model::foot_body(side);
  const Vec2 ankle = model::point_position(model_, q, foot, Vec2::Zero());
  return {ankle.x(), ankle.y(), model::body_angle(q, foot)};
}

double WalkingController::planned_ankle_height(int foothold) const
{
  return plan_.footholds.at(static_cast<std::size_t>(foothold)).ground_height + model_.ankle_height;
}

void WalkingController::on_phase_change(const gait::GaitPhase& previous, const VecN& q)
{
  switch (phase_.kind)
  {
    case gait::PhaseKind::Swing:
    {
      const Side swing = phase_.swing_side();
      const lip::Foothold& target = plan_.footholds.at(static_cast<std::size_t>(phase_.step + 1));
      swing_.start = foot_pose(q, swing);
      swing_.target = {target.x, planned_ankle_height(phase_.step + 1), 0.0};
      swing_.clearance = config_.swing_clearance;
      swing_.stagger = config_.swing_stagger;
      swing_.duration = phase_.duration;
      detector_.reset();
      touchdown_armed_ = false;
      toe_anchor_.reset();
      break;
    }
    case gait::PhaseKind::Transfer:
      // the foot that just landed is held where it touched down
      hold_[leg_index(phase_.support)] = foot_pose(q, phase_.support);
      if (previous.kind == gait::PhaseKind::Swing)
        hold_[leg_index(previous.support)] = foot_pose(q, previous.support);
      break;
    case gait::PhaseKind::Complete:
      for (Side s : {Side::Left, Side::Right})
        hold_[leg_index(s)] = foot_pose(q, s);
      toe_anchor_.reset();
      break;
  }
}

void WalkingController::add_foot_hold(wbc::ControlInput& in, Side side, const VecN& q, const VecN& v) const
{
  const gait::FootPose& h = hold_[leg_index(side)];
  const model::Body foot = model::foot_body(side);
  PdReference pos{Vec2(h.x, h.z), Vector::Zero(2), Vector::Zero(2), config_.stance_kp, config_.stance_kd};
  PdReference pitch{Vector::Constant(1, h.pitch), Vector::Zero(1), Vector::Zero(1), config_.stance_kp,
                    config_.stance_kd};
  in.tasks.push_back(wbc::point_task(model_, q, v, foot, Vec2::Zero(), pos,
                                     Vector::Constant(2, config_.stance_weight), "stance_foot"));
  in.tasks.push_back(wbc::pitch_task(q, v, foot, pitch, config_.stance_weight, "stance_foot_pitch"));
}

ControllerTick WalkingController::step(const model::PlantState& state, const model::ContactForces& contacts)
{
  const double t = state.t;
  const VecN& q = state.q;
  const VecN& v = state.v;
  ControllerTick out;

  // touchdown detection on the swing foot
  bool touchdown = false;
  if (phase_.kind == gait::PhaseKind::Swing)
  {
    const double fn = contacts.normal_on(phase_.swing_side());
    if (fn < config_.touchdown_threshold)
      touchdown_armed_ = true;
    const bool counted = detector_.update(fn);
    touchdown = counted && touchdown_armed_ && phase_.fraction(t) >= config_.touchdown_arm_fraction;
  }
  out.touchdown = touchdown;

  const gait::GaitPhase previous = phase_;
  phase_ = gait::advance_phase(plan_, phase_, t, touchdown);
  if (phase_.kind != previous.kind || phase_.step != previous.step)
    on_phase_change(previous, q);

  const gait::LegParams& lp = config_.mode == ControllerMode::StraightLeg ? config_.legs : config_.bent_legs;
  for (Side s : {Side::Left, Side::Right})
  {
    auto& leg = legs_[leg_index(s)];
    leg = gait::leg_state_step(leg, s, phase_, t, lp);
    out.privileged_knee[leg_index(s)] = gait::privileged_knee_angle(leg, t - leg.entry_time, lp);
  }

  // ICP feedback
  const model::Kinematics kin = model::forward_kinematics(model_, q);
  const model::PointJacobian cj = model::com_jacobian(model_, q, v);
  const Vec2 com_vel = cj.jacobian * v;
  const double icp = lip::icp_from_state(kin.com.x(), com_vel.x(), pendulum_);
  lip::IcpReference ref;
  if (phase_.kind == gait::PhaseKind::Complete)
  {
    ref.icp = icp_plan_.final_capture_point;
    ref.cmp = ref.icp;
  }
  else
  {
    const int seg = lip::find_segment(icp_plan_, segment_kind(phase_.kind), phase_.step);
    ref = lip::segment_reference(icp_plan_, seg, phase_.elapsed(t));
  }

  // contacts: stance feet, or both in transfer
  const bool swinging = phase_.kind == gait::PhaseKind::Swing;
  std::vector<Side> stance;
  if (swinging)
    stance = {phase_.support};
  else
    stance = {Side::Left, Side::Right};

  wbc::ControlInput in;
  in.q = q;
  in.v = v;
  in.weights = config_.weights;
  in.contacts.rho_min = config_.rho_min;
  for (Side s : stance)
    for (FootPoint p : {FootPoint::Heel, FootPoint::Toe})
      in.contacts.points.push_back(
          {s, p, kin.contact_points[static_cast<std::size_t>(model::contact_index(s, p))], config_.friction});

  // toe-off: trailing foot is the stance foot in late swing, the rear foot in transfer
  const Side trailing = swinging ? phase_.support : lip::opposite(phase_.support);
  const double trailing_toe =
      kin.contact_points[static_cast<std::size_t>(model::contact_index(trailing, FootPoint::Toe))].x();
  std::vector<double> leading;
  double foothold = 0.0;
  if (swinging)
  {
    const lip::Foothold& f = plan_.footholds.at(static_cast<std::size_t>(phase_.step + 1));
    leading = {f.x + model_.heel_x, f.x + model_.toe_x};
    foothold = f.x + plan_.foot_center_offset;
  }
  else
  {
    const Side lead = phase_.support;
    leading = {kin.contact_points[static_cast<std::size_t>(model::contact_index(lead, FootPoint::Heel))].x(),
               kin.contact_points[static_cast<std::size_t>(model::contact_index(lead, FootPoint::Toe))].x()};
    const int fh = phase_.kind == gait::PhaseKind::Complete ? plan_.num_steps() + 1 : phase_.step + 1;
    foothold = plan_.footholds.at(static_cast<std::size_t>(fh)).x + plan_.foot_center_offset;
  }
  const toe_off::SupportPolygon predicted = toe_off::predicted_toe_off_polygon(trailing_toe, leading);

  const double mass = model_.total_mass();
  double cmp_des = lip::icp_feedback(icp, ref.icp, ref.icp_rate, config_.icp_gain, pendulum_);

  toe_off::ToeOffInputs toe_in;
  toe_in.icp = icp;
  toe_in.icp_desired = ref.icp;
  toe_in.trailing_toe = trailing_toe;
  toe_in.cmp_desired = cmp_des;
  toe_in.foothold = foothold;
  bool cop_known = true;
  try
  {
    const auto hi = static_cast<std::size_t>(model::contact_index(trailing, FootPoint::Heel));
    const auto ti = static_cast<std::size_t>(model::contact_index(trailing, FootPoint::Toe));
    toe_in.trailing_cop =
        model::measured_cop({contacts.force[hi], contacts.force[ti]}, {contacts.position[hi], contacts.position[ti]});
  }
  catch (const model::NoContact&)
  {
    cop_known = false;
  }
  out.toe_off_decision = toe_off::evaluate_toe_off(toe_in, predicted, config_.toe_off, phase_, t);
  if (!cop_known)
    out.toe_off_decision.cop_near_toe = false;
  const bool allowed = config_.toe_off_enabled && config_.mode == ControllerMode::StraightLeg && !phase_.last;
  out.toe_off_latched = latch_.update(phase_, allowed && out.toe_off_decision.value());
  const bool reconfigure =
      out.toe_off_latched && allowed && (phase_.kind == gait::PhaseKind::Transfer || config_.toe_off_in_swing);

  std::vector<Side> held = stance;
  if (reconfigure)
  {
    if (!toe_anchor_)
      toe_anchor_ = kin.contact_points[static_cast<std::size_t>(model::contact_index(trailing, FootPoint::Toe))];
    const toe_off::ToeOffSupport sup =
        toe_off::toe_off_contact_tasks(model_, q, v, in.contacts, trailing, *toe_anchor_, config_.toe_gains);
    in.contacts = sup.contacts;
    in.tasks.insert(in.tasks.end(), sup.tasks.begin(), sup.tasks.end());
    held.erase(std::remove(held.begin(), held.end(), trailing), held.end());
  }
  out.toe_off = reconfigure;
  for (Side s : held)
    add_foot_hold(in, s, q, v);

  // keep the desired CMP inside the support the controller can use
  double lo = std::numeric_limits<double>::infinity(), hi = -lo;
  for (const wbc::ContactPointSpec& p : in.contacts.points)
  {
    lo = std::min(lo, p.position.x());
    hi = std::max(hi, p.position.x());
  }
  const double margin = std::min(config_.cmp_margin, 0.5 * (hi - lo));
  cmp_des = std::clamp(cmp_des, lo + margin, hi - margin);

  in.momentum.linear_x_rate = lip::desired_horizontal_momentum_rate(kin.com.x(), cmp_des, mass, pendulum_);
  in.momentum.weight = config_.momentum_weight;
  if (config_.mode == ControllerMode::BentKnee)
  {
    double ground = 0.0;
    for (Side s : stance)
      ground += hold_[leg_index(s)].z - model_.ankle_height;
    ground /= static_cast<double>(stance.size());
    in.momentum.mode = wbc::MomentumSelection::FullLinear;
    in.momentum.linear_z_rate =
        mass * (config_.height_kp * (ground + bent_height_ - kin.com.y()) - config_.height_kd * com_vel.y());
  }
  else
  {
    in.momentum.mode = wbc::MomentumSelection::HorizontalOnly;
  }

  double pelvis_weight = config_.schedule.pelvis_weight;
  if (swinging)
  {
    const Side sw = phase_.swing_side();
    const model::Body foot = model::foot_body(sw);
    const gait::SwingSample s = gait::swing_reference(swing_, phase_.elapsed(t), config_.schedule);
    PdReference pos{Vec2(s.pose.x, s.pose.z), Vec2(s.velocity.x, s.velocity.z),
                    Vec2(s.acceleration.x, s.acceleration.z), config_.swing_kp, config_.swing_kd};
    PdReference pitch{Vector::Constant(1, s.pose.pitch), Vector::Constant(1, s.velocity.pitch),
                      Vector::Constant(1, s.acceleration.pitch), config_.swing_kp, config_.swing_kd};
    in.tasks.push_back(wbc::point_task(model_, q, v, foot, Vec2::Zero(), pos, Vector::Constant(2, s.foot_weight),
                                       "swing_foot"));
    in.tasks.push_back(wbc::pitch_task(q, v, foot, pitch, s.foot_weight, "swing_foot_pitch"));
    pelvis_weight = s.pelvis_weight;
    out.t_late = phase_.t_late(t);
  }
  PdReference pelvis{Vector::Zero(1), Vector::Zero(1), Vector::Zero(1), config_.pelvis_kp, config_.pelvis_kd};
  in.tasks.push_back(wbc::pitch_task(q, v, model::Body::Torso, pelvis, pelvis_weight, "pelvis_pitch"));

  for (Side s : {Side::Left, Side::Right})
  {
    const int knee = model::knee_dof(s);
    in.privileged.q_p(knee) = out.privileged_knee[leg_index(s)];
    in.privileged.kp(knee) = config_.privileged_kp;
    in.privileged.kd(knee) = config_.privileged_kd;
    in.privileged.weight(knee) = config_.privileged_weight;
  }

  last_input_ = in;
  const wbc::ControllerOutput res = wbc_.compute(in);

  out.tau = res.tau;
  out.torque_clamped = res.torque_clamped;
  out.qp = res.diagnostics;
  out.vdot = res.vdot;
  out.contact_forces = res.contact_forces;
  out.phase = phase_;
  out.legs = legs_;
  out.com_x = kin.com.x();
  out.com_z = kin.com.y();
  out.icp = icp;
  out.icp_ref = ref.icp;
  out.cmp_desired = cmp_des;
  std::vector<Vec2> forces, points;
  for (int i = 0; i < model::kNumContactPoints; ++i)
  {
    forces.push_back(contacts.force[static_cast<std::size_t>(i)]);
    points.push_back(contacts.position[static_cast<std::size_t>(i)]);
  }
  try
  {
    out.cop = model::measured_cop(forces, points);
  }
  catch (const model::NoContact&)
  {
    out.cop = std::numeric_limits<double>::quiet_NaN();
  }
  return out;
}

}  // namespace straightleg::sim
