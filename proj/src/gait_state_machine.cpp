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

#include "straightleg/gait_state_machine.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace straightleg::gait
{

const char* to_string(PhaseKind kind)
{
  switch (kind)
  {
    case PhaseKind::Transfer:
      return "transfer";
    case PhaseKind::Swing:
      return "swing";
    case PhaseKind::Complete:
      return "complete";
  }
  return "?";
}

const char* to_string(LegState state)
{
  switch (state)
  {
    case LegState::Straighten:
      return "straighten";
    case LegState::Straight:
      return "straight";
    case LegState::Collapsed:
      return "collapsed";
    case LegState::Bent:
      return "bent";
    case LegState::Extend:
      return "extend";
  }
  return "?";
}

double GaitPhase::fraction(double t) const
{
  if (!(duration > 0.0) || std::isinf(duration))
    return 0.0;
  return std::clamp(elapsed(t) / duration, 0.0, 1.0);
}

double GaitPhase::t_late(double t) const
{
  if (kind != PhaseKind::Swing)
    return 0.0;
  return std::max(0.0, elapsed(t) - duration);
}

GaitPhase initial_phase(const lip::FootstepPlan& plan, double t0)
{
  plan.validate();
  GaitPhase p;
  p.kind = PhaseKind::Transfer;
  p.support = plan.footholds[1].side;
  p.start = t0;
  p.duration = plan.initial_transfer_duration;
  p.step = 0;
  p.last = plan.num_steps() == 0;
  if (p.last)
  {
    // nothing to walk: stand from the first tick
    p.kind = PhaseKind::Complete;
    p.duration = 0.0;
  }
  return p;
}

GaitPhase advance_phase(const lip::FootstepPlan& plan, const GaitPhase& phase, double t, bool touchdown_event)
{
  GaitPhase next = phase;
  switch (phase.kind)
  {
    case PhaseKind::Complete:
      return next;
    case PhaseKind::Transfer:
      if (phase.elapsed(t) < phase.duration)
        return next;
      next.start = t;
      if (phase.last)
      {
        next.kind = PhaseKind::Complete;
        next.duration = std::numeric_limits<double>::infinity();
        return next;
      }
      next.kind = PhaseKind::Swing;
      next.step = phase.step + 1;
      next.support = plan.footholds.at(static_cast<std::size_t>(next.step)).side;
      next.duration = plan.swing_duration;
      next.last = next.step == plan.num_steps();
      return next;
    case PhaseKind::Swing:
      if (!touchdown_event)
        return next;
      next.kind = PhaseKind::Transfer;
      next.start = t;
      next.support = phase.swing_side();
      next.last = phase.step == plan.num_steps();
      next.duration = next.last ? plan.final_transfer_duration : plan.transfer_duration;
      return next;
  }
  return next;
}

bool TouchdownDetector::update(double normal_force)
{
  count_ = normal_force > threshold_ ? count_ + 1 : 0;
  return count_ >= ticks_;
}

void LegParams::validate() const
{
  const bool ok = straight_angle >= 0.0 && collapsed_angle >= 0.0 && bent_angle >= 0.0 && extend_angle >= 0.0 &&
                  straighten_duration > 0.0 && collapse_blend > 0.0 && bent_blend > 0.0 && extend_blend > 0.0 &&
                  collapse_fraction >= 0.0 && collapse_fraction <= 1.0 && extend_fraction >= 0.0 &&
                  extend_fraction <= 1.0;
  if (!ok)
    throw std::invalid_argument("invalid leg state parameters");
}

bool is_valid_transition(LegState from, LegState to)
{
  switch (from)
  {
    case LegState::Straighten:
      return to == LegState::Straight;
    case LegState::Straight:
      return to == LegState::Collapsed;
    case LegState::Collapsed:
      return to == LegState::Bent;
    case LegState::Bent:
      return to == LegState::Extend;
    case LegState::Extend:
      return to == LegState::Straighten;
  }
  return false;
}

LegConfigState transition(const LegConfigState& state, LegState to, double t, const LegParams& params)
{
  if (!is_valid_transition(state.state, to))
    throw InvalidTransition(std::string("leg state ") + to_string(state.state) + " -> " + to_string(to));
  LegConfigState next;
  next.state = to;
  next.entry_time = t;
  next.entry_angle = privileged_knee_angle(state, t - state.entry_time, params);
  return next;
}

LegConfigState leg_state_step(const LegConfigState& state, Side leg, const GaitPhase& phase, double t,
                              const LegParams& params)
{
  const bool own_swing = phase.kind == PhaseKind::Swing && leg == phase.swing_side();
  const double frac = phase.fraction(t);
  bool advance = false;
  switch (state.state)
  {
    case LegState::Straighten:
      advance = own_swing || t - state.entry_time >= params.straighten_duration;
      break;
    case LegState::Straight:
      advance = own_swing ||
                (phase.kind == PhaseKind::Swing && !phase.last && leg == phase.support &&
                 frac >= params.collapse_fraction) ||
                (phase.kind == PhaseKind::Transfer && !phase.last && leg != phase.support && frac >= 0.5);
      break;
    case LegState::Collapsed:
      advance = own_swing;
      break;
    case LegState::Bent:
      advance = !own_swing || frac >= params.extend_fraction;
      break;
    case LegState::Extend:
      advance = !own_swing;
      break;
  }
  if (!advance)
    return state;
  static constexpr LegState kNext[] = {LegState::Straight, LegState::Collapsed, LegState::Bent, LegState::Extend,
                                       LegState::Straighten};
  return transition(state, kNext[static_cast<int>(state.state)], t, params);
}

namespace
{

double smoothstep(double s)
{
  s = std::clamp(s, 0.0, 1.0);
  return s * s * (3.0 - 2.0 * s);
}

double blend(double from, double to, double t, double duration)
{
  if (t >= duration)
    return to;
  return from + (to - from) * smoothstep(t / duration);
}

struct MinJerk
{
  double p = 0.0;
  double dp = 0.0;
  double ddp = 0.0;
};

// Quintic 0 -> 1 over the normalized window [a, b] of a motion lasting T.
MinJerk min_jerk(double s, double a, double b, double T)
{
  const double w = (b - a) * T;
  if (s <= a)
    return {};
  if (s >= b)
    return {1.0, 0.0, 0.0};
  const double r = (s - a) / (b - a);
  return {r * r * r * (10.0 + r * (-15.0 + 6.0 * r)), 30.0 * r * r * (1.0 - r) * (1.0 - r) / w,
          60.0 * r * (1.0 - r) * (1.0 - 2.0 * r) / (w * w)};
}

}  // namespace

double privileged_knee_angle(const LegConfigState& state, double t_in_state, const LegParams& params)
{
  switch (state.state)
  {
    case LegState::Straight:
      return params.straight_angle;
    case LegState::Straighten:
      return blend(state.entry_angle, params.straight_angle, t_in_state, params.straighten_duration);
    case LegState::Collapsed:
      return blend(state.entry_angle, params.collapsed_angle, t_in_state, params.collapse_blend);
    case LegState::Bent:
      return blend(state.entry_angle, params.bent_angle, t_in_state, params.bent_blend);
    case LegState::Extend:
      return blend(state.entry_angle, params.extend_angle, t_in_state, params.extend_blend);
  }
  return params.straight_angle;
}

void SwingTrajectory::validate() const
{
  const bool finite = std::isfinite(start.x) && std::isfinite(start.z) && std::isfinite(start.pitch) &&
                      std::isfinite(target.x) && std::isfinite(target.z) && std::isfinite(target.pitch);
  if (!finite || !(duration > 0.0) || !(clearance >= 0.0) || !(stagger >= 0.0 && stagger < 1.0))
    throw std::invalid_argument("invalid swing trajectory");
}

double TouchdownSchedule::foot_weight_at(double t_late) const
{
  return foot_weight * (1.0 + foot_ramp * std::max(0.0, t_late));
}

double TouchdownSchedule::pelvis_weight_at(double t_late) const
{
  return std::max(pelvis_floor * pelvis_weight, pelvis_weight * (1.0 - pelvis_ramp * std::max(0.0, t_late)));
}

SwingSample swing_reference(const SwingTrajectory& traj, double t, const TouchdownSchedule& schedule)
{
  const double T = traj.duration;
  const double late = std::max(0.0, t - T);
  SwingSample out;
  out.foot_weight = schedule.foot_weight_at(late);
  out.pelvis_weight = schedule.pelvis_weight_at(late);

  if (t > T)
  {
    out.pose = traj.target;
    out.pose.z -= schedule.descent_velocity * late;
    out.velocity.z = -schedule.descent_velocity;
    return out;
  }

  // minimum-jerk profiles and the apex bump, all with zero end rates
  const double s = std::max(0.0, t) / T;
  const double dz = traj.target.z - traj.start.z;
  const double lead = traj.stagger;
  const MinJerk vertical = dz >= 0.0 ? min_jerk(s, 0.0, 1.0 - lead, T) : min_jerk(s, lead, 1.0, T);
  const MinJerk horizontal = dz >= 0.0 ? min_jerk(s, lead, 1.0, T) : min_jerk(s, 0.0, 1.0 - lead, T);
  const double u = 1.0 - s;
  const double c = 64.0 * traj.clearance;
  const double b = c * s * s * s * u * u * u;
  const double db = c * 3.0 * s * s * u * u * (u - s) / T;
  const double ddb = c * (6.0 * s * u * u * u - 18.0 * s * s * u * u + 6.0 * s * s * s * u) / (T * T);

  const double dx = traj.target.x - traj.start.x;
  const double dpitch = traj.target.pitch - traj.start.pitch;
  const MinJerk& h = horizontal;
  const MinJerk& v = vertical;
  out.pose = {traj.start.x + dx * h.p, traj.start.z + dz * v.p + b, traj.start.pitch + dpitch * h.p};
  out.velocity = {dx * h.dp, dz * v.dp + db, dpitch * h.dp};
  out.acceleration = {dx * h.ddp, dz * v.ddp + ddb, dpitch * h.ddp};
  return out;
}

}  // namespace straightleg::gait
