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

#include "straightleg/toe_off.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace straightleg::toe_off
{

double SupportPolygon::distance(double x) const
{
  if (x < x_min)
    return x_min - x;
  if (x > x_max)
    return x - x_max;
  return 0.0;
}

SupportPolygon hull(const std::vector<double>& xs)
{
  if (xs.empty())
    throw std::invalid_argument("support polygon of no points");
  const auto [lo, hi] = std::minmax_element(xs.begin(), xs.end());
  return {*lo, *hi};
}

SupportPolygon predicted_toe_off_polygon(double trailing_toe, const std::vector<double>& leading_points)
{
  std::vector<double> xs = leading_points;
  xs.push_back(trailing_toe);
  return hull(xs);
}

void ToeOffThresholds::validate() const
{
  if (!(icp_foothold > 0.0) || !(cop_toe > 0.0) || !(cmp_polygon > 0.0))
    throw std::invalid_argument("toe-off thresholds must be positive");
  if (!(late_swing_fraction >= 0.0 && late_swing_fraction <= 1.0))
    throw std::invalid_argument("late swing fraction outside [0, 1]");
}

bool eligible_phase(const gait::GaitPhase& phase, double t, const ToeOffThresholds& th)
{
  switch (phase.kind)
  {
    case gait::PhaseKind::Transfer:
      return true;
    case gait::PhaseKind::Swing:
      return th.in_single_support && phase.fraction(t) >= th.late_swing_fraction;
    case gait::PhaseKind::Complete:
      return false;
  }
  return false;
}

ToeOffDecision evaluate_toe_off(const ToeOffInputs& in, const SupportPolygon& polygon, const ToeOffThresholds& th,
                                const gait::GaitPhase& phase, double t)
{
  ToeOffDecision d;
  d.eligible_phase = eligible_phase(phase, t, th);
  d.icp_in_polygon = polygon.contains(in.icp) && polygon.contains(in.icp_desired);
  d.icp_near_foothold =
      std::abs(in.icp - in.foothold) <= th.icp_foothold && std::abs(in.icp_desired - in.foothold) <= th.icp_foothold;
  d.cop_near_toe = std::abs(in.trailing_cop - in.trailing_toe) <= th.cop_toe;
  d.cmp_near_polygon = polygon.distance(in.cmp_desired) <= th.cmp_polygon;
  return d;
}

bool should_toe_off(const ToeOffInputs& in, const SupportPolygon& polygon, const ToeOffThresholds& th,
                    const gait::GaitPhase& phase, double t)
{
  return evaluate_toe_off(in, polygon, th, phase, t).value();
}

bool ToeOffLatch::update(const gait::GaitPhase& phase, bool decision)
{
  const bool same_phase = phase.kind == latched_phase_kind_ && phase.step == latched_phase_step_;
  if (latched_ && !same_phase)
  {
    // a transfer latch survives until the swing that follows it starts
    const bool into_next_swing = phase.kind == gait::PhaseKind::Swing;
    const bool swing_to_transfer =
        latched_phase_kind_ == gait::PhaseKind::Swing && phase.kind == gait::PhaseKind::Transfer;
    if (into_next_swing || phase.kind == gait::PhaseKind::Complete)
      latched_ = false;
    else if (swing_to_transfer)
    {
      latched_phase_kind_ = phase.kind;
      latched_phase_step_ = phase.step;
    }
  }
  if (!latched_ && decision && phase.kind != gait::PhaseKind::Complete)
  {
    latched_ = true;
    latched_phase_kind_ = phase.kind;
    latched_phase_step_ = phase.step;
  }
  return latched_;
}

ToeOffSupport toe_off_contact_tasks(const model::RobotModel& model, const VecN& q, const VecN& v,
                                    const wbc::ContactSetup& current, model::Side trailing,
                                    const model::Vec2& toe_anchor, const ToeOffGains& gains)
{
  ToeOffSupport out;
  out.contacts.rho_min = current.rho_min;
  double friction = 0.8;
  for (const wbc::ContactPointSpec& p : current.points)
  {
    if (p.side == trailing)
    {
      friction = p.friction;
      continue;
    }
    out.contacts.points.push_back(p);
  }
  const model::Vec2 toe_local = model::contact_point_local(model, model::FootPoint::Toe);
  out.contacts.points.push_back(
      {trailing, model::FootPoint::Toe, model::point_position(model, q, model::foot_body(trailing), toe_local), friction});

  wbc::PdReference ref{toe_anchor, wbc::Vector::Zero(2), wbc::Vector::Zero(2), gains.kp, gains.kd};
  out.tasks.push_back(wbc::point_task(model, q, v, model::foot_body(trailing),
                                      toe_local, ref,
                                      wbc::Vector::Constant(2, gains.weight), "toe_hold"));
  return out;
}

}  // namespace straightleg::toe_off
