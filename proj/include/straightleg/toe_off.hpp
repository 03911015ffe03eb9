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

#ifndef STRAIGHTLEG_TOE_OFF_HPP_
#define STRAIGHTLEG_TOE_OFF_HPP_

#include <vector>

#include "straightleg/gait_state_machine.hpp"
#include "straightleg/whole_body_controller.hpp"

namespace straightleg::toe_off
{

using wbc::VecN;

/// Planar support polygon: an interval along x.
struct SupportPolygon
{
  double x_min = 0.0;
  double x_max = 0.0;

  double width() const { return x_max - x_min; }
  bool contains(double x) const { return x >= x_min && x <= x_max; }
  /// Zero inside.
  double distance(double x) const;
};

/// Interval hull of the points. Throws std::invalid_argument when empty.
SupportPolygon hull(const std::vector<double>& xs);

/// Hull of the trailing toe and the leading foot's contact extent (current
/// contacts during transfer, the planned foothold during swing).
SupportPolygon predicted_toe_off_polygon(double trailing_toe, const std::vector<double>& leading_points);

struct ToeOffThresholds
{
  double icp_foothold = 0.35;  ///< max ICP-to-foothold distance (m)
  double cop_toe = 0.10;       ///< max trailing-CoP-to-toe distance (m)
  double cmp_polygon = 0.02;   ///< max desired-CMP-to-polygon distance (m)
  bool in_single_support = true;
  double late_swing_fraction = 0.8;  ///< swing fraction after which the predicate is evaluated

  /// Throws std::invalid_argument.
  void validate() const;
};

struct ToeOffInputs
{
  double icp = 0.0;           ///< estimated
  double icp_desired = 0.0;
  double trailing_cop = 0.0;  ///< measured on the trailing foot
  double trailing_toe = 0.0;
  double cmp_desired = 0.0;
  double foothold = 0.0;      ///< upcoming (leading) foothold
};

struct ToeOffDecision
{
  bool eligible_phase = false;
  bool icp_in_polygon = false;
  bool icp_near_foothold = false;
  bool cop_near_toe = false;
  bool cmp_near_polygon = false;

  bool value() const
  {
    return eligible_phase && icp_in_polygon && icp_near_foothold && cop_near_toe && cmp_near_polygon;
  }
};

/// Whether the predicate is evaluated in this phase: always in transfer,
/// and in late single support when enabled.
bool eligible_phase(const gait::GaitPhase& phase, double t, const ToeOffThresholds& th);

/// The four criteria, without hysteresis.
ToeOffDecision evaluate_toe_off(const ToeOffInputs& in, const SupportPolygon& polygon, const ToeOffThresholds& th,
                                const gait::GaitPhase& phase, double t);

bool should_toe_off(const ToeOffInputs& in, const SupportPolygon& polygon, const ToeOffThresholds& th,
                    const gait::GaitPhase& phase, double t);

/// Keeps a positive decision until the next swing starts.
class ToeOffLatch
{
public:
  /// Returns the latched state after this tick.
  bool update(const gait::GaitPhase& phase, bool decision);
  bool latched() const { return latched_; }

private:
  bool latched_ = false;
  int latched_phase_step_ = -1;
  gait::PhaseKind latched_phase_kind_ = gait::PhaseKind::Transfer;
};

struct ToeOffGains
{
  double kp = 200.0;
  double kd = 28.0;
  double weight = 100.0;
};

struct ToeOffSupport
{
  wbc::ContactSetup contacts;       ///< trailing heel removed
  std::vector<wbc::MotionTask> tasks;  ///< world hold of the toe point; foot pitch left free
};

/**
 * Replaces the trailing foot's contacts by its toe point and emits a PD hold
 * of that point at `toe_anchor`. Contacts of the other foot are kept.
 */
ToeOffSupport toe_off_contact_tasks(const model::RobotModel& model, const VecN& q, const VecN& v,
                                    const wbc::ContactSetup& current, model::Side trailing,
                                    const model::Vec2& toe_anchor, const ToeOffGains& gains = {});

}  // namespace straightleg::toe_off

#endif  // STRAIGHTLEG_TOE_OFF_HPP_
