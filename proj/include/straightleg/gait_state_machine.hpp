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

#ifndef STRAIGHTLEG_GAIT_STATE_MACHINE_HPP_
#define STRAIGHTLEG_GAIT_STATE_MACHINE_HPP_

#include <stdexcept>
#include <string>

#include "straightleg/lip_icp.hpp"

namespace straightleg::gait
{

using lip::Side;

enum class PhaseKind
{
  Transfer,
  Swing,
  Complete,  ///< plan finished, standing on both feet
};

const char* to_string(PhaseKind kind);

/**
 * Phases follow the ICP plan: Transfer 0, Swing 1, Transfer 1, ..., Swing n,
 * Transfer n, Complete. The support side is the stance foot during a swing
 * and the foot receiving the weight during a transfer.
 */
struct GaitPhase
{
  PhaseKind kind = PhaseKind::Transfer;
  Side support = Side::Left;
  double start = 0.0;
  double duration = 0.0;
  int step = 0;
  bool last = false;  ///< no further swing follows (final swing and final transfer)

  double elapsed(double t) const { return t - start; }
  /// Elapsed time over duration, clamped to [0, 1].
  double fraction(double t) const;
  /// Time spent in swing past the planned touchdown.
  double t_late(double t) const;
  Side swing_side() const { return lip::opposite(support); }
};

/// First phase of a plan, starting at t0; Complete when the plan has no steps.
GaitPhase initial_phase(const lip::FootstepPlan& plan, double t0 = 0.0);

/**
 * Transfer ends on its timer. Swing ends on a touchdown event only: an early
 * event ends it at once and a late one keeps it running past its duration.
 * Touchdown events outside swing are ignored.
 */
GaitPhase advance_phase(const lip::FootstepPlan& plan, const GaitPhase& phase, double t, bool touchdown_event);

/// Touchdown when the swing foot's normal force stays above the threshold for
/// `ticks` consecutive controller ticks.
class TouchdownDetector
{
public:
  explicit TouchdownDetector(double threshold = 20.0, int ticks = 2) : threshold_(threshold), ticks_(ticks) {}
  bool update(double normal_force);
  void reset() { count_ = 0; }

private:
  double threshold_;
  int ticks_;
  int count_ = 0;
};

enum class LegState
{
  Straighten,
  Straight,
  Collapsed,
  Bent,
  Extend,
};

const char* to_string(LegState state);

class InvalidTransition : public std::logic_error
{
public:
  using std::logic_error::logic_error;
};

struct LegConfigState
{
  LegState state = LegState::Straight;
  double entry_time = 0.0;
  double entry_angle = 0.05;  ///< privileged knee angle when the state was entered
};

struct LegParams
{
  double straight_angle = 0.05;
  double collapsed_angle = 0.4;
  double bent_angle = 1.0;
  double extend_angle = 0.15;
  double straighten_duration = 0.3;
  double collapse_blend = 0.2;
  double bent_blend = 0.15;
  double extend_blend = 0.2;
  double collapse_fraction = 0.5;  ///< of the opposite leg's swing
  double extend_fraction = 0.6;    ///< of the leg's own swing

  /// Throws std::invalid_argument.
  void validate() const;
};

/// True when `to` follows `from` in the cycle
/// Straighten -> Straight -> Collapsed -> Bent -> Extend -> Straighten.
bool is_valid_transition(LegState from, LegState to);

/// Moves to `to` at time t, carrying the current privileged angle over.
/// Throws InvalidTransition for edges outside the cycle.
LegConfigState transition(const LegConfigState& state, LegState to, double t, const LegParams& params = {});

/**
 * One controller tick of a leg's privileged-configuration machine. Takes at
 * most one edge per call; a leg that must catch up (early touchdown, or a
 * swing starting before the leg collapsed) walks the cycle on consecutive
 * ticks.
 */
LegConfigState leg_state_step(const LegConfigState& state, Side leg, const GaitPhase& phase, double t,
                              const LegParams& params = {});

/// Privileged knee angle of a state after t_in_state seconds in it.
double privileged_knee_angle(const LegConfigState& state, double t_in_state, const LegParams& params = {});

struct FootPose
{
  double x = 0.0;
  double z = 0.0;
  double pitch = 0.0;
};

struct SwingTrajectory
{
  FootPose start;
  FootPose target;
  double clearance = 0.05;  ///< apex height above the start-target chord at mid-swing
  double duration = 0.6;
  /// Share of the swing by which vertical motion leads horizontal motion when
  /// stepping up, and lags it when stepping down. Zero moves them together.
  double stagger = 0.0;

  /// Throws std::invalid_argument.
  void validate() const;
};

struct TouchdownSchedule
{
  double foot_weight = 5.0;     ///< w_f0
  double pelvis_weight = 1.0;   ///< w_p0
  double foot_ramp = 2.0;       ///< 1/s
  double pelvis_ramp = 1.5;     ///< 1/s
  double pelvis_floor = 0.05;   ///< fraction of w_p0
  double descent_velocity = 0.15;

  double foot_weight_at(double t_late) const;
  double pelvis_weight_at(double t_late) const;
};

struct SwingSample
{
  FootPose pose;
  FootPose velocity;
  FootPose acceleration;
  double foot_weight = 0.0;
  double pelvis_weight = 0.0;
};

/// Quintic sample up to the duration, then a constant descent with x and
/// pitch held.
SwingSample swing_reference(const SwingTrajectory& traj, double t, const TouchdownSchedule& schedule);

}  // namespace straightleg::gait

#endif  // STRAIGHTLEG_GAIT_STATE_MACHINE_HPP_
