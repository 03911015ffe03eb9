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

#ifndef STRAIGHTLEG_WALKING_CONTROLLER_HPP_
#define STRAIGHTLEG_WALKING_CONTROLLER_HPP_

#include <array>
#include <optional>

#include "straightleg/biped_model.hpp"
#include "straightleg/gait_state_machine.hpp"
#include "straightleg/lip_icp.hpp"
#include "straightleg/toe_off.hpp"
#include "straightleg/whole_body_controller.hpp"

namespace straightleg::sim
{

using model::Side;
using model::VecA;
using model::VecN;

enum class ControllerMode
{
  StraightLeg,
  BentKnee,  ///< conventional baseline: CoM height regulated, knees kept bent
};

const char* to_string(ControllerMode mode);

struct ControllerConfig
{
  ControllerMode mode = ControllerMode::StraightLeg;

  double icp_gain = 3.0;          ///< 1/s, proportional ICP feedback
  double cmp_margin = 0.01;       ///< desired CMP kept this far inside the support
  double momentum_weight = 10.0;
  double stance_weight = 100.0;   ///< hold of feet in contact
  double stance_kp = 50.0;
  double stance_kd = 15.0;
  double swing_kp = 200.0;
  double swing_kd = 28.0;
  double pelvis_kp = 100.0;
  double pelvis_kd = 20.0;
  double privileged_weight = 0.5;
  double privileged_kp = 300.0;
  double privileged_kd = 35.0;
  double friction = 0.8;
  double rho_min = 0.0;
  double swing_clearance = 0.05;
  double swing_stagger = 0.0;  ///< see gait::SwingTrajectory::stagger
  double touchdown_threshold = 20.0;
  int touchdown_ticks = 2;
  double touchdown_arm_fraction = 0.3;  ///< swing fraction before touchdowns count

  /// Bent-knee baseline: CoM height PD toward the height of the bent stance.
  double bent_knee = 0.8;
  double height_kp = 60.0;
  double height_kd = 16.0;

  bool toe_off_enabled = true;
  /// Switch the stance foot to its toe already in late single support. When
  /// false, a late-swing decision is carried over and applied at touchdown.
  bool toe_off_in_swing = false;

  gait::LegParams legs;
  gait::LegParams bent_legs{0.8, 0.8, 1.3, 0.8, 0.3, 0.2, 0.15, 0.2, 0.5, 0.6};
  gait::TouchdownSchedule schedule;
  toe_off::ToeOffThresholds toe_off;
  toe_off::ToeOffGains toe_gains;
  wbc::Weights weights;

  /// Throws std::invalid_argument.
  void validate() const;
};

/// Everything the controller decided in one tick, for telemetry.
struct ControllerTick
{
  VecA tau = VecA::Zero();
  gait::GaitPhase phase;
  std::array<gait::LegConfigState, 2> legs;  ///< left, right
  std::array<double, 2> privileged_knee{};
  double com_x = 0.0;
  double com_z = 0.0;
  double icp = 0.0;
  double icp_ref = 0.0;
  double cmp_desired = 0.0;
  double cop = 0.0;           ///< measured, whole robot
  bool toe_off = false;       ///< trailing foot reconfigured to its toe
  toe_off::ToeOffDecision toe_off_decision;
  bool toe_off_latched = false;
  bool touchdown = false;
  double t_late = 0.0;
  wbc::QpDiagnostics qp;
  VecN vdot = VecN::Zero();  ///< commanded generalized acceleration
  std::vector<model::Vec2> contact_forces;  ///< QP forces, one per active contact point
  bool torque_clamped = false;
};

/**
 * Ties the footstep plan, ICP planner, gait machines, toe-off logic and the
 * whole-body controller together. One call per controller tick.
 */
class WalkingController
{
public:
  WalkingController(model::RobotModel model, lip::FootstepPlan plan, ControllerConfig config,
                    const model::PlantState& initial);

  /// `contacts` are the measured plant contact forces at `state`.
  /// Throws math::QpError and wbc::InconsistentSolution.
  ControllerTick step(const model::PlantState& state, const model::ContactForces& contacts);

  const lip::IcpPlan& icp_plan() const { return icp_plan_; }
  const lip::PendulumParams& pendulum() const { return pendulum_; }
  const lip::FootstepPlan& plan() const { return plan_; }
  const gait::GaitPhase& phase() const { return phase_; }
  double nominal_height() const { return pendulum_.nominal_height(); }
  /// Whole-body controller input of the latest tick, for failure dumps.
  const wbc::ControlInput& last_input() const { return last_input_; }

private:
  void on_phase_change(const gait::GaitPhase& previous, const VecN& q);
  gait::FootPose foot_pose(const VecN& q, Side side) const;
  void add_foot_hold(wbc::ControlInput& in, Side side, const VecN& q, const VecN& v) const;
  double planned_ankle_height(int foothold) const;

  model::RobotModel model_;
  lip::FootstepPlan plan_;
  ControllerConfig config_;
  lip::PendulumParams pendulum_;
  lip::IcpPlan icp_plan_;
  wbc::WholeBodyController wbc_;

  gait::GaitPhase phase_;
  std::array<gait::LegConfigState, 2> legs_;
  gait::TouchdownDetector detector_;
  bool touchdown_armed_ = false;
  gait::SwingTrajectory swing_;
  std::array<gait::FootPose, 2> hold_;
  toe_off::ToeOffLatch latch_;
  std::optional<model::Vec2> toe_anchor_;
  double bent_height_ = 0.0;
  wbc::ControlInput last_input_;
};

/// Leg index of a side in per-leg arrays.
inline std::size_t leg_index(Side s) { return s == Side::Left ? 0 : 1; }

}  // namespace straightleg::sim

#endif  // STRAIGHTLEG_WALKING_CONTROLLER_HPP_
