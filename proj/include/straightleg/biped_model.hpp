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

#ifndef STRAIGHTLEG_BIPED_MODEL_HPP_
#define STRAIGHTLEG_BIPED_MODEL_HPP_

#include <array>
#include <optional>
#include <stdexcept>
#include <vector>

#include <Eigen/Dense>

#include "straightleg/lip_icp.hpp"

namespace straightleg::model
{

// Sagittal-plane floating-base biped.
//
// Generalized coordinates: base (hip joint) x, z, base pitch, then hip, knee and
// ankle of the left and right leg. Every angle is a rotation about the lateral
// axis (right-handed x forward, y left, z up), so positive pitch tilts the torso
// forward, a positive knee angle is flexion (0 = straight) and a positive foot
// pitch lifts the heel.

constexpr int kNumDofs = 9;
constexpr int kNumActuated = 6;
constexpr int kNumBodies = 7;
constexpr int kNumContactPoints = 4;

using Vec2 = Eigen::Vector2d;
using VecN = Eigen::Matrix<double, kNumDofs, 1>;
using MatN = Eigen::Matrix<double, kNumDofs, kNumDofs>;
using VecA = Eigen::Matrix<double, kNumActuated, 1>;
using Jac2 = Eigen::Matrix<double, 2, kNumDofs>;
using JacRow = Eigen::Matrix<double, 1, kNumDofs>;
using Jac3 = Eigen::Matrix<double, 3, kNumDofs>;

using lip::Side;

enum Dof : int
{
  kBaseX = 0,
  kBaseZ = 1,
  kBasePitch = 2,
  kLeftHip = 3,
  kLeftKnee = 4,
  kLeftAnkle = 5,
  kRightHip = 6,
  kRightKnee = 7,
  kRightAnkle = 8,
};

enum class Body : int
{
  Torso = 0,
  LeftThigh,
  LeftShank,
  LeftFoot,
  RightThigh,
  RightShank,
  RightFoot,
};

enum class FootPoint : int
{
  Heel = 0,
  Toe = 1,
};

inline int hip_dof(Side s) { return s == Side::Left ? kLeftHip : kRightHip; }
inline int knee_dof(Side s) { return s == Side::Left ? kLeftKnee : kRightKnee; }
inline int ankle_dof(Side s) { return s == Side::Left ? kLeftAnkle : kRightAnkle; }
inline Body foot_body(Side s) { return s == Side::Left ? Body::LeftFoot : Body::RightFoot; }
/// Contact point index: left heel, left toe, right heel, right toe.
inline int contact_index(Side s, FootPoint p) { return (s == Side::Left ? 0 : 2) + static_cast<int>(p); }

struct LinkParams
{
  double mass = 1.0;
  double length = 0.1;
  double com = 0.05;      ///< distance of the CoM from the proximal joint along the link
  double inertia = 0.01;  ///< about the CoM
};

struct RobotModel
{
  LinkParams torso{60.0, 0.5, 0.25, 1.25};
  LinkParams thigh{10.0, 0.45, 0.2, 0.17};
  LinkParams shank{7.5, 0.45, 0.2, 0.127};
  LinkParams foot{2.5, 0.22, 0.0, 0.012};

  double ankle_height = 0.05;  ///< ankle above the sole
  double heel_x = -0.08;       ///< heel contact point, from the ankle
  double toe_x = 0.14;         ///< toe contact point, from the ankle
  double foot_com_x = 0.03;
  double foot_com_z = -0.03;

  /// hip, knee, ankle (same for both legs)
  std::array<double, 3> joint_lower{-1.6, 0.0, -0.9};
  std::array<double, 3> joint_upper{0.6, 2.4, 0.9};
  std::array<double, 3> velocity_limit{12.0, 12.0, 12.0};
  std::array<double, 3> torque_limit{400.0, 400.0, 300.0};

  double total_mass() const { return torso.mass + 2.0 * (thigh.mass + shank.mass + foot.mass); }
  double leg_length() const { return thigh.length + shank.length; }
  double foot_center() const { return 0.5 * (heel_x + toe_x); }

  double lower_limit(int dof) const { return joint_lower[static_cast<std::size_t>((dof - 3) % 3)]; }
  double upper_limit(int dof) const { return joint_upper[static_cast<std::size_t>((dof - 3) % 3)]; }
  double torque_limit_of(int dof) const { return torque_limit[static_cast<std::size_t>((dof - 3) % 3)]; }

  /// Throws std::invalid_argument.
  void validate() const;
};

struct BodyPose
{
  Vec2 origin;     ///< joint location of the body (hip for the torso)
  double angle;    ///< absolute pitch
  Vec2 com;
};

struct Kinematics
{
  std::array<BodyPose, kNumBodies> bodies;
  Vec2 com;
  /// left heel, left toe, right heel, right toe
  std::array<Vec2, kNumContactPoints> contact_points;
  std::array<Vec2, 2> ankles;  ///< left, right
};

Kinematics forward_kinematics(const RobotModel& model, const VecN& q);

Vec2 point_position(const RobotModel& model, const VecN& q, Body body, const Vec2& local);
Vec2 contact_point_local(const RobotModel& model, FootPoint p);
Vec2 center_of_mass(const RobotModel& model, const VecN& q);
double body_angle(const VecN& q, Body body);

struct PointJacobian
{
  Jac2 jacobian;
  Vec2 bias;  ///< Jdot * v
};

/// Jacobian of a body-fixed point and its velocity-product term.
PointJacobian point_jacobian(const RobotModel& model, const VecN& q, const VecN& v, Body body,
                             const Vec2& local);

/// Pitch Jacobian of a body. Angles add along the chain, so Jdot * v is zero.
JacRow orientation_jacobian(Body body);

PointJacobian com_jacobian(const RobotModel& model, const VecN& q, const VecN& v);

MatN mass_matrix(const RobotModel& model, const VecN& q);

/// Coriolis/centrifugal plus gravity terms, M vdot + c = tau_generalized.
VecN bias_forces(const RobotModel& model, const VecN& q, const VecN& v, double gravity = 9.81);

struct CentroidalMomentum
{
  Jac3 matrix;               ///< rows: angular (about the CoM), linear x, linear z
  Eigen::Vector3d bias;      ///< Adot * v
};

CentroidalMomentum centroidal_momentum(const RobotModel& model, const VecN& q, const VecN& v);

/// Kinetic energy summed link by link.
double kinetic_energy(const RobotModel& model, const VecN& q, const VecN& v);
double potential_energy(const RobotModel& model, const VecN& q, double gravity = 9.81);

/// Piecewise-constant ground height.
class Terrain
{
public:
  Terrain() = default;

  /// Height becomes `height` for x >= x_from, until the next breakpoint.
  void add_step(double x_from, double height);
  double height(double x) const;

  static Terrain flat() { return Terrain{}; }

private:
  std::vector<std::pair<double, double>> breaks_;
};

struct ContactParams
{
  double stiffness = 1e5;
  double damping = 2e3;
  double friction = 0.8;
  double joint_limit_stiffness = 1e4;
  double joint_limit_damping = 200.0;
};

struct PlantState
{
  VecN q = VecN::Zero();
  VecN v = VecN::Zero();
  double t = 0.0;
  /// Tangential spring anchor of each contact point while it penetrates.
  std::array<std::optional<double>, kNumContactPoints> anchors{};
};

struct ContactForces
{
  std::array<Vec2, kNumContactPoints> force{};
  std::array<std::optional<double>, kNumContactPoints> anchors{};
  std::array<Vec2, kNumContactPoints> position{};

  double normal_on(Side s) const;
};

class NumericalBlowup : public std::runtime_error
{
public:
  using std::runtime_error::runtime_error;
};

class NoContact : public std::runtime_error
{
public:
  using std::runtime_error::runtime_error;
};

ContactForces contact_forces_plant(const RobotModel& model, const Terrain& terrain, const ContactParams& params,
                                   const PlantState& state);

/// Semi-implicit Euler step. Torques are clamped to the model limits.
PlantState plant_step(const RobotModel& model, const Terrain& terrain, const ContactParams& params,
                      const PlantState& state, const VecA& torques, double dt, double gravity = 9.81);

/// Pressure-weighted x of the given points. Throws NoContact when the total
/// normal force is at most 1 N.
double measured_cop(const std::vector<Vec2>& forces, const std::vector<Vec2>& points);

/// Joint configuration with both feet flat on level ground at the given knee
/// bend, hips above the ankles, base at x = 0.
VecN standing_configuration(const RobotModel& model, double knee, double ground = 0.0);

}  // namespace straightleg::model

#endif  // STRAIGHTLEG_BIPED_MODEL_HPP_
