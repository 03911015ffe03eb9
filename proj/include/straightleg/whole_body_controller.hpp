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

#ifndef STRAIGHTLEG_WHOLE_BODY_CONTROLLER_HPP_
#define STRAIGHTLEG_WHOLE_BODY_CONTROLLER_HPP_

#include <stdexcept>
#include <string>
#include <vector>

#include "straightleg/biped_model.hpp"
#include "straightleg/math_core.hpp"

namespace straightleg::wbc
{

using math::Matrix;
using math::Vector;
using model::VecA;
using model::VecN;

/// Which rows of the planar momentum rate (k, l_x, l_z) are costed.
enum class MomentumSelection
{
  FullLinear,      ///< l_x and l_z
  HorizontalOnly,  ///< l_x only; the vertical force is left to the null space
};

Matrix selection_matrix(MomentumSelection mode);

struct MotionTask
{
  std::string id;
  Matrix jacobian;  ///< rows x 9
  Vector bias;      ///< Jdot v
  Vector desired;   ///< desired task acceleration
  Vector weight;    ///< diagonal of Q
  bool enabled = true;

  void validate() const;
};

/// Desired linear momentum rate. There is no angular member: the angular
/// momentum rate is always left free.
/// PD reference for a task: acc = a_ff + kp (x_ref - x) + kd (v_ref - v).
struct PdReference
{
  Vector position;
  Vector velocity;
  Vector acceleration;
  double kp = 0.0;
  double kd = 0.0;
};

/// World position task on a body-fixed point (rows x, z).
MotionTask point_task(const model::RobotModel& model, const VecN& q, const VecN& v, model::Body body,
                      const model::Vec2& local, const PdReference& ref, const Vector& weight, std::string id);

/// Absolute pitch task on a body (one row).
MotionTask pitch_task(const VecN& q, const VecN& v, model::Body body, const PdReference& ref, double weight,
                      std::string id);

struct MomentumObjective
{
  double linear_x_rate = 0.0;
  double linear_z_rate = 0.0;  ///< used only with FullLinear
  MomentumSelection mode = MomentumSelection::HorizontalOnly;
  double weight = 10.0;
};

struct ContactPointSpec
{
  model::Side side = model::Side::Left;
  model::FootPoint point = model::FootPoint::Heel;
  model::Vec2 position = model::Vec2::Zero();
  double friction = 0.8;
};

/// Two friction-cone edges per point, (+-mu, 1) / sqrt(1 + mu^2).
struct ContactSetup
{
  std::vector<ContactPointSpec> points;
  double rho_min = 0.0;

  int num_rho() const { return 2 * static_cast<int>(points.size()); }
  model::Vec2 generator(int rho_index) const;
  /// Centroidal wrench map (rows k, f_x, f_z) about the CoM.
  Matrix wrench_map(const model::Vec2& com) const;
};

struct PrivilegedConfig
{
  VecN q_p = VecN::Zero();
  VecN kp = VecN::Zero();
  VecN kd = VecN::Zero();
  VecN weight = VecN::Zero();  ///< diagonal of Q_p; base entries stay zero

  void validate(const model::RobotModel& model) const;
};

/// kp (q_p - q) - kd v on the leg joints, zero on the base.
VecN privileged_acceleration(const PrivilegedConfig& cfg, const VecN& q, const VecN& v);

struct CostBlock
{
  Matrix hessian;
  Vector gradient;
};

/// || N (vdot - vdot_p) ||^2_Qp with N = I - J^+ J, written as 1/2 x'Hx + g'x.
CostBlock privileged_objective(const Matrix& task_jacobian, const VecN& privileged_accel, const VecN& weight,
                               double damping);

/**
 * Damping for the task-space projector. Rows of the task Jacobian are
 * normalized first; damping is zero while the smallest singular value stays
 * above `threshold` and grows to `max_damping` as it reaches zero.
 */
double projector_damping(const Matrix& normalized_jacobian, double threshold = 0.05, double max_damping = 0.05);

/// Scales every row of J to unit norm (zero rows are left alone).
Matrix normalize_rows(const Matrix& j);

struct Weights
{
  double rho = 1e-5;
  double vdot = 1e-4;
  double limit_horizon = 0.1;  ///< velocity-damper horizon for joint limits (s)
};

struct ControlInput
{
  VecN q = VecN::Zero();
  VecN v = VecN::Zero();
  std::vector<MotionTask> tasks;
  MomentumObjective momentum;
  ContactSetup contacts;
  PrivilegedConfig privileged;
  bool use_privileged = true;
  Weights weights;
  double gravity = 9.81;
};

/// Decision vector layout: vdot (9) followed by rho.
struct QpLayout
{
  int num_rho = 0;
  Matrix task_jacobian;  ///< stacked S A and enabled task Jacobians
  model::CentroidalMomentum momentum;
  model::Vec2 com = model::Vec2::Zero();
  Matrix wrench_map;
  Eigen::Vector3d gravity_wrench = Eigen::Vector3d::Zero();
  double projector_damping = 0.0;
};

math::QpProblem assemble_qp(const model::RobotModel& model, const ControlInput& in, QpLayout* layout = nullptr);

class InconsistentSolution : public std::runtime_error
{
public:
  using std::runtime_error::runtime_error;
};

struct TorqueResult
{
  VecA tau = VecA::Zero();
  bool clamped = false;
  double base_residual = 0.0;
};

/// Actuated rows of M vdot + c - Jc' f. Throws InconsistentSolution when the
/// floating-base rows do not balance (>= 1e-4).
TorqueResult torques_from_solution(const model::RobotModel& model, const VecN& q, const VecN& v, const VecN& vdot,
                                   const ContactSetup& contacts, const Vector& rho, double gravity = 9.81);

struct QpDiagnostics
{
  int iterations = 0;
  math::KktResiduals kkt;
  double dynamics_residual = 0.0;  ///< || A vdot + Adot v - W_g - B rho ||_inf
  double base_residual = 0.0;
  double projector_damping = 0.0;
};

struct ControllerOutput
{
  VecN vdot = VecN::Zero();
  Vector rho;
  std::vector<model::Vec2> contact_forces;  ///< one per ContactSetup point
  VecA tau = VecA::Zero();
  bool torque_clamped = false;
  Eigen::Vector3d achieved_momentum_rate = Eigen::Vector3d::Zero();
  std::vector<double> task_residuals;  ///< || J vdot + Jdot v - p || per task
  QpDiagnostics diagnostics;
};

/// Builds and solves the QP each tick and keeps the active set as a warm start.
class WholeBodyController
{
public:
  explicit WholeBodyController(model::RobotModel model) : model_(std::move(model)) {}

  /// Throws math::QpError or InconsistentSolution.
  ControllerOutput compute(const ControlInput& in);

  const model::RobotModel& model() const { return model_; }

private:
  model::RobotModel model_;
  std::vector<int> warm_start_;
  int last_num_rho_ = -1;
};

}  // namespace straightleg::wbc

#endif  // STRAIGHTLEG_WHOLE_BODY_CONTROLLER_HPP_
