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

#include "straightleg/whole_body_controller.hpp"

#include <algorithm>
#include <cmath>

namespace straightleg::wbc
{

using model::kNumDofs;

Matrix selection_matrix(MomentumSelection mode)
{
  if (mode == MomentumSelection::FullLinear)
  {
    Matrix s = Matrix::Zero(2, 3);
    s(0, 1) = 1.0;
    s(1, 2) = 1.0;
    return s;
  }
  Matrix s = Matrix::Zero(1, 3);
  s(0, 1) = 1.0;
  return s;
}

void MotionTask::validate() const
{
  const auto rows = jacobian.rows();
  if (jacobian.cols() != kNumDofs || bias.size() != rows || desired.size() != rows || weight.size() != rows)
    throw math::DimensionError("motion task '" + id + "' has inconsistent dimensions");
  if ((weight.array() < 0.0).any())
    throw math::DimensionError("motion task '" + id + "' has a negative weight");
}

namespace
{

Vector pd_acceleration(const PdReference& ref, const Vector& x, const Vector& xd)
{
  if (ref.position.size() != x.size() || ref.velocity.size() != x.size() || ref.acceleration.size() != x.size())
    throw math::DimensionError("PD reference has the wrong size");
  return ref.acceleration + ref.kp * (ref.position - x) + ref.kd * (ref.velocity - xd);
}

}  // namespace

MotionTask point_task(const model::RobotModel& model, const VecN& q, const VecN& v, model::Body body,
                      const model::Vec2& local, const PdReference& ref, const Vector& weight, std::string id)
{
  const model::PointJacobian pj = model::point_jacobian(model, q, v, body, local);
  const model::Vec2 x = model::point_position(model, q, body, local);
  MotionTask t;
  t.id = std::move(id);
  t.jacobian = pj.jacobian;
  t.bias = pj.bias;
  t.desired = pd_acceleration(ref, x, pj.jacobian * v);
  t.weight = weight;
  return t;
}

MotionTask pitch_task(const VecN& q, const VecN& v, model::Body body, const PdReference& ref, double weight,
                      std::string id)
{
  const model::JacRow j = model::orientation_jacobian(body);
  MotionTask t;
  t.id = std::move(id);
  t.jacobian = j;
  t.bias = Vector::Zero(1);
  t.desired = pd_acceleration(ref, Vector::Constant(1, model::body_angle(q, body)), j * v);
  t.weight = Vector::Constant(1, weight);
  return t;
}

model::Vec2 ContactSetup::generator(int rho_index) const
{
  const auto& p = points.at(static_cast<std::size_t>(rho_index / 2));
  const double mu = p.friction;
  const double sign = rho_index % 2 == 0 ? 1.0 : -1.0;
  return model::Vec2(sign * mu, 1.0) / std::sqrt(1.0 + mu * mu);
}

Matrix ContactSetup::wrench_map(const model::Vec2& com) const
{
  Matrix b = Matrix::Zero(3, num_rho());
  for (int i = 0; i < num_rho(); ++i)
  {
    const model::Vec2 g = generator(i);
    const model::Vec2 r = points[static_cast<std::size_t>(i / 2)].position - com;
    b(0, i) = r.y() * g.x() - r.x() * g.y();
    b(1, i) = g.x();
    b(2, i) = g.y();
  }
  return b;
}

void PrivilegedConfig::validate(const model::RobotModel& model) const
{
  for (int dof = 3; dof < kNumDofs; ++dof)
  {
    if (weight(dof) == 0.0)
      continue;
    if (!(kp(dof) > 0.0) || !(kd(dof) > 0.0))
      throw std::invalid_argument("privileged gains must be positive");
    if (q_p(dof) < model.lower_limit(dof) || q_p(dof) > model.upper_limit(dof))
      throw std::invalid_argument("privileged configuration outside the joint limits");
  }
}

VecN privileged_acceleration(const PrivilegedConfig& cfg, const VecN& q, const VecN& v)
{
  VecN out = cfg.kp.cwiseProduct(cfg.q_p - q) - cfg.kd.cwiseProduct(v);
  out.head<3>().setZero();
  return out;
}

Matrix normalize_rows(const Matrix& j)
{
  Matrix out = j;
  for (Eigen::Index r = 0; r < out.rows(); ++r)
  {
    const double n = out.row(r).norm();
    if (n > 0.0)
      out.row(r) /= n;
  }
  return out;
}

double projector_damping(const Matrix& normalized_jacobian, double threshold, double max_damping)
{
  if (normalized_jacobian.rows() == 0)
    return 0.0;
  Eigen::JacobiSVD<Matrix> svd(normalized_jacobian);
  const Vector& s = svd.singularValues();
  const Eigen::Index rank = std::min(normalized_jacobian.rows(), normalized_jacobian.cols());
  const double smallest = s(rank - 1);
  if (smallest >= threshold)
    return 0.0;
  const double ratio = smallest / threshold;
  return max_damping * std::sqrt(1.0 - ratio * ratio);
}

CostBlock privileged_objective(const Matrix& task_jacobian, const VecN& privileged_accel, const VecN& weight,
                               double damping)
{
  const Matrix n = task_jacobian.rows() > 0 ? math::nullspace_projector(task_jacobian, damping)
                                            : Matrix::Identity(kNumDofs, kNumDofs);
  const Matrix nqn = n.transpose() * weight.asDiagonal() * n;
  CostBlock out;
  out.hessian = nqn;
  out.gradient = -nqn * privileged_accel;
  return out;
}

math::QpProblem assemble_qp(const model::RobotModel& model, const ControlInput& in, QpLayout* layout)
{
  const int nr = in.contacts.num_rho();
  const int nz = kNumDofs + nr;

  QpLayout lay;
  lay.num_rho = nr;
  lay.momentum = model::centroidal_momentum(model, in.q, in.v);
  lay.com = model::center_of_mass(model, in.q);
  lay.wrench_map = in.contacts.wrench_map(lay.com);
  lay.gravity_wrench = Eigen::Vector3d(0.0, 0.0, -model.total_mass() * in.gravity);

  math::QpProblem qp;
  qp.hessian = Matrix::Zero(nz, nz);
  qp.gradient = Vector::Zero(nz);
  auto vv = qp.hessian.topLeftCorner(kNumDofs, kNumDofs);
  auto gv = qp.gradient.head(kNumDofs);

  // momentum objective on the selected linear rows
  const Matrix s = selection_matrix(in.momentum.mode);
  const Matrix sa = s * lay.momentum.matrix;
  Eigen::Vector3d hdot_d(0.0, in.momentum.linear_x_rate, in.momentum.linear_z_rate);
  const Vector sb = s * (hdot_d - lay.momentum.bias);
  vv += in.momentum.weight * sa.transpose() * sa;
  gv -= in.momentum.weight * sa.transpose() * sb;

  int stacked = static_cast<int>(sa.rows());
  for (const MotionTask& task : in.tasks)
  {
    task.validate();
    if (!task.enabled)
      continue;
    const Vector target = task.desired - task.bias;
    vv += task.jacobian.transpose() * task.weight.asDiagonal() * task.jacobian;
    gv -= task.jacobian.transpose() * task.weight.asDiagonal() * target;
    stacked += static_cast<int>(task.jacobian.rows());
  }

  lay.task_jacobian = Matrix::Zero(stacked, kNumDofs);
  lay.task_jacobian.topRows(sa.rows()) = sa;
  int row = static_cast<int>(sa.rows());
  for (const MotionTask& task : in.tasks)
  {
    if (!task.enabled)
      continue;
    lay.task_jacobian.middleRows(row, task.jacobian.rows()) = task.jacobian;
    row += static_cast<int>(task.jacobian.rows());
  }

  vv.diagonal().array() += in.weights.vdot;
  qp.hessian.bottomRightCorner(nr, nr).diagonal().array() += in.weights.rho;

  if (in.use_privileged)
  {
    const Matrix normalized = normalize_rows(lay.task_jacobian);
    lay.projector_damping = projector_damping(normalized);
    const VecN vdot_p = privileged_acceleration(in.privileged, in.q, in.v);
    const CostBlock block = privileged_objective(normalized, vdot_p, in.privileged.weight, lay.projector_damping);
    vv += block.hessian;
    gv += block.gradient;
  }

  // A vdot - B rho = W_g - Adot v
  qp.eq_matrix = Matrix::Zero(3, nz);
  qp.eq_matrix.leftCols(kNumDofs) = lay.momentum.matrix;
  if (nr > 0)
    qp.eq_matrix.rightCols(nr) = -lay.wrench_map;
  qp.eq_vector = lay.gravity_wrench - lay.momentum.bias;

  for (int i = 0; i < nr; ++i)
    qp.lower_bounds.push_back({kNumDofs + i, in.contacts.rho_min});

  // velocity-damper joint acceleration bounds
  math::BoxBounds box;
  box.first = 3;
  box.lower.resize(model::kNumActuated);
  box.upper.resize(model::kNumActuated);
  const double h = in.weights.limit_horizon;
  for (int a = 0; a < model::kNumActuated; ++a)
  {
    const int dof = 3 + a;
    const double q = in.q(dof), v = in.v(dof);
    box.lower(a) = 2.0 * (model.lower_limit(dof) - q - v * h) / (h * h);
    box.upper(a) = 2.0 * (model.upper_limit(dof) - q - v * h) / (h * h);
  }
  qp.box = box;

  if (layout)
    *layout = std::move(lay);
  return qp;
}

TorqueResult torques_from_solution(const model::RobotModel& model, const VecN& q, const VecN& v, const VecN& vdot,
                                   const ContactSetup& contacts, const Vector& rho, double gravity)
{
  VecN generalized = model::mass_matrix(model, q) * vdot + model::bias_forces(model, q, v, gravity);
  for (std::size_t k = 0; k < contacts.points.size(); ++k)
  {
    const auto& p = contacts.points[k];
    const int i = 2 * static_cast<int>(k);
    const model::Vec2 f = rho(i) * contacts.generator(i) + rho(i + 1) * contacts.generator(i + 1);
    const auto pj =
        model::point_jacobian(model, q, v, model::foot_body(p.side), model::contact_point_local(model, p.point));
    generalized -= pj.jacobian.transpose() * f;
  }

  TorqueResult out;
  out.base_residual = generalized.head<3>().cwiseAbs().maxCoeff();
  if (out.base_residual >= 1e-4)
    throw InconsistentSolution("floating-base rows do not balance: residual " + std::to_string(out.base_residual));
  for (int a = 0; a < model::kNumActuated; ++a)
  {
    const int dof = 3 + a;
    const double limit = model.torque_limit_of(dof);
    out.tau(a) = std::clamp(generalized(dof), -limit, limit);
    if (std::abs(generalized(dof)) > limit)
      out.clamped = true;
  }
  return out;
}

ControllerOutput WholeBodyController::compute(const ControlInput& in)
{
  QpLayout layout;
  const math::QpProblem qp = assemble_qp(model_, in, &layout);

  if (layout.num_rho != last_num_rho_)
    warm_start_.clear();
  const math::QpSolution sol = math::solve_qp(qp, warm_start_.empty() ? nullptr : &warm_start_);
  warm_start_ = sol.active_set;
  last_num_rho_ = layout.num_rho;

  ControllerOutput out;
  out.vdot = sol.z.head<kNumDofs>();
  out.rho = sol.z.tail(layout.num_rho);
  for (std::size_t k = 0; k < in.contacts.points.size(); ++k)
  {
    const int i = 2 * static_cast<int>(k);
    out.contact_forces.push_back(out.rho(i) * in.contacts.generator(i) +
                                 out.rho(i + 1) * in.contacts.generator(i + 1));
  }

  out.achieved_momentum_rate = layout.momentum.matrix * out.vdot + layout.momentum.bias;
  const Eigen::Vector3d applied = layout.gravity_wrench + layout.wrench_map * out.rho;
  out.diagnostics.dynamics_residual = (out.achieved_momentum_rate - applied).cwiseAbs().maxCoeff();
  out.diagnostics.iterations = sol.iterations;
  out.diagnostics.kkt = math::kkt_residuals(qp, sol);
  out.diagnostics.projector_damping = layout.projector_damping;

  for (const MotionTask& task : in.tasks)
    out.task_residuals.push_back(task.enabled ? (task.jacobian * out.vdot + task.bias - task.desired).norm() : 0.0);

  const TorqueResult tr = torques_from_solution(model_, in.q, in.v, out.vdot, in.contacts, out.rho, in.gravity);
  out.tau = tr.tau;
  out.torque_clamped = tr.clamped;
  out.diagnostics.base_residual = tr.base_residual;
  return out;
}

}  // namespace straightleg::wbc
