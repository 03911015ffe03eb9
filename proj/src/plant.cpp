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

// Simulation plant: penalty contact at the heel and toe points, stiff joint
// limits, semi-implicit Euler. Deliberately a different contact formulation
// from the controller's rigid-contact model.

#include "straightleg/biped_model.hpp"

#include <algorithm>
#include <cmath>

namespace straightleg::model
{

void Terrain::add_step(double x_from, double height)
{
  breaks_.emplace_back(x_from, height);
  std::stable_sort(breaks_.begin(), breaks_.end(),
                   [](const auto& a, const auto& b) { return a.first < b.first; });
}

double Terrain::height(double x) const
{
  double h = 0.0;
  for (const auto& [from, value] : breaks_)
  {
    if (x < from)
      break;
    h = value;
  }
  return h;
}

double ContactForces::normal_on(Side s) const
{
  const auto heel = static_cast<std::size_t>(contact_index(s, FootPoint::Heel));
  return force[heel].y() + force[heel + 1].y();
}

ContactForces contact_forces_plant(const RobotModel& model, const Terrain& terrain, const ContactParams& params,
                                   const PlantState& state)
{
  ContactForces out;
  out.force.fill(Vec2::Zero());
  out.position.fill(Vec2::Zero());
  for (Side side : {Side::Left, Side::Right})
  {
    for (FootPoint p : {FootPoint::Heel, FootPoint::Toe})
    {
      const auto i = static_cast<std::size_t>(contact_index(side, p));
      const PointJacobian pj =
          point_jacobian(model, state.q, state.v, foot_body(side), contact_point_local(model, p));
      const Vec2 pos = point_position(model, state.q, foot_body(side), contact_point_local(model, p));
      const Vec2 vel = pj.jacobian * state.v;
      out.position[i] = pos;

      const double depth = terrain.height(pos.x()) - pos.y();
      if (depth <= 0.0)
        continue;

      const double fz = std::max(0.0, params.stiffness * depth - params.damping * vel.y());
      const double anchor = state.anchors[i].value_or(pos.x());
      double fx = -params.stiffness * (pos.x() - anchor) - params.damping * vel.x();
      double new_anchor = anchor;
      const double limit = params.friction * fz;
      if (std::abs(fx) > limit)
      {
        fx = std::copysign(limit, fx);
        new_anchor = pos.x() + fx / params.stiffness;
      }
      out.force[i] = Vec2(fx, fz);
      out.anchors[i] = new_anchor;
    }
  }
  return out;
}

PlantState plant_step(const RobotModel& model, const Terrain& terrain, const ContactParams& params,
                      const PlantState& state, const VecA& torques, double dt, double gravity)
{
  const ContactForces contact = contact_forces_plant(model, terrain, params, state);

  VecN generalized = VecN::Zero();
  for (int a = 0; a < kNumActuated; ++a)
  {
    const int dof = 3 + a;
    const double limit = model.torque_limit_of(dof);
    generalized(dof) = std::clamp(torques(a), -limit, limit);

    const double q = state.q(dof), v = state.v(dof);
    const double lo = model.lower_limit(dof), hi = model.upper_limit(dof);
    if (q < lo)
      generalized(dof) += params.joint_limit_stiffness * (lo - q) - params.joint_limit_damping * std::min(v, 0.0);
    else if (q > hi)
      generalized(dof) += params.joint_limit_stiffness * (hi - q) - params.joint_limit_damping * std::max(v, 0.0);
  }

  for (Side side : {Side::Left, Side::Right})
  {
    for (FootPoint p : {FootPoint::Heel, FootPoint::Toe})
    {
      const auto i = static_cast<std::size_t>(contact_index(side, p));
      if (contact.force[i].isZero())
        continue;
      const PointJacobian pj =
          point_jacobian(model, state.q, state.v, foot_body(side), contact_point_local(model, p));
      generalized.noalias() += pj.jacobian.transpose() * contact.force[i];
    }
  }

  const MatN m = mass_matrix(model, state.q);
  const VecN c = bias_forces(model, state.q, state.v, gravity);
  const VecN accel = m.ldlt().solve(generalized - c);

  PlantState next = state;
  next.v = state.v + dt * accel;
  next.q = state.q + dt * next.v;
  next.t = state.t + dt;
  next.anchors = contact.anchors;

  // hard stop at the joint limits on top of the penalty: clamp the angle and
  // remove the offending joint rate with an impulse through the mass matrix
  Eigen::LDLT<MatN> m_next;
  bool factored = false;
  for (int dof = 3; dof < kNumDofs; ++dof)
  {
    const double lo = model.lower_limit(dof), hi = model.upper_limit(dof);
    double target = next.v(dof);
    if (next.q(dof) < lo)
    {
      next.q(dof) = lo;
      target = std::max(next.v(dof), 0.0);
    }
    else if (next.q(dof) > hi)
    {
      next.q(dof) = hi;
      target = std::min(next.v(dof), 0.0);
    }
    if (target == next.v(dof))
      continue;
    if (!factored)
    {
      m_next.compute(mass_matrix(model, next.q));
      factored = true;
    }
    const VecN col = m_next.solve(VecN::Unit(dof));
    next.v += col * ((target - next.v(dof)) / col(dof));
  }

  if (!next.v.allFinite() || next.v.cwiseAbs().maxCoeff() > 1e3)
    throw NumericalBlowup("plant velocity exceeded 1e3");
  return next;
}

double measured_cop(const std::vector<Vec2>& forces, const std::vector<Vec2>& points)
{
  if (forces.size() != points.size())
    throw std::invalid_argument("one force per contact point expected");
  double fz = 0.0, moment = 0.0;
  for (std::size_t i = 0; i < forces.size(); ++i)
  {
    fz += forces[i].y();
    moment += points[i].x() * forces[i].y();
  }
  if (fz <= 1.0)
    throw NoContact("total normal force below 1 N");
  return moment / fz;
}

}  // namespace straightleg::model
