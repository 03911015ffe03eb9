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

#include "straightleg/biped_model.hpp"

#include <algorithm>
#include <cmath>

namespace straightleg::model
{

namespace
{

struct BodyInfo
{
  int parent;
  int dof;
  Vec2 origin;  // joint location in the parent frame
  Vec2 com;     // in the body frame
  double mass;
  double inertia;
};

using BodyTable = std::array<BodyInfo, kNumBodies>;

BodyTable body_table(const RobotModel& m)
{
  const Vec2 hip(0.0, 0.0);
  const Vec2 knee(0.0, -m.thigh.length);
  const Vec2 ankle(0.0, -m.shank.length);
  const Vec2 thigh_com(0.0, -m.thigh.com);
  const Vec2 shank_com(0.0, -m.shank.com);
  const Vec2 foot_com(m.foot_com_x, m.foot_com_z);
  return {{
      {-1, kBasePitch, Vec2::Zero(), Vec2(0.0, m.torso.com), m.torso.mass, m.torso.inertia},
      {0, kLeftHip, hip, thigh_com, m.thigh.mass, m.thigh.inertia},
      {1, kLeftKnee, knee, shank_com, m.shank.mass, m.shank.inertia},
      {2, kLeftAnkle, ankle, foot_com, m.foot.mass, m.foot.inertia},
      {0, kRightHip, hip, thigh_com, m.thigh.mass, m.thigh.inertia},
      {4, kRightKnee, knee, shank_com, m.shank.mass, m.shank.inertia},
      {5, kRightAnkle, ankle, foot_com, m.foot.mass, m.foot.inertia},
  }};
}

// Rotation about the lateral axis acting on (x, z).
Vec2 rotate(double angle, const Vec2& r)
{
  const double c = std::cos(angle), s = std::sin(angle);
  return {c * r.x() + s * r.y(), -s * r.x() + c * r.y()};
}

// d/d(angle) of rotate(angle, r), expressed through the rotated vector.
Vec2 perp(const Vec2& a) { return {a.y(), -a.x()}; }

// Angular momentum about the lateral axis of momentum p at lever arm r.
double cross(const Vec2& r, const Vec2& p) { return r.y() * p.x() - r.x() * p.y(); }

struct ChainState
{
  std::array<Vec2, kNumBodies> origin;
  std::array<double, kNumBodies> angle;
  std::array<double, kNumBodies> rate;
};

ChainState chain_state(const BodyTable& table, const VecN& q, const VecN& v)
{
  ChainState s;
  for (int b = 0; b < kNumBodies; ++b)
  {
    const BodyInfo& info = table[static_cast<std::size_t>(b)];
    if (info.parent < 0)
    {
      s.origin[0] = Vec2(q(kBaseX), q(kBaseZ));
      s.angle[0] = q(kBasePitch);
      s.rate[0] = v(kBasePitch);
      continue;
    }
    const auto p = static_cast<std::size_t>(info.parent);
    s.origin[static_cast<std::size_t>(b)] = s.origin[p] + rotate(s.angle[p], info.origin);
    s.angle[static_cast<std::size_t>(b)] = s.angle[p] + q(info.dof);
    s.rate[static_cast<std::size_t>(b)] = s.rate[p] + v(info.dof);
  }
  return s;
}

// Jacobian and Jdot*v of a point fixed to `body` at body-frame `local`.
PointJacobian point_jacobian_impl(const BodyTable& table, const ChainState& s, int body, const Vec2& local)
{
  PointJacobian out;
  out.jacobian.setZero();
  out.bias.setZero();
  const auto bi = static_cast<std::size_t>(body);
  const Vec2 p = s.origin[bi] + rotate(s.angle[bi], local);

  out.jacobian(0, kBaseX) = 1.0;
  out.jacobian(1, kBaseZ) = 1.0;

  // Walk from the body up to the root; each joint rotates everything below it.
  Vec2 seg_end = p;
  for (int k = body; k >= 0; k = table[static_cast<std::size_t>(k)].parent)
  {
    const auto ki = static_cast<std::size_t>(k);
    out.jacobian.col(table[ki].dof) = perp(p - s.origin[ki]);
    // segment of the chain carried by body k: from its origin to the next point down
    const Vec2 seg = seg_end - s.origin[ki];
    out.bias -= s.rate[ki] * s.rate[ki] * seg;
    seg_end = s.origin[ki];
  }
  return out;
}

JacRow angular_row(const BodyTable& table, int body)
{
  JacRow row = JacRow::Zero();
  for (int k = body; k >= 0; k = table[static_cast<std::size_t>(k)].parent)
    row(table[static_cast<std::size_t>(k)].dof) = 1.0;
  return row;
}

}  // namespace

void RobotModel::validate() const
{
  for (const LinkParams* l : {&torso, &thigh, &shank, &foot})
    if (!(l->mass > 0.0) || !(l->length > 0.0) || !(l->inertia > 0.0))
      throw std::invalid_argument("link masses, lengths and inertias must be positive");
  if (!(heel_x < toe_x))
    throw std::invalid_argument("heel must be behind the toe");
  if (!(ankle_height > 0.0))
    throw std::invalid_argument("ankle height must be positive");
  for (std::size_t i = 0; i < 3; ++i)
  {
    if (!(joint_lower[i] < joint_upper[i]))
      throw std::invalid_argument("joint lower limit must be below the upper limit");
    if (!(velocity_limit[i] > 0.0) || !(torque_limit[i] > 0.0))
      throw std::invalid_argument("velocity and torque limits must be positive");
  }
}

Vec2 contact_point_local(const RobotModel& model, FootPoint p)
{
  return {p == FootPoint::Heel ? model.heel_x : model.toe_x, -model.ankle_height};
}

double body_angle(const VecN& q, Body body)
{
  switch (body)
  {
    case Body::Torso:
      return q(kBasePitch);
    case Body::LeftThigh:
      return q(kBasePitch) + q(kLeftHip);
    case Body::LeftShank:
      return q(kBasePitch) + q(kLeftHip) + q(kLeftKnee);
    case Body::LeftFoot:
      return q(kBasePitch) + q(kLeftHip) + q(kLeftKnee) + q(kLeftAnkle);
    case Body::RightThigh:
      return q(kBasePitch) + q(kRightHip);
    case Body::RightShank:
      return q(kBasePitch) + q(kRightHip) + q(kRightKnee);
    case Body::RightFoot:
      return q(kBasePitch) + q(kRightHip) + q(kRightKnee) + q(kRightAnkle);
  }
  return 0.0;
}

Kinematics forward_kinematics(const RobotModel& model, const VecN& q)
{
  const BodyTable table = body_table(model);
  const ChainState s = chain_state(table, q, VecN::Zero());
  Kinematics k;
  double mass = 0.0;
  k.com.setZero();
  for (std::size_t b = 0; b < kNumBodies; ++b)
  {
    k.bodies[b].origin = s.origin[b];
    k.bodies[b].angle = s.angle[b];
    k.bodies[b].com = s.origin[b] + rotate(s.angle[b], table[b].com);
    k.com += table[b].mass * k.bodies[b].com;
    mass += table[b].mass;
  }
  k.com /= mass;
  for (Side side : {Side::Left, Side::Right})
  {
    const auto foot = static_cast<std::size_t>(foot_body(side));
    for (FootPoint p : {FootPoint::Heel, FootPoint::Toe})
      k.contact_points[static_cast<std::size_t>(contact_index(side, p))] =
          s.origin[foot] + rotate(s.angle[foot], contact_point_local(model, p));
    k.ankles[side == Side::Left ? 0 : 1] = s.origin[foot];
  }
  return k;
}

Vec2 point_position(const RobotModel& model, const VecN& q, Body body, const Vec2& local)
{
  const BodyTable table = body_table(model);
  const ChainState s = chain_state(table, q, VecN::Zero());
  const auto b = static_cast<std::size_t>(body);
  return s.origin[b] + rotate(s.angle[b], local);
}

Vec2 center_of_mass(const RobotModel& model, const VecN& q) { return forward_kinematics(model, q).com; }

PointJacobian point_jacobian(const RobotModel& model, const VecN& q, const VecN& v, Body body,
                             const Vec2& local)
{
  const BodyTable table = body_table(model);
  const ChainState s = chain_state(table, q, v);
  PointJacobian out = point_jacobian_impl(table, s, static_cast<int>(body), local);
  return out;
}

JacRow orientation_jacobian(Body body)
{
  static const BodyTable table = body_table(RobotModel{});
  return angular_row(table, static_cast<int>(body));
}

PointJacobian com_jacobian(const RobotModel& model, const VecN& q, const VecN& v)
{
  const BodyTable table = body_table(model);
  const ChainState s = chain_state(table, q, v);
  PointJacobian out;
  out.jacobian.setZero();
  out.bias.setZero();
  double mass = 0.0;
  for (int b = 0; b < kNumBodies; ++b)
  {
    const auto& info = table[static_cast<std::size_t>(b)];
    const PointJacobian pj = point_jacobian_impl(table, s, b, info.com);
    out.jacobian += info.mass * pj.jacobian;
    out.bias += info.mass * pj.bias;
    mass += info.mass;
  }
  out.jacobian /= mass;
  out.bias /= mass;
  return out;
}

MatN mass_matrix(const RobotModel& model, const VecN& q)
{
  const BodyTable table = body_table(model);
  const ChainState s = chain_state(table, q, VecN::Zero());
  MatN m = MatN::Zero();
  for (int b = 0; b < kNumBodies; ++b)
  {
    const auto& info = table[static_cast<std::size_t>(b)];
    const Jac2 j = point_jacobian_impl(table, s, b, info.com).jacobian;
    const JacRow w = angular_row(table, b);
    m.noalias() += info.mass * j.transpose() * j;
    m.noalias() += info.inertia * w.transpose() * w;
  }
  return m;
}

VecN bias_forces(const RobotModel& model, const VecN& q, const VecN& v, double gravity)
{
  const BodyTable table = body_table(model);
  const ChainState s = chain_state(table, q, v);
  VecN c = VecN::Zero();
  for (int b = 0; b < kNumBodies; ++b)
  {
    const auto& info = table[static_cast<std::size_t>(b)];
    const PointJacobian pj = point_jacobian_impl(table, s, b, info.com);
    c.noalias() += info.mass * pj.jacobian.transpose() * (pj.bias + Vec2(0.0, gravity));
  }
  return c;
}

CentroidalMomentum centroidal_momentum(const RobotModel& model, const VecN& q, const VecN& v)
{
  const BodyTable table = body_table(model);
  const ChainState s = chain_state(table, q, v);

  std::array<PointJacobian, kNumBodies> pj;
  std::array<Vec2, kNumBodies> com;
  Vec2 c = Vec2::Zero();
  double mass = 0.0;
  for (int b = 0; b < kNumBodies; ++b)
  {
    const auto bi = static_cast<std::size_t>(b);
    pj[bi] = point_jacobian_impl(table, s, b, table[bi].com);
    com[bi] = s.origin[bi] + rotate(s.angle[bi], table[bi].com);
    c += table[bi].mass * com[bi];
    mass += table[bi].mass;
  }
  c /= mass;

  CentroidalMomentum out;
  out.matrix.setZero();
  out.bias.setZero();
  for (int b = 0; b < kNumBodies; ++b)
  {
    const auto bi = static_cast<std::size_t>(b);
    const double m = table[bi].mass;
    const Vec2 r = com[bi] - c;
    out.matrix.row(0) += m * (r.y() * pj[bi].jacobian.row(0) - r.x() * pj[bi].jacobian.row(1));
    out.matrix.row(0) += table[bi].inertia * angular_row(table, b);
    out.matrix.row(1) += m * pj[bi].jacobian.row(0);
    out.matrix.row(2) += m * pj[bi].jacobian.row(1);
    // d/dt of sum r x m rdot reduces to sum r x m rddot; link pitch rates have no bias.
    out.bias(0) += cross(r, m * pj[bi].bias);
    out.bias(1) += m * pj[bi].bias.x();
    out.bias(2) += m * pj[bi].bias.y();
  }
  return out;
}

double kinetic_energy(const RobotModel& model, const VecN& q, const VecN& v)
{
  const BodyTable table = body_table(model);
  const ChainState s = chain_state(table, q, v);
  double e = 0.0;
  for (int b = 0; b < kNumBodies; ++b)
  {
    const auto bi = static_cast<std::size_t>(b);
    const Vec2 vel = point_jacobian_impl(table, s, b, table[bi].com).jacobian * v;
    e += 0.5 * table[bi].mass * vel.squaredNorm() + 0.5 * table[bi].inertia * s.rate[bi] * s.rate[bi];
  }
  return e;
}

double potential_energy(const RobotModel& model, const VecN& q, double gravity)
{
  return model.total_mass() * gravity * center_of_mass(model, q).y();
}

VecN standing_configuration(const RobotModel& model, double knee, double ground)
{
  VecN q = VecN::Zero();
  // equal thigh/shank lengths are not assumed: solve for the hip angle that
  // puts the ankle straight below the hip
  const double l1 = model.thigh.length, l2 = model.shank.length;
  // ankle x = -l1 sin(h) - l2 sin(h + k) = 0
  const double hip = std::atan2(-l2 * std::sin(knee), l1 + l2 * std::cos(knee));
  const double height = l1 * std::cos(hip) + l2 * std::cos(hip + knee);
  q(kBaseZ) = ground + model.ankle_height + height;
  for (Side side : {Side::Left, Side::Right})
  {
    q(hip_dof(side)) = hip;
    q(knee_dof(side)) = knee;
    q(ankle_dof(side)) = -(hip + knee);
  }
  return q;
}

}  // namespace straightleg::model
