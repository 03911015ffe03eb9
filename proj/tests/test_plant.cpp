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

#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "straightleg/biped_model.hpp"

using namespace straightleg::model;

namespace
{

PlantState airborne_state()
{
  PlantState s;
  s.q << 0.0, 3.0, 0.1, -0.4, 0.8, 0.1, -0.1, 0.5, -0.2;
  return s;
}

// Standing pose whose CoM sits above the foot centers, so that equal
// penetration of all four points is a static equilibrium. The torso leans
// and the hips compensate to keep the legs in place.
VecN balanced_standing(const RobotModel& m, double knee, double depth)
{
  VecN q0 = standing_configuration(m, knee);
  q0(kBaseZ) -= depth;
  auto com_error = [&](double pitch) {
    VecN q = q0;
    q(kBasePitch) = pitch;
    q(kLeftHip) -= pitch;
    q(kRightHip) -= pitch;
    const Kinematics k = forward_kinematics(m, q);
    return k.com.x() - 0.5 * (k.contact_points[0].x() + k.contact_points[1].x());
  };
  double lo = -0.5, hi = 0.5;
  for (int i = 0; i < 100; ++i)
  {
    const double mid = 0.5 * (lo + hi);
    (com_error(lo) * com_error(mid) <= 0.0 ? hi : lo) = mid;
  }
  VecN q = q0;
  q(kBasePitch) = lo;
  q(kLeftHip) -= lo;
  q(kRightHip) -= lo;
  return q;
}

// Actuated rows of c - J'f for the plant's own contact forces at rest.
VecA standing_torques(const RobotModel& m, const VecN& q, const ContactForces& f, double* base_residual)
{
  VecN generalized = bias_forces(m, q, VecN::Zero());
  for (Side side : {Side::Left, Side::Right})
    for (FootPoint p : {FootPoint::Heel, FootPoint::Toe})
    {
      const auto i = static_cast<std::size_t>(contact_index(side, p));
      generalized -=
          point_jacobian(m, q, VecN::Zero(), foot_body(side), contact_point_local(m, p)).jacobian.transpose() *
          f.force[i];
    }
  *base_residual = generalized.head<3>().cwiseAbs().maxCoeff();
  return generalized.tail<kNumActuated>();
}

}  // namespace

TEST(Terrain, PiecewiseConstant)
{
  Terrain t;
  EXPECT_EQ(t.height(-5.0), 0.0);
  t.add_step(1.0, 0.2);
  t.add_step(0.5, 0.1);
  EXPECT_EQ(t.height(0.4), 0.0);
  EXPECT_EQ(t.height(0.5), 0.1);
  EXPECT_EQ(t.height(0.99), 0.1);
  EXPECT_EQ(t.height(1.0), 0.2);
  EXPECT_EQ(t.height(10.0), 0.2);
}

TEST(ContactForces, NoPenetrationNoForce)
{
  const RobotModel m;
  const ContactForces f = contact_forces_plant(m, Terrain::flat(), ContactParams{}, airborne_state());
  for (const Vec2& fi : f.force)
    EXPECT_EQ(fi, Vec2::Zero());
  for (const auto& a : f.anchors)
    EXPECT_FALSE(a.has_value());
}

TEST(ContactForces, SlidingStartsAtFrictionLimit)
{
  const RobotModel m;
  ContactParams params;
  PlantState s;
  s.q = standing_configuration(m, 0.3);
  s.q(kBaseZ) -= 0.002;
  const auto li = static_cast<std::size_t>(contact_index(Side::Left, FootPoint::Heel));
  const double x = forward_kinematics(m, s.q).contact_points[li].x();
  const double fz = params.stiffness * 0.002;

  // anchor just inside the sticking region
  s.anchors[li] = x + 0.999 * params.friction * fz / params.stiffness;
  ContactForces f = contact_forces_plant(m, Terrain::flat(), params, s);
  EXPECT_NEAR(f.force[li].y(), fz, 1e-9);
  EXPECT_LT(std::abs(f.force[li].x()), params.friction * fz);
  EXPECT_EQ(*f.anchors[li], *s.anchors[li]);

  // beyond it: force saturates and the anchor follows
  s.anchors[li] = x + 2.0 * params.friction * fz / params.stiffness;
  f = contact_forces_plant(m, Terrain::flat(), params, s);
  EXPECT_NEAR(std::abs(f.force[li].x()), params.friction * fz, 1e-9);
  EXPECT_NEAR(*f.anchors[li], x + params.friction * fz / params.stiffness, 1e-12);
}

TEST(ContactForces, NormalForceNeverPulls)
{
  const RobotModel m;
  PlantState s;
  s.q = standing_configuration(m, 0.3);
  s.q(kBaseZ) -= 0.0005;
  s.v(kBaseZ) = 2.0;  // leaving the ground fast: damping exceeds the spring
  const ContactForces f = contact_forces_plant(m, Terrain::flat(), ContactParams{}, s);
  for (const Vec2& fi : f.force)
  {
    EXPECT_GE(fi.y(), 0.0);
    EXPECT_LE(std::abs(fi.x()), 0.8 * fi.y() + 1e-9);
  }
}

TEST(PlantStep, FreeFallFollowsProjectile)
{
  const RobotModel m;
  PlantState s = airborne_state();
  const double z0 = center_of_mass(m, s.q).y();
  const double x0 = center_of_mass(m, s.q).x();
  const double dt = 2.5e-5;
  const int n = static_cast<int>(std::round(0.5 / dt));
  for (int i = 0; i < n; ++i)
    s = plant_step(m, Terrain::flat(), ContactParams{}, s, VecA::Zero(), dt);
  const Vec2 com = center_of_mass(m, s.q);
  EXPECT_NEAR(com.y(), z0 - 0.5 * 9.81 * 0.25, 1e-4);
  EXPECT_NEAR(com.x(), x0, 1e-9);
}

TEST(PlantStep, PassiveEnergyDriftBelowOnePercent)
{
  const RobotModel m;
  // velocities chosen so that no joint reaches its limit within the second
  PlantState s = airborne_state();
  s.q(kRightKnee) = 1.0;
  s.v << 0.2, 0.1, 0.3, -0.3, 0.3, 0.2, 0.3, -0.2, 0.3;
  const double e0 = kinetic_energy(m, s.q, s.v);
  double worst = 0.0;
  for (int i = 0; i < 4000; ++i)
  {
    s = plant_step(m, Terrain::flat(), ContactParams{}, s, VecA::Zero(), 2.5e-4, 0.0);
    worst = std::max(worst, std::abs(kinetic_energy(m, s.q, s.v) - e0) / e0);
  }
  EXPECT_LT(worst, 0.01);
}

TEST(PlantStep, StandingWithGravityCompensationStaysPut)
{
  const RobotModel m;
  const ContactParams params;
  PlantState s;
  s.q = balanced_standing(m, 0.3, m.total_mass() * 9.81 / (4.0 * params.stiffness));
  const VecN q_ref = s.q;
  double base_residual = 0.0;
  const VecA tau_ff =
      standing_torques(m, q_ref, contact_forces_plant(m, Terrain::flat(), params, s), &base_residual);
  EXPECT_LT(base_residual, 1e-6);

  const double dt = 2.5e-4;
  for (int i = 0; i < 4000; ++i)
  {
    VecA tau = tau_ff;
    for (int a = 0; a < kNumActuated; ++a)
      tau(a) += 300.0 * (q_ref(3 + a) - s.q(3 + a)) - 20.0 * s.v(3 + a);
    s = plant_step(m, Terrain::flat(), params, s, tau, dt);
  }
  EXPECT_LT((s.q.head<2>() - q_ref.head<2>()).norm(), 1e-3);

  const ContactForces f = contact_forces_plant(m, Terrain::flat(), params, s);
  double fz = 0.0;
  for (const Vec2& fi : f.force)
    fz += fi.y();
  EXPECT_NEAR(fz, m.total_mass() * 9.81, 0.005 * m.total_mass() * 9.81);
}

TEST(PlantStep, JointLimitsHoldUnderSaturatingTorques)
{
  const RobotModel m;
  PlantState s = airborne_state();
  VecA tau;
  tau << 400.0, -400.0, 300.0, -400.0, -400.0, -300.0;
  for (int i = 0; i < 2000; ++i)
  {
    s = plant_step(m, Terrain::flat(), ContactParams{}, s, tau, 2.5e-4);
    for (int dof = 3; dof < kNumDofs; ++dof)
    {
      EXPECT_GE(s.q(dof), m.lower_limit(dof) - 1e-6);
      EXPECT_LE(s.q(dof), m.upper_limit(dof) + 1e-6);
    }
  }
}

TEST(PlantStep, DeterministicTrajectories)
{
  const RobotModel m;
  std::mt19937 rng(3);
  std::uniform_real_distribution<double> u(-50.0, 50.0);
  std::vector<VecA> torques(400);
  for (auto& t : torques)
    for (int a = 0; a < kNumActuated; ++a)
      t(a) = u(rng);
  auto run = [&]() {
    PlantState s;
    s.q = standing_configuration(m, 0.3);
    for (const VecA& t : torques)
      s = plant_step(m, Terrain::flat(), ContactParams{}, s, t, 2.5e-4);
    return s;
  };
  const PlantState a = run();
  const PlantState b = run();
  EXPECT_EQ(a.q, b.q);
  EXPECT_EQ(a.v, b.v);
}

TEST(PlantStep, BlowupIsReported)
{
  const RobotModel m;
  PlantState s = airborne_state();
  s.v(kBaseX) = 2e3;
  EXPECT_THROW(plant_step(m, Terrain::flat(), ContactParams{}, s, VecA::Zero(), 2.5e-4), NumericalBlowup);
}

TEST(MeasuredCop, Examples)
{
  const std::vector<Vec2> points{{-0.1, 0.0}, {0.2, 0.0}};
  EXPECT_DOUBLE_EQ(measured_cop({{0.0, 100.0}, {0.0, 0.0}}, points), -0.1);
  EXPECT_DOUBLE_EQ(measured_cop({{0.0, 50.0}, {0.0, 50.0}}, points), 0.05);
  EXPECT_THROW(measured_cop({{0.0, 0.5}, {0.0, 0.4}}, points), NoContact);
  EXPECT_THROW(measured_cop({{0.0, 1.0}}, points), std::invalid_argument);
}

TEST(MeasuredCop, ConvexCombinationBound)
{
  std::mt19937 rng(9);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (int trial = 0; trial < 200; ++trial)
  {
    std::vector<Vec2> points, forces;
    double lo = 1e9, hi = -1e9;
    for (int i = 0; i < 4; ++i)
    {
      points.emplace_back(u(rng) - 0.5, 0.0);
      forces.emplace_back(0.0, 10.0 * u(rng) + 0.3);
      lo = std::min(lo, points.back().x());
      hi = std::max(hi, points.back().x());
    }
    const double cop = measured_cop(forces, points);
    EXPECT_GE(cop, lo - 1e-15);
    EXPECT_LE(cop, hi + 1e-15);
  }
}
