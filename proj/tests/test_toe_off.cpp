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

#include <random>

#include "straightleg/toe_off.hpp"

using namespace straightleg;
using namespace straightleg::toe_off;
using gait::GaitPhase;
using gait::PhaseKind;
using model::FootPoint;
using model::Side;

namespace
{

GaitPhase transfer_phase()
{
  GaitPhase p;
  p.kind = PhaseKind::Transfer;
  p.support = Side::Right;
  p.duration = 0.25;
  p.step = 1;
  return p;
}

// Trailing toe at 0.14, leading foot on [0.42, 0.64], everything in reach.
ToeOffInputs satisfying_inputs()
{
  ToeOffInputs in;
  in.icp = 0.45;
  in.icp_desired = 0.47;
  in.trailing_toe = 0.14;
  in.trailing_cop = 0.10;
  in.cmp_desired = 0.40;
  in.foothold = 0.53;
  return in;
}

}  // namespace

TEST(PredictedPolygon, Examples)
{
  const SupportPolygon p = predicted_toe_off_polygon(0.14, {0.42, 0.64});
  EXPECT_EQ(p.x_min, 0.14);
  EXPECT_EQ(p.x_max, 0.64);
  EXPECT_EQ(predicted_toe_off_polygon(0.3, {0.3}).width(), 0.0);

  const SupportPolygon q = predicted_toe_off_polygon(0.14, {0.64, 0.42});
  EXPECT_EQ(q.x_min, p.x_min);
  EXPECT_EQ(q.x_max, p.x_max);
  EXPECT_THROW(hull({}), std::invalid_argument);
}

TEST(PredictedPolygon, DistanceIsZeroInside)
{
  const SupportPolygon p{0.1, 0.5};
  EXPECT_EQ(p.distance(0.3), 0.0);
  EXPECT_NEAR(p.distance(0.0), 0.1, 1e-15);
  EXPECT_NEAR(p.distance(0.7), 0.2, 1e-15);
}

TEST(ShouldToeOff, Examples)
{
  const ToeOffThresholds th;
  const SupportPolygon poly = predicted_toe_off_polygon(0.14, {0.42, 0.64});
  const GaitPhase phase = transfer_phase();

  ToeOffInputs in = satisfying_inputs();
  EXPECT_TRUE(should_toe_off(in, poly, th, phase, 0.1));

  // ICP outside the polygon defeats everything else
  in.icp = 0.70;
  EXPECT_FALSE(should_toe_off(in, poly, th, phase, 0.1));
  ToeOffDecision d = evaluate_toe_off(in, poly, th, phase, 0.1);
  EXPECT_FALSE(d.icp_in_polygon);
  EXPECT_TRUE(d.cop_near_toe);
  EXPECT_TRUE(d.cmp_near_polygon);

  // CoP at the heel, 0.22 m from the toe
  in = satisfying_inputs();
  in.trailing_cop = in.trailing_toe - 0.22;
  ToeOffThresholds tight = th;
  tight.cop_toe = 0.08;
  d = evaluate_toe_off(in, poly, tight, phase, 0.1);
  EXPECT_FALSE(d.value());
  EXPECT_FALSE(d.cop_near_toe);
  EXPECT_TRUE(d.icp_in_polygon && d.icp_near_foothold && d.cmp_near_polygon);
}

TEST(ShouldToeOff, PhaseEligibility)
{
  const ToeOffThresholds th;
  const SupportPolygon poly = predicted_toe_off_polygon(0.14, {0.42, 0.64});
  GaitPhase swing = transfer_phase();
  swing.kind = PhaseKind::Swing;
  swing.duration = 0.6;
  EXPECT_FALSE(should_toe_off(satisfying_inputs(), poly, th, swing, 0.3));
  EXPECT_TRUE(should_toe_off(satisfying_inputs(), poly, th, swing, 0.5));
  ToeOffThresholds transfer_only = th;
  transfer_only.in_single_support = false;
  EXPECT_FALSE(should_toe_off(satisfying_inputs(), poly, transfer_only, swing, 0.5));

  GaitPhase done = transfer_phase();
  done.kind = PhaseKind::Complete;
  EXPECT_FALSE(should_toe_off(satisfying_inputs(), poly, th, done, 0.1));
}

TEST(ShouldToeOff, ThresholdValidation)
{
  ToeOffThresholds th;
  EXPECT_NO_THROW(th.validate());
  th.cmp_polygon = 0.0;
  EXPECT_THROW(th.validate(), std::invalid_argument);
}

// Growing the polygon or any threshold never turns a true decision false.
TEST(ShouldToeOff, MonotoneUnderDominance)
{
  std::mt19937 rng(21);
  std::uniform_real_distribution<double> x(-0.2, 1.0);
  std::uniform_real_distribution<double> grow(0.0, 0.2);
  const GaitPhase phase = transfer_phase();
  int positives = 0;
  for (int trial = 0; trial < 20000; ++trial)
  {
    ToeOffInputs in{x(rng), x(rng), x(rng), x(rng), x(rng), x(rng)};
    ToeOffThresholds th;
    th.icp_foothold = grow(rng) + 0.01;
    th.cop_toe = grow(rng) + 0.01;
    th.cmp_polygon = grow(rng) + 0.01;
    const SupportPolygon poly = hull({x(rng), x(rng)});
    if (!should_toe_off(in, poly, th, phase, 0.0))
      continue;
    ++positives;

    ToeOffThresholds wider = th;
    wider.icp_foothold += grow(rng);
    wider.cop_toe += grow(rng);
    wider.cmp_polygon += grow(rng);
    const SupportPolygon bigger{poly.x_min - grow(rng), poly.x_max + grow(rng)};
    EXPECT_TRUE(should_toe_off(in, bigger, th, phase, 0.0));
    EXPECT_TRUE(should_toe_off(in, poly, wider, phase, 0.0));
    EXPECT_TRUE(should_toe_off(in, bigger, wider, phase, 0.0));
  }
  EXPECT_GT(positives, 20);
}

TEST(ToeOffLatchTest, PersistsUntilNextSwing)
{
  ToeOffLatch latch;
  GaitPhase transfer = transfer_phase();
  EXPECT_FALSE(latch.update(transfer, false));
  EXPECT_TRUE(latch.update(transfer, true));
  EXPECT_TRUE(latch.update(transfer, false));
  EXPECT_TRUE(latch.update(transfer, false));

  GaitPhase swing = transfer;
  swing.kind = PhaseKind::Swing;
  swing.step = 2;
  EXPECT_FALSE(latch.update(swing, false));

  // a late-swing latch carries through the following transfer
  EXPECT_TRUE(latch.update(swing, true));
  GaitPhase next = transfer;
  next.step = 2;
  EXPECT_TRUE(latch.update(next, false));
  swing.step = 3;
  EXPECT_FALSE(latch.update(swing, false));
}

TEST(ToeOffContactTasks, SingleToePointAndNoPitchTask)
{
  const model::RobotModel m;
  const VecN q = model::standing_configuration(m, 0.2);
  const model::Kinematics k = model::forward_kinematics(m, q);
  wbc::ContactSetup both;
  for (Side s : {Side::Left, Side::Right})
    for (FootPoint p : {FootPoint::Heel, FootPoint::Toe})
      both.points.push_back({s, p, k.contact_points[static_cast<std::size_t>(model::contact_index(s, p))], 0.7});

  const model::Vec2 toe = k.contact_points[static_cast<std::size_t>(model::contact_index(Side::Left, FootPoint::Toe))];
  const ToeOffSupport out = toe_off_contact_tasks(m, q, VecN::Zero(), both, Side::Left, toe);

  int trailing = 0, leading = 0;
  for (const wbc::ContactPointSpec& p : out.contacts.points)
  {
    if (p.side == Side::Left)
    {
      ++trailing;
      EXPECT_EQ(p.point, FootPoint::Toe);
      EXPECT_EQ(p.friction, 0.7);
    }
    else
      ++leading;
  }
  EXPECT_EQ(trailing, 1);
  EXPECT_EQ(leading, 2);

  ASSERT_EQ(out.tasks.size(), 1u);
  const wbc::MotionTask& t = out.tasks[0];
  EXPECT_EQ(t.jacobian.rows(), 2);
  // no row of the task is the foot pitch row
  const model::JacRow pitch = model::orientation_jacobian(model::Body::LeftFoot);
  for (int r = 0; r < t.jacobian.rows(); ++r)
    EXPECT_GT((t.jacobian.row(r) - pitch).norm(), 1e-6);
  // at rest on the anchor the hold asks for nothing beyond the bias
  EXPECT_LT(t.desired.norm(), 1e-12);

  // moving away from the anchor pulls back with kp
  const model::Vec2 off = toe + model::Vec2(0.01, 0.0);
  const ToeOffSupport pulled = toe_off_contact_tasks(m, q, VecN::Zero(), both, Side::Left, off);
  EXPECT_NEAR(pulled.tasks[0].desired(0), 200.0 * 0.01, 1e-9);
}
