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
#include <limits>
#include <random>

#include "straightleg/math_core.hpp"

using namespace straightleg::math;

namespace
{

// Reference solver: try every subset of inequalities as equalities, keep the
// feasible stationary point with the lowest objective.
double enumerate_active_sets(const QpProblem& p, Vector* best_z)
{
  const int n = p.num_variables();
  const int me = p.num_equalities();
  const int mi = p.num_inequalities();
  double best = std::numeric_limits<double>::infinity();
  for (int mask = 0; mask < (1 << mi); ++mask)
  {
    std::vector<int> act;
    for (int i = 0; i < mi; ++i)
      if (mask & (1 << i))
        act.push_back(i);
    const int m = me + static_cast<int>(act.size());
    Matrix kkt = Matrix::Zero(n + m, n + m);
    Vector rhs = Vector::Zero(n + m);
    kkt.topLeftCorner(n, n) = p.hessian;
    rhs.head(n) = -p.gradient;
    if (me > 0)
    {
      kkt.block(n, 0, me, n) = p.eq_matrix;
      kkt.block(0, n, n, me) = p.eq_matrix.transpose();
      rhs.segment(n, me) = p.eq_vector;
    }
    for (std::size_t k = 0; k < act.size(); ++k)
    {
      const auto row = p.inequality(act[k]);
      const int r = n + me + static_cast<int>(k);
      kkt(r, row.index) = row.sign;
      kkt(row.index, r) = row.sign;
      rhs(r) = row.rhs;
    }
    Eigen::FullPivLU<Matrix> lu(kkt);
    if (lu.rank() < n + m)
      continue;
    const Vector sol = lu.solve(rhs);
    const Vector z = sol.head(n);
    bool feasible = true;
    for (int i = 0; i < mi; ++i)
    {
      const auto row = p.inequality(i);
      if (row.sign * z(row.index) < row.rhs - 1e-9)
        feasible = false;
    }
    if (!feasible)
      continue;
    const double obj = 0.5 * z.dot(p.hessian * z) + p.gradient.dot(z);
    if (obj < best)
    {
      best = obj;
      if (best_z)
        *best_z = z;
    }
  }
  return best;
}

Matrix random_spd(std::mt19937& rng, int n)
{
  std::normal_distribution<double> normal;
  Matrix a(n, n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j)
      a(i, j) = normal(rng);
  return a * a.transpose() + 0.1 * Matrix::Identity(n, n);
}

Matrix random_matrix(std::mt19937& rng, int r, int c)
{
  std::normal_distribution<double> normal;
  Matrix a(r, c);
  for (int i = 0; i < r; ++i)
    for (int j = 0; j < c; ++j)
      a(i, j) = normal(rng);
  return a;
}

QpProblem random_problem(std::mt19937& rng)
{
  std::uniform_int_distribution<int> dim(2, 8);
  std::normal_distribution<double> normal;
  const int n = dim(rng);
  QpProblem p;
  p.hessian = random_spd(rng, n);
  p.gradient = 3.0 * random_matrix(rng, n, 1);
  const int me = std::uniform_int_distribution<int>(0, std::min(2, n - 1))(rng);
  p.eq_matrix = random_matrix(rng, me, n);
  p.eq_vector = random_matrix(rng, me, 1);
  const int mi = std::uniform_int_distribution<int>(0, 4)(rng);
  for (int k = 0; k < mi; ++k)
    p.lower_bounds.push_back({std::uniform_int_distribution<int>(0, n - 1)(rng), normal(rng)});
  return p;
}

}  // namespace

TEST(SolveQp, UnconstrainedIdentity)
{
  QpProblem p;
  p.hessian = Matrix::Identity(2, 2);
  p.gradient = Vector::Constant(2, -1.0);
  p.eq_matrix = Matrix::Zero(0, 2);
  p.eq_vector = Vector::Zero(0);
  const QpSolution s = solve_qp(p);
  EXPECT_NEAR(s.z(0), 1.0, 1e-9);
  EXPECT_NEAR(s.z(1), 1.0, 1e-9);
  EXPECT_TRUE(kkt_residuals(p, s).certified());
}

TEST(SolveQp, ActiveLowerBound)
{
  QpProblem p;
  p.hessian = Matrix::Identity(1, 1);
  p.gradient = Vector::Constant(1, -1.0);
  p.eq_matrix = Matrix::Zero(0, 1);
  p.eq_vector = Vector::Zero(0);
  p.lower_bounds.push_back({0, 2.0});
  const QpSolution s = solve_qp(p);
  EXPECT_NEAR(s.z(0), 2.0, 1e-9);
  ASSERT_EQ(s.ineq_multipliers.size(), 1);
  EXPECT_NEAR(s.ineq_multipliers(0), 1.0, 1e-7);
  ASSERT_EQ(s.active_set.size(), 1u);
  EXPECT_TRUE(kkt_residuals(p, s).certified());
}

TEST(SolveQp, BoxUpperBound)
{
  QpProblem p;
  p.hessian = Matrix::Identity(2, 2);
  p.gradient = Vector::Constant(2, -5.0);
  p.eq_matrix = Matrix::Zero(0, 2);
  p.eq_vector = Vector::Zero(0);
  BoxBounds box;
  box.first = 1;
  box.lower = Vector::Constant(1, -1.0);
  box.upper = Vector::Constant(1, 1.0);
  p.box = box;
  const QpSolution s = solve_qp(p);
  EXPECT_NEAR(s.z(0), 5.0, 1e-9);
  EXPECT_NEAR(s.z(1), 1.0, 1e-9);
  EXPECT_TRUE(kkt_residuals(p, s).certified());
}

TEST(SolveQp, InfiniteBoxEntriesAreIgnored)
{
  QpProblem p;
  p.hessian = Matrix::Identity(1, 1);
  p.gradient = Vector::Constant(1, -5.0);
  p.eq_matrix = Matrix::Zero(0, 1);
  p.eq_vector = Vector::Zero(0);
  BoxBounds box;
  box.lower = Vector::Constant(1, -std::numeric_limits<double>::infinity());
  box.upper = Vector::Constant(1, std::numeric_limits<double>::infinity());
  p.box = box;
  EXPECT_NEAR(solve_qp(p).z(0), 5.0, 1e-9);
}

TEST(SolveQp, InfeasibleBoundsThrow)
{
  QpProblem p;
  p.hessian = Matrix::Identity(1, 1);
  p.gradient = Vector::Zero(1);
  p.eq_matrix = Matrix::Ones(1, 1);
  p.eq_vector = Vector::Constant(1, -1.0);
  p.lower_bounds.push_back({0, 0.0});
  try
  {
    solve_qp(p);
    FAIL() << "expected QpError";
  }
  catch (const QpError& e)
  {
    EXPECT_EQ(e.status(), QpStatus::Infeasible);
  }
}

TEST(SolveQp, InconsistentRedundantEqualitiesThrow)
{
  QpProblem p;
  p.hessian = Matrix::Identity(2, 2);
  p.gradient = Vector::Zero(2);
  p.eq_matrix = Matrix(2, 2);
  p.eq_matrix << 1, 1, 2, 2;
  p.eq_vector = Vector(2);
  p.eq_vector << 1, 3;
  EXPECT_THROW(solve_qp(p), QpError);
}

TEST(SolveQp, RedundantConsistentEqualitiesAreDropped)
{
  QpProblem p;
  p.hessian = Matrix::Identity(2, 2);
  p.gradient = Vector::Zero(2);
  p.eq_matrix = Matrix(2, 2);
  p.eq_matrix << 1, 1, 2, 2;
  p.eq_vector = Vector(2);
  p.eq_vector << 1, 2;
  const QpSolution s = solve_qp(p);
  EXPECT_NEAR(s.z(0), 0.5, 1e-9);
  EXPECT_NEAR(s.z(1), 0.5, 1e-9);
  EXPECT_TRUE(kkt_residuals(p, s).certified());
}

TEST(SolveQp, RejectsDimensionMismatch)
{
  QpProblem p;
  p.hessian = Matrix::Identity(2, 2);
  p.gradient = Vector::Zero(3);
  p.eq_matrix = Matrix::Zero(0, 2);
  p.eq_vector = Vector::Zero(0);
  EXPECT_THROW(solve_qp(p), DimensionError);
}

TEST(SolveQp, RejectsIndefiniteHessian)
{
  QpProblem p;
  p.hessian = Matrix::Identity(2, 2);
  p.hessian(1, 1) = -1.0;
  p.gradient = Vector::Zero(2);
  p.eq_matrix = Matrix::Zero(0, 2);
  p.eq_vector = Vector::Zero(0);
  EXPECT_THROW(solve_qp(p), DimensionError);
}

TEST(SolveQp, RejectsNonFiniteData)
{
  QpProblem p;
  p.hessian = Matrix::Identity(2, 2);
  p.gradient = Vector::Zero(2);
  p.gradient(0) = std::numeric_limits<double>::quiet_NaN();
  p.eq_matrix = Matrix::Zero(0, 2);
  p.eq_vector = Vector::Zero(0);
  EXPECT_THROW(solve_qp(p), DimensionError);
}

TEST(SolveQp, RandomProblemsMatchEnumerationOracle)
{
  std::mt19937 rng(20260917);
  int solved = 0;
  for (int trial = 0; trial < 200; ++trial)
  {
    const QpProblem p = random_problem(rng);
    Vector z_ref;
    const double ref = enumerate_active_sets(p, &z_ref);
    if (!std::isfinite(ref))
    {
      EXPECT_THROW(solve_qp(p), QpError) << "trial " << trial;
      continue;
    }
    const QpSolution s = solve_qp(p);
    const double obj = 0.5 * s.z.dot(p.hessian * s.z) + p.gradient.dot(s.z);
    EXPECT_NEAR(obj, ref, 1e-6 * (1.0 + std::abs(ref))) << "trial " << trial;
    EXPECT_TRUE(kkt_residuals(p, s).certified()) << "trial " << trial;
    ++solved;
  }
  EXPECT_GT(solved, 150);
}

TEST(SolveQp, WarmStartDoesNotChangeMinimizer)
{
  std::mt19937 rng(7);
  for (int trial = 0; trial < 100; ++trial)
  {
    QpProblem p = random_problem(rng);
    for (int k = 0; k < 3; ++k)
      p.lower_bounds.push_back({k % p.num_variables(), -0.3 * k});
    QpSolution cold;
    try
    {
      cold = solve_qp(p);
    }
    catch (const QpError&)
    {
      continue;
    }
    std::vector<int> warm;
    for (int i = p.num_inequalities() - 1; i >= 0; i -= 2)
      warm.push_back(i);
    const QpSolution from_guess = solve_qp(p, &warm);
    const QpSolution from_answer = solve_qp(p, &cold.active_set);
    EXPECT_LE((cold.z - from_guess.z).cwiseAbs().maxCoeff(), 1e-8) << "trial " << trial;
    EXPECT_LE((cold.z - from_answer.z).cwiseAbs().maxCoeff(), 1e-8) << "trial " << trial;
  }
}

TEST(SolveQp, DeterministicForIdenticalInput)
{
  std::mt19937 rng(11);
  QpProblem p = random_problem(rng);
  p.eq_matrix = Matrix::Zero(0, p.num_variables());
  p.eq_vector = Vector::Zero(0);
  const QpSolution a = solve_qp(p);
  const QpSolution b = solve_qp(p);
  EXPECT_EQ(a.z, b.z);
  EXPECT_EQ(a.active_set, b.active_set);
}

TEST(SolveQp, RankDeficientHessianIsRegularized)
{
  // a task Hessian J'J with a singular J, bounded by the box
  QpProblem p;
  Matrix j(1, 3);
  j << 1, 1, 0;
  p.hessian = j.transpose() * j;
  p.gradient = Vector::Zero(3);
  p.gradient(0) = -1.0;
  p.gradient(1) = -1.0;
  p.eq_matrix = Matrix::Zero(0, 3);
  p.eq_vector = Vector::Zero(0);
  const QpSolution s = solve_qp(p);
  EXPECT_GT(s.regularization, 0.0);
  EXPECT_NEAR(s.z(0) + s.z(1), 1.0, 1e-6);
}

TEST(PseudoInverse, Identity)
{
  EXPECT_TRUE(damped_pseudo_inverse(Matrix::Identity(3, 3), 0.0).isApprox(Matrix::Identity(3, 3), 1e-12));
}

TEST(PseudoInverse, ZeroMap)
{
  const Matrix p = damped_pseudo_inverse(Matrix::Zero(2, 3), 0.1);
  EXPECT_EQ(p.rows(), 3);
  EXPECT_EQ(p.cols(), 2);
  EXPECT_EQ(p.cwiseAbs().maxCoeff(), 0.0);
}

TEST(PseudoInverse, PenroseConditionsOnRandomFullRank)
{
  std::mt19937 rng(3);
  for (int trial = 0; trial < 50; ++trial)
  {
    const Matrix j = random_matrix(rng, 3, 5);
    const Matrix jp = damped_pseudo_inverse(j, 0.0);
    EXPECT_LE((j * jp * j - j).cwiseAbs().maxCoeff(), 1e-9);
    EXPECT_LE((jp * j * jp - jp).cwiseAbs().maxCoeff(), 1e-9);
  }
}

TEST(PseudoInverse, MatchesNormalEquationsForm)
{
  std::mt19937 rng(4);
  const Matrix j = random_matrix(rng, 3, 5);
  const double lambda = 0.3;
  const Matrix expected = j.transpose() * (j * j.transpose() + lambda * lambda * Matrix::Identity(3, 3)).inverse();
  EXPECT_LE((damped_pseudo_inverse(j, lambda) - expected).cwiseAbs().maxCoeff(), 1e-12);

  const Matrix tall = random_matrix(rng, 5, 3);
  const Matrix expected_tall =
      (tall.transpose() * tall + lambda * lambda * Matrix::Identity(3, 3)).inverse() * tall.transpose();
  EXPECT_LE((damped_pseudo_inverse(tall, lambda) - expected_tall).cwiseAbs().maxCoeff(), 1e-12);
}

TEST(PseudoInverse, ContinuousInDampingOnSingularJacobian)
{
  // foot-point rows of a leg with a straight knee: thigh and shank columns are parallel
  Matrix j(2, 3);
  j << 0.9, 0.45, 0.0, 0.0, 0.0, 0.05;
  const double lambda = 0.02;
  double previous = std::numeric_limits<double>::infinity();
  for (double delta : {1e-2, 1e-4, 1e-6, 1e-8})
  {
    const double diff = (damped_pseudo_inverse(j, lambda) - damped_pseudo_inverse(j, lambda + delta)).norm();
    EXPECT_LT(diff, previous);
    previous = diff;
  }
  EXPECT_LT(previous, 1e-5);
}

TEST(PseudoInverse, RejectsNegativeDamping)
{
  EXPECT_THROW(damped_pseudo_inverse(Matrix::Identity(2, 2), -1.0), DimensionError);
}

TEST(NullspaceProjector, SquareFullRankGivesZero)
{
  std::mt19937 rng(5);
  const Matrix j = random_matrix(rng, 4, 4);
  EXPECT_LE(nullspace_projector(j, 0.0).cwiseAbs().maxCoeff(), 1e-9);
}

TEST(NullspaceProjector, SingleRow)
{
  Matrix j(1, 3);
  j << 1, 0, 0;
  Matrix expected = Matrix::Zero(3, 3);
  expected(1, 1) = expected(2, 2) = 1.0;
  EXPECT_LE((nullspace_projector(j, 0.0) - expected).cwiseAbs().maxCoeff(), 1e-14);
}

TEST(NullspaceProjector, IdempotentAndAnnihilatingOnRandomFullRank)
{
  std::mt19937 rng(6);
  for (int trial = 0; trial < 100; ++trial)
  {
    const int rows = std::uniform_int_distribution<int>(1, 8)(rng);
    const Matrix j = random_matrix(rng, rows, 9);
    const Matrix n = nullspace_projector(j, 0.0);
    EXPECT_LE((n * n - n).cwiseAbs().maxCoeff(), 1e-8);
    EXPECT_LE((j * n).cwiseAbs().maxCoeff(), 1e-8);
    EXPECT_LE((n - n.transpose()).cwiseAbs().maxCoeff(), 0.0);
  }
}

TEST(NullspaceProjector, DefaultDampingIsSymmetric)
{
  std::mt19937 rng(8);
  const Matrix j = random_matrix(rng, 4, 9);
  const Matrix n = nullspace_projector(j);
  EXPECT_EQ(n, n.transpose());
  // damped: J N no longer vanishes, but stays small relative to J
  EXPECT_LT((j * n).norm(), 0.1 * j.norm());
}

TEST(SingularValues, Extremes)
{
  Matrix m = Matrix::Zero(2, 3);
  m(0, 0) = 3.0;
  m(1, 2) = 0.5;
  EXPECT_NEAR(max_singular_value(m), 3.0, 1e-14);
  EXPECT_NEAR(min_singular_value(m), 0.5, 1e-14);
}
