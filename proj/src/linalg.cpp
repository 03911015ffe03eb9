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

#include "straightleg/math_core.hpp"

#include <cmath>

namespace straightleg::math
{

namespace
{

// Singular values below this fraction of sigma_max are treated as exact zeros
// when no damping is applied.
constexpr double kRankTolerance = 1e-12;

}  // namespace

Matrix damped_pseudo_inverse(const Matrix& j, double damping)
{
  require_finite(j, "Jacobian");
  if (!(damping >= 0.0) || !std::isfinite(damping))
    throw DimensionError("damping must be finite and non-negative");
  if (j.size() == 0)
    return Matrix::Zero(j.cols(), j.rows());

  Eigen::JacobiSVD<Matrix> svd(j, Eigen::ComputeThinU | Eigen::ComputeThinV);
  const Vector& s = svd.singularValues();
  const double cutoff = kRankTolerance * (s.size() > 0 ? s(0) : 0.0);
  const double l2 = damping * damping;
  Vector inv(s.size());
  for (Eigen::Index i = 0; i < s.size(); ++i)
  {
    if (s(i) <= cutoff || s(i) == 0.0)
      inv(i) = 0.0;
    else
      inv(i) = s(i) / (s(i) * s(i) + l2);
  }
  return svd.matrixV() * inv.asDiagonal() * svd.matrixU().transpose();
}

Matrix nullspace_projector(const Matrix& j, double damping)
{
  const Eigen::Index n = j.cols();
  Matrix p = damped_pseudo_inverse(j, damping) * j;
  Matrix out = Matrix::Identity(n, n) - 0.5 * (p + p.transpose());
  return out;
}

Matrix nullspace_projector(const Matrix& j)
{
  return nullspace_projector(j, 0.05 * max_singular_value(j));
}

double max_singular_value(const Matrix& m)
{
  if (m.size() == 0)
    return 0.0;
  Eigen::JacobiSVD<Matrix> svd(m);
  return svd.singularValues()(0);
}

double min_singular_value(const Matrix& m)
{
  if (m.size() == 0)
    return 0.0;
  Eigen::JacobiSVD<Matrix> svd(m);
  const Vector& s = svd.singularValues();
  return s(s.size() - 1);
}

}  // namespace straightleg::math
