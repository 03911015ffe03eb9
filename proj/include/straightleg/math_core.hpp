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

#ifndef STRAIGHTLEG_MATH_CORE_HPP_
#define STRAIGHTLEG_MATH_CORE_HPP_

#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include <Eigen/Dense>

namespace straightleg::math
{

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

/// Thrown when operands of a linear-algebra routine have incompatible shapes
/// or carry non-finite entries.
class DimensionError : public std::invalid_argument
{
public:
  using std::invalid_argument::invalid_argument;
};

void require_finite(const Matrix& m, const char* what);
void require_finite(const Vector& v, const char* what);

/// z[index] >= value
struct VariableBound
{
  int index = 0;
  double value = 0.0;
};

/// lower <= z[first .. first+size) <= upper. Infinite entries are ignored.
struct BoxBounds
{
  int first = 0;
  Vector lower;
  Vector upper;
};

/**
 * Convex QP
 *
 *   min  1/2 z' H z + g' z
 *   s.t. A_eq z = b_eq
 *        z_i >= l_i            (lower_bounds)
 *        lb <= z_range <= ub   (box)
 *
 * Inequality constraints are numbered lower_bounds first, then for every box
 * entry j the pair (lower j, upper j) at 2j and 2j+1. Active sets and
 * inequality multipliers use that numbering.
 */
struct QpProblem
{
  Matrix hessian;
  Vector gradient;
  Matrix eq_matrix;
  Vector eq_vector;
  std::vector<VariableBound> lower_bounds;
  std::optional<BoxBounds> box;

  int num_variables() const { return static_cast<int>(gradient.size()); }
  int num_equalities() const { return static_cast<int>(eq_vector.size()); }
  int num_inequalities() const;

  /// Constraint i written as a_i' z >= c_i; returns (variable index, sign of a_i, c_i).
  struct BoundRow
  {
    int index;
    double sign;
    double rhs;
  };
  BoundRow inequality(int i) const;

  /// Throws DimensionError on shape mismatch, non-finite data or an
  /// asymmetric / indefinite Hessian.
  void validate() const;
};

struct QpSolution
{
  Vector z;
  Vector eq_multipliers;    ///< lambda in H z + g + A_eq' lambda - sum mu_i a_i = 0
  Vector ineq_multipliers;  ///< mu >= 0, one per inequality (zero when inactive)
  std::vector<int> active_set;
  double objective = 0.0;
  int iterations = 0;
  double regularization = 0.0;  ///< diagonal shift that was added to H
};

enum class QpStatus
{
  Infeasible,
  MaxIterations,
  IllConditioned,
};

class QpError : public std::runtime_error
{
public:
  QpError(QpStatus status, const std::string& what) : std::runtime_error(what), status_(status) {}
  QpStatus status() const { return status_; }

private:
  QpStatus status_;
};

/// Residuals of the KKT conditions, evaluated against the regularized Hessian
/// that the solver actually factored.
struct KktResiduals
{
  double stationarity = 0.0;     ///< ||Hz + g + A'lambda - sum mu a||_inf
  double stationarity_scale = 1.0;  ///< 1 + ||g||_inf
  double primal = 0.0;           ///< max equality / bound violation
  double complementarity = 0.0;  ///< max |mu_i s_i|
  double dual = 0.0;             ///< max(0, -mu_i)

  bool certified() const
  {
    return stationarity <= 1e-8 * stationarity_scale && primal <= 1e-9 && complementarity <= 1e-8 &&
           dual <= 1e-12;
  }
};

/**
 * Dense active-set QP solver.
 *
 * When H is singular or its Cholesky factor has a diagonal spread above 1e6,
 * it is shifted by 1e-8 * trace(H) / n so that rank-deficient task Hessians
 * still factor. warm_start lists inequality
 * indices that are tried first; the returned minimizer does not depend on it.
 *
 * Throws QpError.
 */
QpSolution solve_qp(const QpProblem& problem, const std::vector<int>* warm_start = nullptr);

KktResiduals kkt_residuals(const QpProblem& problem, const QpSolution& solution);

/// J' (J J' + damping^2 I)^-1, evaluated through the SVD so that it is total
/// for rank-deficient J (Moore-Penrose at damping = 0).
Matrix damped_pseudo_inverse(const Matrix& j, double damping);

/// N = I - J^+ J with the damped pseudo-inverse. Symmetric by construction.
Matrix nullspace_projector(const Matrix& j, double damping);

/// Same with the default damping 0.05 * sigma_max(J).
Matrix nullspace_projector(const Matrix& j);

double max_singular_value(const Matrix& m);
double min_singular_value(const Matrix& m);

}  // namespace straightleg::math

#endif  // STRAIGHTLEG_MATH_CORE_HPP_
