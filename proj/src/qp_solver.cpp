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

// Dual active-set (Goldfarb-Idnani) QP solver with a final active-set polish.
//
// The working set is kept as the QR factors of N' L^-T (J, R below) and updated
// with Givens rotations on every add/drop. Once the dual iteration converges the
// KKT system restricted to the active set is re-solved directly, which brings
// the stationarity residual down to round-off.

#include "straightleg/math_core.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

namespace straightleg::math
{

namespace
{

constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr double kEps = std::numeric_limits<double>::epsilon();

struct Constraint
{
  Vector normal;
  double offset;  // normal' z + offset (>= 0 or == 0)
};

// Drops linearly dependent equality rows. Returns the kept row indices in
// their original order. Throws Infeasible when a dropped row is inconsistent.
std::vector<int> independent_rows(const Matrix& a, const Vector& b)
{
  std::vector<int> keep;
  const int m = static_cast<int>(a.rows());
  if (m == 0)
    return keep;

  Eigen::ColPivHouseholderQR<Matrix> qr(a.transpose());
  const double scale = std::max(1.0, a.cwiseAbs().maxCoeff());
  qr.setThreshold(1e-12 * scale);
  const int rank = static_cast<int>(qr.rank());
  for (int k = 0; k < rank; ++k)
    keep.push_back(qr.colsPermutation().indices()(k));
  std::sort(keep.begin(), keep.end());
  if (rank == m)
    return keep;

  Matrix kept(rank, a.cols());
  Vector kept_b(rank);
  for (int k = 0; k < rank; ++k)
  {
    kept.row(k) = a.row(keep[k]);
    kept_b(k) = b(keep[k]);
  }
  auto basis = kept.transpose().colPivHouseholderQr();
  for (int i = 0; i < m; ++i)
  {
    if (std::binary_search(keep.begin(), keep.end(), i))
      continue;
    const Vector coeff = basis.solve(a.row(i).transpose());
    const double predicted = coeff.dot(kept_b);
    if (std::abs(predicted - b(i)) > 1e-9 * std::max(1.0, std::abs(b(i))))
    {
      std::ostringstream os;
      os << "equality row " << i << " is inconsistent with the others";
      throw QpError(QpStatus::Infeasible, os.str());
    }
  }
  return keep;
}

double regularization_shift(const Matrix& h)
{
  const double trace = h.trace();
  return trace > 0.0 ? 1e-8 * trace / static_cast<double>(h.rows()) : 1e-8;
}

// Well-conditioned Hessians are factored as given; the shift is reserved for
// singular or nearly singular ones.
bool needs_regularization(const Matrix& h)
{
  if (h.rows() == 0)
    return false;
  Eigen::LLT<Matrix> llt(h);
  if (llt.info() != Eigen::Success)
    return true;
  const Vector diag = llt.matrixL().toDenseMatrix().diagonal();
  return !(diag.minCoeff() > 0.0) || diag.maxCoeff() / diag.minCoeff() > 1e6;
}

class DualActiveSet
{
public:
  DualActiveSet(const Matrix& g, const Vector& g0, std::vector<Constraint> eq, std::vector<Constraint> in,
                const std::vector<int>* warm)
    : n_(static_cast<int>(g0.size())), g0_(g0), eq_(std::move(eq)), in_(std::move(in))
  {
    Eigen::LLT<Matrix> llt(g);
    if (llt.info() != Eigen::Success)
      throw QpError(QpStatus::IllConditioned, "Hessian is not positive definite after regularization");
    const Matrix l = llt.matrixL();
    const double diag_min = l.diagonal().minCoeff();
    const double diag_max = l.diagonal().maxCoeff();
    if (!(diag_min > 0.0) || diag_max / diag_min > 1e12)
      throw QpError(QpStatus::IllConditioned, "Hessian Cholesky factor is ill-conditioned");

    j_ = l.transpose().triangularView<Eigen::Upper>().solve(Matrix::Identity(n_, n_));
    r_ = Matrix::Zero(n_, n_);
    x_ = -llt.solve(g0_);

    const int m = static_cast<int>(in_.size());
    warm_.assign(m, false);
    if (warm)
      for (int i : *warm)
        if (i >= 0 && i < m)
          warm_[i] = true;
  }

  void run(int max_iterations)
  {
    const int p = static_cast<int>(eq_.size());
    const int m = static_cast<int>(in_.size());
    u_ = Vector::Zero(n_ + 1);
    active_.assign(n_ + 1, 0);
    Vector d(n_), z(n_), r(n_);

    for (int i = 0; i < p; ++i)
    {
      const Vector& np = eq_[i].normal;
      d = j_.transpose() * np;
      update_z(z, d);
      update_r(r, d);
      double t2 = 0.0;
      const double znp = free_norm2(d);
      if (znp > 1e-24 * d.squaredNorm())
        t2 = (-np.dot(x_) - eq_[i].offset) / znp;
      x_ += t2 * z;
      u_(iq_) = t2;
      for (int k = 0; k < iq_; ++k)
        u_(k) -= t2 * r(k);
      active_[iq_] = -i - 1;
      if (!add_constraint(d))
        throw QpError(QpStatus::Infeasible, "equality constraints are linearly dependent");
    }

    std::vector<char> is_active(m, false);
    Vector s(m);
    iterations_ = 0;
    for (;;)
    {
      if (++iterations_ > max_iterations)
        throw QpError(QpStatus::MaxIterations, "active-set iteration limit reached");

      int ip = select_violated(s, is_active);
      if (ip < 0)
        return;

      const Vector& np = in_[ip].normal;
      u_(iq_) = 0.0;
      active_[iq_] = ip;

      for (;;)
      {
        d = j_.transpose() * np;
        update_z(z, d);
        update_r(r, d);

        // partial step: largest dual step keeping active inequality multipliers >= 0
        int l = -1;
        double t1 = kInf;
        for (int k = p; k < iq_; ++k)
        {
          if (r(k) > 0.0 && u_(k) / r(k) < t1)
          {
            t1 = u_(k) / r(k);
            l = active_[k];
          }
        }
        double t2 = kInf;
        const double znp = free_norm2(d);
        if (znp > 1e-24 * d.squaredNorm())
        {
          t2 = -s(ip) / znp;
          if (t2 < 0.0)
            t2 = kInf;
        }
        const double t = std::min(t1, t2);
        if (t >= kInf)
          throw QpError(QpStatus::Infeasible, "no point satisfies the constraints");

        if (t2 >= kInf)
        {
          for (int k = 0; k < iq_; ++k)
            u_(k) -= t * r(k);
          u_(iq_) += t;
          is_active[l] = false;
          drop_constraint(l, p);
          if (++iterations_ > max_iterations)
            throw QpError(QpStatus::MaxIterations, "active-set iteration limit reached");
          continue;
        }

        x_ += t * z;
        for (int k = 0; k < iq_; ++k)
          u_(k) -= t * r(k);
        u_(iq_) += t;

        if (t == t2)
        {
          if (!add_constraint(d))
            throw QpError(QpStatus::IllConditioned, "degenerate working set");
          is_active[ip] = true;
          break;
        }

        is_active[l] = false;
        drop_constraint(l, p);
        s(ip) = in_[ip].normal.dot(x_) + in_[ip].offset;
        if (++iterations_ > max_iterations)
          throw QpError(QpStatus::MaxIterations, "active-set iteration limit reached");
      }
    }
  }

  const Vector& x() const { return x_; }
  int iterations() const { return iterations_; }

  /// Multipliers in the G x + g0 = sum u_i n_i convention.
  void multipliers(Vector& eq_u, Vector& in_u) const
  {
    eq_u = Vector::Zero(static_cast<Eigen::Index>(eq_.size()));
    in_u = Vector::Zero(static_cast<Eigen::Index>(in_.size()));
    for (int k = 0; k < iq_; ++k)
    {
      if (active_[k] < 0)
        eq_u(-active_[k] - 1) = u_(k);
      else
        in_u(active_[k]) = u_(k);
    }
  }

private:
  // Most violated inequality, preferring warm-start members; lowest index on ties.
  int select_violated(Vector& s, const std::vector<char>& is_active) const
  {
    const int m = static_cast<int>(in_.size());
    const double xs = std::max(1.0, x_.cwiseAbs().maxCoeff());
    int best = -1, best_warm = -1;
    for (int i = 0; i < m; ++i)
    {
      s(i) = in_[i].normal.dot(x_) + in_[i].offset;
      if (is_active[i])
        continue;
      const double tol = 1e-13 * std::max(xs, std::abs(in_[i].offset));
      if (s(i) >= -tol)
        continue;
      if (best < 0 || s(i) < s(best))
        best = i;
      if (warm_[i] && (best_warm < 0 || s(i) < s(best_warm)))
        best_warm = i;
    }
    return best_warm >= 0 ? best_warm : best;
  }

  // z' n_p, which equals the squared norm of the free part of d = J' n_p.
  double free_norm2(const Vector& d) const { return d.tail(n_ - iq_).squaredNorm(); }

  void update_z(Vector& z, const Vector& d) const
  {
    z.setZero();
    for (int j = iq_; j < n_; ++j)
      z += j_.col(j) * d(j);
  }

  void update_r(Vector& r, const Vector& d) const
  {
    for (int i = iq_ - 1; i >= 0; --i)
    {
      double sum = 0.0;
      for (int j = i + 1; j < iq_; ++j)
        sum += r_(i, j) * r(j);
      r(i) = (d(i) - sum) / r_(i, i);
    }
  }

  bool add_constraint(Vector& d)
  {
    for (int j = n_ - 1; j >= iq_ + 1; --j)
    {
      double cc = d(j - 1);
      double ss = d(j);
      const double h = std::hypot(cc, ss);
      if (h == 0.0)
        continue;
      d(j) = 0.0;
      ss /= h;
      cc /= h;
      if (cc < 0.0)
      {
        cc = -cc;
        ss = -ss;
        d(j - 1) = -h;
      }
      else
      {
        d(j - 1) = h;
      }
      const double xny = ss / (1.0 + cc);
      for (int k = 0; k < n_; ++k)
      {
        const double t1 = j_(k, j - 1);
        const double t2 = j_(k, j);
        j_(k, j - 1) = t1 * cc + t2 * ss;
        j_(k, j) = xny * (t1 + j_(k, j - 1)) - t2;
      }
    }
    ++iq_;
    for (int i = 0; i < iq_; ++i)
      r_(i, iq_ - 1) = d(i);
    if (std::abs(d(iq_ - 1)) <= kEps * r_norm_)
      return false;
    r_norm_ = std::max(r_norm_, std::abs(d(iq_ - 1)));
    return true;
  }

  void drop_constraint(int constraint, int p)
  {
    int qq = -1;
    for (int i = p; i < iq_; ++i)
      if (active_[i] == constraint)
      {
        qq = i;
        break;
      }
    if (qq < 0)
      return;

    for (int i = qq; i < iq_ - 1; ++i)
    {
      active_[i] = active_[i + 1];
      u_(i) = u_(i + 1);
      r_.col(i) = r_.col(i + 1);
    }
    active_[iq_ - 1] = active_[iq_];
    u_(iq_ - 1) = u_(iq_);
    active_[iq_] = 0;
    u_(iq_) = 0.0;
    for (int j = 0; j < iq_; ++j)
      r_(j, iq_ - 1) = 0.0;
    --iq_;
    if (iq_ == 0)
      return;

    for (int j = qq; j < iq_; ++j)
    {
      double cc = r_(j, j);
      double ss = r_(j + 1, j);
      const double h = std::hypot(cc, ss);
      if (h == 0.0)
        continue;
      cc /= h;
      ss /= h;
      r_(j + 1, j) = 0.0;
      if (cc < 0.0)
      {
        r_(j, j) = -h;
        cc = -cc;
        ss = -ss;
      }
      else
      {
        r_(j, j) = h;
      }
      const double xny = ss / (1.0 + cc);
      for (int k = j + 1; k < iq_; ++k)
      {
        const double t1 = r_(j, k);
        const double t2 = r_(j + 1, k);
        r_(j, k) = t1 * cc + t2 * ss;
        r_(j + 1, k) = xny * (t1 + r_(j, k)) - t2;
      }
      for (int k = 0; k < n_; ++k)
      {
        const double t1 = j_(k, j);
        const double t2 = j_(k, j + 1);
        j_(k, j) = t1 * cc + t2 * ss;
        j_(k, j + 1) = xny * (j_(k, j) + t1) - t2;
      }
    }
  }

  int n_;
  Vector g0_;
  std::vector<Constraint> eq_;
  std::vector<Constraint> in_;
  std::vector<char> warm_;
  Matrix j_, r_;
  Vector x_, u_;
  std::vector<int> active_;
  int iq_ = 0;
  int iterations_ = 0;
  double r_norm_ = 1.0;
};

struct Polished
{
  Vector z;
  Vector lambda;  // for the kept equality rows
};

// Re-solves the equality-constrained problem on the active set: bound-active
// variables are fixed, the rest satisfy the KKT system exactly.
std::optional<Polished> polish(const Matrix& h, const Vector& g, const Matrix& a, const Vector& b,
                               const std::vector<int>& fixed_index, const Vector& fixed_value)
{
  const int n = static_cast<int>(g.size());
  const int m = static_cast<int>(b.size());
  std::vector<int> free;
  std::vector<char> is_fixed(n, false);
  for (int i : fixed_index)
    is_fixed[i] = true;
  for (int i = 0; i < n; ++i)
    if (!is_fixed[i])
      free.push_back(i);
  const int nf = static_cast<int>(free.size());

  Vector z = Vector::Zero(n);
  for (std::size_t k = 0; k < fixed_index.size(); ++k)
    z(fixed_index[k]) = fixed_value(static_cast<Eigen::Index>(k));

  Matrix kkt = Matrix::Zero(nf + m, nf + m);
  Vector rhs(nf + m);
  const Vector hz_fixed = h * z;
  const Vector az_fixed = a * z;
  for (int r = 0; r < nf; ++r)
  {
    for (int c = 0; c < nf; ++c)
      kkt(r, c) = h(free[r], free[c]);
    for (int e = 0; e < m; ++e)
    {
      kkt(r, nf + e) = a(e, free[r]);
      kkt(nf + e, r) = a(e, free[r]);
    }
    rhs(r) = -(g(free[r]) + hz_fixed(free[r]));
  }
  for (int e = 0; e < m; ++e)
    rhs(nf + e) = b(e) - az_fixed(e);

  Eigen::FullPivLU<Matrix> lu(kkt);
  if (!lu.isInvertible())
    return std::nullopt;
  Vector sol = lu.solve(rhs);
  for (int it = 0; it < 2; ++it)
    sol += lu.solve(rhs - kkt * sol);
  if (!sol.allFinite())
    return std::nullopt;

  for (int r = 0; r < nf; ++r)
    z(free[r]) = sol(r);
  return Polished{z, sol.tail(m)};
}

}  // namespace

void require_finite(const Matrix& m, const char* what)
{
  if (!m.allFinite())
    throw DimensionError(std::string(what) + " has non-finite entries");
}

void require_finite(const Vector& v, const char* what)
{
  if (!v.allFinite())
    throw DimensionError(std::string(what) + " has non-finite entries");
}

int QpProblem::num_inequalities() const
{
  int m = static_cast<int>(lower_bounds.size());
  if (box)
    m += 2 * static_cast<int>(box->lower.size());
  return m;
}

QpProblem::BoundRow QpProblem::inequality(int i) const
{
  const int nl = static_cast<int>(lower_bounds.size());
  if (i < nl)
    return {lower_bounds[i].index, 1.0, lower_bounds[i].value};
  const int j = (i - nl) / 2;
  if ((i - nl) % 2 == 0)
    return {box->first + j, 1.0, box->lower(j)};
  return {box->first + j, -1.0, -box->upper(j)};
}

void QpProblem::validate() const
{
  const int n = num_variables();
  if (hessian.rows() != n || hessian.cols() != n)
    throw DimensionError("Hessian must be n x n");
  if (eq_matrix.rows() != eq_vector.size() || (eq_matrix.rows() > 0 && eq_matrix.cols() != n))
    throw DimensionError("equality matrix shape mismatch");
  require_finite(hessian, "Hessian");
  require_finite(gradient, "gradient");
  require_finite(eq_matrix, "equality matrix");
  require_finite(eq_vector, "equality vector");
  for (const auto& lb : lower_bounds)
  {
    if (lb.index < 0 || lb.index >= n)
      throw DimensionError("lower bound index out of range");
    if (!std::isfinite(lb.value))
      throw DimensionError("lower bound must be finite");
  }
  if (box)
  {
    if (box->lower.size() != box->upper.size() || box->first < 0 || box->first + box->lower.size() > n)
      throw DimensionError("box bounds out of range");
    for (Eigen::Index j = 0; j < box->lower.size(); ++j)
      if (std::isnan(box->lower(j)) || std::isnan(box->upper(j)) || box->lower(j) > box->upper(j))
        throw DimensionError("box bounds must satisfy lower <= upper");
  }

  const double norm = std::max(1.0, hessian.cwiseAbs().maxCoeff());
  if ((hessian - hessian.transpose()).cwiseAbs().maxCoeff() > 1e-10 * norm)
    throw DimensionError("Hessian is not symmetric");
  if (n > 0)
  {
    Eigen::SelfAdjointEigenSolver<Matrix> es(0.5 * (hessian + hessian.transpose()), Eigen::EigenvaluesOnly);
    if (es.eigenvalues().minCoeff() < -1e-9 * norm)
      throw DimensionError("Hessian is not positive semidefinite");
  }
}

QpSolution solve_qp(const QpProblem& problem, const std::vector<int>* warm_start)
{
  problem.validate();
  const int n = problem.num_variables();
  const int m_in = problem.num_inequalities();

  Matrix h = 0.5 * (problem.hessian + problem.hessian.transpose());
  const double shift = needs_regularization(h) ? regularization_shift(h) : 0.0;
  h.diagonal().array() += shift;

  const std::vector<int> rows = independent_rows(problem.eq_matrix, problem.eq_vector);
  Matrix a(static_cast<Eigen::Index>(rows.size()), n);
  Vector b(static_cast<Eigen::Index>(rows.size()));
  std::vector<Constraint> eq;
  for (std::size_t k = 0; k < rows.size(); ++k)
  {
    a.row(static_cast<Eigen::Index>(k)) = problem.eq_matrix.row(rows[k]);
    b(static_cast<Eigen::Index>(k)) = problem.eq_vector(rows[k]);
    eq.push_back({a.row(static_cast<Eigen::Index>(k)).transpose(), -b(static_cast<Eigen::Index>(k))});
  }

  // Infinite box entries become never-violated rows so the numbering is kept.
  std::vector<Constraint> in;
  in.reserve(m_in);
  for (int i = 0; i < m_in; ++i)
  {
    const auto row = problem.inequality(i);
    Vector normal = Vector::Zero(n);
    normal(row.index) = row.sign;
    const double offset = std::isfinite(row.rhs) ? -row.rhs : 1e300;
    in.push_back({normal, offset});
  }

  DualActiveSet solver(h, problem.gradient, eq, in, warm_start);
  solver.run(50 * (n + m_in) + 100);

  QpSolution sol;
  sol.z = solver.x();
  sol.iterations = solver.iterations();
  sol.regularization = shift;
  Vector eq_u, in_u;
  solver.multipliers(eq_u, in_u);
  sol.ineq_multipliers = in_u;
  sol.eq_multipliers = Vector::Zero(problem.num_equalities());
  for (std::size_t k = 0; k < rows.size(); ++k)
    sol.eq_multipliers(rows[k]) = -eq_u(static_cast<Eigen::Index>(k));
  for (int i = 0; i < m_in; ++i)
    if (in_u(i) != 0.0)
      sol.active_set.push_back(i);

  // Polish on the detected active set. Accepted only if it stays feasible and
  // dual feasible, otherwise the dual iterate is kept as is.
  std::vector<int> fixed;
  std::vector<double> values;
  std::vector<char> seen(n, false);
  for (int i : sol.active_set)
  {
    const auto row = problem.inequality(i);
    if (seen[row.index])
      continue;
    seen[row.index] = true;
    fixed.push_back(row.index);
    values.push_back(row.sign > 0 ? row.rhs : -row.rhs);
  }
  const Vector fixed_value = Eigen::Map<const Vector>(values.data(), static_cast<Eigen::Index>(values.size()));
  if (auto p = polish(h, problem.gradient, a, b, fixed, fixed_value))
  {
    QpSolution cand = sol;
    cand.z = p->z;
    cand.eq_multipliers.setZero();
    for (std::size_t k = 0; k < rows.size(); ++k)
      cand.eq_multipliers(rows[k]) = p->lambda(static_cast<Eigen::Index>(k));
    Vector grad = h * cand.z + problem.gradient;
    if (problem.num_equalities() > 0)
      grad += problem.eq_matrix.transpose() * cand.eq_multipliers;
    cand.ineq_multipliers.setZero();
    bool ok = true;
    std::vector<char> assigned(n, false);
    for (int i : sol.active_set)
    {
      const auto row = problem.inequality(i);
      if (assigned[row.index])
        continue;
      assigned[row.index] = true;
      const double mu = row.sign * grad(row.index);
      cand.ineq_multipliers(i) = mu;
      if (mu < -1e-9 * std::max(1.0, std::abs(in_u(i))))
        ok = false;
    }
    for (int i = 0; i < m_in && ok; ++i)
    {
      const auto row = problem.inequality(i);
      if (!std::isfinite(row.rhs))
        continue;
      const double slack = row.sign * cand.z(row.index) - row.rhs;
      if (slack < -1e-10 * std::max(1.0, std::abs(row.rhs)))
        ok = false;
    }
    if (ok)
    {
      cand.ineq_multipliers = cand.ineq_multipliers.cwiseMax(0.0);
      sol = std::move(cand);
    }
  }

  sol.objective = 0.5 * sol.z.dot(problem.hessian * sol.z) + problem.gradient.dot(sol.z);
  return sol;
}

KktResiduals kkt_residuals(const QpProblem& problem, const QpSolution& solution)
{
  KktResiduals res;
  const int n = problem.num_variables();
  Matrix h = 0.5 * (problem.hessian + problem.hessian.transpose());
  h.diagonal().array() += solution.regularization;

  Vector grad = h * solution.z + problem.gradient;
  if (problem.num_equalities() > 0)
  {
    grad += problem.eq_matrix.transpose() * solution.eq_multipliers;
    res.primal = (problem.eq_matrix * solution.z - problem.eq_vector).cwiseAbs().maxCoeff();
  }
  for (int i = 0; i < problem.num_inequalities(); ++i)
  {
    const auto row = problem.inequality(i);
    const double mu = solution.ineq_multipliers(i);
    grad(row.index) -= mu * row.sign;
    if (!std::isfinite(row.rhs))
      continue;
    const double slack = row.sign * solution.z(row.index) - row.rhs;
    res.primal = std::max(res.primal, -slack);
    res.complementarity = std::max(res.complementarity, std::abs(mu * slack));
    res.dual = std::max(res.dual, -mu);
  }
  res.stationarity = n > 0 ? grad.cwiseAbs().maxCoeff() : 0.0;
  res.stationarity_scale = 1.0 + (n > 0 ? problem.gradient.cwiseAbs().maxCoeff() : 0.0);
  res.primal = std::max(res.primal, 0.0);
  return res;
}

}  // namespace straightleg::math
