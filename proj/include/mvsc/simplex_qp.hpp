#pragma once

#include <algorithm>
#include <cmath>
#include <functional>
#include <vector>

#include "mvsc/core.hpp"

namespace mvsc {

/// View weights on the probability simplex.
using SimplexWeights = Vector;

struct QpConfig {
  double tolerance = 1e-8;
  int max_iterations = 10000;
};

/// Thrown when the iteration cap is hit; carries the best feasible iterate.
class QpConvergenceError : public Error {
 public:
  QpConvergenceError(SimplexWeights best, double residual)
      : Error(ErrorCode::convergence_failure,
              "simplex QP did not reach tolerance (residual " + std::to_string(residual) + ")"),
        best_(std::move(best)) {}
  const SimplexWeights& best() const noexcept { return best_; }

 private:
  SimplexWeights best_;
};

/// Euclidean projection onto {mu >= 0, sum mu = 1} (sort-and-threshold).
inline SimplexWeights project_to_simplex(const Vector& v) {
  require(all_finite(v), ErrorCode::rejected_input, "projection input is not finite");
  const Index n = v.size();
  require(n >= 1, ErrorCode::rejected_input, "empty weight vector");
  std::vector<double> u(v.data(), v.data() + n);
  std::sort(u.begin(), u.end(), std::greater<>());
  double cumsum = 0.0;
  double theta = 0.0;
  for (Index j = 0; j < n; ++j) {
    cumsum += u[static_cast<std::size_t>(j)];
    const double t = (cumsum - 1.0) / static_cast<double>(j + 1);
    if (u[static_cast<std::size_t>(j)] - t > 0.0) theta = t;
  }
  SimplexWeights out = (v.array() - theta).max(0.0).matrix();
  const double total = out.sum();
  if (total > 0.0) out /= total;
  return out;
}

/// Symmetrize and clamp negative eigenvalues to zero.
inline Matrix repair_psd(const Matrix& m) {
  const Matrix sym = 0.5 * (m + m.transpose());
  Eigen::SelfAdjointEigenSolver<Matrix> es(sym);
  const Vector clamped = es.eigenvalues().cwiseMax(0.0);
  Matrix out = es.eigenvectors() * clamped.asDiagonal() * es.eigenvectors().transpose();
  return 0.5 * (out + out.transpose());
}

inline double qp_objective(const Matrix& m, const Vector& f, const Vector& mu) {
  return mu.dot(m * mu) - f.dot(mu);
}

struct QpResult {
  SimplexWeights weights;
  std::vector<double> objective_trace;
  int iterations = 0;
  double residual = 0.0;
};

namespace detail {

inline double kkt_residual(const Matrix& m, const Vector& f, const Vector& mu) {
  const Vector grad = 2.0 * m * mu - f;
  return (mu - project_to_simplex(mu - grad)).lpNorm<Eigen::Infinity>();
}

// Solve the equality-constrained problem on the current support exactly and
// accept it when it stays feasible, lowers the KKT residual and does not
// increase the objective beyond roundoff.
inline void polish_on_support(const Matrix& m, const Vector& f, Vector& mu) {
  std::vector<Index> support;
  for (Index i = 0; i < mu.size(); ++i)
    if (mu(i) > 1e-12) support.push_back(i);
  const Index s = static_cast<Index>(support.size());
  if (s < 2) return;
  Matrix kkt = Matrix::Zero(s + 1, s + 1);
  Vector rhs(s + 1);
  for (Index a = 0; a < s; ++a) {
    for (Index b = 0; b < s; ++b) kkt(a, b) = 2.0 * m(support[a], support[b]);
    kkt(a, s) = 1.0;
    kkt(s, a) = 1.0;
    rhs(a) = f(support[a]);
  }
  rhs(s) = 1.0;
  const Vector sol = kkt.completeOrthogonalDecomposition().solve(rhs);
  if (!sol.allFinite()) return;
  Vector cand = Vector::Zero(mu.size());
  for (Index a = 0; a < s; ++a) {
    if (sol(a) < 0.0) return;
    cand(support[a]) = sol(a);
  }
  if (std::abs(cand.sum() - 1.0) > 1e-10) return;
  cand /= cand.sum();
  const double before = qp_objective(m, f, mu);
  if (qp_objective(m, f, cand) <= before + 1e-12 * std::max(1.0, std::abs(before)) &&
      kkt_residual(m, f, cand) < kkt_residual(m, f, mu))
    mu = cand;
}

}  // namespace detail

/// min mu^T M mu - f^T mu over the simplex by monotone accelerated
/// projected gradient (FISTA with backtracking and objective safeguard).
inline QpResult solve_simplex_qp(const Matrix& m_in, const Vector& f, const QpConfig& cfg = {}) {
  const Index v = m_in.rows();
  require(v >= 1 && m_in.cols() == v, ErrorCode::shape_mismatch, "M must be square and non-empty");
  require(f.size() == v, ErrorCode::shape_mismatch, "f length must match M");
  require(cfg.tolerance > 0.0, ErrorCode::invalid_config, "QP tolerance must be positive");
  require(all_finite(m_in) && all_finite(f), ErrorCode::rejected_input, "QP data is not finite");

  QpResult res;
  if (v == 1) {
    res.weights = Vector::Ones(1);
    res.objective_trace.push_back(qp_objective(m_in, f, res.weights));
    return res;
  }
  const Matrix m = repair_psd(m_in);
  auto objective = [&](const Vector& mu) { return qp_objective(m, f, mu); };
  auto gradient = [&](const Vector& mu) -> Vector { return 2.0 * m * mu - f; };

  Vector x = Vector::Constant(v, 1.0 / static_cast<double>(v));
  Vector y = x;
  double fx = objective(x);
  double t = 1.0;
  const double spectral = Eigen::SelfAdjointEigenSolver<Matrix>(m, Eigen::EigenvaluesOnly).eigenvalues().maxCoeff();
  double lip = std::max(2.0 * spectral, 1e-12);
  res.objective_trace.push_back(fx);

  for (int it = 1; it <= cfg.max_iterations; ++it) {
    res.iterations = it;
    const Vector gy = gradient(y);
    const double fy = objective(y);
    Vector z;
    // backtracking on the quadratic upper model
    for (int bt = 0; bt < 60; ++bt) {
      z = project_to_simplex(y - gy / lip);
      const Vector d = z - y;
      if (objective(z) <= fy + gy.dot(d) + 0.5 * lip * d.squaredNorm() + 1e-15 * std::abs(fy)) break;
      lip *= 2.0;
    }
    const double fz = objective(z);
    const double t_next = 0.5 * (1.0 + std::sqrt(1.0 + 4.0 * t * t));
    Vector x_next = fz <= fx ? z : x;
    y = x_next + (t / t_next) * (z - x_next) + ((t - 1.0) / t_next) * (x_next - x);
    x = std::move(x_next);
    fx = objective(x);
    t = t_next;
    res.objective_trace.push_back(fx);

    res.residual = detail::kkt_residual(m, f, x);
    if (res.residual <= cfg.tolerance) break;
  }
  detail::polish_on_support(m, f, x);
  res.weights = project_to_simplex(x);
  res.residual = detail::kkt_residual(m, f, res.weights);
  res.objective_trace.push_back(objective(res.weights));
  if (res.residual > cfg.tolerance) throw QpConvergenceError(res.weights, res.residual);
  return res;
}

}  // namespace mvsc
