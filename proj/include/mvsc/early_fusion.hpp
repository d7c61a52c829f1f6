#pragma once

#include <chrono>
#include <cmath>
#include <vector>

#include "mvsc/core.hpp"
#include "mvsc/graph.hpp"
#include "mvsc/simplex_qp.hpp"
#include "mvsc/spectral.hpp"
#include "mvsc/trace.hpp"

namespace mvsc {

/// Optimal-neighbourhood Laplacian problem. Laplacians and affinities are
/// indexed [view][order - 1].
struct EfProblem {
  std::vector<std::vector<Matrix>> laplacians;
  std::vector<std::vector<Matrix>> affinities;
  int k = 2;
  double alpha = 0.0;

  int views() const { return static_cast<int>(laplacians.size()); }
  int orders() const { return laplacians.empty() ? 0 : static_cast<int>(laplacians.front().size()); }
  Index n() const { return laplacians.front().front().rows(); }
};

struct EfState {
  Partition h;
  Matrix p;        // n x k, orthonormal
  Vector lambda;   // diagonal of Lambda, each in [0, 1]
  SimplexWeights mu;
};

/// Affinity ladders and normalized Laplacians of orders 1..orders per view.
inline EfProblem make_ef_problem(const std::vector<AffinityMatrix>& first_order, int orders, int k, double alpha) {
  EfProblem prob;
  prob.k = k;
  prob.alpha = alpha;
  for (const AffinityMatrix& a : first_order) {
    std::vector<Matrix> affs, laps;
    for (const AffinityMatrix& ao : affinity_ladder(a, orders)) {
      laps.push_back(normalized_laplacian(ao).values);
      affs.push_back(ao.values);
    }
    prob.affinities.push_back(std::move(affs));
    prob.laplacians.push_back(std::move(laps));
  }
  return prob;
}

/// M_pq = sum_o Tr(A_p A_q) / (|A_p|_F |A_q|_F), indexed [view][order - 1].
inline Matrix correlation_matrix_affinity(const std::vector<std::vector<Matrix>>& affinities) {
  const Index v = static_cast<Index>(affinities.size());
  require(v >= 1, ErrorCode::shape_mismatch, "no views");
  const std::size_t orders = affinities.front().size();
  Matrix m = Matrix::Zero(v, v);
  for (std::size_t o = 0; o < orders; ++o) {
    std::vector<double> norms(static_cast<std::size_t>(v));
    for (Index p = 0; p < v; ++p) {
      const auto& views = affinities[static_cast<std::size_t>(p)];
      require(views.size() == orders, ErrorCode::shape_mismatch, "views differ in order count");
      require(views[o].rows() == affinities.front()[o].rows() && views[o].cols() == views[o].rows(),
              ErrorCode::shape_mismatch, "affinity shapes differ");
      norms[static_cast<std::size_t>(p)] = views[o].norm();
      require(norms[static_cast<std::size_t>(p)] > 0.0, ErrorCode::degenerate_view,
              "affinity of view " + std::to_string(p) + " has zero norm");
    }
    for (Index p = 0; p < v; ++p)
      for (Index q = p; q < v; ++q) {
        const Matrix& ap = affinities[static_cast<std::size_t>(p)][o];
        const Matrix& aq = affinities[static_cast<std::size_t>(q)][o];
        // Tr(A_p A_q) = sum_ij A_p(i,j) A_q(j,i)
        const double tr = p == q ? ap.squaredNorm() : ap.cwiseProduct(aq.transpose()).sum();
        const double val = p == q ? 1.0 : tr / (norms[static_cast<std::size_t>(p)] * norms[static_cast<std::size_t>(q)]);
        m(p, q) += val;
        if (p != q) m(q, p) += val;
      }
  }
  return m;
}

namespace detail {

inline Matrix combined_laplacian(const EfProblem& prob, const Vector& mu, int o) {
  Matrix out = Matrix::Zero(prob.n(), prob.n());
  for (int p = 0; p < prob.views(); ++p) out += mu(p) * prob.laplacians[static_cast<std::size_t>(p)][static_cast<std::size_t>(o)];
  return out;
}

inline Matrix low_rank_affinity(const EfState& s) {
  return s.p * s.lambda.asDiagonal() * s.p.transpose();
}

}  // namespace detail

/// Tr(H^T L* H) + sum_o |L* - L_mu^(o)|_F^2 + alpha mu^T M mu, L* = I - P Lambda P^T.
inline double ef_objective(const EfProblem& prob, const Matrix& m, const EfState& s) {
  const Index n = prob.n();
  const Matrix lstar = Matrix::Identity(n, n) - detail::low_rank_affinity(s);
  double obj = (s.h.values.transpose() * lstar * s.h.values).trace();
  for (int o = 0; o < prob.orders(); ++o) obj += (lstar - detail::combined_laplacian(prob, s.mu, o)).squaredNorm();
  obj += prob.alpha * s.mu.dot(m * s.mu);
  return obj;
}

inline double ef_objective(const EfProblem& prob, const EfState& s) {
  return ef_objective(prob, correlation_matrix_affinity(prob.affinities), s);
}

/// Block update of (P, Lambda) with H and mu fixed: P spans the top-k
/// eigenvectors of C = H H^T + 2 sum_o (I - L_mu^(o)), and each Lambda_ii is
/// the clamped Rayleigh quotient p_i^T C p_i / (2 O).
inline void update_p_lambda(const EfProblem& prob, EfState& s) {
  const Index n = prob.n();
  const int orders = prob.orders();
  Matrix c = s.h.values * s.h.values.transpose();
  for (int o = 0; o < orders; ++o) c += 2.0 * (Matrix::Identity(n, n) - detail::combined_laplacian(prob, s.mu, o));
  const EigenPair top = top_k_eigenvectors(c, prob.k);
  s.p = top.vectors;
  s.lambda.resize(prob.k);
  for (int i = 0; i < prob.k; ++i) s.lambda(i) = std::clamp(top.values(i) / (2.0 * orders), 0.0, 1.0);
}

/// H-step: bottom-k eigenvectors of L* = I - P Lambda P^T.
inline void update_h_ef(const EfProblem& prob, EfState& s) {
  const Index n = prob.n();
  s.h = bottom_k_eigenvectors(Matrix(Matrix::Identity(n, n) - detail::low_rank_affinity(s)), prob.k);
}

/// Z_pq = sum_o Tr(L_p^(o) L_q^(o)).
inline Matrix laplacian_gram(const EfProblem& prob) {
  const int v = prob.views();
  Matrix z = Matrix::Zero(v, v);
  for (int o = 0; o < prob.orders(); ++o)
    for (int p = 0; p < v; ++p)
      for (int q = p; q < v; ++q) {
        const double t = prob.laplacians[static_cast<std::size_t>(p)][static_cast<std::size_t>(o)]
                             .cwiseProduct(prob.laplacians[static_cast<std::size_t>(q)][static_cast<std::size_t>(o)])
                             .sum();
        z(p, q) += t;
        if (p != q) z(q, p) += t;
      }
  return z;
}

/// mu-step: min mu^T (Z + alpha M) mu - 2 z^T mu over the simplex with
/// z_p = sum_o Tr(L* L_p^(o)). Keeps the incoming mu if the QP result is
/// not at least as good.
inline void update_mu_ef(const EfProblem& prob, const Matrix& m, const Matrix& gram, EfState& s,
                         const QpConfig& qp = {1e-12, 10000}) {
  const int v = prob.views();
  if (v == 1) {
    s.mu = Vector::Ones(1);
    return;
  }
  const Index n = prob.n();
  const Matrix lstar = Matrix::Identity(n, n) - detail::low_rank_affinity(s);
  Vector lin(v);
  for (int p = 0; p < v; ++p) {
    double t = 0.0;
    for (int o = 0; o < prob.orders(); ++o)
      t += lstar.cwiseProduct(prob.laplacians[static_cast<std::size_t>(p)][static_cast<std::size_t>(o)]).sum();
    lin(p) = 2.0 * t;
  }
  const Matrix quad = gram + prob.alpha * m;
  Vector next;
  try {
    next = solve_simplex_qp(quad, lin, qp).weights;
  } catch (const QpConvergenceError& e) {
    next = e.best();
  }
  if (qp_objective(quad, lin, next) <= qp_objective(quad, lin, s.mu)) s.mu = next;
}

inline void validate(const EfProblem& prob) {
  require(prob.views() >= 1 && prob.orders() >= 1, ErrorCode::invalid_config, "problem needs >= 1 view and order");
  require(prob.alpha >= 0.0, ErrorCode::invalid_config, "alpha must be non-negative");
  require(prob.affinities.size() == prob.laplacians.size(), ErrorCode::shape_mismatch, "affinity/Laplacian view count");
  const Index n = prob.n();
  require(prob.k >= 1 && prob.k <= n, ErrorCode::invalid_rank, "k must be in [1, n]");
  for (const auto& view : prob.laplacians) {
    require(static_cast<int>(view.size()) == prob.orders(), ErrorCode::shape_mismatch, "views differ in order count");
    for (const auto& l : view)
      require(l.rows() == n && l.cols() == n, ErrorCode::shape_mismatch, "Laplacian shapes differ");
  }
}

/// Feasible start: uniform mu, (P, Lambda) from the bottom-k eigenpairs of
/// the order-averaged uniform Laplacian, H = P.
inline EfState initial_ef_state(const EfProblem& prob) {
  const Index n = prob.n();
  EfState s;
  s.mu = Vector::Constant(prob.views(), 1.0 / prob.views());
  Matrix avg = Matrix::Zero(n, n);
  for (int o = 0; o < prob.orders(); ++o) avg += detail::combined_laplacian(prob, s.mu, o);
  avg /= prob.orders();
  const EigenPair neg = top_k_eigenvectors(-avg, prob.k);
  s.p = neg.vectors;
  s.lambda = (Vector::Ones(prob.k) + neg.values).cwiseMax(0.0).cwiseMin(1.0);
  s.h = {s.p, true};
  return s;
}

struct EfResult {
  EfState state;
  SolveTrace trace;
};

/// Alternates H, (P, Lambda) and mu steps until the relative objective
/// change drops below tol.
inline EfResult solve_ef(const EfProblem& prob, double tol = 1e-4, int max_iter = 100) {
  validate(prob);
  const Matrix m = correlation_matrix_affinity(prob.affinities);
  const Matrix gram = laplacian_gram(prob);
  EfResult res{initial_ef_state(prob), {}};
  EfState& s = res.state;
  double prev = ef_objective(prob, m, s);
  res.trace.step_objective.push_back(prev);
  for (int it = 1; it <= max_iter; ++it) {
    const auto t0 = std::chrono::steady_clock::now();
    update_h_ef(prob, s);
    res.trace.step_objective.push_back(ef_objective(prob, m, s));
    update_p_lambda(prob, s);
    res.trace.step_objective.push_back(ef_objective(prob, m, s));
    update_mu_ef(prob, m, gram, s);
    const double obj = ef_objective(prob, m, s);
    res.trace.step_objective.push_back(obj);
    res.trace.record(obj, s.mu, std::chrono::steady_clock::now() - t0);
    if (std::abs(obj - prev) <= tol * std::abs(obj)) {
      res.trace.converged = true;
      break;
    }
    prev = obj;
  }
  return res;
}

}  // namespace mvsc
