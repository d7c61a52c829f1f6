#pragma once

#include <algorithm>
#include <chrono>
#include <cmath>
#include <vector>

#include "mvsc/core.hpp"
#include "mvsc/graph.hpp"
#include "mvsc/simplex_qp.hpp"
#include "mvsc/spectral.hpp"
#include "mvsc/trace.hpp"

namespace mvsc {

enum class EmbeddingKind { exact, nystrom };

struct EmbeddingBackend {
  EmbeddingKind kind = EmbeddingKind::exact;
  NystromConfig nystrom;  // rank is overridden by k
};

/// Orthonormal k-dimensional spectral embedding of one affinity matrix.
/// The Nystrom stream is seeded from (seed, view_id, order).
inline Partition embed_affinity(const AffinityMatrix& a, int k, const EmbeddingBackend& backend) {
  if (backend.kind == EmbeddingKind::exact) return bottom_k_eigenvectors(normalized_laplacian(a), k);
  NystromConfig cfg = backend.nystrom;
  cfg.rank = k;
  cfg.seed = derive_seed(backend.nystrom.seed, static_cast<std::uint64_t>(a.view_id),
                         static_cast<std::uint64_t>(a.order));
  return orthogonalize(nystrom_embedding(normalized_affinity(a), cfg)).partition;
}

/// Partitions indexed [view][order - 1].
using PartitionSet = std::vector<std::vector<Matrix>>;

inline PartitionSet base_partitions(const std::vector<AffinityMatrix>& first_order, int orders, int k,
                                    const EmbeddingBackend& backend = {}) {
  require(!first_order.empty(), ErrorCode::invalid_config, "no views");
  require(orders >= 1, ErrorCode::invalid_order, "order must be >= 1");
  PartitionSet out;
  for (const AffinityMatrix& a : first_order) {
    std::vector<Matrix> per_order;
    for (const AffinityMatrix& ao : affinity_ladder(a, orders)) per_order.push_back(embed_affinity(ao, k, backend).values);
    out.push_back(std::move(per_order));
  }
  return out;
}

/// Embedding of the mean first-order affinity.
inline Matrix average_partition(const std::vector<AffinityMatrix>& first_order, int k,
                                const EmbeddingBackend& backend = {}) {
  require(!first_order.empty(), ErrorCode::invalid_config, "no views");
  AffinityMatrix avg{Matrix::Zero(first_order.front().values.rows(), first_order.front().values.cols()), 1, -1};
  for (const AffinityMatrix& a : first_order) avg.values += a.values;
  avg.values /= static_cast<double>(first_order.size());
  return embed_affinity(avg, k, backend).values;
}

/// Large-n route: sparse KNN graphs and Nystrom columns computed on demand,
/// so no n x n matrix is ever formed. Returns the base partitions and F.
struct SparseLfInputs {
  PartitionSet base;
  Matrix average;
};

inline SparseLfInputs sparse_nystrom_inputs(const std::vector<FeatureView>& views, int neighbors, double bandwidth,
                                            int orders, int k, const NystromConfig& nystrom) {
  require(!views.empty(), ErrorCode::invalid_config, "no views");
  SparseLfInputs out;
  std::vector<SparseMatrix> graphs;
  for (const FeatureView& view : views) graphs.push_back(knn_affinity_sparse(view, neighbors, bandwidth));
  const Index n = graphs.front().rows();
  auto embed = [&](const SparseMatrix& g, int view_id, int order) {
    NystromConfig cfg = nystrom;
    cfg.rank = k;
    cfg.seed = derive_seed(nystrom.seed, static_cast<std::uint64_t>(view_id), static_cast<std::uint64_t>(order));
    const NormalizedColumns cols(g, order);
    return orthogonalize(nystrom_embedding(n, cols, cfg)).partition.values;
  };
  for (std::size_t p = 0; p < graphs.size(); ++p) {
    std::vector<Matrix> per_order;
    for (int o = 1; o <= orders; ++o) per_order.push_back(embed(graphs[p], views[p].view_id, o));
    out.base.push_back(std::move(per_order));
  }
  SparseMatrix avg = graphs.front();
  for (std::size_t p = 1; p < graphs.size(); ++p) avg += graphs[p];
  avg /= static_cast<double>(graphs.size());
  out.average = embed(avg, -1, 1);
  return out;
}

/// Weight-step coefficient: the stationarity-derived 1/lambda2, or the
/// literal lambda1/lambda2 scaling.
enum class QpVariant { derived, literal };

struct LfProblem {
  PartitionSet base;  // H_p^(o), [view][order - 1]
  Matrix average;     // F
  double lambda1 = 1.0;
  double lambda2 = 1.0;
  QpVariant variant = QpVariant::derived;

  int views() const { return static_cast<int>(base.size()); }
  int orders() const { return base.empty() ? 0 : static_cast<int>(base.front().size()); }
  int k() const { return static_cast<int>(average.cols()); }
  Index n() const { return average.rows(); }
};

struct LfState {
  Matrix consensus;                           // H*
  std::vector<std::vector<Matrix>> rotations; // W_p^(o)
  SimplexWeights mu;
};

/// M_pq = sum_o Tr(H_p^T H_q) / (|H_p|_F |H_q|_F).
inline Matrix correlation_matrix_partitions(const PartitionSet& base) {
  const Index v = static_cast<Index>(base.size());
  require(v >= 1, ErrorCode::invalid_config, "no views");
  Matrix m = Matrix::Zero(v, v);
  for (std::size_t o = 0; o < base.front().size(); ++o)
    for (Index p = 0; p < v; ++p)
      for (Index q = p; q < v; ++q) {
        const Matrix& hp = base[static_cast<std::size_t>(p)][o];
        const Matrix& hq = base[static_cast<std::size_t>(q)][o];
        const double denom = hp.norm() * hq.norm();
        require(denom > 0.0, ErrorCode::degenerate_view, "zero partition matrix");
        const double val = p == q ? 1.0 : hp.cwiseProduct(hq).sum() / denom;
        m(p, q) += val;
        if (p != q) m(q, p) += val;
      }
  return m;
}

inline void validate(const LfProblem& prob) {
  require(prob.views() >= 1 && prob.orders() >= 1, ErrorCode::invalid_config, "problem needs >= 1 view and order");
  require(prob.lambda1 >= 0.0 && prob.lambda2 >= 0.0, ErrorCode::invalid_config, "lambdas must be non-negative");
  const Index n = prob.n();
  const int k = prob.k();
  require(k >= 1 && k <= n, ErrorCode::invalid_rank, "k must be in [1, n]");
  for (const auto& view : prob.base) {
    require(static_cast<int>(view.size()) == prob.orders(), ErrorCode::shape_mismatch, "views differ in order count");
    for (const Matrix& h : view)
      require(h.rows() == n && h.cols() == k, ErrorCode::shape_mismatch, "base partition shape differs from F");
  }
}

namespace detail {

inline Matrix combined_partition(const LfProblem& prob, const LfState& s) {
  Matrix sum = Matrix::Zero(prob.n(), prob.k());
  for (int p = 0; p < prob.views(); ++p)
    for (int o = 0; o < prob.orders(); ++o)
      sum += s.mu(p) * prob.base[static_cast<std::size_t>(p)][static_cast<std::size_t>(o)] *
             s.rotations[static_cast<std::size_t>(p)][static_cast<std::size_t>(o)];
  return sum;
}

// t_p = Tr(H*^T sum_o H_p^(o) W_p^(o))
inline Vector alignment_scores(const LfProblem& prob, const LfState& s) {
  Vector t = Vector::Zero(prob.views());
  for (int p = 0; p < prob.views(); ++p)
    for (int o = 0; o < prob.orders(); ++o)
      t(p) += (s.consensus.transpose() * prob.base[static_cast<std::size_t>(p)][static_cast<std::size_t>(o)] *
               s.rotations[static_cast<std::size_t>(p)][static_cast<std::size_t>(o)])
                  .trace();
  return t;
}

}  // namespace detail

/// Tr(H*^T S) + lambda1 Tr(H*^T F) - lambda2 mu^T M mu.
inline double lf_objective(const LfProblem& prob, const Matrix& m, const LfState& s) {
  const double align = (s.consensus.transpose() * detail::combined_partition(prob, s)).trace();
  return align + prob.lambda1 * (s.consensus.transpose() * prob.average).trace() - prob.lambda2 * s.mu.dot(m * s.mu);
}

inline double lf_objective(const LfProblem& prob, const LfState& s) {
  return lf_objective(prob, correlation_matrix_partitions(prob.base), s);
}

inline double objective_upper_bound(int orders, int views, double lambda1, int k) {
  const double ov = static_cast<double>(orders) * static_cast<double>(views);
  return 0.5 * (1.0 + ov * ov + 2.0 * lambda1) * static_cast<double>(k);
}

/// H* = Procrustes solution for C = sum mu_p H_p W_p + lambda1 F.
inline void update_consensus(const LfProblem& prob, LfState& s) {
  s.consensus = procrustes_align(detail::combined_partition(prob, s) + prob.lambda1 * prob.average);
}

/// W_p^(o) = Procrustes solution for mu_p H_p^T H*; frozen while mu_p = 0.
inline void update_rotations(const LfProblem& prob, LfState& s, const Matrix& reference) {
  for (int p = 0; p < prob.views(); ++p) {
    if (s.mu(p) == 0.0) continue;
    for (int o = 0; o < prob.orders(); ++o)
      s.rotations[static_cast<std::size_t>(p)][static_cast<std::size_t>(o)] =
          procrustes_align(s.mu(p) * prob.base[static_cast<std::size_t>(p)][static_cast<std::size_t>(o)].transpose() *
                           reference);
  }
}

inline void update_rotations(const LfProblem& prob, LfState& s) { update_rotations(prob, s, s.consensus); }

/// Weight step. lambda2 > 0: simplex QP with M and f = c * t; lambda2 = 0:
/// the linear objective is maximized at the vertex of the best-aligned view.
inline void update_weights(const LfProblem& prob, const Matrix& m, LfState& s) {
  const int v = prob.views();
  const Vector t = detail::alignment_scores(prob, s);
  if (prob.lambda2 == 0.0) {
    Index best = 0;
    for (Index p = 1; p < v; ++p)
      if (t(p) > t(best)) best = p;
    s.mu = Vector::Zero(v);
    s.mu(best) = 1.0;
    return;
  }
  if (v == 1) {
    s.mu = Vector::Ones(1);
    return;
  }
  const double coeff = prob.variant == QpVariant::derived ? 1.0 / prob.lambda2 : prob.lambda1 / prob.lambda2;
  Vector next;
  try {
    next = solve_simplex_qp(m, coeff * t, {1e-12, 10000}).weights;
  } catch (const QpConvergenceError& e) {
    next = e.best();
  }
  if (prob.variant == QpVariant::derived) {
    // exact block step: never accept a worse weight vector
    auto value = [&](const Vector& mu) { return mu.dot(t) - prob.lambda2 * mu.dot(m * mu); };
    const double old = value(s.mu);
    if (value(next) < old - 1e-12 * std::max(1.0, std::abs(old))) return;
  }
  s.mu = next;
}

inline LfState initial_lf_state(const LfProblem& prob) {
  LfState s;
  s.consensus = Matrix::Zero(prob.n(), prob.k());
  s.mu = Vector::Constant(prob.views(), 1.0 / prob.views());
  s.rotations.assign(static_cast<std::size_t>(prob.views()),
                     std::vector<Matrix>(static_cast<std::size_t>(prob.orders()), Matrix::Identity(prob.k(), prob.k())));
  return s;
}

struct LfResult {
  LfState state;
  SolveTrace trace;
};

/// Alternating maximization: rotations, then weights, then consensus, until
/// |obj_t - obj_{t-1}| / |obj_t| < tol. The first rotation step reads the
/// weighted sum of base partitions in place of the all-zero initial H*.
inline LfResult solve_lf(const LfProblem& prob, double tol = 1e-4, int max_iter = 100) {
  validate(prob);
  const Matrix m = correlation_matrix_partitions(prob.base);
  LfResult res{initial_lf_state(prob), {}};
  LfState& s = res.state;
  double prev = 0.0;
  for (int it = 1; it <= max_iter; ++it) {
    const auto t0 = std::chrono::steady_clock::now();
    if (it == 1) {
      update_rotations(prob, s, detail::combined_partition(prob, s));
    } else {
      update_rotations(prob, s);
      res.trace.step_objective.push_back(lf_objective(prob, m, s));
    }
    update_weights(prob, m, s);
    if (it > 1) res.trace.step_objective.push_back(lf_objective(prob, m, s));
    update_consensus(prob, s);
    const double obj = lf_objective(prob, m, s);
    res.trace.step_objective.push_back(obj);
    res.trace.record(obj, s.mu, std::chrono::steady_clock::now() - t0);
    if (it > 1 && std::abs(obj - prev) < tol * std::abs(obj)) {
      res.trace.converged = true;
      break;
    }
    prev = obj;
  }
  return res;
}

}  // namespace mvsc
