#pragma once

#include <algorithm>
#include <cmath>
#include <numeric>
#include <optional>
#include <vector>

#include <Eigen/Sparse>

#include "mvsc/core.hpp"

namespace mvsc {

struct FeatureView {
  Matrix data;  // n x d, rows are samples
  int view_id = 0;
};

struct AffinityMatrix {
  Matrix values;
  int order = 1;
  int view_id = 0;
};

struct LaplacianMatrix {
  Matrix values;
  int order = 1;
  int view_id = 0;
};

using DegreeVector = Vector;
using SparseMatrix = Eigen::SparseMatrix<double>;

struct GraphConfig {
  int neighbors = 10;
  std::optional<double> bandwidth;  // empty: median heuristic
  int order = 2;
};

inline void validate_features(const FeatureView& view) {
  require(view.data.rows() >= 2, ErrorCode::rejected_input, "a view needs at least two samples");
  require(all_finite(view.data), ErrorCode::rejected_input, "non-finite feature value");
}

inline double squared_distance(const Matrix& x, Index i, Index j) {
  return (x.row(i) - x.row(j)).squaredNorm();
}

/// Median of the nonzero pairwise Euclidean distances. Returns 1 when every
/// pair coincides.
inline double median_bandwidth(const FeatureView& view) {
  validate_features(view);
  const Matrix& x = view.data;
  const Index n = x.rows();
  std::vector<double> dist;
  dist.reserve(static_cast<std::size_t>(n * (n - 1) / 2));
  for (Index i = 0; i < n; ++i)
    for (Index j = i + 1; j < n; ++j) {
      const double d = std::sqrt(squared_distance(x, i, j));
      if (d > 0.0) dist.push_back(d);
    }
  if (dist.empty()) return 1.0;
  const auto mid = dist.begin() + static_cast<std::ptrdiff_t>(dist.size() / 2);
  std::nth_element(dist.begin(), mid, dist.end());
  if (dist.size() % 2 == 1) return *mid;
  const double upper = *mid;
  const double lower = *std::max_element(dist.begin(), mid);
  return 0.5 * (lower + upper);
}

inline Matrix pairwise_kernel(const FeatureView& view, double bandwidth) {
  validate_features(view);
  require(bandwidth > 0.0 && std::isfinite(bandwidth), ErrorCode::invalid_config,
          "kernel bandwidth must be positive");
  const Matrix& x = view.data;
  const Index n = x.rows();
  const double scale = 1.0 / (2.0 * bandwidth * bandwidth);
  Matrix k(n, n);
  for (Index i = 0; i < n; ++i) {
    k(i, i) = 1.0;
    for (Index j = i + 1; j < n; ++j) {
      const double v = std::exp(-squared_distance(x, i, j) * scale);
      k(i, j) = v;
      k(j, i) = v;
    }
  }
  return k;
}

namespace detail {

// Indices of the `count` largest similarities in `row`, self excluded,
// lower index first on ties.
template <class Row>
std::vector<Index> nearest_by_similarity(const Row& row, Index self, int count) {
  std::vector<Index> idx;
  idx.reserve(static_cast<std::size_t>(row.size() - 1));
  for (Index j = 0; j < row.size(); ++j)
    if (j != self) idx.push_back(j);
  auto closer = [&](Index a, Index b) {
    if (row(a) != row(b)) return row(a) > row(b);
    return a < b;
  };
  std::partial_sort(idx.begin(), idx.begin() + count, idx.end(), closer);
  idx.resize(static_cast<std::size_t>(count));
  return idx;
}

}  // namespace detail

/// Union-symmetrized KNN graph: entry (i,j) keeps the kernel value when
/// either endpoint is among the other's N nearest neighbours.
inline AffinityMatrix build_knn_affinity(const Matrix& kernel, int neighbors, int view_id = 0) {
  const Index n = kernel.rows();
  require(kernel.cols() == n, ErrorCode::shape_mismatch, "kernel must be square");
  require(neighbors >= 1 && neighbors < n, ErrorCode::invalid_config,
          "neighbor count must satisfy 1 <= N < n");
  require(symmetry_defect(kernel) <= 1e-10, ErrorCode::symmetry_error, "kernel is not symmetric");
  Eigen::Matrix<bool, Eigen::Dynamic, Eigen::Dynamic> linked =
      Eigen::Matrix<bool, Eigen::Dynamic, Eigen::Dynamic>::Constant(n, n, false);
  for (Index i = 0; i < n; ++i) {
    for (Index j : detail::nearest_by_similarity(kernel.row(i), i, neighbors)) {
      linked(i, j) = true;
      linked(j, i) = true;
    }
  }
  AffinityMatrix a{Matrix::Zero(n, n), 1, view_id};
  for (Index j = 0; j < n; ++j)
    for (Index i = 0; i < n; ++i)
      if (linked(i, j)) a.values(i, j) = 0.5 * (kernel(i, j) + kernel(j, i));
  return a;
}

inline DegreeVector degree_vector(const AffinityMatrix& a) { return a.values.rowwise().sum(); }

/// D^{-1/2} with the pseudo-inverse convention for zero degrees.
inline Vector inverse_sqrt_degrees(const Vector& degrees) {
  Vector out(degrees.size());
  for (Index i = 0; i < degrees.size(); ++i)
    out(i) = degrees(i) > 0.0 ? 1.0 / std::sqrt(degrees(i)) : 0.0;
  return out;
}

inline Matrix normalized_affinity(const AffinityMatrix& a) {
  const Vector s = inverse_sqrt_degrees(degree_vector(a));
  Matrix g = s.asDiagonal() * a.values * s.asDiagonal();
  return 0.5 * (g + g.transpose());
}

inline LaplacianMatrix normalized_laplacian(const AffinityMatrix& a) {
  const Index n = a.values.rows();
  return {Matrix::Identity(n, n) - normalized_affinity(a), a.order, a.view_id};
}

/// A^(2) = A^T A, then A^(o) = A^(o-1) A for higher orders.
inline AffinityMatrix high_order_affinity(const AffinityMatrix& a, int order) {
  require(order >= 2, ErrorCode::invalid_order, "high-order affinity needs order >= 2");
  require(a.order == 1, ErrorCode::invalid_order, "high-order affinity is built from an order-1 graph");
  Matrix out = a.values.transpose() * a.values;
  for (int o = 3; o <= order; ++o) out = out * a.values;
  if (order > 2) out = (0.5 * (out + out.transpose())).eval();
  return {std::move(out), order, a.view_id};
}

/// Affinities of orders 1..config.order for one feature view.
inline std::vector<AffinityMatrix> affinity_ladder(const AffinityMatrix& first, int max_order) {
  require(max_order >= 1, ErrorCode::invalid_order, "order must be >= 1");
  std::vector<AffinityMatrix> out{first};
  for (int o = 2; o <= max_order; ++o) out.push_back(high_order_affinity(first, o));
  return out;
}

inline AffinityMatrix knn_affinity_from_features(const FeatureView& view, const GraphConfig& cfg) {
  const double bw = cfg.bandwidth ? *cfg.bandwidth : median_bandwidth(view);
  return build_knn_affinity(pairwise_kernel(view, bw), cfg.neighbors, view.view_id);
}

// Sparse route for large n. The n x n kernel is never materialized; the same
// union-KNN rule and tie-breaking apply.
inline SparseMatrix knn_affinity_sparse(const FeatureView& view, int neighbors, double bandwidth) {
  validate_features(view);
  const Matrix& x = view.data;
  const Index n = x.rows();
  require(neighbors >= 1 && neighbors < n, ErrorCode::invalid_config,
          "neighbor count must satisfy 1 <= N < n");
  require(bandwidth > 0.0, ErrorCode::invalid_config, "kernel bandwidth must be positive");
  const double scale = 1.0 / (2.0 * bandwidth * bandwidth);
  std::vector<Eigen::Triplet<double>> trips;
  trips.reserve(static_cast<std::size_t>(2 * n * neighbors));
  Vector sim(n);
  for (Index i = 0; i < n; ++i) {
    for (Index j = 0; j < n; ++j) sim(j) = std::exp(-squared_distance(x, i, j) * scale);
    for (Index j : detail::nearest_by_similarity(sim, i, neighbors)) {
      trips.emplace_back(i, j, sim(j));
      trips.emplace_back(j, i, sim(j));
    }
  }
  SparseMatrix a(n, n);
  // duplicates (mutual neighbours) carry equal values; keep one copy
  a.setFromTriplets(trips.begin(), trips.end(), [](double lhs, double) { return lhs; });
  return a;
}

/// Columns of the normalized order-o affinity G^(o) = D^{-1/2} A^(o) D^{-1/2}
/// computed from a sparse order-1 graph with o-1 products per request.
class NormalizedColumns {
 public:
  NormalizedColumns(SparseMatrix first_order, int order) : a_(std::move(first_order)), order_(order) {
    require(order >= 1, ErrorCode::invalid_order, "order must be >= 1");
    // A^(o) 1 = A^{o-1} (A 1) for symmetric A
    Vector d = a_ * Vector::Ones(a_.cols());
    for (int o = 2; o <= order_; ++o) d = a_ * d;
    inv_sqrt_deg_ = inverse_sqrt_degrees(d);
  }

  Index size() const { return a_.rows(); }

  Matrix operator()(const std::vector<Index>& cols) const {
    const Index n = a_.rows();
    Matrix e = Matrix::Zero(n, static_cast<Index>(cols.size()));
    for (std::size_t c = 0; c < cols.size(); ++c) e(cols[c], static_cast<Index>(c)) = 1.0;
    for (int o = 1; o <= order_; ++o) e = a_ * e;
    for (std::size_t c = 0; c < cols.size(); ++c) e.col(static_cast<Index>(c)) *= inv_sqrt_deg_(cols[c]);
    return inv_sqrt_deg_.asDiagonal() * e;
  }

 private:
  SparseMatrix a_;
  int order_;
  Vector inv_sqrt_deg_;
};

}  // namespace mvsc
