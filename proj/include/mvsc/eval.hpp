#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <map>
#include <random>
#include <vector>

#include "mvsc/core.hpp"

namespace mvsc {

struct Labeling {
  std::vector<int> labels;
  int k = 0;

  std::size_t size() const { return labels.size(); }
};

/// Builds a labeling with k = 1 + max label.
inline Labeling make_labeling(std::vector<int> labels) {
  int k = 0;
  for (int l : labels) {
    require(l >= 0, ErrorCode::rejected_input, "labels must be non-negative");
    k = std::max(k, l + 1);
  }
  return {std::move(labels), k};
}

struct KmeansConfig {
  int restarts = 50;
  int max_iterations = 300;
  std::uint64_t seed = 0;
};

struct KmeansResult {
  Labeling labeling;
  double distortion = 0.0;
  Matrix centers;
};

namespace detail {

inline double sq_dist(const Matrix& x, Index i, const Matrix& c, Index j) {
  return (x.row(i) - c.row(j)).squaredNorm();
}

inline KmeansResult lloyd_once(const Matrix& x, int k, int max_iterations, std::uint64_t seed) {
  const Index n = x.rows();
  std::mt19937_64 gen(seed);
  Matrix centers(k, x.cols());

  // k-means++ seeding
  std::uniform_int_distribution<Index> first(0, n - 1);
  centers.row(0) = x.row(first(gen));
  Vector nearest(n);
  for (Index i = 0; i < n; ++i) nearest(i) = sq_dist(x, i, centers, 0);
  for (int c = 1; c < k; ++c) {
    const double total = nearest.sum();
    Index pick = 0;
    if (total > 0.0) {
      std::uniform_real_distribution<double> u(0.0, total);
      double target = u(gen);
      pick = n - 1;
      for (Index i = 0; i < n; ++i) {
        target -= nearest(i);
        if (target <= 0.0 && nearest(i) > 0.0) {
          pick = i;
          break;
        }
      }
    } else {
      pick = first(gen);
    }
    centers.row(c) = x.row(pick);
    for (Index i = 0; i < n; ++i) nearest(i) = std::min(nearest(i), sq_dist(x, i, centers, c));
  }

  std::vector<int> assign(static_cast<std::size_t>(n), -1);
  for (int it = 0; it < max_iterations; ++it) {
    bool changed = false;
    for (Index i = 0; i < n; ++i) {
      int best = 0;
      double bd = sq_dist(x, i, centers, 0);
      for (int c = 1; c < k; ++c) {
        const double d = sq_dist(x, i, centers, c);
        if (d < bd) {
          bd = d;
          best = c;
        }
      }
      if (assign[static_cast<std::size_t>(i)] != best) {
        assign[static_cast<std::size_t>(i)] = best;
        changed = true;
      }
    }
    Matrix sums = Matrix::Zero(k, x.cols());
    std::vector<Index> counts(static_cast<std::size_t>(k), 0);
    for (Index i = 0; i < n; ++i) {
      sums.row(assign[static_cast<std::size_t>(i)]) += x.row(i);
      ++counts[static_cast<std::size_t>(assign[static_cast<std::size_t>(i)])];
    }
    for (int c = 0; c < k; ++c) {
      if (counts[static_cast<std::size_t>(c)] > 0) {
        centers.row(c) = sums.row(c) / static_cast<double>(counts[static_cast<std::size_t>(c)]);
        continue;
      }
      // empty cluster: reseed at the point farthest from its own center
      Index far = 0;
      double fd = -1.0;
      for (Index i = 0; i < n; ++i) {
        const double d = sq_dist(x, i, centers, assign[static_cast<std::size_t>(i)]);
        if (d > fd) {
          fd = d;
          far = i;
        }
      }
      centers.row(c) = x.row(far);
      assign[static_cast<std::size_t>(far)] = c;
      changed = true;
    }
    if (!changed && it > 0) break;
  }

  KmeansResult out;
  out.labeling = {assign, k};
  out.distortion = 0.0;
  for (Index i = 0; i < n; ++i) out.distortion += sq_dist(x, i, centers, assign[static_cast<std::size_t>(i)]);
  out.centers = std::move(centers);
  return out;
}

}  // namespace detail

/// k-means++ with restarts; keeps the run with the smallest distortion.
inline KmeansResult kmeans(const Matrix& x, int k, const KmeansConfig& cfg = {}) {
  require(all_finite(x), ErrorCode::rejected_input, "k-means input is not finite");
  require(k >= 1 && k <= x.rows(), ErrorCode::invalid_config, "k-means requires 1 <= k <= n");
  require(cfg.restarts >= 1, ErrorCode::invalid_config, "k-means needs at least one restart");
  KmeansResult best;
  best.distortion = std::numeric_limits<double>::infinity();
  for (int r = 0; r < cfg.restarts; ++r) {
    KmeansResult run = detail::lloyd_once(x, k, cfg.max_iterations,
                                          derive_seed(cfg.seed, static_cast<std::uint64_t>(r)));
    if (run.distortion < best.distortion) best = std::move(run);
  }
  return best;
}

/// Minimum-cost perfect assignment on a square cost matrix (Hungarian
/// method with potentials). Returns row -> column.
inline std::vector<int> hungarian_min_cost(const Matrix& cost) {
  const int n = static_cast<int>(cost.rows());
  require(cost.cols() == n, ErrorCode::shape_mismatch, "assignment cost must be square");
  const double inf = std::numeric_limits<double>::infinity();
  std::vector<double> u(n + 1, 0.0), v(n + 1, 0.0), minv(n + 1);
  std::vector<int> p(n + 1, 0), way(n + 1, 0);
  std::vector<char> used(n + 1);
  for (int i = 1; i <= n; ++i) {
    p[0] = i;
    int j0 = 0;
    std::fill(minv.begin(), minv.end(), inf);
    std::fill(used.begin(), used.end(), 0);
    do {
      used[j0] = 1;
      const int i0 = p[j0];
      double delta = inf;
      int j1 = 0;
      for (int j = 1; j <= n; ++j) {
        if (used[j]) continue;
        const double cur = cost(i0 - 1, j - 1) - u[i0] - v[j];
        if (cur < minv[j]) {
          minv[j] = cur;
          way[j] = j0;
        }
        if (minv[j] < delta) {
          delta = minv[j];
          j1 = j;
        }
      }
      for (int j = 0; j <= n; ++j) {
        if (used[j]) {
          u[p[j]] += delta;
          v[j] -= delta;
        } else {
          minv[j] -= delta;
        }
      }
      j0 = j1;
    } while (p[j0] != 0);
    do {
      const int j1 = way[j0];
      p[j0] = p[j1];
      j0 = j1;
    } while (j0 != 0);
  }
  std::vector<int> assignment(n, -1);
  for (int j = 1; j <= n; ++j)
    if (p[j] > 0) assignment[p[j] - 1] = j - 1;
  return assignment;
}

namespace detail {

inline void check_lengths(const Labeling& pred, const Labeling& truth) {
  require(pred.size() == truth.size(), ErrorCode::length_mismatch, "labelings differ in length");
  require(!pred.labels.empty(), ErrorCode::length_mismatch, "empty labeling");
}

// Contingency table over the labels actually present.
inline Matrix contingency(const Labeling& pred, const Labeling& truth) {
  std::map<int, Index> pi, ti;
  for (int l : pred.labels) pi.emplace(l, 0);
  for (int l : truth.labels) ti.emplace(l, 0);
  Index c = 0;
  for (auto& [l, i] : pi) i = c++;
  c = 0;
  for (auto& [l, i] : ti) i = c++;
  Matrix table = Matrix::Zero(static_cast<Index>(pi.size()), static_cast<Index>(ti.size()));
  for (std::size_t i = 0; i < pred.size(); ++i) table(pi[pred.labels[i]], ti[truth.labels[i]]) += 1.0;
  return table;
}

inline double entropy(const Vector& counts, double n) {
  double h = 0.0;
  for (Index i = 0; i < counts.size(); ++i)
    if (counts(i) > 0.0) {
      const double p = counts(i) / n;
      h -= p * std::log(p);
    }
  return h;
}

}  // namespace detail

/// Best-bijection matched fraction.
inline double accuracy(const Labeling& pred, const Labeling& truth) {
  detail::check_lengths(pred, truth);
  const Matrix table = detail::contingency(pred, truth);
  const Index dim = std::max(table.rows(), table.cols());
  Matrix square = Matrix::Zero(dim, dim);
  square.topLeftCorner(table.rows(), table.cols()) = table;
  const std::vector<int> match = hungarian_min_cost(-square);
  double hits = 0.0;
  for (Index r = 0; r < dim; ++r) hits += square(r, match[static_cast<std::size_t>(r)]);
  return hits / static_cast<double>(pred.size());
}

/// Mutual information normalized by the geometric mean of the entropies.
inline double nmi(const Labeling& pred, const Labeling& truth) {
  detail::check_lengths(pred, truth);
  const Matrix table = detail::contingency(pred, truth);
  const double n = static_cast<double>(pred.size());
  const double hp = detail::entropy(table.rowwise().sum(), n);
  const double ht = detail::entropy(table.colwise().sum().transpose(), n);
  if (hp == 0.0 && ht == 0.0) return 1.0;
  if (hp == 0.0 || ht == 0.0) return 0.0;
  const Vector rows = table.rowwise().sum();
  const Vector cols = table.colwise().sum().transpose();
  double mi = 0.0;
  for (Index i = 0; i < table.rows(); ++i)
    for (Index j = 0; j < table.cols(); ++j) {
      const double nij = table(i, j);
      if (nij > 0.0) mi += (nij / n) * std::log(n * nij / (rows(i) * cols(j)));
    }
  return std::clamp(mi / std::sqrt(hp * ht), 0.0, 1.0);
}

inline double purity(const Labeling& pred, const Labeling& truth) {
  detail::check_lengths(pred, truth);
  const Matrix table = detail::contingency(pred, truth);
  return table.rowwise().maxCoeff().sum() / static_cast<double>(pred.size());
}

struct Metrics {
  double acc = 0.0;
  double nmi = 0.0;
  double purity = 0.0;
};

inline Metrics evaluate(const Labeling& pred, const Labeling& truth) {
  return {accuracy(pred, truth), nmi(pred, truth), purity(pred, truth)};
}

}  // namespace mvsc
