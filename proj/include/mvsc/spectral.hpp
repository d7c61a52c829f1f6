#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numeric>
#include <random>
#include <vector>

#include "mvsc/core.hpp"
#include "mvsc/graph.hpp"

namespace mvsc {

/// n x k cluster-indicating matrix. Raw Nystrom output is not orthonormal
/// until it has been through orthogonalize().
struct Partition {
  Matrix values;
  bool orthonormal = true;

  Index rows() const { return values.rows(); }
  Index k() const { return values.cols(); }
};

/// Eigenvectors with eigenvalues sorted non-increasing.
struct EigenPair {
  Matrix vectors;
  Vector values;
};

struct NystromConfig {
  int samples = 100;       // m
  int oversampling = 10;   // s
  int rank = 2;            // k
  std::uint64_t seed = 0;
};

struct NystromResult {
  Partition partition;  // raw, sqrt(m/n) E U~ Lambda^+
  Vector values;        // Lambda_k of the sampled block
  std::vector<Index> sampled;
};

/// Relative cutoff below which singular values are treated as zero.
inline constexpr double kPseudoInverseCutoff = 1e-12;

inline double orthonormality_defect(const Matrix& h) {
  return (h.transpose() * h - Matrix::Identity(h.cols(), h.cols())).norm();
}

/// Top-k eigenpairs of a symmetric matrix, largest first, sign-normalized.
inline EigenPair top_k_eigenvectors(const Matrix& g, Index k) {
  require(g.rows() == g.cols(), ErrorCode::shape_mismatch, "matrix must be square");
  require(k >= 0 && k <= g.rows(), ErrorCode::invalid_rank, "rank k exceeds matrix dimension");
  const Matrix sym = 0.5 * (g + g.transpose());
  Eigen::SelfAdjointEigenSolver<Matrix> es(sym);
  require(es.info() == Eigen::Success, ErrorCode::degenerate_spectrum, "eigensolver did not converge");
  const Index n = g.rows();
  EigenPair out{Matrix(n, k), Vector(k)};
  // Eigen returns ascending eigenvalues
  for (Index j = 0; j < k; ++j) {
    out.vectors.col(j) = es.eigenvectors().col(n - 1 - j);
    out.values(j) = es.eigenvalues()(n - 1 - j);
  }
  fix_signs(out.vectors);
  return out;
}

/// Eigenvectors of the k smallest eigenvalues, via the top-k of -L.
inline Partition bottom_k_eigenvectors(const Matrix& l, Index k) {
  EigenPair neg = top_k_eigenvectors(-l, k);
  return {std::move(neg.vectors), true};
}

inline Partition bottom_k_eigenvectors(const LaplacianMatrix& l, Index k) {
  return bottom_k_eigenvectors(l.values, k);
}

/// Column-major m x c standard Gaussian test matrix from a seeded stream.
inline Matrix gaussian_matrix(Index rows, Index cols, std::uint64_t seed) {
  std::mt19937_64 gen(seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  Matrix omega(rows, cols);
  for (Index j = 0; j < cols; ++j)
    for (Index i = 0; i < rows; ++i) omega(i, j) = normal(gen);
  return omega;
}

/// Randomized eigendecomposition of a symmetric m x m matrix: Gaussian
/// sketch, QR range finder, projected eigenproblem, lift back.
inline EigenPair randomized_svd(const Matrix& r, int k, int oversampling, std::uint64_t seed) {
  const Index m = r.rows();
  require(r.cols() == m, ErrorCode::shape_mismatch, "randomized_svd expects a square matrix");
  require(k >= 1 && oversampling >= 0 && k + oversampling <= m, ErrorCode::invalid_config,
          "randomized_svd requires k + s <= m");
  const Index width = k + oversampling;
  const Matrix omega = gaussian_matrix(m, width, seed);
  const Matrix y = r * omega;
  Eigen::HouseholderQR<Matrix> qr(y);
  const Matrix q = qr.householderQ() * Matrix::Identity(m, width);
  Matrix b = q.transpose() * r * q;
  b = (0.5 * (b + b.transpose())).eval();
  EigenPair small = top_k_eigenvectors(b, k);
  EigenPair out{q * small.vectors, std::move(small.values)};
  fix_signs(out.vectors);
  return out;
}

/// Seeded uniform sample of `count` distinct indices out of [0, n):
/// the prefix of a Fisher-Yates shuffle.
inline std::vector<Index> sample_without_replacement(Index n, Index count, std::uint64_t seed) {
  std::vector<Index> perm(static_cast<std::size_t>(n));
  std::iota(perm.begin(), perm.end(), Index{0});
  std::mt19937_64 gen(seed);
  for (Index i = 0; i < count; ++i) {
    std::uniform_int_distribution<Index> pick(i, n - 1);
    std::swap(perm[static_cast<std::size_t>(i)], perm[static_cast<std::size_t>(pick(gen))]);
  }
  perm.resize(static_cast<std::size_t>(count));
  return perm;
}

/// Nystrom extension with a randomized eigensolver on the sampled block.
/// `columns(idx)` must return the n x |idx| block of G for those columns.
/// Oversampling is capped at m - k so that m = k stays valid.
template <class ColumnSource>
NystromResult nystrom_embedding(Index n, const ColumnSource& columns, const NystromConfig& cfg) {
  const Index m = cfg.samples;
  require(cfg.rank >= 1 && cfg.rank <= m, ErrorCode::invalid_config, "Nystrom requires k <= m");
  require(m <= n, ErrorCode::invalid_config, "Nystrom sample count exceeds n");
  require(cfg.oversampling >= 0, ErrorCode::invalid_config, "oversampling must be non-negative");
  const int s = static_cast<int>(std::min<Index>(cfg.oversampling, m - cfg.rank));

  NystromResult out;
  out.sampled = sample_without_replacement(n, m, derive_seed(cfg.seed, 1));
  const Matrix e = columns(out.sampled);
  Matrix r(m, m);
  for (Index i = 0; i < m; ++i) r.row(i) = e.row(out.sampled[static_cast<std::size_t>(i)]);
  r = (0.5 * (r + r.transpose())).eval();

  const EigenPair approx = randomized_svd(r, cfg.rank, s, derive_seed(cfg.seed, 2));
  const double top = approx.values.cwiseAbs().maxCoeff();
  require(top > 0.0, ErrorCode::degenerate_spectrum, "sampled block has an all-zero spectrum");
  Vector inv(approx.values.size());
  for (Index i = 0; i < inv.size(); ++i) {
    const double lam = approx.values(i);
    inv(i) = std::abs(lam) > kPseudoInverseCutoff * top ? 1.0 / lam : 0.0;
  }
  const Matrix u = e * approx.vectors * inv.asDiagonal();
  out.partition = {std::sqrt(static_cast<double>(m) / static_cast<double>(n)) * u, false};
  out.values = approx.values;
  return out;
}

inline NystromResult nystrom_embedding(const Matrix& g, const NystromConfig& cfg) {
  require(g.rows() == g.cols(), ErrorCode::shape_mismatch, "Nystrom input must be square");
  auto columns = [&g](const std::vector<Index>& idx) {
    Matrix e(g.rows(), static_cast<Index>(idx.size()));
    for (std::size_t c = 0; c < idx.size(); ++c) e.col(static_cast<Index>(c)) = g.col(idx[c]);
    return e;
  };
  return nystrom_embedding(g.rows(), columns, cfg);
}

/// G-hat = H (n/m Lambda) H^T for a raw Nystrom result.
inline Matrix nystrom_reconstruction(const NystromResult& res) {
  const double n = static_cast<double>(res.partition.rows());
  const double m = static_cast<double>(res.sampled.size());
  return res.partition.values * ((n / m) * res.values).asDiagonal() * res.partition.values.transpose();
}

struct Orthogonalized {
  Partition partition;
  Vector values;
};

/// Rotate a non-orthonormal H into H~ with H~^T H~ = I while preserving
/// H Lambda H^T = H~ Lambda~ H~^T.
inline Orthogonalized orthogonalize(const Matrix& h, const Vector& lambda) {
  const Index k = h.cols();
  require(lambda.size() == k, ErrorCode::shape_mismatch, "Lambda size must match H columns");
  Matrix t = h.transpose() * h;
  t = (0.5 * (t + t.transpose())).eval();
  Eigen::SelfAdjointEigenSolver<Matrix> tes(t);
  const Vector sigma = tes.eigenvalues();
  const double smax = sigma.maxCoeff();
  require(smax > 0.0 && sigma.minCoeff() > 1e-12 * smax, ErrorCode::rank_deficiency,
          "H^T H is numerically singular");
  const Matrix& v = tes.eigenvectors();
  const Vector root = sigma.cwiseSqrt();
  Matrix kmat = root.asDiagonal() * (v.transpose() * lambda.asDiagonal() * v) * root.asDiagonal();
  kmat = (0.5 * (kmat + kmat.transpose())).eval();
  const EigenPair kes = top_k_eigenvectors(kmat, k);
  Matrix ht = h * v * root.cwiseInverse().asDiagonal() * kes.vectors;
  fix_signs(ht);
  return {{std::move(ht), true}, kes.values};
}

inline Orthogonalized orthogonalize(const NystromResult& res) {
  return orthogonalize(res.partition.values, res.values);
}

/// argmax over orthonormal Q of Tr(Q^T C): U V^T from the thin SVD of C.
inline Matrix procrustes_align(const Matrix& c) {
  require(all_finite(c), ErrorCode::rejected_input, "Procrustes input is not finite");
  if (c.rows() >= c.cols()) {
    Eigen::JacobiSVD<Matrix> svd(c, Eigen::ComputeThinU | Eigen::ComputeThinV);
    return svd.matrixU() * svd.matrixV().transpose();
  }
  Eigen::JacobiSVD<Matrix> svd(c.transpose(), Eigen::ComputeThinU | Eigen::ComputeThinV);
  return (svd.matrixU() * svd.matrixV().transpose()).transpose();
}

inline double nuclear_norm(const Matrix& c) {
  return Eigen::JacobiSVD<Matrix>(c).singularValues().sum();
}

/// Principal angles between the column spans of two orthonormal bases,
/// ascending. Small angles come from sines so they keep full precision.
inline Vector principal_angles(const Matrix& a, const Matrix& b) {
  const Vector cosines = Eigen::JacobiSVD<Matrix>(a.transpose() * b).singularValues();
  const Vector sines = Eigen::JacobiSVD<Matrix>(b - a * (a.transpose() * b)).singularValues();
  const Index k = cosines.size();
  Vector out(k);
  for (Index i = 0; i < k; ++i) {
    const double c = std::clamp(cosines(i), 0.0, 1.0);
    const Index j = sines.size() - 1 - i;
    out(i) = c * c > 0.5 && j >= 0 ? std::asin(std::clamp(sines(j), 0.0, 1.0)) : std::acos(c);
  }
  return out;
}

/// Largest principal angle, but stable near zero: sqrt of the residual
/// energy of projecting b onto span(a).
inline double subspace_distance(const Matrix& a, const Matrix& b) {
  const Matrix resid = b - a * (a.transpose() * b);
  return Eigen::JacobiSVD<Matrix>(resid).singularValues()(0);
}

}  // namespace mvsc
