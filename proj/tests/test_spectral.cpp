#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <vector>

#include "mvsc/eval.hpp"
#include "mvsc/graph.hpp"
#include "mvsc/spectral.hpp"
#include "test_util.hpp"

using namespace mvsc;
using mvsc::testing::random_affinity;
using mvsc::testing::random_matrix;
using mvsc::testing::random_orthonormal;
using mvsc::testing::random_psd;

namespace {

Vector sorted_eigenvalues(const Matrix& s) {
  return Eigen::SelfAdjointEigenSolver<Matrix>(s).eigenvalues();  // ascending
}

// Best rank-k approximation error from a full dense SVD.
double best_rank_k_error(const Matrix& r, int k) {
  const Vector sv = Eigen::JacobiSVD<Matrix>(r).singularValues();
  return std::sqrt(sv.tail(sv.size() - k).squaredNorm());
}

Matrix block_ones_graph(int blocks, int size) {
  const int n = blocks * size;
  Matrix a = Matrix::Zero(n, n);
  for (int b = 0; b < blocks; ++b) a.block(b * size, b * size, size, size).setOnes();
  return a;
}

}  // namespace

TEST(BottomK, TwoNodeNullVector) {
  Matrix l(2, 2);
  l << 1, -1, -1, 1;
  const Partition h = bottom_k_eigenvectors(l, 1);
  EXPECT_NEAR(std::abs(h.values(0, 0)), 1.0 / std::sqrt(2.0), 1e-12);
  EXPECT_NEAR(h.values(0, 0), h.values(1, 0), 1e-12);
  EXPECT_NEAR((h.values.transpose() * l * h.values).trace(), 0.0, 1e-12);
}

TEST(BottomK, DegenerateIdentity) {
  const Partition h = bottom_k_eigenvectors(Matrix(Matrix::Identity(5, 5)), 2);
  EXPECT_LE(orthonormality_defect(h.values), 1e-12);
  EXPECT_NEAR((h.values.transpose() * h.values).trace(), 2.0, 1e-12);
}

TEST(BottomK, RayleighTraceMatchesEigenvalueSum) {
  const Matrix l = random_psd(50, 3);
  const Vector ev = sorted_eigenvalues(l);
  for (int k : {1, 4, 9}) {
    const Partition h = bottom_k_eigenvectors(l, k);
    EXPECT_LE(orthonormality_defect(h.values), 1e-10);
    EXPECT_NEAR((h.values.transpose() * l * h.values).trace(), ev.head(k).sum(), 1e-8);
  }
}

TEST(BottomK, RankTooLarge) { EXPECT_THROW(bottom_k_eigenvectors(Matrix(Matrix::Identity(3, 3)), 4), Error); }

TEST(TopK, DiagonalMatrix) {
  const Matrix g = Vector(Eigen::Vector3d(3.0, 2.0, 1.0)).asDiagonal();
  const EigenPair top = top_k_eigenvectors(g, 2);
  EXPECT_NEAR(top.values(0), 3.0, 1e-14);
  EXPECT_NEAR(top.values(1), 2.0, 1e-14);
  EXPECT_LE((top.vectors - Matrix::Identity(3, 2)).cwiseAbs().maxCoeff(), 1e-14);
}

TEST(TopK, DualOfBottomKOnLaplacian) {
  const AffinityMatrix a{random_affinity(20, 6, 0.6), 1, 0};
  const Matrix g = normalized_affinity(a);
  const Matrix l = normalized_laplacian(a).values;
  const EigenPair top = top_k_eigenvectors(g, 3);
  const Partition bottom = bottom_k_eigenvectors(l, 3);
  EXPECT_LE(subspace_distance(top.vectors, bottom.values), 1e-8);
}

TEST(TopK, PrincipalAnglesAgainstDenseOracle) {
  for (std::uint64_t seed = 0; seed < 5; ++seed) {
    const Matrix b = random_matrix(30, 30, 70 + seed);
    const Matrix g = 0.5 * (b + b.transpose());
    Eigen::SelfAdjointEigenSolver<Matrix> es(g);
    const Matrix oracle = es.eigenvectors().rightCols(4);
    const EigenPair top = top_k_eigenvectors(g, 4);
    EXPECT_LT(principal_angles(oracle, top.vectors).maxCoeff(), 1e-6);
    for (Index i = 1; i < 4; ++i) EXPECT_GE(top.values(i - 1), top.values(i));
  }
}

TEST(RandomizedSvd, ExactRankRecovery) {
  const int m = 40, k = 5;
  const Matrix basis = random_orthonormal(m, k, 4);
  const Vector lam = (Vector(k) << 5, 4, 3, 2, 1).finished();
  const Matrix r = basis * lam.asDiagonal() * basis.transpose();
  for (int s : {2, 5, 10}) {
    const EigenPair res = randomized_svd(r, k, s, 99);
    const Matrix approx = res.vectors * res.values.asDiagonal() * res.vectors.transpose();
    EXPECT_LE((r - approx).norm(), 1e-6 * r.norm());
  }
}

TEST(RandomizedSvd, IdentityGivesUnitValues) {
  const EigenPair res = randomized_svd(Matrix::Identity(12, 12), 3, 4, 1);
  EXPECT_LE((res.values - Vector::Ones(3)).cwiseAbs().maxCoeff(), 1e-12);
}

TEST(RandomizedSvd, ErrorWithinThreeTimesBestRankK) {
  const int m = 60, k = 4, s = 5;
  const Matrix basis = random_orthonormal(m, k + 10, 12);
  Vector lam(k + 10);
  for (int i = 0; i < k + 10; ++i) lam(i) = std::pow(0.7, i);
  const Matrix r = basis * lam.asDiagonal() * basis.transpose();
  const double best = best_rank_k_error(r, k);
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    const EigenPair res = randomized_svd(r, k, s, seed);
    const Matrix approx = res.vectors * res.values.asDiagonal() * res.vectors.transpose();
    EXPECT_LE((r - approx).norm(), 3.0 * best) << "seed " << seed;
  }
}

TEST(RandomizedSvd, DeterministicUnderSeed) {
  const Matrix r = random_psd(25, 8);
  const EigenPair a = randomized_svd(r, 3, 4, 1234);
  const EigenPair b = randomized_svd(r, 3, 4, 1234);
  EXPECT_EQ(a.vectors, b.vectors);
  EXPECT_EQ(a.values, b.values);
  EXPECT_THROW(randomized_svd(r, 20, 6, 0), Error);
}

TEST(Nystrom, FullSamplingReproducesExactRank) {
  const int n = 50, k = 4;
  const Matrix basis = random_orthonormal(n, k, 17);
  const Matrix g = basis * Vector(Eigen::Vector4d(0.9, 0.7, 0.5, 0.3)).asDiagonal() * basis.transpose();
  const NystromResult res = nystrom_embedding(g, {n, 5, k, 3});
  EXPECT_FALSE(res.partition.orthonormal);
  EXPECT_LE((g - nystrom_reconstruction(res)).norm(), 1e-6 * g.norm());
}

TEST(Nystrom, BlockGraphSeparatesBlocks) {
  const int blocks = 3, size = 20;
  const AffinityMatrix a{block_ones_graph(blocks, size), 1, 0};
  const Matrix g = normalized_affinity(a);
  std::vector<int> truth;
  for (int b = 0; b < blocks; ++b)
    for (int i = 0; i < size; ++i) truth.push_back(b);
  // exact spectral clustering oracle on the full matrix
  const Labeling exact = kmeans(top_k_eigenvectors(g, blocks).vectors, blocks, {10, 100, 1}).labeling;
  ASSERT_DOUBLE_EQ(accuracy(exact, make_labeling(truth)), 1.0);
  const Orthogonalized emb = orthogonalize(nystrom_embedding(g, {30, 5, blocks, 11}));
  const Labeling lab = kmeans(emb.partition.values, blocks, {10, 100, 1}).labeling;
  EXPECT_DOUBLE_EQ(accuracy(lab, make_labeling(truth)), 1.0);
}

TEST(Nystrom, ErrorShrinksWithSamples) {
  const int n = 120, k = 4;
  const Matrix x = random_matrix(n, 3, 5);
  const Matrix g = normalized_affinity({pairwise_kernel({x, 0}, 1.0), 1, 0});
  std::vector<double> medians;
  for (int m : {k, 2 * k, 4 * k, n / 2, n}) {
    std::vector<double> errs;
    for (std::uint64_t seed = 0; seed < 10; ++seed)
      errs.push_back((g - nystrom_reconstruction(nystrom_embedding(g, {m, 5, k, seed}))).norm());
    std::nth_element(errs.begin(), errs.begin() + 5, errs.end());
    medians.push_back(errs[5]);
  }
  for (std::size_t i = 1; i < medians.size(); ++i) EXPECT_LE(medians[i], medians[i - 1] + 1e-9);
}

TEST(Nystrom, ConfigErrors) {
  const Matrix g = Matrix::Identity(10, 10);
  EXPECT_THROW(nystrom_embedding(g, {11, 2, 2, 0}), Error);
  EXPECT_THROW(nystrom_embedding(g, {3, 2, 4, 0}), Error);
  EXPECT_THROW(nystrom_embedding(Matrix(Matrix::Zero(10, 10)), {5, 2, 2, 0}), Error);
}

TEST(Nystrom, FullSamplingSpansTopEigenspace) {
  const int n = 40, k = 3;
  const AffinityMatrix a{random_affinity(n, 77, 0.3), 1, 0};
  const Matrix g = normalized_affinity(a);
  const EigenPair oracle = top_k_eigenvectors(g, k + 1);
  ASSERT_GT(oracle.values(k - 1) - oracle.values(k), 1e-6);
  const Orthogonalized emb = orthogonalize(nystrom_embedding(g, {n, n - k, k, 5}));
  EXPECT_LT(principal_angles(oracle.vectors.leftCols(k), emb.partition.values).maxCoeff(), 1e-4);
}

TEST(Orthogonalize, AlreadyOrthonormal) {
  const Matrix h = random_orthonormal(20, 3, 2);
  const Orthogonalized o = orthogonalize(h, Vector::Ones(3));
  EXPECT_LE(orthonormality_defect(o.partition.values), 1e-10);
  EXPECT_LE((o.partition.values * o.partition.values.transpose() - h * h.transpose()).cwiseAbs().maxCoeff(), 1e-10);
}

TEST(Orthogonalize, ScaledColumns) {
  Matrix h = Matrix::Zero(6, 2);
  h(0, 0) = 2.0;
  h(1, 1) = 3.0;
  const Vector lam = Eigen::Vector2d(0.5, 0.25);
  const Orthogonalized o = orthogonalize(h, lam);
  const Matrix lhs = h * lam.asDiagonal() * h.transpose();
  const Matrix rhs = o.partition.values * o.values.asDiagonal() * o.partition.values.transpose();
  EXPECT_LE((lhs - rhs).cwiseAbs().maxCoeff(), 1e-12);
  EXPECT_LE(orthonormality_defect(o.partition.values), 1e-12);
}

TEST(Orthogonalize, RandomFullRank) {
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    const Matrix h = random_matrix(40, 5, 300 + seed);
    const Vector lam = mvsc::testing::random_uniform(5, 1, 400 + seed).col(0).array() + 0.1;
    const Orthogonalized o = orthogonalize(h, lam);
    const Matrix lhs = h * lam.asDiagonal() * h.transpose();
    const Matrix rhs = o.partition.values * o.values.asDiagonal() * o.partition.values.transpose();
    EXPECT_LE((lhs - rhs).cwiseAbs().maxCoeff(), 1e-8);
    EXPECT_LE((o.partition.values.transpose() * o.partition.values - Matrix::Identity(5, 5)).cwiseAbs().maxCoeff(), 1e-8);
  }
}

TEST(Orthogonalize, RankDeficient) {
  Matrix h = random_matrix(10, 3, 1);
  h.col(2) = h.col(0);
  EXPECT_THROW(orthogonalize(h, Vector::Ones(3)), Error);
}

TEST(Procrustes, IdentityAndOrthogonal) {
  const Matrix eye = Matrix::Identity(4, 4);
  EXPECT_LE((procrustes_align(eye) - eye).cwiseAbs().maxCoeff(), 1e-14);
  const Matrix r = random_orthonormal(4, 4, 9);
  const Matrix q = procrustes_align(r);
  EXPECT_LE((q - r).cwiseAbs().maxCoeff(), 1e-12);
  EXPECT_NEAR((q.transpose() * r).trace(), 4.0, 1e-12);
}

TEST(Procrustes, BeatsRandomOrthonormalAndHitsNuclearNorm) {
  const Matrix c = random_matrix(6, 3, 21);
  const Matrix q = procrustes_align(c);
  const double best = (q.transpose() * c).trace();
  EXPECT_NEAR(best, nuclear_norm(c), 1e-8);
  for (std::uint64_t seed = 0; seed < 10000; ++seed)
    ASSERT_LE((random_orthonormal(6, 3, seed).transpose() * c).trace(), best + 1e-8);
}

TEST(Procrustes, RankDeficientInput) {
  Matrix c = Matrix::Zero(5, 3);
  c(0, 0) = 2.0;
  const Matrix q = procrustes_align(c);
  EXPECT_LE(orthonormality_defect(q), 1e-10);
  EXPECT_NEAR((q.transpose() * c).trace(), 2.0, 1e-12);
}
