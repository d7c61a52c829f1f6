#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <random>
#include <vector>

#include "mvsc/eval.hpp"
#include "mvsc/late_fusion.hpp"
#include "test_util.hpp"

using namespace mvsc;
using mvsc::testing::random_affinity;
using mvsc::testing::random_orthonormal;

namespace {

LfProblem random_problem(Index n, int views, int orders, int k, double l1, double l2, std::uint64_t seed) {
  LfProblem prob;
  for (int p = 0; p < views; ++p) {
    std::vector<Matrix> per_order;
    for (int o = 0; o < orders; ++o) per_order.push_back(random_orthonormal(n, k, seed * 101 + p * 7 + o));
    prob.base.push_back(std::move(per_order));
  }
  prob.average = random_orthonormal(n, k, seed * 101 + 99);
  prob.lambda1 = l1;
  prob.lambda2 = l2;
  return prob;
}

LfState random_state(const LfProblem& prob, std::uint64_t seed) {
  LfState s = initial_lf_state(prob);
  s.consensus = random_orthonormal(prob.n(), prob.k(), seed);
  for (int p = 0; p < prob.views(); ++p)
    for (int o = 0; o < prob.orders(); ++o) s.rotations[p][o] = random_orthonormal(prob.k(), prob.k(), seed + 10 * p + o + 1);
  const Vector w = mvsc::testing::random_uniform(prob.views(), 1, seed + 500).col(0);
  s.mu = w / w.sum();
  return s;
}

Matrix block_graph(int blocks, int size) {
  const int n = blocks * size;
  Matrix a = Matrix::Zero(n, n);
  for (int b = 0; b < blocks; ++b) a.block(b * size, b * size, size, size).setOnes();
  a.diagonal().setZero();
  return a;
}

double frobenius_inner(const Matrix& a, const Matrix& b) {
  double t = 0.0;
  for (Index i = 0; i < a.rows(); ++i)
    for (Index j = 0; j < a.cols(); ++j) t += a(i, j) * b(i, j);
  return t;
}

double objective_oracle(const LfProblem& prob, const LfState& s) {
  const int v = prob.views();
  Matrix m(v, v);
  for (int p = 0; p < v; ++p)
    for (int q = 0; q < v; ++q) {
      m(p, q) = 0.0;
      for (int o = 0; o < prob.orders(); ++o) {
        const Matrix& hp = prob.base[p][o];
        const Matrix& hq = prob.base[q][o];
        m(p, q) += frobenius_inner(hp, hq) / std::sqrt(frobenius_inner(hp, hp) * frobenius_inner(hq, hq));
      }
    }
  double total = prob.lambda1 * frobenius_inner(s.consensus, prob.average);
  for (int p = 0; p < v; ++p) {
    for (int o = 0; o < prob.orders(); ++o) total += s.mu(p) * frobenius_inner(s.consensus, prob.base[p][o] * s.rotations[p][o]);
    for (int q = 0; q < v; ++q) total -= prob.lambda2 * s.mu(p) * m(p, q) * s.mu(q);
  }
  return total;
}

std::vector<int> block_truth(int blocks, int size) {
  std::vector<int> t;
  for (int b = 0; b < blocks; ++b)
    for (int i = 0; i < size; ++i) t.push_back(b);
  return t;
}

}  // namespace

TEST(BasePartitions, SingleViewFirstOrderIsSpectralEmbedding) {
  const AffinityMatrix a{random_affinity(15, 3), 1, 0};
  const PartitionSet set = base_partitions({a}, 1, 3);
  ASSERT_EQ(set.size(), 1u);
  ASSERT_EQ(set[0].size(), 1u);
  EXPECT_LE(subspace_distance(set[0][0], bottom_k_eigenvectors(normalized_laplacian(a), 3).values), 1e-8);
}

TEST(BasePartitions, OneMatrixPerViewAndOrder) {
  const PartitionSet set = base_partitions({{random_affinity(12, 1), 1, 0}, {random_affinity(12, 2), 1, 1}}, 2, 2);
  ASSERT_EQ(set.size(), 2u);
  for (const auto& view : set) {
    ASSERT_EQ(view.size(), 2u);
    for (const Matrix& h : view) EXPECT_LE(orthonormality_defect(h), 1e-8);
  }
}

TEST(BasePartitions, FullNystromMatchesExactLabels) {
  Matrix a = block_graph(3, 33);
  a += 0.01 * random_affinity(99, 8, 0.1);
  const AffinityMatrix g{a, 1, 0};
  EmbeddingBackend nys{EmbeddingKind::nystrom, {99, 10, 3, 4}};
  const PartitionSet exact = base_partitions({g}, 2, 3);
  const PartitionSet approx = base_partitions({g}, 2, 3, nys);
  for (int o = 0; o < 2; ++o) {
    const Labeling le = kmeans(exact[0][o], 3, {10, 100, 1}).labeling;
    const Labeling la = kmeans(approx[0][o], 3, {10, 100, 1}).labeling;
    EXPECT_DOUBLE_EQ(accuracy(la, le), 1.0) << "order " << o + 1;
  }
}

TEST(AveragePartition, SingleAndIdenticalViews) {
  const AffinityMatrix a{random_affinity(14, 5), 1, 0};
  const Matrix one = average_partition({a}, 2);
  const Matrix h = bottom_k_eigenvectors(normalized_laplacian(a), 2).values;
  EXPECT_LE(subspace_distance(one, h), 1e-8);
  EXPECT_LE(subspace_distance(average_partition({a, {a.values, 1, 1}}, 2), h), 1e-8);
}

TEST(AveragePartition, MatchesAverageThenEmbed) {
  const Matrix a = random_affinity(16, 6), b = random_affinity(16, 7);
  const Matrix f = average_partition({{a, 1, 0}, {b, 1, 1}}, 3);
  const Matrix oracle = bottom_k_eigenvectors(normalized_laplacian({0.5 * (a + b), 1, -1}), 3).values;
  EXPECT_LT(principal_angles(f, oracle).maxCoeff(), 1e-8);
}

TEST(CorrelationPartitions, IdenticalAndOrthogonal) {
  const Matrix h = random_orthonormal(10, 4, 1);
  const Matrix q = random_orthonormal(10, 4, 2);
  EXPECT_NEAR(correlation_matrix_partitions({{h, q}, {h, q}})(0, 1), 2.0, 1e-12);
  const Matrix e = Matrix::Identity(6, 6);
  const Matrix m = correlation_matrix_partitions({{e.leftCols(3)}, {e.rightCols(3)}});
  EXPECT_EQ(m(0, 1), 0.0);
  EXPECT_EQ(m(1, 1), 1.0);
}

TEST(CorrelationPartitions, MatchesScalarLoop) {
  const LfProblem prob = random_problem(12, 3, 2, 3, 1, 1, 4);
  const Matrix m = correlation_matrix_partitions(prob.base);
  for (int p = 0; p < 3; ++p)
    for (int q = 0; q < 3; ++q) {
      double expect = 0.0;
      for (int o = 0; o < 2; ++o) expect += frobenius_inner(prob.base[p][o], prob.base[q][o]) / 3.0;
      EXPECT_NEAR(m(p, q), expect, 1e-10);
    }
}

TEST(UpdateConsensus, SingleOrthonormalInput) {
  LfProblem prob = random_problem(10, 1, 1, 3, 0.0, 1.0, 2);
  LfState s = initial_lf_state(prob);
  update_consensus(prob, s);
  EXPECT_LE((s.consensus - prob.base[0][0]).cwiseAbs().maxCoeff(), 1e-10);
  EXPECT_NEAR((s.consensus.transpose() * prob.base[0][0]).trace(), 3.0, 1e-10);
}

TEST(UpdateConsensus, LargeLambdaPullsTowardAverage) {
  LfProblem prob = random_problem(12, 2, 2, 3, 1e8, 1.0, 3);
  LfState s = initial_lf_state(prob);
  update_consensus(prob, s);
  EXPECT_LE(subspace_distance(s.consensus, prob.average), 1e-6);
}

TEST(UpdateConsensus, BeatsRandomOrthonormal) {
  LfProblem prob = random_problem(9, 2, 2, 3, 0.5, 1.0, 5);
  LfState s = random_state(prob, 5);
  update_consensus(prob, s);
  Matrix c = prob.lambda1 * prob.average;
  for (int p = 0; p < 2; ++p)
    for (int o = 0; o < 2; ++o) c += s.mu(p) * prob.base[p][o] * s.rotations[p][o];
  const double best = (s.consensus.transpose() * c).trace();
  EXPECT_NEAR(best, nuclear_norm(c), 1e-8);
  for (std::uint64_t t = 0; t < 2000; ++t)
    ASSERT_LE((random_orthonormal(9, 3, 7000 + t).transpose() * c).trace(), best + 1e-10);
}

TEST(UpdateRotations, RecoversRotation) {
  LfProblem prob = random_problem(10, 1, 1, 3, 1.0, 1.0, 6);
  LfState s = initial_lf_state(prob);
  s.consensus = prob.base[0][0];
  update_rotations(prob, s);
  EXPECT_LE((s.rotations[0][0] - Matrix::Identity(3, 3)).cwiseAbs().maxCoeff(), 1e-10);
  const Matrix r = random_orthonormal(3, 3, 77);
  s.consensus = prob.base[0][0] * r;
  update_rotations(prob, s);
  EXPECT_LE((s.rotations[0][0] - r).cwiseAbs().maxCoeff(), 1e-10);
}

TEST(UpdateRotations, ImprovesEveryPair) {
  const LfProblem prob = random_problem(11, 3, 2, 3, 1.0, 1.0, 8);
  LfState s = random_state(prob, 8);
  const LfState before = s;
  update_rotations(prob, s);
  for (int p = 0; p < 3; ++p)
    for (int o = 0; o < 2; ++o) {
      const double was = (before.consensus.transpose() * prob.base[p][o] * before.rotations[p][o]).trace();
      const double now = (s.consensus.transpose() * prob.base[p][o] * s.rotations[p][o]).trace();
      EXPECT_GE(now, was - 1e-12);
      EXPECT_LE(orthonormality_defect(s.rotations[p][o]), 1e-10);
    }
}

TEST(UpdateRotations, ZeroWeightFreezes) {
  const LfProblem prob = random_problem(8, 2, 1, 2, 1.0, 1.0, 9);
  LfState s = random_state(prob, 9);
  s.mu = Eigen::Vector2d(1.0, 0.0);
  const Matrix frozen = s.rotations[1][0];
  update_rotations(prob, s);
  EXPECT_EQ(s.rotations[1][0], frozen);
}

TEST(UpdateWeights, IdenticalViewsUniform) {
  const Matrix h = random_orthonormal(10, 2, 1);
  LfProblem prob;
  prob.base = {{h}, {h}, {h}};
  prob.average = h;
  LfState s = initial_lf_state(prob);
  s.consensus = h;
  s.mu = Eigen::Vector3d(0.6, 0.3, 0.1);
  update_weights(prob, correlation_matrix_partitions(prob.base), s);
  EXPECT_LE((s.mu - Vector::Constant(3, 1.0 / 3.0)).cwiseAbs().maxCoeff(), 1e-8);
}

TEST(UpdateWeights, OrthogonalViewGetsLessWeight) {
  const Matrix e = Matrix::Identity(9, 9);
  const Matrix h = e.leftCols(3);
  const Matrix g = e.middleCols(3, 3);
  LfProblem prob;
  prob.base = {{h}, {h * random_orthonormal(3, 3, 5)}, {g}};
  prob.average = h;
  LfState s = initial_lf_state(prob);
  s.consensus = h;
  update_rotations(prob, s);
  const Matrix m = correlation_matrix_partitions(prob.base);
  update_weights(prob, m, s);
  EXPECT_LT(s.mu(2), 1.0 / 3.0);
  // grid oracle on the weight subproblem
  const Vector t = detail::alignment_scores(prob, s);
  double best = -std::numeric_limits<double>::infinity();
  for (int i = 0; i <= 1000; ++i)
    for (int j = 0; i + j <= 1000; ++j) {
      const Vector mu = Eigen::Vector3d(i * 1e-3, j * 1e-3, 1.0 - (i + j) * 1e-3);
      best = std::max(best, mu.dot(t) - mu.dot(m * mu));
    }
  EXPECT_GE(s.mu.dot(t) - s.mu.dot(m * s.mu), best - 1e-4);
}

TEST(UpdateWeights, TwoViewGridOracle) {
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    const double l2 = 0.25 + 0.5 * static_cast<double>(seed % 4);
    const LfProblem prob = random_problem(12, 2, 2, 3, 1.0, l2, 20 + seed);
    const Matrix m = correlation_matrix_partitions(prob.base);
    LfState s = random_state(prob, 20 + seed);
    const double before = lf_objective(prob, m, s);
    update_weights(prob, m, s);
    const double after = lf_objective(prob, m, s);
    EXPECT_GE(after, before - 1e-10);
    double best = -std::numeric_limits<double>::infinity();
    LfState g = s;
    for (int i = 0; i <= 1000; ++i) {
      g.mu = Eigen::Vector2d(i * 1e-3, 1.0 - i * 1e-3);
      best = std::max(best, lf_objective(prob, m, g));
    }
    EXPECT_GE(after, best - 1e-4) << "seed " << seed;
  }
}

TEST(UpdateWeights, ZeroLambda2PicksBestVertex) {
  LfProblem prob = random_problem(10, 3, 1, 2, 1.0, 0.0, 30);
  LfState s = random_state(prob, 30);
  s.consensus = prob.base[1][0] * s.rotations[1][0];
  update_weights(prob, correlation_matrix_partitions(prob.base), s);
  EXPECT_EQ(s.mu, Vector(Eigen::Vector3d(0.0, 1.0, 0.0)));
  // ties go to the lowest index
  prob.base[2][0] = prob.base[1][0];
  s.rotations[2][0] = s.rotations[1][0];
  update_weights(prob, correlation_matrix_partitions(prob.base), s);
  EXPECT_EQ(s.mu, Vector(Eigen::Vector3d(0.0, 1.0, 0.0)));
}

TEST(LfObjective, PerfectAlignment) {
  const Matrix h = random_orthonormal(10, 3, 1);
  LfProblem prob;
  prob.base = {{h, h}, {h, h}};
  prob.average = h;
  prob.lambda1 = 0.7;
  prob.lambda2 = 0.0;
  LfState s = initial_lf_state(prob);
  s.consensus = h;
  EXPECT_NEAR(lf_objective(prob, s), 2 * 3 + 0.7 * 3, 1e-10);
  prob.lambda2 = 1.5;
  // mu^T M mu = O for identical views
  EXPECT_NEAR(lf_objective(prob, s), 2 * 3 + 0.7 * 3 - 1.5 * 2, 1e-10);
}

TEST(LfObjective, MatchesScalarOracle) {
  for (std::uint64_t seed = 0; seed < 5; ++seed) {
    const LfProblem prob = random_problem(8, 3, 2, 2, 0.3, 0.8, seed);
    const LfState s = random_state(prob, seed);
    EXPECT_NEAR(lf_objective(prob, s), objective_oracle(prob, s), 1e-8);
  }
}

TEST(UpperBound, Values) {
  EXPECT_DOUBLE_EQ(objective_upper_bound(2, 3, 1.0, 10), 195.0);
  EXPECT_DOUBLE_EQ(objective_upper_bound(1, 1, 0.0, 1), 1.0);
}

TEST(SolveLf, NoiseFreeBlocksRecovered) {
  const Matrix a = block_graph(3, 12);
  const std::vector<AffinityMatrix> graphs{{a, 1, 0}, {a, 1, 1}};
  LfProblem prob;
  prob.base = base_partitions(graphs, 2, 3);
  prob.average = average_partition(graphs, 3);
  const LfResult res = solve_lf(prob);
  const Labeling lab = kmeans(res.state.consensus, 3, {10, 100, 2}).labeling;
  EXPECT_DOUBLE_EQ(accuracy(lab, make_labeling(block_truth(3, 12))), 1.0);
}

TEST(SolveLf, MonotoneBoundedFeasible) {
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    const LfProblem prob = random_problem(25, 3, 2, 3, 1.0, seed % 3 == 0 ? 0.0 : 0.5, 400 + seed);
    const LfResult res = solve_lf(prob, 1e-8, 50);
    const auto& tr = res.trace.step_objective;
    const double bound = objective_upper_bound(2, 3, 1.0, 3);
    for (std::size_t i = 0; i < tr.size(); ++i) {
      if (i > 0) ASSERT_GE(tr[i], tr[i - 1] - 1e-8) << "seed " << seed << " step " << i;
      ASSERT_LE(tr[i], bound);
    }
    const LfState& s = res.state;
    EXPECT_LE(orthonormality_defect(s.consensus), 1e-8);
    for (const auto& view : s.rotations)
      for (const Matrix& w : view) EXPECT_LE(orthonormality_defect(w), 1e-8);
    Matrix c = prob.lambda1 * prob.average;
    for (int p = 0; p < 3; ++p)
      for (int o = 0; o < 2; ++o) c += s.mu(p) * prob.base[p][o] * s.rotations[p][o];
    // the last block step was the consensus step
    EXPECT_NEAR((s.consensus.transpose() * c).trace(), nuclear_norm(c), 1e-8);
  }
}

TEST(SolveLf, PermutationEquivariant) {
  Matrix a = block_graph(3, 10), b = block_graph(3, 10);
  a += 0.05 * random_affinity(30, 1, 0.3);
  b += 0.05 * random_affinity(30, 2, 0.3);
  std::vector<Index> perm(30);
  std::iota(perm.begin(), perm.end(), 0);
  std::shuffle(perm.begin(), perm.end(), std::mt19937_64(3));
  Eigen::PermutationMatrix<Eigen::Dynamic> pm(30);
  for (Index i = 0; i < 30; ++i) pm.indices()(i) = static_cast<int>(perm[i]);
  auto solve = [](const Matrix& x, const Matrix& y) {
    const std::vector<AffinityMatrix> graphs{{x, 1, 0}, {y, 1, 1}};
    LfProblem prob;
    prob.base = base_partitions(graphs, 2, 3);
    prob.average = average_partition(graphs, 3);
    return solve_lf(prob).state.consensus;
  };
  const Matrix h = solve(a, b);
  const Matrix hp = solve(pm * a * pm.transpose(), pm * b * pm.transpose());
  EXPECT_LE(subspace_distance(pm * h, hp), 1e-6);
  std::vector<int> truth = block_truth(3, 10), truth_p(30);
  for (Index i = 0; i < 30; ++i) truth_p[perm[i]] = truth[i];
  const double acc = accuracy(kmeans(h, 3, {10, 100, 0}).labeling, make_labeling(truth));
  const double acc_p = accuracy(kmeans(hp, 3, {10, 100, 0}).labeling, make_labeling(truth_p));
  EXPECT_DOUBLE_EQ(acc, acc_p);
}

TEST(SolveLf, LiteralVariantRuns) {
  LfProblem prob = random_problem(20, 2, 2, 2, 2.0, 1.0, 50);
  prob.variant = QpVariant::literal;
  const LfResult res = solve_lf(prob);
  EXPECT_NEAR(res.state.mu.sum(), 1.0, 1e-10);
  EXPECT_GE(res.state.mu.minCoeff(), 0.0);
}

TEST(SolveLf, InvalidProblems) {
  LfProblem prob = random_problem(6, 2, 1, 2, 1.0, 1.0, 1);
  prob.lambda2 = -1.0;
  EXPECT_THROW(solve_lf(prob), Error);
  prob.lambda2 = 1.0;
  prob.base[1][0] = Matrix::Zero(6, 3);
  EXPECT_THROW(solve_lf(prob), Error);
}
