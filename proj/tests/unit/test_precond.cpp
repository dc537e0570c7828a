#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <random>

#include "kernelgp/errors.hpp"
#include "kernelgp/precond.hpp"
#include "kernelgp/solver.hpp"
#include "test_support.hpp"

using namespace kernelgp;
namespace kt_ = kernelgp::testing;

namespace {

// Max-min selection recomputed from scratch at every step.
std::vector<Index> fps_oracle(const RowMatrix& X, Index m, Index seed) {
  std::vector<Index> chosen{seed};
  while (static_cast<Index>(chosen.size()) < m) {
    Index best = -1;
    double best_d = -1.0;
    for (Index i = 0; i < X.rows(); ++i) {
      if (std::find(chosen.begin(), chosen.end(), i) != chosen.end()) continue;
      double dmin = INFINITY;
      for (Index c : chosen) dmin = std::min(dmin, kt_::sq_dist_loop(X, i, X, c));
      if (dmin > best_d) {
        best_d = dmin;
        best = i;
      }
    }
    chosen.push_back(best);
  }
  return chosen;
}

}  // namespace

TEST(FpsSelect, SingleLandmarkIsSeed) {
  std::mt19937_64 rng(1);
  const PointSet X(kt_::uniform_points(rng, 10, 2, 0, 1));
  EXPECT_EQ(fps_select(X, 1, 0), std::vector<Index>{0});
  EXPECT_EQ(fps_select(X, 1, 7), std::vector<Index>{7});
}

TEST(FpsSelect, LineEndpoints) {
  RowMatrix X(10, 1);
  for (Index i = 0; i < 10; ++i) X(i, 0) = static_cast<double>(i);
  EXPECT_EQ(fps_select(PointSet(X), 2, 0), (std::vector<Index>{0, 9}));
  // after {0, 9}, points 4 and 5 tie at distance 4; the lower index wins
  EXPECT_EQ(fps_select(PointSet(X), 3, 0), (std::vector<Index>{0, 9, 4}));
}

TEST(FpsSelect, FullSelectionIsAPermutation) {
  std::mt19937_64 rng(2);
  const PointSet X(kt_::uniform_points(rng, 37, 3, 0, 1));
  std::vector<Index> all = fps_select(X, 37, 5);
  EXPECT_EQ(all.front(), 5);
  std::sort(all.begin(), all.end());
  for (Index i = 0; i < 37; ++i) EXPECT_EQ(all[static_cast<std::size_t>(i)], i);
}

TEST(FpsSelect, DuplicatePointsStillDistinct) {
  const PointSet X(RowMatrix::Zero(6, 2));
  std::vector<Index> all = fps_select(X, 6, 0);
  EXPECT_EQ(all, (std::vector<Index>{0, 1, 2, 3, 4, 5}));
}

TEST(FpsSelect, MatchesBruteForceOracle) {
  std::mt19937_64 rng(3);
  for (int trial = 0; trial < 10; ++trial) {
    const RowMatrix X = kt_::uniform_points(rng, 60, 2, -1, 1);
    const Index seed = static_cast<Index>(trial * 5);
    EXPECT_EQ(fps_select(PointSet(X), 15, seed), fps_oracle(X, 15, seed));
  }
}

TEST(FpsSelect, Errors) {
  const PointSet X(RowMatrix::Zero(3, 1));
  EXPECT_THROW(fps_select(X, 4, 0), InvalidArgument);
  EXPECT_THROW(fps_select(X, 0, 0), InvalidArgument);
  EXPECT_THROW(fps_select(X, 2, 3), InvalidArgument);
  EXPECT_THROW(fps_select(X, 2, -1), InvalidArgument);
}

TEST(DefaultRank, Formula) {
  EXPECT_EQ(default_precond_rank(1), 1);
  EXPECT_EQ(default_precond_rank(10), 10);
  EXPECT_EQ(default_precond_rank(100), 40);
  EXPECT_EQ(default_precond_rank(101), 44);
  EXPECT_EQ(default_precond_rank(10000), 400);
  EXPECT_EQ(default_precond_rank(1000000), 500);
}

TEST(Preconditioner, SinglePoint) {
  const KernelEngine E(KernelType::Gaussian, PointSet(RowMatrix::Zero(1, 2)), {1.0, 2.0, 0.5});
  const Preconditioner P = Preconditioner::build(E, 1);
  Eigen::MatrixXd v(1, 2);
  v << 3.0, -1.0;
  // the landmark ridge perturbs f^2 by 1e-10 relative
  EXPECT_LT(kt_::rel_err(P.apply_inverse(v), v / 4.5), 1e-9);
  EXPECT_EQ(P.rank(), 1);
  EXPECT_EQ(P.shift(), 0.5);
}

TEST(Preconditioner, TinySignalIsShiftedIdentity) {
  std::mt19937_64 rng(4);
  const PointSet X(kt_::uniform_points(rng, 50, 2, 0, 1));
  const double s = 0.3;
  const KernelEngine E(KernelType::Matern52, X, {0.5, 1e-8, s});
  const Preconditioner P = Preconditioner::build(E, 10);
  const Eigen::MatrixXd B = kt_::normal_matrix(rng, 50, 3);
  EXPECT_LT(kt_::rel_err(P.apply_inverse(B), B / s), 1e-12);
}

TEST(Preconditioner, RoundTripSymmetryPositivity) {
  std::mt19937_64 rng(5);
  const PointSet X(kt_::uniform_points(rng, 120, 3, 0, 1));
  for (KernelType kt : {KernelType::Gaussian, KernelType::Matern32, KernelType::Matern52}) {
    const KernelEngine E(kt, X, {0.6, 1.3, 0.02});
    const Preconditioner P = Preconditioner::build(E, 30);
    EXPECT_EQ(P.size(), 120);
    const Eigen::MatrixXd B = kt_::normal_matrix(rng, 120, 4);
    EXPECT_LT(kt_::rel_err(P.apply_inverse(P.apply(B)), B), 1e-8);
    const Eigen::VectorXd v = kt_::normal_matrix(rng, 120, 1);
    const Eigen::VectorXd w = kt_::normal_matrix(rng, 120, 1);
    const double vMw = v.dot(P.apply_inverse(w).col(0));
    const double wMv = w.dot(P.apply_inverse(v).col(0));
    EXPECT_LE(kt_::rel_err(vMw, wMv), 1e-10);
    EXPECT_GT(v.dot(P.apply_inverse(v).col(0)), 0.0);
  }
}

TEST(Preconditioner, ApplyMatchesNystromFormula) {
  std::mt19937_64 rng(6);
  const PointSet X(kt_::uniform_points(rng, 40, 2, 0, 1));
  const double l = 0.4, f = 1.5, s = 0.05;
  const KernelEngine E(KernelType::Matern32, X, {l, f, s});
  const Index m = 12;
  const Preconditioner P = Preconditioner::build(E, m);
  const PointSet L = X.subset(P.landmarks());
  Eigen::MatrixXd Kmm = eval_kernel(KernelType::Matern32, L, L, l);
  Kmm.diagonal().array() += 1e-10 * Kmm.trace() / m;
  const Eigen::MatrixXd Knm = eval_kernel(KernelType::Matern32, X, L, l);
  const Eigen::MatrixXd M =
      f * f * Knm * Kmm.ldlt().solve(Knm.transpose()) + s * Eigen::MatrixXd::Identity(40, 40);
  const Eigen::MatrixXd B = kt_::normal_matrix(rng, 40, 2);
  EXPECT_LT(kt_::rel_err(P.apply(B), M * B), 1e-9);
  EXPECT_LT(kt_::rel_err(P.apply_inverse(B), M.ldlt().solve(B)), 1e-8);
}

TEST(Preconditioner, FullRankMatchesDenseSolve) {
  std::mt19937_64 rng(7);
  const PointSet X(kt_::uniform_points(rng, 150, 2, 0, 1));
  const KernelEngine E(KernelType::Gaussian, X, {0.2, 1.0, 0.01}, EngineMode::dense());
  const Preconditioner P = Preconditioner::build(E, 150);
  const Eigen::MatrixXd B = kt_::normal_matrix(rng, 150, 3);
  const Eigen::MatrixXd dense = E.materialize().llt().solve(B);
  EXPECT_LT(kt_::rel_err(P.apply_inverse(B), dense), 1e-6);
}

TEST(Preconditioner, ReducesIterationsOnSmoothKernel) {
  std::mt19937_64 rng(8);
  const PointSet X(kt_::uniform_points(rng, 500, 2, 0, 1));
  const double diameter = std::sqrt(2.0);
  const KernelEngine E(KernelType::Gaussian, X, {diameter, 1.0, 1e-2}, EngineMode::dense());
  const Preconditioner P = Preconditioner::build(E, default_precond_rank(500));
  const Eigen::MatrixXd y = kt_::normal_matrix(rng, 500, 1);
  const LinearOperator A = [&E](const Eigen::MatrixXd& B) { return E.khat_matmul(B); };
  const SolveReport plain = pcg_solve(A, identity_operator(), y, 1e-8, 2000);
  const SolveReport pre = pcg_solve(A, P.inverse_operator(), y, 1e-8, 2000);
  ASSERT_TRUE(plain.all_converged());
  ASSERT_TRUE(pre.all_converged());
  EXPECT_LT(pre.traces[0].iterations, plain.traces[0].iterations);
}

TEST(Preconditioner, DeterministicLandmarks) {
  std::mt19937_64 rng(9);
  const PointSet X(kt_::uniform_points(rng, 90, 2, 0, 1));
  const KernelEngine E(KernelType::Gaussian, X, {0.5, 1.0, 0.1});
  EXPECT_EQ(Preconditioner::build(E, 20).landmarks(), Preconditioner::build(E, 20).landmarks());
  EXPECT_EQ(Preconditioner::build(E, 20).landmarks(), fps_select(X, 20, 0));
  EXPECT_THROW(Preconditioner::build(E, 91), InvalidArgument);
  EXPECT_THROW(Preconditioner::build(E, 0), InvalidArgument);
}
