#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <random>

#include "kernelgp/errors.hpp"
#include "kernelgp/kernels.hpp"
#include "test_support.hpp"

using namespace kernelgp;
using kernelgp::testing::kernel_oracle;

namespace {

constexpr KernelType kAllKernels[] = {KernelType::Gaussian, KernelType::Matern32,
                                      KernelType::Matern52};

PointSet line_points(std::initializer_list<double> xs) {
  RowMatrix X(static_cast<Index>(xs.size()), 1);
  Index i = 0;
  for (double x : xs) X(i++, 0) = x;
  return PointSet(X);
}

// d kernel / dl by a 5-point stencil evaluated in long double.
double fd_grad_l(KernelType kt, double r, double l) {
  // the exponent moves by about (r/l)^2 per unit relative change of l
  const long double h = 1e-3L * l / std::max(1.0, (r / l) * (r / l));
  auto k = [&](long double ll) { return kernel_oracle<long double>(kt, r, ll); };
  const long double d = (-k(l + 2 * h) + 8 * k(l + h) - 8 * k(l - h) + k(l - 2 * h)) / (12 * h);
  return static_cast<double>(d);
}

}  // namespace

TEST(PointSet, RejectsEmptyAndNonFinite) {
  EXPECT_THROW(PointSet(RowMatrix(0, 2)), InvalidArgument);
  EXPECT_THROW(PointSet(RowMatrix(2, 0)), InvalidArgument);
  RowMatrix X = RowMatrix::Zero(2, 2);
  X(1, 1) = std::nan("");
  EXPECT_THROW(PointSet{X}, InvalidArgument);
  X(1, 1) = INFINITY;
  EXPECT_THROW(PointSet{X}, InvalidArgument);
}

TEST(PointSet, FromRowMajorAndSubset) {
  const double v[] = {1, 2, 3, 4, 5, 6};
  const PointSet P = PointSet::from_row_major(v, 3, 2);
  EXPECT_EQ(P.size(), 3);
  EXPECT_EQ(P.dim(), 2);
  EXPECT_EQ(P.data()(2, 1), 6.0);
  EXPECT_DOUBLE_EQ(P.sq_norms()[1], 25.0);
  const Index idx[] = {2, 0};
  const PointSet S = P.subset(idx);
  EXPECT_EQ(S.data()(0, 0), 5.0);
  EXPECT_EQ(S.data()(1, 1), 2.0);
  EXPECT_THROW(PointSet::from_row_major(v, 4, 2), InvalidArgument);
}

TEST(KernelNames, RoundTrip) {
  for (KernelType kt : kAllKernels) EXPECT_EQ(parse_kernel(kernel_name(kt)), kt);
  EXPECT_EQ(kernel_name(KernelType::Matern52), "matern52");
  EXPECT_THROW(parse_kernel("rbf"), InvalidArgument);
}

TEST(PairwiseSqDist, TwoPointsOnALine) {
  const PointSet X = line_points({0, 1});
  const Eigen::MatrixXd D = pairwise_sq_dist(X, X);
  EXPECT_EQ(D(0, 0), 0.0);
  EXPECT_EQ(D(1, 1), 0.0);
  EXPECT_DOUBLE_EQ(D(0, 1), 1.0);
  EXPECT_DOUBLE_EQ(D(1, 0), 1.0);
}

TEST(PairwiseSqDist, ThreeFourFive) {
  RowMatrix a(1, 2), b(1, 2);
  a << 0, 0;
  b << 3, 4;
  EXPECT_DOUBLE_EQ(pairwise_sq_dist(PointSet(a), PointSet(b))(0, 0), 25.0);
}

TEST(PairwiseSqDist, MatchesDoubleLoop) {
  std::mt19937_64 rng(11);
  const RowMatrix X = kernelgp::testing::uniform_points(rng, 5, 3, -2, 2);
  const RowMatrix Y = kernelgp::testing::uniform_points(rng, 4, 3, -2, 2);
  const Eigen::MatrixXd D = pairwise_sq_dist(PointSet(X), PointSet(Y));
  for (Index i = 0; i < 5; ++i)
    for (Index j = 0; j < 4; ++j)
      EXPECT_NEAR(D(i, j), kernelgp::testing::sq_dist_loop(X, i, Y, j), 1e-12);
}

TEST(PairwiseSqDist, ClampsCancellationAndChecksDims) {
  RowMatrix X(2, 2);
  X << 1e8, 1e8 + 1e-8, 1e8, 1e8;
  const Eigen::MatrixXd D = pairwise_sq_dist(PointSet(X), PointSet(X));
  EXPECT_GE(D.minCoeff(), 0.0);
  EXPECT_THROW(pairwise_sq_dist(PointSet(X), line_points({1})), InvalidArgument);
}

TEST(EvalKernel, GaussianScalarValues) {
  const PointSet u = line_points({0});
  const PointSet v = line_points({1});
  EXPECT_EQ(eval_kernel(KernelType::Gaussian, u, u, 0.37)(0, 0), 1.0);
  // exp(-1/2)
  EXPECT_NEAR(eval_kernel(KernelType::Gaussian, u, v, 1.0)(0, 0), 0.6065306597126334, 1e-15);
}

TEST(EvalKernel, MatchesClosedFormOracle) {
  std::mt19937_64 rng(5);
  const RowMatrix X = kernelgp::testing::uniform_points(rng, 7, 3, -1, 1);
  const RowMatrix Y = kernelgp::testing::uniform_points(rng, 6, 3, -1, 1);
  for (KernelType kt : kAllKernels) {
    const Eigen::MatrixXd K = eval_kernel(kt, PointSet(X), PointSet(Y), 0.8);
    for (Index i = 0; i < 7; ++i)
      for (Index j = 0; j < 6; ++j) {
        const double r = std::sqrt(kernelgp::testing::sq_dist_loop(X, i, Y, j));
        EXPECT_NEAR(K(i, j), kernel_oracle(kt, r, 0.8), 1e-13) << kernel_name(kt);
      }
  }
}

TEST(EvalKernel, TransposeSymmetryUnitDiagonalBounded) {
  std::mt19937_64 rng(6);
  for (KernelType kt : kAllKernels) {
    for (int trial = 0; trial < 10; ++trial) {
      std::uniform_real_distribution<double> ul(0.1, 10.0);
      const double l = ul(rng);
      const PointSet X(kernelgp::testing::uniform_points(rng, 9, 2, -5, 5));
      const PointSet Y(kernelgp::testing::uniform_points(rng, 4, 2, -5, 5));
      EXPECT_EQ(eval_kernel(kt, X, Y, l), eval_kernel(kt, Y, X, l).transpose());
      const Eigen::MatrixXd K = eval_kernel(kt, X, X, l);
      EXPECT_EQ(K, K.transpose());
      for (Index i = 0; i < 9; ++i) EXPECT_EQ(K(i, i), 1.0);
      EXPECT_LE(K.maxCoeff(), 1.0);
      EXPECT_GE(K.minCoeff(), 0.0);
    }
  }
}

TEST(EvalKernel, RejectsNonPositiveLengthScale) {
  const PointSet X = line_points({0, 1});
  for (KernelType kt : kAllKernels) {
    EXPECT_THROW(eval_kernel(kt, X, X, 0.0), InvalidArgument);
    EXPECT_THROW(eval_kernel(kt, X, X, -1.0), InvalidArgument);
    EXPECT_THROW(eval_kernel_grad_l(kt, X, X, 0.0), InvalidArgument);
  }
}

TEST(EvalKernelGradL, ZeroAtCoincidentPoints) {
  const PointSet X = line_points({0.3, 0.3});
  for (KernelType kt : kAllKernels) {
    const Eigen::MatrixXd G = eval_kernel_grad_l(kt, X, X, 1.7);
    EXPECT_EQ(G.cwiseAbs().maxCoeff(), 0.0) << kernel_name(kt);
    EXPECT_EQ(kernel_grad_l(kt, 0.0, 1e-3), 0.0);
  }
}

TEST(EvalKernelGradL, GaussianClosedForm) {
  std::mt19937_64 rng(7);
  const RowMatrix X = kernelgp::testing::uniform_points(rng, 6, 2, -2, 2);
  const double l = 0.9;
  const Eigen::MatrixXd G = eval_kernel_grad_l(KernelType::Gaussian, PointSet(X), PointSet(X), l);
  for (Index i = 0; i < 6; ++i)
    for (Index j = 0; j < 6; ++j) {
      const double r2 = kernelgp::testing::sq_dist_loop(X, i, X, j);
      const double expect = std::exp(-r2 / (2 * l * l)) * r2 / (l * l * l);
      EXPECT_NEAR(G(i, j), expect, 1e-12);
      EXPECT_NEAR(G(i, j), fd_grad_l(KernelType::Gaussian, std::sqrt(r2), l), 1e-9);
    }
}

// 100 random (r, l) triples per kernel with r in [1e-3, 10], l in [0.1, 10].
TEST(EvalKernelGradL, MatchesFiniteDifferences) {
  std::mt19937_64 rng(8);
  std::uniform_real_distribution<double> log_r(std::log(1e-3), std::log(10.0));
  std::uniform_real_distribution<double> log_l(std::log(0.1), std::log(10.0));
  for (KernelType kt : kAllKernels) {
    double worst = 0.0;
    for (int t = 0; t < 100; ++t) {
      const double r = std::exp(log_r(rng));
      const double l = std::exp(log_l(rng));
      const double analytic = kernel_grad_l(kt, r * r, l);
      const double fd = fd_grad_l(kt, r, l);
      if (analytic == 0.0 && std::abs(fd) < 1e-300) continue;
      worst = std::max(worst, std::abs(analytic - fd) / (std::abs(analytic) + 1e-300));
    }
    EXPECT_LT(worst, 1e-5) << kernel_name(kt);
  }
}

TEST(EvalKernelBlock, AnyTilingIsBitIdentical) {
  std::mt19937_64 rng(9);
  const PointSet X(kernelgp::testing::uniform_points(rng, 23, 3, -1, 1));
  const PointSet Y(kernelgp::testing::uniform_points(rng, 17, 3, -1, 1));
  for (KernelType kt : kAllKernels) {
    for (KernelPart part : {KernelPart::Value, KernelPart::GradL}) {
      const Eigen::MatrixXd full = part == KernelPart::Value ? eval_kernel(kt, X, Y, 0.6)
                                                             : eval_kernel_grad_l(kt, X, Y, 0.6);
      for (Index rb : {1, 4, 7, 23}) {
        for (Index cb : {1, 5, 17}) {
          Eigen::MatrixXd tiled(23, 17);
          for (Index r0 = 0; r0 < 23; r0 += rb)
            for (Index c0 = 0; c0 < 17; c0 += cb) {
              const Index rows = std::min(rb, 23 - r0);
              const Index cols = std::min(cb, 17 - c0);
              eval_kernel_block(kt, part, X, r0, rows, Y, c0, cols, 0.6,
                                tiled.block(r0, c0, rows, cols));
            }
          EXPECT_EQ(tiled, full);
        }
      }
    }
  }
}

TEST(EvalKernelBlock, ValidatesRanges) {
  const PointSet X = line_points({0, 1, 2});
  Eigen::MatrixXd out(2, 2);
  EXPECT_THROW(eval_kernel_block(KernelType::Gaussian, KernelPart::Value, X, 2, 2, X, 0, 2, 1.0, out),
               InvalidArgument);
  Eigen::MatrixXd wrong(3, 3);
  EXPECT_THROW(
      eval_kernel_block(KernelType::Gaussian, KernelPart::Value, X, 0, 2, X, 0, 2, 1.0, wrong),
      InvalidArgument);
}
