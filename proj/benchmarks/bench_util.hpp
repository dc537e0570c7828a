#pragma once

#include <random>

#include "kernelgp/kernelgp.hpp"

namespace kernelgp::bench {

inline RowMatrix random_points(Index n, Index d, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  return RowMatrix::NullaryExpr(n, d, [&] { return u(rng); });
}

inline Eigen::MatrixXd random_block(Index n, Index k, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> g(0.0, 1.0);
  return Eigen::MatrixXd::NullaryExpr(n, k, [&] { return g(rng); });
}

}  // namespace kernelgp::bench
