#pragma once

#include <Eigen/Dense>

#include <vector>

#include "kernelgp/kmat.hpp"
#include "kernelgp/solver.hpp"

namespace kernelgp {

/// Greedy farthest-point sampling in input space (squared Euclidean
/// distance). Starts at seed_index; each next pick maximizes the distance to
/// the already-selected set, ties going to the lowest index.
std::vector<Index> fps_select(const PointSet& X, Index m, Index seed_index = 0);

/// min(4 * ceil(sqrt(n)), 500, n).
Index default_precond_rank(Index n);

/// Nystrom low-rank-plus-shift approximation of Khat,
///
///   M = f^2 K_nm (K_mm + eps I)^{-1} K_mn + s I = U U' + s I,
///
/// with landmarks from fps_select and eps = 1e-10 * trace(K_mm) / m.
/// M^{-1} is applied through the Woodbury identity in O(n m k).
class Preconditioner {
 public:
  /// Throws NumericalError if K_mm + eps I or the Woodbury core cannot be
  /// factored.
  static Preconditioner build(const KernelEngine& engine, Index m);

  Index size() const { return factor_.rows(); }
  Index rank() const { return factor_.cols(); }
  double shift() const { return shift_; }
  const std::vector<Index>& landmarks() const { return landmarks_; }

  /// M^{-1} B.
  Eigen::MatrixXd apply_inverse(const Eigen::MatrixXd& B) const;

  /// M B.
  Eigen::MatrixXd apply(const Eigen::MatrixXd& B) const;

  LinearOperator inverse_operator() const;

 private:
  Preconditioner() = default;

  std::vector<Index> landmarks_;
  Eigen::MatrixXd factor_;  // U, n x m
  Eigen::LLT<Eigen::MatrixXd> core_;  // I + U'U / s
  double shift_ = 0.0;
};

}  // namespace kernelgp
