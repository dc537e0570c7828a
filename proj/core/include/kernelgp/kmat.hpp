#pragma once

#include <Eigen/Dense>

#include <cstddef>
#include <memory>

#include "kernelgp/kernels.hpp"

namespace kernelgp {

/// Length scale l, signal scale f and noise term s. All strictly positive.
struct Hyperparams {
  double l = 1.0;
  double f = 1.0;
  double s = 1.0;

  /// Throws InvalidArgument unless l, f, s are finite and > 0.
  void validate() const;
};

enum class ThetaTag { L, F, S };

/// Storage strategy for the regularized kernel matrix.
struct EngineMode {
  enum class Kind { Dense, OnTheFly };

  static constexpr Index kDefaultBlockSize = 256;
  static constexpr Index kDefaultDenseBudget = 20000;

  Kind kind = Kind::OnTheFly;
  Index block_size = kDefaultBlockSize;
  /// Largest n for which an n x n matrix may be formed.
  Index dense_budget = kDefaultDenseBudget;

  static EngineMode dense() { return {Kind::Dense}; }
  static EngineMode on_the_fly(Index block = kDefaultBlockSize) {
    return {Kind::OnTheFly, block};
  }
};

/// Scratch accounting for one matmul call, in scalars.
struct MatmulStats {
  std::size_t peak_scratch_scalars = 0;
};

/// A symmetric positive definite n x n operator that also knows its
/// derivatives with respect to (l, f, s). KernelEngine is the production
/// implementation; tests inject simple ones.
class KernelOperator {
 public:
  virtual ~KernelOperator() = default;
  virtual Index size() const = 0;
  virtual Eigen::MatrixXd matmul(const Eigen::MatrixXd& B) const = 0;
  virtual Eigen::MatrixXd derivative_matmul(ThetaTag theta, const Eigen::MatrixXd& B) const = 0;
};

/// Represents Khat = f^2 * k(X, X; l) + s * I.
///
/// Dense mode forms k(X, X) once at construction (and dk/dl on first use);
/// OnTheFly mode evaluates block_size rows of the kernel at a time, multiplies
/// them into the output and drops them, so only O(block_size * (n + k))
/// scratch is live per worker. Engines are immutable; copies share the dense
/// cache.
class KernelEngine final : public KernelOperator {
 public:
  KernelEngine(KernelType kt, PointSet points, Hyperparams params, EngineMode mode = {});

  KernelType kernel_type() const { return kt_; }
  const PointSet& points() const { return points_; }
  const Hyperparams& params() const { return params_; }
  const EngineMode& mode() const { return mode_; }

  Index size() const override { return points_.size(); }

  /// Khat * B.
  Eigen::MatrixXd khat_matmul(const Eigen::MatrixXd& B, MatmulStats* stats = nullptr) const;

  /// (dKhat/dtheta) * B, with dKhat/dl = f^2 dk/dl, dKhat/df = 2 f k, dKhat/ds = I.
  Eigen::MatrixXd dkhat_matmul(ThetaTag theta, const Eigen::MatrixXd& B,
                               MatmulStats* stats = nullptr) const;

  /// Full dense Khat. Throws ResourceLimit when n exceeds the dense budget.
  Eigen::MatrixXd materialize() const;

  /// Full dense dKhat/dtheta, same budget rule as materialize().
  Eigen::MatrixXd materialize_derivative(ThetaTag theta) const;

  Eigen::MatrixXd matmul(const Eigen::MatrixXd& B) const override { return khat_matmul(B); }
  Eigen::MatrixXd derivative_matmul(ThetaTag theta, const Eigen::MatrixXd& B) const override {
    return dkhat_matmul(theta, B);
  }

 private:
  struct DenseCache;

  void check_rhs(const Eigen::MatrixXd& B) const;
  void check_budget() const;
  Eigen::MatrixXd kernel_matrix(KernelPart part) const;
  const Eigen::MatrixXd& dense_part(KernelPart part) const;
  Eigen::MatrixXd blocked_matmul(KernelPart part, const Eigen::MatrixXd& B,
                                 MatmulStats* stats) const;

  KernelType kt_;
  PointSet points_;
  Hyperparams params_;
  EngineMode mode_;
  std::shared_ptr<DenseCache> dense_;
};

}  // namespace kernelgp
