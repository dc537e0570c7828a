#pragma once

#include <Eigen/Dense>

#include <array>
#include <cstdint>

#include "kernelgp/kmat.hpp"
#include "kernelgp/solver.hpp"

namespace kernelgp {

enum class InferenceMode { Exact, Iterative };

/// Knobs for the iterative path. Exact mode only reads `engine.dense_budget`.
struct SolverConfig {
  double tol = 1e-6;         ///< relative residual for Khat^{-1} y and predictions
  double probe_tol = 1e-2;   ///< relative residual for the probe solves
  Index max_iter = 500;
  Index num_probes = 16;
  Index precond_rank = 0;    ///< 0 selects default_precond_rank(n)
  bool use_precond = true;
  EngineMode engine{};
};

/// Negative log marginal likelihood and its gradient in (l, f, s).
struct LossGrad {
  double loss = 0.0;
  double grad_l = 0.0;
  double grad_f = 0.0;
  double grad_s = 0.0;
  /// False when an iterative solve hit max_iter before its tolerance.
  bool converged = true;

  double grad(ThetaTag theta) const;
  std::array<double, 3> grads() const { return {grad_l, grad_f, grad_s}; }
};

/// Predictive mean and latent-function standard deviation (no noise term).
struct Prediction {
  Eigen::VectorXd mean;
  Eigen::VectorXd stddev;
  bool converged = true;
};

/// k i.i.d. standard normal probe vectors, reproducible from the seed.
class ProbeSet {
 public:
  ProbeSet(Index n, Index count, std::uint64_t seed);

  Index count() const { return vectors_.cols(); }
  std::uint64_t seed() const { return seed_; }
  const Eigen::MatrixXd& vectors() const { return vectors_; }
  const Eigen::VectorXd& norms_sq() const { return norms_sq_; }

 private:
  std::uint64_t seed_;
  Eigen::MatrixXd vectors_;
  Eigen::VectorXd norms_sq_;
};

/// L = 1/2 (y' Khat^{-1} y + log|Khat| + n log 2 pi) through a dense Cholesky.
double nlml_exact(const KernelEngine& engine, const Eigen::VectorXd& y);

/// Loss plus dL/dtheta = 1/2 (-w' dKhat w + tr(Khat^{-1} dKhat)), w = Khat^{-1} y,
/// all formed densely.
LossGrad grad_exact(const KernelEngine& engine, const Eigen::VectorXd& y);

/// Stochastic loss and gradient.
///
/// w = Khat^{-1} y comes from PCG with `precond_inverse`. The probe systems
/// Khat u_i = z_i are solved by unpreconditioned CG so their coefficients give
/// the Lanczos tridiagonals for the log-determinant; the same u_i feed the
/// Hutchinson trace estimate. Each dKhat/dtheta is applied once to the block
/// [w, z_1, ..., z_k].
LossGrad nlml_grad_iterative(const KernelOperator& khat, const Eigen::VectorXd& y,
                             const LinearOperator& precond_inverse, const ProbeSet& probes,
                             const SolverConfig& config);

/// Builds the engine (and preconditioner in iterative mode) and evaluates the
/// loss and gradient at `params`. `seed` drives the probes.
LossGrad evaluate_loss_grad(KernelType kt, const PointSet& X, const Eigen::VectorXd& y,
                            const Hyperparams& params, InferenceMode mode,
                            const SolverConfig& config, std::uint64_t seed);

/// Posterior of the latent function at Xstar under Khat = f^2 k + s I:
///   mean = f^2 k(X*, X) Khat^{-1} y
///   var  = f^2 k(x*, x*) - f^4 k(x*, X) Khat^{-1} k(X, x*)
Prediction predict(KernelType kt, const PointSet& X, const Eigen::VectorXd& y,
                   const PointSet& Xstar, const Hyperparams& params, InferenceMode mode,
                   const SolverConfig& config = {});

}  // namespace kernelgp
