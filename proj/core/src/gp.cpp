#include "kernelgp/gp.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>
#include <string>

#include "kernelgp/errors.hpp"
#include "kernelgp/precond.hpp"

namespace kernelgp {

namespace {

const double kLog2Pi = std::log(2.0 * std::numbers::pi);

void check_labels(Index n, const Eigen::VectorXd& y) {
  if (y.size() != n) {
    throw InvalidArgument("label vector has " + std::to_string(y.size()) + " entries, expected " +
                          std::to_string(n));
  }
  if (!y.allFinite()) throw InvalidArgument("labels contain non-finite entries");
}

Eigen::LLT<Eigen::MatrixXd> factor_khat(const KernelEngine& engine) {
  Eigen::LLT<Eigen::MatrixXd> llt(engine.materialize());
  if (llt.info() != Eigen::Success) {
    throw NumericalError("Cholesky factorization of the regularized kernel matrix failed "
                         "(matrix not positive definite)");
  }
  return llt;
}

double log_det_from_cholesky(const Eigen::LLT<Eigen::MatrixXd>& llt) {
  return 2.0 * llt.matrixLLT().diagonal().array().log().sum();
}

LinearOperator khat_operator(const KernelOperator& khat) {
  return [&khat](const Eigen::MatrixXd& B) { return khat.matmul(B); };
}

Index precond_rank(const SolverConfig& config, Index n) {
  return config.precond_rank > 0 ? std::min(config.precond_rank, n) : default_precond_rank(n);
}

Eigen::VectorXd clamped_sqrt(const Eigen::VectorXd& variance) {
  return variance.cwiseMax(0.0).cwiseSqrt();
}

}  // namespace

double LossGrad::grad(ThetaTag theta) const {
  switch (theta) {
    case ThetaTag::L:
      return grad_l;
    case ThetaTag::F:
      return grad_f;
    case ThetaTag::S:
      return grad_s;
  }
  return 0.0;
}

ProbeSet::ProbeSet(Index n, Index count, std::uint64_t seed) : seed_(seed) {
  if (n < 1 || count < 1) throw InvalidArgument("probe set needs n >= 1 and at least one probe");
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  vectors_.resize(n, count);
  for (Index j = 0; j < count; ++j) {
    for (Index i = 0; i < n; ++i) vectors_(i, j) = normal(rng);
  }
  norms_sq_ = vectors_.colwise().squaredNorm().transpose();
}

double nlml_exact(const KernelEngine& engine, const Eigen::VectorXd& y) {
  const Index n = engine.size();
  check_labels(n, y);
  const auto llt = factor_khat(engine);
  const Eigen::VectorXd w = llt.solve(y);
  return 0.5 * (y.dot(w) + log_det_from_cholesky(llt) + static_cast<double>(n) * kLog2Pi);
}

LossGrad grad_exact(const KernelEngine& engine, const Eigen::VectorXd& y) {
  const Index n = engine.size();
  check_labels(n, y);
  const auto llt = factor_khat(engine);
  const Eigen::VectorXd w = llt.solve(y);
  const Eigen::MatrixXd khat_inv = llt.solve(Eigen::MatrixXd::Identity(n, n));

  LossGrad out;
  out.loss = 0.5 * (y.dot(w) + log_det_from_cholesky(llt) + static_cast<double>(n) * kLog2Pi);

  // tr(A B) = sum(A .* B) for symmetric A, B.
  out.grad_s = 0.5 * (-w.squaredNorm() + khat_inv.trace());
  for (ThetaTag theta : {ThetaTag::L, ThetaTag::F}) {
    const Eigen::MatrixXd dK = engine.materialize_derivative(theta);
    const double quad = -w.dot(dK * w);
    const double tr = khat_inv.cwiseProduct(dK).sum();
    (theta == ThetaTag::L ? out.grad_l : out.grad_f) = 0.5 * (quad + tr);
  }
  return out;
}

LossGrad nlml_grad_iterative(const KernelOperator& khat, const Eigen::VectorXd& y,
                             const LinearOperator& precond_inverse, const ProbeSet& probes,
                             const SolverConfig& config) {
  const Index n = khat.size();
  check_labels(n, y);
  if (probes.vectors().rows() != n) throw InvalidArgument("probe vectors have the wrong length");

  const LinearOperator A = khat_operator(khat);
  const SolveReport solve_y = pcg_solve(A, precond_inverse, y, config.tol, config.max_iter);
  const SolveReport solve_z =
      pcg_solve(A, identity_operator(), probes.vectors(), config.probe_tol, config.max_iter);

  const Eigen::VectorXd w = solve_y.solution.col(0);
  const Eigen::MatrixXd& U = solve_z.solution;
  const Index k = probes.count();
  const auto& norms = probes.norms_sq();

  LossGrad out;
  out.converged = solve_y.all_converged() && solve_z.all_converged();
  const double logdet =
      slq_logdet(solve_z.traces, std::span<const double>(norms.data(), static_cast<std::size_t>(k)));
  out.loss = 0.5 * (y.dot(w) + logdet + static_cast<double>(n) * kLog2Pi);

  Eigen::MatrixXd block(n, k + 1);
  block.col(0) = w;
  block.rightCols(k) = probes.vectors();
  for (ThetaTag theta : {ThetaTag::L, ThetaTag::F, ThetaTag::S}) {
    const Eigen::MatrixXd dK_block = khat.derivative_matmul(theta, block);
    const double quad = -w.dot(dK_block.col(0));
    const double tr =
        U.cwiseProduct(dK_block.rightCols(k)).sum() / static_cast<double>(k);
    const double g = 0.5 * (quad + tr);
    switch (theta) {
      case ThetaTag::L:
        out.grad_l = g;
        break;
      case ThetaTag::F:
        out.grad_f = g;
        break;
      case ThetaTag::S:
        out.grad_s = g;
        break;
    }
  }
  return out;
}

LossGrad evaluate_loss_grad(KernelType kt, const PointSet& X, const Eigen::VectorXd& y,
                            const Hyperparams& params, InferenceMode mode,
                            const SolverConfig& config, std::uint64_t seed) {
  if (mode == InferenceMode::Exact) {
    EngineMode dense = EngineMode::dense();
    dense.dense_budget = config.engine.dense_budget;
    return grad_exact(KernelEngine(kt, X, params, dense), y);
  }
  const KernelEngine engine(kt, X, params, config.engine);
  const ProbeSet probes(X.size(), config.num_probes, seed);
  if (!config.use_precond) {
    return nlml_grad_iterative(engine, y, identity_operator(), probes, config);
  }
  const Preconditioner P = Preconditioner::build(engine, precond_rank(config, X.size()));
  return nlml_grad_iterative(engine, y, P.inverse_operator(), probes, config);
}

Prediction predict(KernelType kt, const PointSet& X, const Eigen::VectorXd& y,
                   const PointSet& Xstar, const Hyperparams& params, InferenceMode mode,
                   const SolverConfig& config) {
  if (X.dim() != Xstar.dim()) {
    throw InvalidArgument("training points have dimension " + std::to_string(X.dim()) +
                          " but test points have " + std::to_string(Xstar.dim()));
  }
  params.validate();
  check_labels(X.size(), y);

  const double f2 = params.f * params.f;
  const double prior_var = f2 * kernel_value(kt, 0.0, params.l);
  const Eigen::MatrixXd Kxs = eval_kernel(kt, X, Xstar, params.l);

  Prediction out;
  if (mode == InferenceMode::Exact) {
    EngineMode dense = EngineMode::dense();
    dense.dense_budget = config.engine.dense_budget;
    const KernelEngine engine(kt, X, params, dense);
    const auto llt = factor_khat(engine);
    const Eigen::VectorXd w = llt.solve(y);
    out.mean = f2 * (Kxs.transpose() * w);
    const Eigen::MatrixXd V = llt.matrixL().solve(Kxs);
    const Eigen::VectorXd explained = V.colwise().squaredNorm().transpose();
    out.stddev = clamped_sqrt(Eigen::VectorXd::Constant(Xstar.size(), prior_var) - f2 * f2 * explained);
    return out;
  }

  const KernelEngine engine(kt, X, params, config.engine);
  Eigen::MatrixXd rhs(X.size(), Xstar.size() + 1);
  rhs.col(0) = y;
  rhs.rightCols(Xstar.size()) = Kxs;
  LinearOperator Minv = identity_operator();
  if (config.use_precond) {
    Minv = Preconditioner::build(engine, precond_rank(config, X.size())).inverse_operator();
  }
  const SolveReport report = pcg_solve(khat_operator(engine), Minv, rhs, config.tol, config.max_iter);
  out.converged = report.all_converged();
  out.mean = f2 * (Kxs.transpose() * report.solution.col(0));
  const Eigen::VectorXd explained =
      Kxs.cwiseProduct(report.solution.rightCols(Xstar.size())).colwise().sum().transpose();
  out.stddev = clamped_sqrt(Eigen::VectorXd::Constant(Xstar.size(), prior_var) - f2 * f2 * explained);
  return out;
}

}  // namespace kernelgp
