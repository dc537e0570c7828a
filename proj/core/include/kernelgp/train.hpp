#pragma once

#include <Eigen/Dense>

#include <array>
#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <vector>

#include "kernelgp/gp.hpp"

namespace kernelgp {

/// Unconstrained parameters; each hyperparameter is softplus(rho).
struct RawParams {
  double rho_l = 0.0;
  double rho_f = 0.0;
  double rho_s = 0.0;
};

/// log(1 + e^x), stable for large |x|.
double softplus(double x);
/// log(e^y - 1) for y > 0.
double inverse_softplus(double y);
double sigmoid(double x);

Hyperparams to_hyperparams(const RawParams& raw);
RawParams from_hyperparams(const Hyperparams& params);

/// dL/drho = dL/dtheta * sigmoid(rho), ordered (l, f, s).
std::array<double, 3> chain_grads(const RawParams& raw, const std::array<double, 3>& dtheta);

struct AdamOptions {
  double learning_rate = 0.1;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;
};

/// Moment estimates for an Adam run over a fixed-size parameter vector.
struct AdamState {
  explicit AdamState(std::size_t dim) : m(dim, 0.0), v(dim, 0.0) {}

  std::vector<double> m;
  std::vector<double> v;
  std::int64_t step = 0;
};

/// One bias-corrected Adam update of `params` in place.
void adam_step(AdamState& state, std::span<double> params, std::span<const double> grads,
               const AdamOptions& options);

struct TrainConfig {
  double learning_rate = 0.1;
  int max_steps = 100;
  InferenceMode mode = InferenceMode::Exact;
  SolverConfig solver{};
  std::uint64_t seed = 0;
  /// Stop once |dL/drho| falls below this.
  double grad_tol = 1e-6;
  /// Starting point; the data heuristics are used when empty.
  std::optional<Hyperparams> initial;

  void validate() const;
};

enum class TrainStatus { MaxSteps, GradTol, SolverWarning };

struct TrainResult {
  Hyperparams params;
  std::vector<double> loss_history;
  std::vector<double> grad_norm_history;
  TrainStatus status = TrainStatus::MaxSteps;
};

/// Observer called after every loss evaluation with (step, params, loss/grad).
using TrainCallback = std::function<void(int, const Hyperparams&, const LossGrad&)>;

/// Median heuristic for l (over at most 1000 evenly strided points),
/// f = stddev(y), s = max(0.01 var(y), 1e-6).
Hyperparams initial_hyperparams(const PointSet& X, const Eigen::VectorXd& y);

/// Adam on the softplus parameters, rebuilding the engine (and preconditioner)
/// every step. Iterative mode draws fresh probes per step from (seed, step).
/// Solver errors are rethrown with the step index in the message.
TrainResult fit(KernelType kt, const PointSet& X, const Eigen::VectorXd& y,
                const TrainConfig& config, const TrainCallback& callback = {});

/// Probe seed used by fit() at a given step.
std::uint64_t step_seed(std::uint64_t seed, int step);

}  // namespace kernelgp
