#include "kernelgp/train.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "kernelgp/errors.hpp"

namespace kernelgp {

namespace {

constexpr Index kMedianSubsample = 1000;

template <typename Fn>
LossGrad with_step_context(int step, Fn&& fn) {
  const std::string prefix = "training step " + std::to_string(step) + ": ";
  try {
    return fn();
  } catch (const BreakdownError& e) {
    throw BreakdownError(prefix + e.what());
  } catch (const NumericalError& e) {
    throw NumericalError(prefix + e.what());
  } catch (const ResourceLimit& e) {
    throw ResourceLimit(prefix + e.what());
  } catch (const InvalidArgument& e) {
    throw InvalidArgument(prefix + e.what());
  }
}

double median_pairwise_distance(const PointSet& X) {
  const Index n = X.size();
  const Index stride = (n + kMedianSubsample - 1) / kMedianSubsample;
  std::vector<Index> idx;
  for (Index i = 0; i < n; i += stride) idx.push_back(i);
  std::vector<double> dists;
  dists.reserve(idx.size() * (idx.size() - 1) / 2);
  for (std::size_t a = 0; a < idx.size(); ++a) {
    for (std::size_t b = a + 1; b < idx.size(); ++b) {
      dists.push_back(std::sqrt(sq_dist_entry(X, idx[a], X, idx[b])));
    }
  }
  if (dists.empty()) return 1.0;
  const auto mid = dists.begin() + static_cast<std::ptrdiff_t>(dists.size() / 2);
  std::nth_element(dists.begin(), mid, dists.end());
  double median = *mid;
  if (dists.size() % 2 == 0) {
    median = 0.5 * (median + *std::max_element(dists.begin(), mid));
  }
  return median > 0.0 ? median : 1.0;
}

}  // namespace

double softplus(double x) {
  return x > 0.0 ? x + std::log1p(std::exp(-x)) : std::log1p(std::exp(x));
}

double inverse_softplus(double y) {
  if (!(y > 0.0)) throw InvalidArgument("inverse_softplus needs a positive argument");
  return y + std::log(-std::expm1(-y));
}

double sigmoid(double x) {
  if (x >= 0.0) return 1.0 / (1.0 + std::exp(-x));
  const double e = std::exp(x);
  return e / (1.0 + e);
}

Hyperparams to_hyperparams(const RawParams& raw) {
  return {softplus(raw.rho_l), softplus(raw.rho_f), softplus(raw.rho_s)};
}

RawParams from_hyperparams(const Hyperparams& params) {
  params.validate();
  return {inverse_softplus(params.l), inverse_softplus(params.f), inverse_softplus(params.s)};
}

std::array<double, 3> chain_grads(const RawParams& raw, const std::array<double, 3>& dtheta) {
  return {dtheta[0] * sigmoid(raw.rho_l), dtheta[1] * sigmoid(raw.rho_f),
          dtheta[2] * sigmoid(raw.rho_s)};
}

void adam_step(AdamState& state, std::span<double> params, std::span<const double> grads,
               const AdamOptions& options) {
  if (params.size() != state.m.size() || grads.size() != state.m.size()) {
    throw InvalidArgument("adam_step: parameter, gradient and state sizes differ");
  }
  ++state.step;
  const double bias1 = 1.0 - std::pow(options.beta1, static_cast<double>(state.step));
  const double bias2 = 1.0 - std::pow(options.beta2, static_cast<double>(state.step));
  for (std::size_t i = 0; i < params.size(); ++i) {
    state.m[i] = options.beta1 * state.m[i] + (1.0 - options.beta1) * grads[i];
    state.v[i] = options.beta2 * state.v[i] + (1.0 - options.beta2) * grads[i] * grads[i];
    const double m_hat = state.m[i] / bias1;
    const double v_hat = state.v[i] / bias2;
    params[i] -= options.learning_rate * m_hat / (std::sqrt(v_hat) + options.epsilon);
  }
}

void TrainConfig::validate() const {
  if (!(learning_rate > 0.0)) throw InvalidArgument("learning rate must be > 0");
  if (max_steps < 1) throw InvalidArgument("max_steps must be >= 1");
  if (solver.num_probes < 1) throw InvalidArgument("probe count must be >= 1");
  if (solver.max_iter < 1) throw InvalidArgument("max_iter must be >= 1");
  if (!(solver.tol >= 0.0) || !(solver.probe_tol >= 0.0)) {
    throw InvalidArgument("solver tolerances must be >= 0");
  }
  if (initial) initial->validate();
}

Hyperparams initial_hyperparams(const PointSet& X, const Eigen::VectorXd& y) {
  Hyperparams p;
  p.l = median_pairwise_distance(X);
  double var = 0.0;
  if (y.size() > 1) {
    var = (y.array() - y.mean()).square().sum() / static_cast<double>(y.size() - 1);
  }
  p.f = var > 0.0 ? std::sqrt(var) : 1.0;
  p.s = std::max(0.01 * var, 1e-6);
  return p;
}

std::uint64_t step_seed(std::uint64_t seed, int step) {
  // splitmix64 finalizer over (seed, step)
  std::uint64_t z = seed + 0x9E3779B97F4A7C15ULL * (static_cast<std::uint64_t>(step) + 1);
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

TrainResult fit(KernelType kt, const PointSet& X, const Eigen::VectorXd& y,
                const TrainConfig& config, const TrainCallback& callback) {
  config.validate();
  if (y.size() != X.size()) {
    throw InvalidArgument("label vector has " + std::to_string(y.size()) + " entries, expected " +
                          std::to_string(X.size()));
  }
  const Hyperparams start = config.initial ? *config.initial : initial_hyperparams(X, y);
  const RawParams raw0 = from_hyperparams(start);
  std::array<double, 3> raw = {raw0.rho_l, raw0.rho_f, raw0.rho_s};

  AdamOptions adam;
  adam.learning_rate = config.learning_rate;
  AdamState state(3);

  TrainResult result;
  bool solver_warning = false;
  for (int step = 0; step < config.max_steps; ++step) {
    const RawParams current{raw[0], raw[1], raw[2]};
    const Hyperparams params = to_hyperparams(current);
    params.validate();
    const LossGrad lg = with_step_context(step, [&] {
      return evaluate_loss_grad(kt, X, y, params, config.mode, config.solver,
                                step_seed(config.seed, step));
    });
    solver_warning = solver_warning || !lg.converged;
    const std::array<double, 3> g = chain_grads(current, lg.grads());
    const double g_norm = std::sqrt(g[0] * g[0] + g[1] * g[1] + g[2] * g[2]);
    result.loss_history.push_back(lg.loss);
    result.grad_norm_history.push_back(g_norm);
    if (callback) callback(step, params, lg);
    if (g_norm < config.grad_tol) {
      result.params = params;
      result.status = TrainStatus::GradTol;
      return result;
    }
    adam_step(state, raw, g, adam);
  }
  result.params = to_hyperparams({raw[0], raw[1], raw[2]});
  result.params.validate();
  result.status = solver_warning ? TrainStatus::SolverWarning : TrainStatus::MaxSteps;
  return result;
}

}  // namespace kernelgp
