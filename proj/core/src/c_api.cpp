#include "kernelgp/c_api.h"

#include <atomic>
#include <memory>
#include <mutex>
#include <new>
#include <span>
#include <string>
#include <unordered_map>

#include "kernelgp/errors.hpp"
#include "kernelgp/gp.hpp"
#include "kernelgp/train.hpp"

namespace {

using namespace kernelgp;

thread_local std::string g_last_error;

struct Problem {
  Problem(KernelType kt_, PointSet X_, Eigen::VectorXd y_, InferenceMode mode_,
          SolverConfig config_, std::uint64_t seed_)
      : kt(kt_), X(std::move(X_)), y(std::move(y_)), mode(mode_), config(config_), seed(seed_) {}

  KernelType kt;
  PointSet X;
  Eigen::VectorXd y;
  InferenceMode mode;
  SolverConfig config;
  std::uint64_t seed;
  std::atomic<bool> busy{false};
};

class Registry {
 public:
  kgp_problem add(std::shared_ptr<Problem> p) {
    std::lock_guard lock(mutex_);
    const kgp_problem id = next_++;
    problems_.emplace(id, std::move(p));
    return id;
  }
  std::shared_ptr<Problem> find(kgp_problem id) {
    std::lock_guard lock(mutex_);
    auto it = problems_.find(id);
    return it == problems_.end() ? nullptr : it->second;
  }
  bool remove(kgp_problem id) {
    std::lock_guard lock(mutex_);
    return problems_.erase(id) > 0;
  }

 private:
  std::mutex mutex_;
  kgp_problem next_ = 1;
  std::unordered_map<kgp_problem, std::shared_ptr<Problem>> problems_;
};

Registry& registry() {
  static Registry r;
  return r;
}

int fail(int status, std::string message) {
  g_last_error = std::move(message);
  return status;
}

template <typename Fn>
int guarded(Fn&& fn) {
  try {
    g_last_error.clear();
    return fn();
  } catch (const InvalidArgument& e) {
    return fail(KGP_ERR_INVALID_ARGUMENT, e.what());
  } catch (const ResourceLimit& e) {
    return fail(KGP_ERR_RESOURCE, e.what());
  } catch (const NumericalError& e) {
    return fail(KGP_ERR_NUMERICAL, e.what());
  } catch (const std::bad_alloc&) {
    return fail(KGP_ERR_RESOURCE, "out of memory");
  } catch (const std::exception& e) {
    return fail(KGP_ERR_INTERNAL, e.what());
  } catch (...) {
    return fail(KGP_ERR_INTERNAL, "unknown error");
  }
}

KernelType to_kernel(int kernel) {
  switch (kernel) {
    case KGP_KERNEL_GAUSSIAN:
      return KernelType::Gaussian;
    case KGP_KERNEL_MATERN32:
      return KernelType::Matern32;
    case KGP_KERNEL_MATERN52:
      return KernelType::Matern52;
    default:
      throw InvalidArgument("unknown kernel id " + std::to_string(kernel));
  }
}

InferenceMode to_mode(int mode) {
  if (mode == KGP_MODE_EXACT) return InferenceMode::Exact;
  if (mode == KGP_MODE_ITERATIVE) return InferenceMode::Iterative;
  throw InvalidArgument("unknown mode id " + std::to_string(mode));
}

SolverConfig to_config(const kgp_options* options) {
  kgp_options o;
  kgp_default_options(&o);
  if (options != nullptr) o = *options;
  SolverConfig c;
  c.tol = o.tol;
  c.probe_tol = o.probe_tol;
  c.max_iter = o.max_iter;
  c.num_probes = o.num_probes;
  c.precond_rank = o.precond_rank;
  c.use_precond = o.use_precond != 0;
  c.engine = o.on_the_fly != 0 ? EngineMode::on_the_fly(o.block_size) : EngineMode::dense();
  return c;
}

PointSet copy_points(const double* x, int64_t n, int64_t d) {
  if (x == nullptr || n < 1 || d < 1) throw InvalidArgument("point array must be non-null with n, d >= 1");
  return PointSet::from_row_major(std::span<const double>(x, static_cast<std::size_t>(n * d)), n, d);
}

Eigen::VectorXd copy_labels(const double* y, int64_t n) {
  if (y == nullptr) throw InvalidArgument("label array is null");
  return Eigen::Map<const Eigen::VectorXd>(y, n);
}

class BusyGuard {
 public:
  explicit BusyGuard(std::atomic<bool>& flag) : flag_(flag) {
    acquired_ = !flag_.exchange(true);
  }
  ~BusyGuard() {
    if (acquired_) flag_.store(false);
  }
  bool acquired() const { return acquired_; }

 private:
  std::atomic<bool>& flag_;
  bool acquired_;
};

}  // namespace

extern "C" {

void kgp_default_options(kgp_options* out) {
  if (out == nullptr) return;
  const SolverConfig c;
  out->tol = c.tol;
  out->probe_tol = c.probe_tol;
  out->max_iter = c.max_iter;
  out->num_probes = c.num_probes;
  out->precond_rank = c.precond_rank;
  out->use_precond = c.use_precond ? 1 : 0;
  out->on_the_fly = 1;
  out->block_size = c.engine.block_size;
  out->seed = 0;
}

const char* kgp_version(void) { return KERNELGP_VERSION_STRING; }

void kgp_api_version(int* major, int* minor, int* patch) {
  if (major != nullptr) *major = KGP_API_VERSION_MAJOR;
  if (minor != nullptr) *minor = KGP_API_VERSION_MINOR;
  if (patch != nullptr) *patch = KGP_API_VERSION_PATCH;
}

const char* kgp_last_error(void) { return g_last_error.c_str(); }

int kgp_problem_create(const double* train_x, int64_t n, int64_t d, const double* train_y,
                       int kernel, int mode, const kgp_options* options, kgp_problem* out) {
  return guarded([&] {
    if (out == nullptr) throw InvalidArgument("output handle pointer is null");
    *out = 0;
    auto problem = std::make_shared<Problem>(to_kernel(kernel), copy_points(train_x, n, d),
                                             copy_labels(train_y, n), to_mode(mode),
                                             to_config(options), options ? options->seed : 0);
    *out = registry().add(std::move(problem));
    return KGP_OK;
  });
}

int kgp_problem_destroy(kgp_problem problem) {
  return guarded([&] {
    if (!registry().remove(problem)) {
      return fail(KGP_ERR_INVALID_HANDLE, "unknown or already destroyed problem handle");
    }
    return static_cast<int>(KGP_OK);
  });
}

int kgp_problem_loss_grad(kgp_problem problem, const double raw_params[3], double* loss,
                          double grad_raw[3], double grad_theta[3]) {
  return guarded([&] {
    auto p = registry().find(problem);
    if (!p) return fail(KGP_ERR_INVALID_HANDLE, "unknown or already destroyed problem handle");
    if (raw_params == nullptr || loss == nullptr || grad_raw == nullptr) {
      throw InvalidArgument("raw_params, loss and grad_raw must be non-null");
    }
    BusyGuard guard(p->busy);
    if (!guard.acquired()) return fail(KGP_ERR_BUSY, "problem handle is in use by another thread");

    const RawParams raw{raw_params[0], raw_params[1], raw_params[2]};
    const LossGrad lg =
        evaluate_loss_grad(p->kt, p->X, p->y, to_hyperparams(raw), p->mode, p->config, p->seed);
    const auto g = chain_grads(raw, lg.grads());
    *loss = lg.loss;
    for (int i = 0; i < 3; ++i) grad_raw[i] = g[static_cast<std::size_t>(i)];
    if (grad_theta != nullptr) {
      grad_theta[0] = lg.grad_l;
      grad_theta[1] = lg.grad_f;
      grad_theta[2] = lg.grad_s;
    }
    return static_cast<int>(KGP_OK);
  });
}

int kgp_gpr_prediction(const double* train_x, int64_t n, int64_t d, const double* train_y,
                       const double* test_x, int64_t m, int kernel, const double params[3],
                       int mode, const kgp_options* options, double* mean, double* stddev) {
  return guarded([&] {
    if (params == nullptr) throw InvalidArgument("params is null");
    if (m < 0) throw InvalidArgument("test point count must be >= 0");
    const KernelType kt = to_kernel(kernel);
    const InferenceMode im = to_mode(mode);
    const Hyperparams hp{params[0], params[1], params[2]};
    hp.validate();
    const PointSet X = copy_points(train_x, n, d);
    const Eigen::VectorXd y = copy_labels(train_y, n);
    if (m == 0) return static_cast<int>(KGP_OK);
    if (mean == nullptr || stddev == nullptr) throw InvalidArgument("output arrays are null");
    const PointSet Xs = copy_points(test_x, m, d);
    const Prediction pred = predict(kt, X, y, Xs, hp, im, to_config(options));
    Eigen::Map<Eigen::VectorXd>(mean, m) = pred.mean;
    Eigen::Map<Eigen::VectorXd>(stddev, m) = pred.stddev;
    return static_cast<int>(KGP_OK);
  });
}

const kgp_api_table* kgp_get_api(void) {
  static const kgp_api_table table = {
      KGP_API_VERSION_MAJOR, KGP_API_VERSION_MINOR, KGP_API_VERSION_PATCH,
      &kgp_default_options,  &kgp_version,          &kgp_last_error,
      &kgp_problem_create,   &kgp_problem_destroy,  &kgp_problem_loss_grad,
      &kgp_gpr_prediction,
  };
  return &table;
}

}  // extern "C"
