#include "kernelgp/kmat.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <mutex>
#include <string>

#include "kernelgp/errors.hpp"

namespace kernelgp {

namespace {

bool positive_finite(double v) { return v > 0.0 && std::isfinite(v); }

class ScratchCounter {
 public:
  void acquire(std::size_t scalars) {
    const std::size_t now = live_.fetch_add(scalars) + scalars;
    std::size_t prev = peak_.load();
    while (now > prev && !peak_.compare_exchange_weak(prev, now)) {
    }
  }
  void release(std::size_t scalars) { live_.fetch_sub(scalars); }
  std::size_t peak() const { return peak_.load(); }

 private:
  std::atomic<std::size_t> live_{0};
  std::atomic<std::size_t> peak_{0};
};

}  // namespace

void Hyperparams::validate() const {
  if (!positive_finite(l) || !positive_finite(f) || !positive_finite(s)) {
    throw InvalidArgument("hyperparameters must be positive and finite (l=" + std::to_string(l) +
                          ", f=" + std::to_string(f) + ", s=" + std::to_string(s) + ")");
  }
}

struct KernelEngine::DenseCache {
  Eigen::MatrixXd value;
  std::once_flag grad_once;
  Eigen::MatrixXd grad_l;
};

KernelEngine::KernelEngine(KernelType kt, PointSet points, Hyperparams params, EngineMode mode)
    : kt_(kt), points_(std::move(points)), params_(params), mode_(mode) {
  params_.validate();
  if (mode_.block_size < 1) throw InvalidArgument("block_size must be >= 1");
  if (mode_.dense_budget < 1) throw InvalidArgument("dense_budget must be >= 1");
  if (mode_.kind == EngineMode::Kind::Dense) {
    check_budget();
    dense_ = std::make_shared<DenseCache>();
    dense_->value = kernel_matrix(KernelPart::Value);
  }
}

void KernelEngine::check_rhs(const Eigen::MatrixXd& B) const {
  if (B.rows() != size()) {
    throw InvalidArgument("right-hand side has " + std::to_string(B.rows()) +
                          " rows, kernel matrix has " + std::to_string(size()));
  }
}

void KernelEngine::check_budget() const {
  if (size() > mode_.dense_budget) {
    throw ResourceLimit("n = " + std::to_string(size()) + " exceeds the dense memory budget of " +
                        std::to_string(mode_.dense_budget) +
                        " points; use the on-the-fly engine or raise the budget");
  }
}

// Upper triangle column by column, then mirrored.
Eigen::MatrixXd KernelEngine::kernel_matrix(KernelPart part) const {
  const Index n = size();
  Eigen::MatrixXd K(n, n);
#pragma omp parallel for schedule(dynamic, 16)
  for (Index j = 0; j < n; ++j) {
    eval_kernel_block(kt_, part, points_, 0, j + 1, points_, j, 1, params_.l,
                      K.col(j).head(j + 1));
  }
  K.triangularView<Eigen::StrictlyLower>() = K.transpose();
  return K;
}

const Eigen::MatrixXd& KernelEngine::dense_part(KernelPart part) const {
  if (part == KernelPart::Value) return dense_->value;
  std::call_once(dense_->grad_once, [this] { dense_->grad_l = kernel_matrix(KernelPart::GradL); });
  return dense_->grad_l;
}

Eigen::MatrixXd KernelEngine::blocked_matmul(KernelPart part, const Eigen::MatrixXd& B,
                                             MatmulStats* stats) const {
  const Index n = size();
  const Index k = B.cols();
  const Index bs = std::min(mode_.block_size, n);
  const Index num_blocks = (n + bs - 1) / bs;
  Eigen::MatrixXd out(n, k);
  ScratchCounter scratch;

#pragma omp parallel
  {
    const auto scalars = static_cast<std::size_t>(bs * (n + k));
    scratch.acquire(scalars);
    Eigen::MatrixXd panel(bs, n);
    Eigen::MatrixXd product(bs, k);
#pragma omp for schedule(dynamic)
    for (Index b = 0; b < num_blocks; ++b) {
      const Index row0 = b * bs;
      const Index rows = std::min(bs, n - row0);
      auto block = panel.topRows(rows);
      eval_kernel_block(kt_, part, points_, row0, rows, points_, 0, n, params_.l, block);
      product.topRows(rows).noalias() = block * B;
      out.middleRows(row0, rows) = product.topRows(rows);
    }
    scratch.release(scalars);
  }
  if (stats != nullptr) stats->peak_scratch_scalars = scratch.peak();
  return out;
}

Eigen::MatrixXd KernelEngine::khat_matmul(const Eigen::MatrixXd& B, MatmulStats* stats) const {
  check_rhs(B);
  const double f2 = params_.f * params_.f;
  if (mode_.kind == EngineMode::Kind::Dense) {
    if (stats != nullptr) stats->peak_scratch_scalars = 0;
    Eigen::MatrixXd KB = dense_->value * B;
    return f2 * KB + params_.s * B;
  }
  Eigen::MatrixXd KB = blocked_matmul(KernelPart::Value, B, stats);
  return f2 * KB + params_.s * B;
}

Eigen::MatrixXd KernelEngine::dkhat_matmul(ThetaTag theta, const Eigen::MatrixXd& B,
                                           MatmulStats* stats) const {
  check_rhs(B);
  if (theta == ThetaTag::S) {
    if (stats != nullptr) stats->peak_scratch_scalars = 0;
    return B;
  }
  const KernelPart part = theta == ThetaTag::L ? KernelPart::GradL : KernelPart::Value;
  const double scale =
      theta == ThetaTag::L ? params_.f * params_.f : 2.0 * params_.f;
  Eigen::MatrixXd KB;
  if (mode_.kind == EngineMode::Kind::Dense) {
    if (stats != nullptr) stats->peak_scratch_scalars = 0;
    KB = dense_part(part) * B;
  } else {
    KB = blocked_matmul(part, B, stats);
  }
  return scale * KB;
}

Eigen::MatrixXd KernelEngine::materialize() const {
  check_budget();
  const double f2 = params_.f * params_.f;
  Eigen::MatrixXd K = dense_ ? dense_->value : kernel_matrix(KernelPart::Value);
  K *= f2;
  K.diagonal().array() += params_.s;
  return K;
}

Eigen::MatrixXd KernelEngine::materialize_derivative(ThetaTag theta) const {
  check_budget();
  const Index n = size();
  switch (theta) {
    case ThetaTag::S:
      return Eigen::MatrixXd::Identity(n, n);
    case ThetaTag::F: {
      Eigen::MatrixXd K = dense_ ? dense_->value : kernel_matrix(KernelPart::Value);
      return (2.0 * params_.f) * K;
    }
    case ThetaTag::L: {
      Eigen::MatrixXd G = dense_ ? dense_part(KernelPart::GradL) : kernel_matrix(KernelPart::GradL);
      return (params_.f * params_.f) * G;
    }
  }
  return {};
}

}  // namespace kernelgp
