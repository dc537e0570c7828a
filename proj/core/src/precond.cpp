#include "kernelgp/precond.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <memory>
#include <string>

#include "kernelgp/errors.hpp"

namespace kernelgp {

std::vector<Index> fps_select(const PointSet& X, Index m, Index seed_index) {
  const Index n = X.size();
  if (m < 1 || m > n) {
    throw InvalidArgument("landmark count " + std::to_string(m) + " must lie in [1, " +
                          std::to_string(n) + "]");
  }
  if (seed_index < 0 || seed_index >= n) throw InvalidArgument("seed_index out of range");

  std::vector<Index> selected;
  selected.reserve(static_cast<std::size_t>(m));
  // Selected points get -1 so duplicates of them (distance 0) still win.
  Eigen::VectorXd min_dist = Eigen::VectorXd::Constant(n, std::numeric_limits<double>::infinity());
  Index current = seed_index;
  for (Index pick = 0; pick < m; ++pick) {
    selected.push_back(current);
    min_dist[current] = -1.0;
    if (pick + 1 == m) break;
    Index best = -1;
    double best_dist = -1.0;
    for (Index i = 0; i < n; ++i) {
      if (min_dist[i] < 0.0) continue;
      const double d2 = sq_dist_entry(X, i, X, current);
      if (d2 < min_dist[i]) min_dist[i] = d2;
      if (min_dist[i] > best_dist) {
        best_dist = min_dist[i];
        best = i;
      }
    }
    current = best;
  }
  return selected;
}

Index default_precond_rank(Index n) {
  const auto root = static_cast<Index>(std::ceil(std::sqrt(static_cast<double>(n))));
  return std::min({4 * root, Index{500}, n});
}

Preconditioner Preconditioner::build(const KernelEngine& engine, Index m) {
  const PointSet& X = engine.points();
  const Hyperparams& p = engine.params();

  Preconditioner P;
  P.landmarks_ = fps_select(X, m, 0);
  P.shift_ = p.s;

  const PointSet landmarks = X.subset(P.landmarks_);
  Eigen::MatrixXd Kmm = eval_kernel(engine.kernel_type(), landmarks, landmarks, p.l);
  const double ridge = 1e-10 * Kmm.trace() / static_cast<double>(m);
  Kmm.diagonal().array() += ridge;
  Eigen::LLT<Eigen::MatrixXd> chol(Kmm);
  if (chol.info() != Eigen::Success) {
    throw NumericalError("landmark kernel matrix is not positive definite after the ridge; "
                         "increase the noise term s or reduce the preconditioner rank");
  }

  // U = f K_nm L^{-T}
  Eigen::MatrixXd Knm = eval_kernel(engine.kernel_type(), X, landmarks, p.l);
  chol.matrixL().transpose().solveInPlace<Eigen::OnTheRight>(Knm);
  P.factor_ = p.f * Knm;

  Eigen::MatrixXd core = P.factor_.transpose() * P.factor_ / p.s;
  core.diagonal().array() += 1.0;
  P.core_.compute(core);
  if (P.core_.info() != Eigen::Success) {
    throw NumericalError("Woodbury core of the preconditioner could not be factored; "
                         "increase the noise term s or reduce the preconditioner rank");
  }
  return P;
}

Eigen::MatrixXd Preconditioner::apply_inverse(const Eigen::MatrixXd& B) const {
  if (B.rows() != size()) throw InvalidArgument("preconditioner applied to a block of wrong height");
  // (U U' + sI)^{-1} = (I - U (sI + U'U)^{-1} U') / s
  const Eigen::MatrixXd inner = core_.solve(factor_.transpose() * B) / shift_;
  return (B - factor_ * inner) / shift_;
}

Eigen::MatrixXd Preconditioner::apply(const Eigen::MatrixXd& B) const {
  if (B.rows() != size()) throw InvalidArgument("preconditioner applied to a block of wrong height");
  return factor_ * (factor_.transpose() * B) + shift_ * B;
}

LinearOperator Preconditioner::inverse_operator() const {
  auto self = std::make_shared<const Preconditioner>(*this);
  return [self](const Eigen::MatrixXd& B) { return self->apply_inverse(B); };
}

}  // namespace kernelgp
