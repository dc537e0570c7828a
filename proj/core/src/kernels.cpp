#include "kernelgp/kernels.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "kernelgp/errors.hpp"

namespace kernelgp {

namespace {

constexpr double kSqrt3 = 1.7320508075688772;
constexpr double kSqrt5 = 2.2360679774997897;

void check_length_scale(double l) {
  if (!(l > 0.0) || !std::isfinite(l)) {
    throw InvalidArgument("length scale must be positive and finite, got " + std::to_string(l));
  }
}

void check_same_dim(const PointSet& X, const PointSet& Y) {
  if (X.dim() != Y.dim()) {
    throw InvalidArgument("point sets differ in dimension: " + std::to_string(X.dim()) + " vs " +
                          std::to_string(Y.dim()));
  }
}

inline double sq_dist_impl(const double* u, double u_norm, const double* v, double v_norm,
                           Index d) {
  double dot = 0.0;
  for (Index k = 0; k < d; ++k) dot += u[k] * v[k];
  const double d2 = u_norm + v_norm - 2.0 * dot;
  return d2 > 0.0 ? d2 : 0.0;
}

inline double value_impl(KernelType kt, double d2, double l) {
  switch (kt) {
    case KernelType::Gaussian:
      return std::exp(-d2 / (2.0 * l * l));
    case KernelType::Matern32: {
      const double a = kSqrt3 * std::sqrt(d2) / l;
      return (1.0 + a) * std::exp(-a);
    }
    case KernelType::Matern52: {
      const double a = kSqrt5 * std::sqrt(d2) / l;
      return (1.0 + a + a * a / 3.0) * std::exp(-a);
    }
  }
  return 0.0;
}

inline double grad_l_impl(KernelType kt, double d2, double l) {
  switch (kt) {
    case KernelType::Gaussian:
      return std::exp(-d2 / (2.0 * l * l)) * d2 / (l * l * l);
    case KernelType::Matern32: {
      // k = (1+a)e^{-a}, a = sqrt(3) r / l  =>  dk/dl = a^2 e^{-a} / l
      const double a = kSqrt3 * std::sqrt(d2) / l;
      return a * a * std::exp(-a) / l;
    }
    case KernelType::Matern52: {
      // k = (1+a+a^2/3)e^{-a}, a = sqrt(5) r / l  =>  dk/dl = a^2 (1+a) e^{-a} / (3l)
      const double a = kSqrt5 * std::sqrt(d2) / l;
      return a * a * (1.0 + a) * std::exp(-a) / (3.0 * l);
    }
  }
  return 0.0;
}

}  // namespace

std::string_view kernel_name(KernelType kt) {
  switch (kt) {
    case KernelType::Gaussian:
      return "gaussian";
    case KernelType::Matern32:
      return "matern32";
    case KernelType::Matern52:
      return "matern52";
  }
  return "unknown";
}

KernelType parse_kernel(std::string_view name) {
  if (name == "gaussian") return KernelType::Gaussian;
  if (name == "matern32") return KernelType::Matern32;
  if (name == "matern52") return KernelType::Matern52;
  throw InvalidArgument("unknown kernel '" + std::string(name) +
                        "' (expected gaussian, matern32 or matern52)");
}

PointSet::PointSet(RowMatrix data) : data_(std::move(data)) {
  if (data_.rows() < 1 || data_.cols() < 1) {
    throw InvalidArgument("point set must have at least one point and one feature");
  }
  if (!data_.allFinite()) throw InvalidArgument("point set contains non-finite entries");
  sq_norms_ = data_.rowwise().squaredNorm();
}

PointSet PointSet::from_row_major(std::span<const double> values, Index n, Index d) {
  if (n < 0 || d < 0 || static_cast<std::size_t>(n * d) != values.size()) {
    throw InvalidArgument("buffer of " + std::to_string(values.size()) +
                          " values does not match shape " + std::to_string(n) + "x" +
                          std::to_string(d));
  }
  return PointSet(Eigen::Map<const RowMatrix>(values.data(), n, d));
}

PointSet PointSet::subset(std::span<const Index> indices) const {
  RowMatrix rows(static_cast<Index>(indices.size()), dim());
  for (std::size_t i = 0; i < indices.size(); ++i) {
    const Index idx = indices[i];
    if (idx < 0 || idx >= size()) throw InvalidArgument("subset index out of range");
    rows.row(static_cast<Index>(i)) = data_.row(idx);
  }
  return PointSet(std::move(rows));
}

double kernel_value(KernelType kt, double sq_dist, double l) {
  check_length_scale(l);
  return value_impl(kt, sq_dist, l);
}

double kernel_grad_l(KernelType kt, double sq_dist, double l) {
  check_length_scale(l);
  return grad_l_impl(kt, sq_dist, l);
}

double sq_dist_entry(const PointSet& X, Index i, const PointSet& Y, Index j) {
  return sq_dist_impl(X.data().row(i).data(), X.sq_norms()[i], Y.data().row(j).data(),
                      Y.sq_norms()[j], X.dim());
}

void eval_kernel_block(KernelType kt, KernelPart part, const PointSet& X, Index row0, Index rows,
                       const PointSet& Y, Index col0, Index cols, double l,
                       Eigen::Ref<Eigen::MatrixXd> out) {
  check_length_scale(l);
  check_same_dim(X, Y);
  if (row0 < 0 || col0 < 0 || row0 + rows > X.size() || col0 + cols > Y.size() ||
      out.rows() != rows || out.cols() != cols) {
    throw InvalidArgument("kernel block out of range");
  }
  const Index d = X.dim();
  const double* xs = X.data().data();
  const double* ys = Y.data().data();
  const double* xn = X.sq_norms().data();
  const double* yn = Y.sq_norms().data();
  for (Index j = 0; j < cols; ++j) {
    const Index jj = col0 + j;
    const double* v = ys + jj * d;
    for (Index i = 0; i < rows; ++i) {
      const Index ii = row0 + i;
      const double d2 = sq_dist_impl(xs + ii * d, xn[ii], v, yn[jj], d);
      out(i, j) = part == KernelPart::Value ? value_impl(kt, d2, l) : grad_l_impl(kt, d2, l);
    }
  }
}

Eigen::MatrixXd pairwise_sq_dist(const PointSet& X, const PointSet& Y) {
  check_same_dim(X, Y);
  Eigen::MatrixXd out(X.size(), Y.size());
  for (Index j = 0; j < Y.size(); ++j) {
    for (Index i = 0; i < X.size(); ++i) out(i, j) = sq_dist_entry(X, i, Y, j);
  }
  return out;
}

Eigen::MatrixXd eval_kernel(KernelType kt, const PointSet& X, const PointSet& Y, double l) {
  Eigen::MatrixXd out(X.size(), Y.size());
  eval_kernel_block(kt, KernelPart::Value, X, 0, X.size(), Y, 0, Y.size(), l, out);
  return out;
}

Eigen::MatrixXd eval_kernel_grad_l(KernelType kt, const PointSet& X, const PointSet& Y, double l) {
  Eigen::MatrixXd out(X.size(), Y.size());
  eval_kernel_block(kt, KernelPart::GradL, X, 0, X.size(), Y, 0, Y.size(), l, out);
  return out;
}

}  // namespace kernelgp
