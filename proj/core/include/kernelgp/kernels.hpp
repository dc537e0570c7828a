#pragma once

#include <Eigen/Dense>

#include <span>
#include <string_view>

namespace kernelgp {

using Index = Eigen::Index;
using RowMatrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

enum class KernelType { Gaussian, Matern32, Matern52 };

/// Lower-case name used by the CLI and model files ("gaussian", ...).
std::string_view kernel_name(KernelType kt);

/// Inverse of kernel_name(); throws InvalidArgument on unknown names.
KernelType parse_kernel(std::string_view name);

/// An n x d set of points, one point per row. Construction checks that the
/// matrix is non-empty and finite, and caches the squared row norms used by
/// the distance expansion.
class PointSet {
 public:
  explicit PointSet(RowMatrix data);

  /// Copies a row-major buffer of n*d values.
  static PointSet from_row_major(std::span<const double> values, Index n, Index d);

  Index size() const { return data_.rows(); }
  Index dim() const { return data_.cols(); }
  const RowMatrix& data() const { return data_; }
  const Eigen::VectorXd& sq_norms() const { return sq_norms_; }

  /// Rows selected by `indices`, in the given order.
  PointSet subset(std::span<const Index> indices) const;

 private:
  RowMatrix data_;
  Eigen::VectorXd sq_norms_;
};

/// Which quantity a kernel block evaluation writes.
enum class KernelPart { Value, GradL };

/// Closed-form kernel value as a function of the squared distance.
double kernel_value(KernelType kt, double sq_dist, double l);

/// Closed-form d(kernel)/dl as a function of the squared distance. The
/// Matern expressions are written in terms of a = c*r/l, so r = 0 gives 0
/// without a division.
double kernel_grad_l(KernelType kt, double sq_dist, double l);

/// Squared distance between row i of X and row j of Y via
/// |u|^2 + |v|^2 - 2 u.v, clamped at zero. Every blocked evaluation goes
/// through this one routine so tilings agree bit for bit.
double sq_dist_entry(const PointSet& X, Index i, const PointSet& Y, Index j);

/// Fills `out` (rows x cols) with the kernel part for rows [row0, row0+rows)
/// of X against rows [col0, col0+cols) of Y.
void eval_kernel_block(KernelType kt, KernelPart part, const PointSet& X, Index row0, Index rows,
                       const PointSet& Y, Index col0, Index cols, double l,
                       Eigen::Ref<Eigen::MatrixXd> out);

Eigen::MatrixXd pairwise_sq_dist(const PointSet& X, const PointSet& Y);

Eigen::MatrixXd eval_kernel(KernelType kt, const PointSet& X, const PointSet& Y, double l);

Eigen::MatrixXd eval_kernel_grad_l(KernelType kt, const PointSet& X, const PointSet& Y, double l);

}  // namespace kernelgp
