#pragma once

#include <Eigen/Dense>

#include <functional>
#include <span>
#include <vector>

#include "kernelgp/kernels.hpp"

namespace kernelgp {

/// Maps an n x k block to an n x k block. Solvers batch all right-hand sides
/// into one call.
using LinearOperator = std::function<Eigen::MatrixXd(const Eigen::MatrixXd&)>;

LinearOperator identity_operator();

/// Wraps an explicit dense matrix (tests, small problems).
LinearOperator dense_operator(Eigen::MatrixXd A);

/// CG step coefficients for one right-hand side. alphas[j] and betas[j] are
/// recorded at every iteration j, so betas.size() == alphas.size().
struct CgTrace {
  std::vector<double> alphas;
  std::vector<double> betas;
  Index iterations = 0;
  double final_rel_residual = 0.0;
};

struct CgResult {
  Eigen::VectorXd x;
  CgTrace trace;
  bool converged = false;
};

/// Plain conjugate gradients from x0. Stops when |r_j| / |y| <= tol, when the
/// residual is exactly zero, or after max_iter iterations. tol = 0 runs a
/// fixed max_iter steps.
///
/// Throws BreakdownError if p'Ap <= 0 and NumericalError on NaN.
CgResult cg_solve(const LinearOperator& A, const Eigen::VectorXd& y, const Eigen::VectorXd& x0,
                  double tol, Index max_iter);

struct SolveReport {
  Eigen::MatrixXd solution;
  std::vector<CgTrace> traces;
  std::vector<bool> converged;

  bool all_converged() const;
};

/// Preconditioned CG on every column of Y from a zero initial guess.
///
/// All columns share each application of A and of M^{-1}. A column that meets
/// the tolerance stops updating but keeps its slot, so the operator always
/// sees an n x k block. The residual test uses the unpreconditioned residual.
/// A breakdown in any column throws, naming the column.
SolveReport pcg_solve(const LinearOperator& A, const LinearOperator& Minv, const Eigen::MatrixXd& Y,
                      double tol, Index max_iter);

/// Symmetric tridiagonal matrix stored by its diagonals.
struct Tridiagonal {
  Eigen::VectorXd diagonal;
  Eigen::VectorXd off_diagonal;

  Index size() const { return diagonal.size(); }
  Eigen::MatrixXd to_dense() const;
};

/// Lanczos tridiagonal recovered from CG coefficients:
///   d_0 = 1/alpha_0,  d_i = 1/alpha_i + beta_{i-1}/alpha_{i-1},
///   o_i = sqrt(beta_i)/alpha_i.
/// Throws InvalidArgument for an empty trace, alpha <= 0 or beta < 0.
Tridiagonal build_tridiag(const CgTrace& trace);

/// Ritz values of T (ascending).
Eigen::VectorXd ritz_values(const Tridiagonal& T);

/// e1' log(T) e1 through the eigendecomposition of T.
double quadrature_log(const Tridiagonal& T);

/// Stochastic Lanczos quadrature: mean over probes of |z_i|^2 e1' log(T_i) e1.
/// Throws NumericalError if any Ritz value is <= 0.
double slq_logdet(std::span<const CgTrace> traces, std::span<const double> probe_norms_sq);

}  // namespace kernelgp
