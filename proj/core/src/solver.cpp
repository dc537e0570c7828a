#include "kernelgp/solver.hpp"

#include <Eigen/Eigenvalues>

#include <algorithm>
#include <cmath>
#include <string>

#include "kernelgp/errors.hpp"

namespace kernelgp {

namespace {

void check_step_denominator(double value, const char* what, Index column, Index iteration) {
  if (std::isnan(value)) {
    throw NumericalError(std::string("NaN in ") + what + " (column " + std::to_string(column) +
                         ", iteration " + std::to_string(iteration) + ")");
  }
  if (!(value > 0.0)) {
    throw BreakdownError(std::string(what) + " = " + std::to_string(value) +
                         " <= 0: operator is not symmetric positive definite (column " +
                         std::to_string(column) + ", iteration " + std::to_string(iteration) +
                         ")");
  }
}

Eigen::MatrixXd apply_checked(const LinearOperator& op, const Eigen::MatrixXd& in) {
  Eigen::MatrixXd out = op(in);
  if (out.rows() != in.rows() || out.cols() != in.cols()) {
    throw InvalidArgument("operator returned a " + std::to_string(out.rows()) + "x" +
                          std::to_string(out.cols()) + " block for a " +
                          std::to_string(in.rows()) + "x" + std::to_string(in.cols()) + " input");
  }
  return out;
}

void check_solver_args(double tol, Index max_iter) {
  if (!(tol >= 0.0)) throw InvalidArgument("tolerance must be >= 0");
  if (max_iter < 1) throw InvalidArgument("max_iter must be >= 1");
}

}  // namespace

LinearOperator identity_operator() {
  return [](const Eigen::MatrixXd& B) { return B; };
}

LinearOperator dense_operator(Eigen::MatrixXd A) {
  return [A = std::move(A)](const Eigen::MatrixXd& B) -> Eigen::MatrixXd { return A * B; };
}

CgResult cg_solve(const LinearOperator& A, const Eigen::VectorXd& y, const Eigen::VectorXd& x0,
                  double tol, Index max_iter) {
  check_solver_args(tol, max_iter);
  if (x0.size() != y.size()) throw InvalidArgument("x0 and y differ in length");

  CgResult result;
  const double y_norm = y.norm();
  if (y_norm == 0.0) {
    result.x = Eigen::VectorXd::Zero(y.size());
    result.converged = true;
    return result;
  }

  Eigen::VectorXd x = x0;
  Eigen::VectorXd r = y - Eigen::VectorXd(apply_checked(A, x));
  Eigen::VectorXd p = r;
  double rr = r.squaredNorm();
  double rel = std::sqrt(rr) / y_norm;
  bool converged = rr == 0.0 || rel <= tol;

  Index j = 0;
  for (; j < max_iter && !converged; ++j) {
    const Eigen::VectorXd Ap = apply_checked(A, p);
    const double pAp = p.dot(Ap);
    check_step_denominator(pAp, "p'Ap", 0, j);
    const double alpha = rr / pAp;
    x += alpha * p;
    r -= alpha * Ap;
    const double rr_next = r.squaredNorm();
    if (std::isnan(rr_next)) throw NumericalError("NaN in CG residual at iteration " + std::to_string(j));
    const double beta = rr_next / rr;
    p = r + beta * p;
    rr = rr_next;
    result.trace.alphas.push_back(alpha);
    result.trace.betas.push_back(beta);
    rel = std::sqrt(rr) / y_norm;
    converged = rr == 0.0 || rel <= tol;
  }

  result.trace.iterations = j;
  result.trace.final_rel_residual = rel;
  result.converged = converged;
  result.x = std::move(x);
  return result;
}

bool SolveReport::all_converged() const {
  for (bool c : converged) {
    if (!c) return false;
  }
  return true;
}

SolveReport pcg_solve(const LinearOperator& A, const LinearOperator& Minv, const Eigen::MatrixXd& Y,
                      double tol, Index max_iter) {
  check_solver_args(tol, max_iter);
  const Index n = Y.rows();
  const Index k = Y.cols();

  SolveReport report;
  report.solution = Eigen::MatrixXd::Zero(n, k);
  report.traces.assign(static_cast<std::size_t>(k), CgTrace{});
  report.converged.assign(static_cast<std::size_t>(k), false);
  if (k == 0) return report;

  Eigen::MatrixXd& X = report.solution;
  Eigen::MatrixXd R = Y;
  Eigen::MatrixXd Z = apply_checked(Minv, R);
  Eigen::MatrixXd P = Z;
  Eigen::VectorXd y_norm = Y.colwise().norm().transpose();
  Eigen::VectorXd rz(k);
  std::vector<bool> active(static_cast<std::size_t>(k), true);
  Index num_active = 0;

  for (Index c = 0; c < k; ++c) {
    const auto cc = static_cast<std::size_t>(c);
    if (y_norm[c] == 0.0) {
      active[cc] = false;
      report.converged[cc] = true;
      continue;
    }
    rz[c] = R.col(c).dot(Z.col(c));
    check_step_denominator(rz[c], "r'M^{-1}r", c, 0);
    report.traces[cc].final_rel_residual = 1.0;
    if (tol >= 1.0) {
      active[cc] = false;
      report.converged[cc] = true;
      continue;
    }
    ++num_active;
  }

  for (Index it = 0; it < max_iter && num_active > 0; ++it) {
    const Eigen::MatrixXd AP = apply_checked(A, P);
    for (Index c = 0; c < k; ++c) {
      if (!active[static_cast<std::size_t>(c)]) continue;
      const double pAp = P.col(c).dot(AP.col(c));
      check_step_denominator(pAp, "p'Ap", c, it);
      const double alpha = rz[c] / pAp;
      X.col(c) += alpha * P.col(c);
      R.col(c) -= alpha * AP.col(c);
      report.traces[static_cast<std::size_t>(c)].alphas.push_back(alpha);
    }
    Z = apply_checked(Minv, R);
    for (Index c = 0; c < k; ++c) {
      const auto cc = static_cast<std::size_t>(c);
      if (!active[cc]) continue;
      CgTrace& trace = report.traces[cc];
      const double r_norm = R.col(c).norm();
      if (std::isnan(r_norm)) throw NumericalError("NaN in PCG residual (column " + std::to_string(c) + ")");
      const double rel = r_norm / y_norm[c];
      const bool done = r_norm == 0.0 || rel <= tol;
      double beta = 0.0;
      if (r_norm != 0.0) {
        const double rz_next = R.col(c).dot(Z.col(c));
        check_step_denominator(rz_next, "r'M^{-1}r", c, it + 1);
        beta = rz_next / rz[c];
        rz[c] = rz_next;
        P.col(c) = Z.col(c) + beta * P.col(c);
      }
      trace.betas.push_back(beta);
      trace.iterations = it + 1;
      trace.final_rel_residual = rel;
      if (done) {
        active[cc] = false;
        report.converged[cc] = true;
        --num_active;
      }
    }
  }
  return report;
}

Eigen::MatrixXd Tridiagonal::to_dense() const {
  const Index m = size();
  Eigen::MatrixXd T = Eigen::MatrixXd::Zero(m, m);
  T.diagonal() = diagonal;
  if (m > 1) {
    T.diagonal(1) = off_diagonal;
    T.diagonal(-1) = off_diagonal;
  }
  return T;
}

Tridiagonal build_tridiag(const CgTrace& trace) {
  const auto m = static_cast<Index>(trace.alphas.size());
  if (m < 1) throw InvalidArgument("cannot build a tridiagonal from an empty CG trace");
  if (static_cast<Index>(trace.betas.size()) < m - 1) {
    throw InvalidArgument("CG trace has fewer than m-1 betas");
  }
  Tridiagonal T;
  T.diagonal.resize(m);
  T.off_diagonal.resize(m - 1);
  for (Index i = 0; i < m; ++i) {
    const double alpha = trace.alphas[static_cast<std::size_t>(i)];
    if (!(alpha > 0.0)) throw InvalidArgument("CG trace has a non-positive alpha");
    T.diagonal[i] = 1.0 / alpha;
    if (i > 0) {
      const double beta_prev = trace.betas[static_cast<std::size_t>(i - 1)];
      T.diagonal[i] += beta_prev / trace.alphas[static_cast<std::size_t>(i - 1)];
    }
    if (i < m - 1) {
      const double beta = trace.betas[static_cast<std::size_t>(i)];
      if (beta < 0.0) throw InvalidArgument("CG trace has a negative beta");
      T.off_diagonal[i] = std::sqrt(beta) / alpha;
    }
  }
  return T;
}

namespace {

// Eigen's tridiagonal QR only converges reliably on entries of order one, so
// solve the scaled problem and scale the eigenvalues back.
struct TridiagEigen {
  Eigen::VectorXd values;
  Eigen::MatrixXd vectors;
};

TridiagEigen tridiagonal_eigen(const Tridiagonal& T, int options) {
  double scale = T.diagonal.cwiseAbs().maxCoeff();
  if (T.off_diagonal.size() > 0) scale = std::max(scale, T.off_diagonal.cwiseAbs().maxCoeff());
  if (!std::isfinite(scale)) throw NumericalError("non-finite entry in tridiagonal matrix");
  if (scale == 0.0) scale = 1.0;
  Eigen::VectorXd diag = T.diagonal / scale;
  Eigen::VectorXd off = T.off_diagonal / scale;
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig;
  eig.computeFromTridiagonal(diag, off, options);
  if (eig.info() != Eigen::Success) throw NumericalError("tridiagonal eigensolver did not converge");
  TridiagEigen out{eig.eigenvalues() * scale, {}};
  if (options == Eigen::ComputeEigenvectors) out.vectors = eig.eigenvectors();
  return out;
}

}  // namespace

Eigen::VectorXd ritz_values(const Tridiagonal& T) {
  return tridiagonal_eigen(T, Eigen::EigenvaluesOnly).values;
}

double quadrature_log(const Tridiagonal& T) {
  const TridiagEigen eig = tridiagonal_eigen(T, Eigen::ComputeEigenvectors);
  const Eigen::VectorXd& theta = eig.values;
  if (!(theta.minCoeff() > 0.0)) {
    throw NumericalError("non-positive Ritz value " + std::to_string(theta.minCoeff()) +
                         " in log-determinant quadrature");
  }
  const Eigen::VectorXd weights = eig.vectors.row(0).transpose().array().square();
  return weights.dot(theta.array().log().matrix());
}

double slq_logdet(std::span<const CgTrace> traces, std::span<const double> probe_norms_sq) {
  if (traces.size() != probe_norms_sq.size()) {
    throw InvalidArgument("slq_logdet needs one probe norm per trace");
  }
  if (traces.empty()) throw InvalidArgument("slq_logdet needs at least one probe");
  double sum = 0.0;
  for (std::size_t i = 0; i < traces.size(); ++i) {
    // A zero probe has an empty trace and contributes nothing.
    if (traces[i].alphas.empty()) continue;
    sum += probe_norms_sq[i] * quadrature_log(build_tridiag(traces[i]));
  }
  return sum / static_cast<double>(traces.size());
}

}  // namespace kernelgp
