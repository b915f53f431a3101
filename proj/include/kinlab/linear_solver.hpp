#pragma once

#include <Eigen/IterativeLinearSolvers>
#include <Eigen/Sparse>

#include <cmath>
#include <string>
#include <vector>

#include "error.hpp"

namespace kinlab {

using SpMat = Eigen::SparseMatrix<double, Eigen::RowMajor>;
using Vector = Eigen::VectorXd;

enum class Preconditioner { none, jacobi, incomplete_cholesky };

struct SolveInfo {
  int iterations = 0;
  double relative_residual = 0;  // ‖b - K x‖ / ‖b‖ (0 when b = 0)
  std::vector<double> history;   // relative residual per iteration, history[0] = initial
};

// Preconditioned conjugate gradients for symmetric positive definite K. x holds
// the initial guess on entry. Throws ConvergenceError with the residual history
// when max_iter is reached above tol.
inline SolveInfo pcg(const SpMat& K, const Vector& b, Vector& x, double tol = 1e-10, int max_iter = 20000,
                     Preconditioner pc = Preconditioner::incomplete_cholesky) {
  if (K.rows() != K.cols() || K.rows() != b.size()) throw DimensionError("pcg: size mismatch");
  if (x.size() != b.size()) x = Vector::Zero(b.size());
  SolveInfo info;
  const double bn = b.norm();
  if (bn == 0) {
    x.setZero();
    info.history.push_back(0);
    return info;
  }
  Eigen::SparseMatrix<double> Kc;
  Eigen::IncompleteCholesky<double, Eigen::Lower, Eigen::AMDOrdering<int>> ic;
  Vector dinv;
  if (pc == Preconditioner::incomplete_cholesky) {
    Kc = K;
    ic.compute(Kc);
    if (ic.info() != Eigen::Success) pc = Preconditioner::jacobi;
  }
  if (pc == Preconditioner::jacobi) dinv = K.diagonal().cwiseInverse();
  auto apply = [&](const Vector& r) -> Vector {
    switch (pc) {
      case Preconditioner::incomplete_cholesky: return ic.solve(r);
      case Preconditioner::jacobi: return dinv.cwiseProduct(r);
      case Preconditioner::none: break;
    }
    return r;
  };
  Vector r = b - K * x;
  Vector z = apply(r), p = z;
  double rz = r.dot(z);
  info.relative_residual = r.norm() / bn;
  info.history.push_back(info.relative_residual);
  while (info.relative_residual > tol) {
    if (info.iterations >= max_iter)
      throw ConvergenceError("pcg: no convergence after " + std::to_string(max_iter) + " iterations (residual " +
                                 std::to_string(info.relative_residual) + ")",
                             info.history);
    const Vector Kp = K * p;
    const double alpha = rz / p.dot(Kp);
    x += alpha * p;
    r -= alpha * Kp;
    ++info.iterations;
    // Recompute the true residual now and then to avoid drift.
    if (info.iterations % 50 == 0) r = b - K * x;
    info.relative_residual = r.norm() / bn;
    info.history.push_back(info.relative_residual);
    if (!std::isfinite(info.relative_residual))
      throw ConvergenceError("pcg: breakdown (non-finite residual)", info.history);
    z = apply(r);
    const double rz_new = r.dot(z);
    p = z + (rz_new / rz) * p;
    rz = rz_new;
  }
  // Certify with the true residual.
  info.relative_residual = (b - K * x).norm() / bn;
  return info;
}

// Solves a tridiagonal system a_i x_{i-1} + b_i x_i + c_i x_{i+1} = d_i in place
// (Thomas algorithm); a_0 and c_{n-1} are ignored. Requires diagonal dominance.
inline void thomas(std::vector<double>& a, std::vector<double>& b, std::vector<double>& c, std::vector<double>& d) {
  const std::size_t n = d.size();
  if (n == 0) return;
  for (std::size_t i = 1; i < n; ++i) {
    const double w = a[i] / b[i - 1];
    b[i] -= w * c[i - 1];
    d[i] -= w * d[i - 1];
  }
  d[n - 1] /= b[n - 1];
  for (std::size_t i = n - 1; i-- > 0;) d[i] = (d[i] - c[i] * d[i + 1]) / b[i];
}

// Cyclic variant: a_0 couples to x_{n-1} and c_{n-1} to x_0 (Sherman-Morrison).
inline void thomas_cyclic(std::vector<double> a, std::vector<double> b, std::vector<double> c, std::vector<double>& d) {
  const std::size_t n = d.size();
  if (n < 3) throw DimensionError("cyclic tridiagonal solve needs n >= 3");
  const double alpha = c[n - 1], beta = a[0];
  const double gamma = -b[0];
  b[0] -= gamma;
  b[n - 1] -= alpha * beta / gamma;
  std::vector<double> u(n, 0.0);
  u[0] = gamma;
  u[n - 1] = alpha;
  std::vector<double> a2 = a, b2 = b, c2 = c;
  thomas(a, b, c, d);
  thomas(a2, b2, c2, u);
  const double fact = (d[0] + beta * d[n - 1] / gamma) / (1 + u[0] + beta * u[n - 1] / gamma);
  for (std::size_t i = 0; i < n; ++i) d[i] -= fact * u[i];
}

}  // namespace kinlab
