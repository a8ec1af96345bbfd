#include "pcsc/linear.hpp"

#include "pcsc/calculus.hpp"
#include "pcsc/errors.hpp"
#include "pcsc/krylov.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>

namespace pcsc {

namespace {

bool is_zero_form(const OneFormField& theta) { return theta.sup_norm() == 0.0; }

Eigen::VectorXd apply_raw(const OneFormField& theta, const ScalarField& c,
                          const TorusGrid& grid, const Eigen::VectorXd& x) {
  ScalarField u(grid, x);
  return apply_elliptic(theta, c, u).values();
}

double preconditioner_shift(const ScalarField& c) {
  const double mean = c.mean();
  if (mean > 0.0) return std::max(mean, 1e-8);
  return std::max(c.sup_norm(), 1.0);
}

// Crude spectral-norm bounds, used only to place the roundoff floor.
double laplacian_norm(const TorusGrid& grid) {
  const double kmax = 2.0 * std::acos(-1.0) * (grid.points_per_axis() / 2);
  return grid.dim() * kmax * kmax;
}
double derivative_norm(const TorusGrid& grid) {
  return 2.0 * std::acos(-1.0) * (grid.points_per_axis() / 2);
}
double theta_norm(const OneFormField& theta) {
  double s = 0.0;
  for (int k = 0; k < theta.grid().dim(); ++k) s += theta[k].sup_norm();
  return s;
}

}  // namespace

ScalarField apply_elliptic(const OneFormField& theta, const ScalarField& c,
                           const ScalarField& u) {
  require_same_grid(theta.grid(), u.grid());
  require_same_grid(c.grid(), u.grid());
  ScalarField out = laplacian_flat(u);
  if (!is_zero_form(theta)) out += pairing(gradient(u), theta);
  out += c * u;
  return out;
}

ScalarField solve_elliptic(const OneFormField& theta, const ScalarField& c,
                           const ScalarField& rhs, const LinearSolveOptions& opts) {
  const TorusGrid& grid = rhs.grid();
  const double shift = preconditioner_shift(c);
  LinearMap A = [&](const Eigen::VectorXd& x) { return apply_raw(theta, c, grid, x); };
  LinearMap M = [&](const Eigen::VectorXd& x) {
    return shifted_inverse_laplacian(ScalarField(grid, x), shift).values();
  };
  const double norm = laplacian_norm(grid) + derivative_norm(grid) * theta_norm(theta) + c.sup_norm();
  auto res = gmres(A, M, rhs.values(), opts.tol, opts.restart, opts.max_iterations, norm);
  if (!res.converged || !res.x.allFinite()) {
    if (grid.size() > opts.dense_limit) {
      throw Error(ErrorCode::NoConvergence, "GMRES stalled", res.relative_residual);
    }
    const Eigen::MatrixXd dense = assemble_dense(A, Eigen::Index(grid.size()));
    Eigen::FullPivLU<Eigen::MatrixXd> lu(dense);
    if (!lu.isInvertible()) {
      throw Error(ErrorCode::SingularOperator, "operator is numerically singular");
    }
    res.x = lu.solve(rhs.values());
    const double scale = dense.lpNorm<Eigen::Infinity>() * res.x.lpNorm<Eigen::Infinity>() +
                         rhs.values().lpNorm<Eigen::Infinity>();
    const double rel =
        (dense * res.x - rhs.values()).lpNorm<Eigen::Infinity>() / (scale > 0 ? scale : 1.0);
    if (!(rel <= opts.tol * 10.0)) {
      throw Error(ErrorCode::NoConvergence, "dense fallback inaccurate", rel);
    }
  }
  return ScalarField(grid, std::move(res.x));
}

BorderedSolution solve_bordered(const TorusGrid& grid, const LinearMap& op,
                                const ScalarField& rhs, double target_mean,
                                const LinearSolveOptions& opts) {
  require_same_grid(grid, rhs.grid());
  const Eigen::Index n = Eigen::Index(grid.size());
  const double inv_n = 1.0 / double(n);

  LinearMap A = [&](const Eigen::VectorXd& z) {
    Eigen::VectorXd out(n + 1);
    out.head(n) = op(z.head(n));
    out.head(n).array() += z[n];
    out[n] = z.head(n).sum() * inv_n;
    return out;
  };
  // Exact inverse of the bordered flat Laplacian.
  LinearMap M = [&](const Eigen::VectorXd& z) {
    Eigen::VectorXd out(n + 1);
    ScalarField r(grid, z.head(n));
    out.head(n) = inverse_laplacian_flat(r).values();
    out.head(n).array() += z[n];
    out[n] = r.mean();
    return out;
  };
  Eigen::VectorXd b(n + 1);
  b.head(n) = rhs.values();
  b[n] = target_mean;

  auto res = gmres(A, M, b, opts.tol, opts.restart, opts.max_iterations,
                   laplacian_norm(grid) + 1.0);
  if (!res.converged || !res.x.allFinite()) {
    if (grid.size() > opts.dense_limit) {
      throw Error(ErrorCode::NoConvergence, "bordered GMRES stalled", res.relative_residual);
    }
    const Eigen::MatrixXd dense = assemble_dense(A, n + 1);
    Eigen::FullPivLU<Eigen::MatrixXd> lu(dense);
    if (!lu.isInvertible()) {
      throw Error(ErrorCode::SingularOperator, "bordered operator is numerically singular");
    }
    res.x = lu.solve(b);
    // Normwise backward error: LU cannot beat eps·‖A‖‖x‖.
    const double scale = dense.lpNorm<Eigen::Infinity>() * res.x.lpNorm<Eigen::Infinity>() +
                         b.lpNorm<Eigen::Infinity>();
    const double rel = (dense * res.x - b).lpNorm<Eigen::Infinity>() / (scale > 0 ? scale : 1.0);
    if (!(rel <= opts.tol * 10.0)) {
      throw Error(ErrorCode::NoConvergence, "dense bordered fallback inaccurate", rel);
    }
  }
  return {ScalarField(grid, res.x.head(n)), res.x[n]};
}

BorderedSolution solve_elliptic_bordered(const OneFormField& theta,
                                         const ScalarField& c,
                                         const ScalarField& rhs,
                                         double target_mean,
                                         const LinearSolveOptions& opts) {
  const TorusGrid& grid = rhs.grid();
  LinearMap op = [&](const Eigen::VectorXd& x) { return apply_raw(theta, c, grid, x); };
  return solve_bordered(grid, op, rhs, target_mean, opts);
}

ScalarField solve_linear(const OneFormField& theta, const ScalarField& c,
                         const ScalarField& rhs, double tol) {
  require_same_grid(theta.grid(), rhs.grid());
  require_same_grid(c.grid(), rhs.grid());
  LinearSolveOptions opts;
  opts.tol = tol;
  if (c.min() > 0.0) return solve_elliptic(theta, c, rhs, opts);
  if (c.sup_norm() != 0.0) {
    throw Error(ErrorCode::InvalidArgument,
                "solve_linear needs min c > 0 or c identically zero");
  }
  // Tighter inner tolerance so the defect estimate is not polluted by the
  // Krylov residual itself.
  opts.tol = std::min(tol, 1e-12);
  auto sol = solve_elliptic_bordered(theta, c, rhs, 0.0, opts);
  const double scale = std::max(rhs.l2_norm(), 1e-300);
  if (std::abs(sol.multiplier) > tol * std::max(scale, 1.0)) {
    throw Error(ErrorCode::SingularOperator,
                "right-hand side is incompatible with the kernel of the adjoint",
                sol.multiplier);
  }
  return std::move(sol.u);
}

}  // namespace pcsc
