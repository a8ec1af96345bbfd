#pragma once

#include "pcsc/grid.hpp"
#include "pcsc/krylov.hpp"

namespace pcsc {

struct LinearSolveOptions {
  double tol = 1e-10;
  int restart = 60;
  int max_iterations = 1200;
  /// Dense LU when GMRES stalls and the unknown count is at most this.
  std::size_t dense_limit = 4096;
};

/// L u = Δu + ip(du, θ) + c·u.
ScalarField apply_elliptic(const OneFormField& theta, const ScalarField& c,
                           const ScalarField& u);

/// Solves L u = rhs. Requires either min c > 0, or c ≡ 0 with a compatible
/// rhs, in which case the mean-zero solution is returned. Throws
/// SingularOperator for incompatible data and NoConvergence on a stall.
ScalarField solve_linear(const OneFormField& theta, const ScalarField& c,
                         const ScalarField& rhs, double tol = 1e-10);

/// Unconstrained variant used inside Newton iterations: no sign condition on
/// c, the operator is only assumed to be invertible.
ScalarField solve_elliptic(const OneFormField& theta, const ScalarField& c,
                           const ScalarField& rhs,
                           const LinearSolveOptions& opts = {});

struct BorderedSolution {
  ScalarField u;
  /// s in [L 1; meanᵀ 0][u; s] = [rhs; target_mean]. For c ≡ 0 this is the
  /// compatibility defect of rhs (zero iff rhs lies in the range of L).
  double multiplier;
};

/// Solves the bordered system [L 1; meanᵀ 0][u; s] = [rhs; target_mean].
BorderedSolution solve_elliptic_bordered(const OneFormField& theta,
                                         const ScalarField& c,
                                         const ScalarField& rhs,
                                         double target_mean,
                                         const LinearSolveOptions& opts = {});

/// Same bordered system for an arbitrary field operator (e.g. one written in
/// divergence form), preconditioned by the bordered flat Laplacian.
BorderedSolution solve_bordered(const TorusGrid& grid, const LinearMap& op,
                                const ScalarField& rhs, double target_mean,
                                const LinearSolveOptions& opts = {});

}  // namespace pcsc
