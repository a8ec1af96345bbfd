#pragma once

#include "pcsc/hermitian.hpp"

#include <vector>

namespace pcsc::negative {

struct SolveOptions {
  int t_steps = 4;
  int newton_max = 40;
  double newton_tol = 1e-8;
  int monotone_max = 4000;
  double monotone_tol = 1e-8;
  double K_safety = 1.1;

  void validate() const;
};

struct Solution {
  ScalarField u;
  double residual = 0.0;
  int iterations = 0;
  /// Continuation: t reached after each accepted step. Monotone: residual per sweep.
  std::vector<double> trace;
  /// Monotone only: smallest pointwise increment min(u_{k+1} - u_k) seen.
  double min_increment = 0.0;
};

struct YamabeResult {
  HermitianBackground background;
  /// Total exponent relative to the input background.
  ScalarField exponent;
  double gamma;
};

YamabeResult yamabe_normalize(const HermitianBackground& bg, const SolveOptions& opts = {});

/// Newton continuation along Δ^Ch u + tS + (1-t)g - g·exp(2u/n) = 0, t: 0 → 1.
Solution continuity_solve(const HermitianBackground& bg_const, const ScalarField& g,
                          const SolveOptions& opts = {});

/// Constant subsolution (n/2)·log(Γ / min g).
double build_subsolution(const HermitianBackground& bg_const, const ScalarField& g);

struct Supersolution {
  ScalarField u;
  ScalarField phi;
  double k1;
  double k2;
};
Supersolution build_supersolution(const HermitianBackground& bg_const, const ScalarField& g);

/// Increasing sub/supersolution iteration started at u_minus.
Solution monotone_solve(const HermitianBackground& bg_const, const ScalarField& g,
                        const ScalarField& u_minus, const ScalarField& u_plus,
                        const SolveOptions& opts = {});

/// Exponent u relative to bg with S^Ch(exp(2u/n)ω) = g, for g ≤ 0, g ≢ 0.
Solution solve_nonpositive(const HermitianBackground& bg, const ScalarField& g,
                           const SolveOptions& opts = {});

}  // namespace pcsc::negative
