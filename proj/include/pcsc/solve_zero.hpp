#pragma once

#include "pcsc/hermitian.hpp"

#include <vector>

namespace pcsc::zero {

struct ZeroOptions {
  int max_iters = 3000;
  /// Stationarity at which descent hands over to Newton.
  double newton_switch = 1e-3;
  int newton_max = 25;
  double stationarity_tol = 1e-9;
  double constraint_tol = 1e-12;
};

struct VariationalState {
  ScalarField v;
  /// Multiplier of the curvature constraint, λ < 0 at a minimiser.
  double lambda = 0.0;
  /// Shift making v + γ a solution.
  double gamma = 0.0;
  double energy = 0.0;
  double constraint_residual = 0.0;
  /// Multiplier of the volume constraint; vanishes at a critical point.
  double mu = 0.0;
  /// RMS of Δ^Ch v - κ g exp(2v/n) - μ with κ = -2λ/n.
  double stationarity = 0.0;
  int iterations = 0;
  int newton_iterations = 0;
  std::vector<double> energy_trace = {};
};

/// Throws WrongRegime unless bg is balanced with vanishing scalar curvature.
bool check_hypotheses(const HermitianBackground& bg, const ScalarField& g);

/// Mean-zero φ₀ with ∫ g exp(2φ₀/n) dV = 0, built from a bump at argmax g.
ScalarField initial_feasible(const HermitianBackground& bg, const ScalarField& g);

VariationalState minimize_energy(const HermitianBackground& bg, const ScalarField& g,
                                 const ScalarField& phi0, const ZeroOptions& opts = {});

/// v + γ with γ = (n/2)·log(-2λ/n).
ScalarField recover_solution(const VariationalState& state, int n);

struct ZeroSolution {
  VariationalState state;
  ScalarField u;
  double residual;
};
ZeroSolution solve_zero(const HermitianBackground& bg, const ScalarField& g,
                        const ZeroOptions& opts = {});

}  // namespace pcsc::zero
