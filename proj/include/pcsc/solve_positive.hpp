#pragma once

#include "pcsc/hermitian.hpp"

#include <optional>
#include <vector>

namespace pcsc::positive {

struct LocalOptions {
  int newton_max = 30;
  double tol = 1e-10;
  /// Iterates leaving ‖u‖∞ <= radius count as divergence.
  double radius = 2.0;
};

struct LocalSolution {
  ScalarField u;
  int iterations;
  /// ‖exp(-2u/n)(Δ^Ch u + S) - g‖∞ with the S actually used.
  double residual;
};

/// Bordered Newton for Δ^Ch u + S - g·exp(2u/n) = 0 near u = 0 on a
/// volume-one Gauduchon background of positive degree. S defaults to the
/// background curvature.
LocalSolution local_solve(const HermitianBackground& bg_gauduchon, const ScalarField& g,
                          const LocalOptions& opts = {},
                          const std::optional<ScalarField>& S = std::nullopt);

struct ProbeResult {
  /// Largest converged ε before the first failure; 0 when none converged.
  double epsilon;
  std::vector<double> scales;
  std::vector<bool> converged;
  /// ‖u(ε)‖∞ per converged scale (NaN otherwise).
  std::vector<double> sup_u;
};

/// Sweeps ε = 2^{-j}, j = 20, 19, ..., -4, solving for (ε·g_dir, ε·S_dir).
ProbeResult neighborhood_probe(const HermitianBackground& bg_gauduchon, const ScalarField& g_dir,
                               const ScalarField& S_dir, const LocalOptions& opts = {});

}  // namespace pcsc::positive
