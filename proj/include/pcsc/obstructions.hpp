#pragma once

#include "pcsc/hermitian.hpp"

#include <optional>

namespace pcsc::obstruction {

enum class Verdict { NotRealizable, Unknown, TriviallyRealizable };

std::string_view to_string(Verdict v);

struct ObstructionReport {
  double gamma = 0.0;
  /// ∫ g f₀ dV.
  double star_value = 0.0;
  bool star_pass = false;
  double psi_min = 0.0;
  bool psi_pass = false;
  /// Upper bound on c(g); -inf when φ is constant, empty when (*) fails.
  std::optional<double> c_upper;
  Verdict verdict = Verdict::Unknown;
};

/// Constant value Γ of the scalar curvature of a constant-curvature
/// background; throws WrongRegime unless it is a negative constant within 1e-6.
double constant_curvature(const HermitianBackground& bg);

struct StarResult {
  double value;
  bool pass;
};
StarResult check_star(const HermitianBackground& bg, const ScalarField& g);

struct PositivityResult {
  ScalarField psi;
  double min;
  bool pass;
};
/// Solves Δ^Ch ψ - (2/n)Γψ = -(2/n)g; ψ must be positive when g is realisable.
PositivityResult positivity_test(const HermitianBackground& bg, const ScalarField& g);

double c_upper_bound(const HermitianBackground& bg, const ScalarField& g);

struct Counterexample {
  ScalarField g;
  /// ψ = ψ' + k with ∫ ψ f₀ dV = 0.
  ScalarField psi;
  double a;
  /// ψ + a: the sign-changing solution of the positivity equation for g.
  ScalarField certificate;
};
Counterexample make_counterexample(const HermitianBackground& bg, const ScalarField& psi_prime);

/// u - (n/2)·log λ: carries a solution for g to a solution for λg.
ScalarField scaling_transport(const ScalarField& u, double lambda, int n);

/// Runs the whole ladder: (*), positivity, then the c(g) bound.
ObstructionReport analyze(const HermitianBackground& bg, const ScalarField& g);

}  // namespace pcsc::obstruction
