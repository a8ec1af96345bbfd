#pragma once

#include "pcsc/grid.hpp"
#include "pcsc/linear.hpp"

#include <optional>

namespace pcsc {

/// Synthetic Hermitian structure on the flat torus: base torsion θ₀, base
/// Chern scalar curvature S⁰ and an accumulated conformal exponent U, so the
/// current metric is exp(2U/n)·ω_base.
///
/// Derived quantities of the current metric:
///   volume density          exp(2U)
///   one-form pairing weight exp(-2U/n)
///   effective torsion       θ₀ + (2(n-1)/n)·dU
///   Chern Laplacian         exp(-2U/n)·(Δf + ip(df, θ₀))
class HermitianBackground {
 public:
  HermitianBackground(OneFormField theta0, ScalarField S0,
                      std::optional<ScalarField> potential = std::nullopt);

  const TorusGrid& grid() const noexcept { return theta0_.grid(); }
  int n() const noexcept { return grid().complex_dim(); }
  const OneFormField& theta0() const noexcept { return theta0_; }
  const ScalarField& S0() const noexcept { return S0_; }
  const ScalarField& potential() const noexcept { return potential_; }

  OneFormField effective_torsion() const;
  ScalarField volume_density() const;
  ScalarField pairing_weight() const;
  /// exp((2 - 2/n)U): volume density times one-form weight.
  ScalarField torsion_density() const;
  double volume() const;

  /// ∫ f dV of the current metric.
  double integrate(const ScalarField& f) const;
  /// Metric pairing of one-forms: pairing_weight·ip(a, b).
  ScalarField metric_pairing(const OneFormField& a, const OneFormField& b) const;

 private:
  OneFormField theta0_;
  ScalarField S0_;
  ScalarField potential_;
};

/// Flat torus with θ₀ = 0, constant S⁰ and U = 0.
HermitianBackground flat_background(const TorusGrid& grid, double S0 = 0.0);

ScalarField chern_laplacian(const HermitianBackground& bg, const ScalarField& f);

/// Formal adjoint of the Chern Laplacian in L²(dV), written in divergence form
/// exp(-2U)·(Δ(ρf) - div(ρ f θ₀)) with ρ = exp((2-2/n)U), so it is the exact
/// discrete transpose.
ScalarField chern_adjoint(const HermitianBackground& bg, const ScalarField& f);

/// Positive generator of ker (Δ^Ch)* normalised by ∫ f₀ dV = Vol.
ScalarField eccentricity(const HermitianBackground& bg);

/// d*θ of the current metric, equal to (Δ^Ch)*(1).
ScalarField torsion_codifferential(const HermitianBackground& bg);
bool is_gauduchon(const HermitianBackground& bg, double tol = 1e-8);
bool is_balanced(const HermitianBackground& bg, double tol = 1e-8);

HermitianBackground conformal_change(const HermitianBackground& bg, const ScalarField& u);

/// Chern scalar curvature of the current metric,
/// exp(-2U/n)·(Δ^Ch_base U + S⁰).
ScalarField scalar_curvature(const HermitianBackground& bg);

struct GauduchonNormalization {
  HermitianBackground background;
  /// Exponent u_G with background = conformal_change(input, u_G).
  ScalarField exponent;
};

/// Volume-one Gauduchon representative of the conformal class.
GauduchonNormalization gauduchon_normalize(const HermitianBackground& bg);

/// Γ = ∫ S^Ch(η) dV_η on the volume-one Gauduchon representative η.
double gauduchon_degree(const HermitianBackground& bg);

/// Sup norm of w·Δ^Ch u + (n/2)Δ^Ch w + (n/2)·|dw|²/w with w = exp(-2u/n);
/// vanishes identically in the continuum.
double formula4_residual(const HermitianBackground& bg, const ScalarField& u);

/// ‖S^Ch(exp(2u/n)ω) - g‖∞.
double prescribed_residual(const HermitianBackground& bg, const ScalarField& g,
                           const ScalarField& u);

/// Integrated curvature identity on the Gauduchon representative:
/// returns (∫ g exp(2u_η/n) dV_η, Γ) where u_η is u re-expressed relative to η.
struct IntegralClosure {
  double integral;
  double gamma;
  double relative_error() const;
};
IntegralClosure integral_closure(const HermitianBackground& bg, const ScalarField& g,
                                 const ScalarField& u);

/// Solves Δ^Ch u + c·u = rhs under solve_linear's contract (c > 0 or c ≡ 0,
/// the latter returning the flat-mean-zero representative).
ScalarField solve_chern_linear(const HermitianBackground& bg, const ScalarField& c,
                               const ScalarField& rhs, double tol = 1e-10);

/// Same operator without sign requirements on c (Newton corrections).
ScalarField solve_chern_general(const HermitianBackground& bg, const ScalarField& c,
                                const ScalarField& rhs,
                                const LinearSolveOptions& opts = {});

}  // namespace pcsc
