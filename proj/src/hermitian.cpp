#include "pcsc/hermitian.hpp"

#include "pcsc/calculus.hpp"
#include "pcsc/errors.hpp"

#include <algorithm>
#include <cmath>

namespace pcsc {

namespace {

double torsion_exponent(int n) { return 2.0 - 2.0 / n; }

}  // namespace

HermitianBackground::HermitianBackground(OneFormField theta0, ScalarField S0,
                                         std::optional<ScalarField> potential)
    : theta0_(std::move(theta0)),
      S0_(std::move(S0)),
      potential_(potential ? std::move(*potential) : ScalarField(theta0_.grid())) {
  require_same_grid(theta0_.grid(), S0_.grid());
  require_same_grid(theta0_.grid(), potential_.grid());
  for (int k = 0; k < theta0_.dim(); ++k) {
    if (!theta0_[k].all_finite()) throw Error(ErrorCode::InvalidArgument, "torsion is not finite");
  }
  if (!S0_.all_finite() || !potential_.all_finite()) {
    throw Error(ErrorCode::InvalidArgument, "background data is not finite");
  }
}

OneFormField HermitianBackground::effective_torsion() const {
  return theta0_ + torsion_exponent(n()) * gradient(potential_);
}

ScalarField HermitianBackground::volume_density() const { return (2.0 * potential_).exp(); }

ScalarField HermitianBackground::pairing_weight() const {
  return (-2.0 / n() * potential_).exp();
}

ScalarField HermitianBackground::torsion_density() const {
  return (torsion_exponent(n()) * potential_).exp();
}

double HermitianBackground::volume() const { return pcsc::integrate(volume_density()); }

double HermitianBackground::integrate(const ScalarField& f) const {
  return pcsc::integrate(f, volume_density());
}

ScalarField HermitianBackground::metric_pairing(const OneFormField& a,
                                                const OneFormField& b) const {
  return pairing(a, b, pairing_weight());
}

HermitianBackground flat_background(const TorusGrid& grid, double S0) {
  return HermitianBackground(OneFormField(grid), ScalarField(grid, S0));
}

// ---------------------------------------------------------------------------

ScalarField chern_laplacian(const HermitianBackground& bg, const ScalarField& f) {
  require_same_grid(bg.grid(), f.grid());
  ScalarField flat = laplacian_flat(f) + pairing(gradient(f), bg.theta0());
  return bg.pairing_weight() * flat;
}

namespace {

// Δh - div(h θ): transpose of h ↦ Δh + ip(dh, θ) in the plain grid sum.
ScalarField base_adjoint(const OneFormField& theta, const ScalarField& h) {
  return laplacian_flat(h) - divergence(h * theta);
}

}  // namespace

ScalarField chern_adjoint(const HermitianBackground& bg, const ScalarField& f) {
  require_same_grid(bg.grid(), f.grid());
  const ScalarField rho_f = bg.torsion_density() * f;
  return (-2.0 * bg.potential()).exp() * base_adjoint(bg.theta0(), rho_f);
}

ScalarField torsion_codifferential(const HermitianBackground& bg) {
  return chern_adjoint(bg, ScalarField(bg.grid(), 1.0));
}

ScalarField eccentricity(const HermitianBackground& bg) {
  const TorusGrid& grid = bg.grid();
  const OneFormField& theta = bg.theta0();
  LinearMap op = [&](const Eigen::VectorXd& x) {
    return base_adjoint(theta, ScalarField(grid, x)).values();
  };
  LinearSolveOptions opts;
  opts.tol = 1e-10;
  BorderedSolution kernel = [&] {
    try {
      return solve_bordered(grid, op, ScalarField(grid), 1.0, opts);
    } catch (const Error& e) {
      throw Error(ErrorCode::DegenerateKernel,
                  std::string("adjoint kernel solve failed: ") + e.what());
    }
  }();
  // The bordered system is consistent exactly when the kernel is
  // one-dimensional and not orthogonal to the constants.
  if (std::abs(kernel.multiplier) > 1e-8) {
    throw Error(ErrorCode::DegenerateKernel, "kernel defect", kernel.multiplier);
  }
  ScalarField h = std::move(kernel.u);
  if (!(h.min() > 0.0)) {
    throw Error(ErrorCode::DegenerateKernel, "adjoint kernel is not positive", h.min());
  }
  ScalarField f0 = h / bg.torsion_density();
  f0 *= bg.volume() / bg.integrate(f0);
  return f0;
}

bool is_gauduchon(const HermitianBackground& bg, double tol) {
  return torsion_codifferential(bg).sup_norm() < tol;
}

bool is_balanced(const HermitianBackground& bg, double tol) {
  return bg.effective_torsion().sup_norm() < tol;
}

HermitianBackground conformal_change(const HermitianBackground& bg, const ScalarField& u) {
  require_same_grid(bg.grid(), u.grid());
  return HermitianBackground(bg.theta0(), bg.S0(), bg.potential() + u);
}

ScalarField scalar_curvature(const HermitianBackground& bg) {
  const ScalarField& U = bg.potential();
  ScalarField base = laplacian_flat(U) + pairing(gradient(U), bg.theta0()) + bg.S0();
  return bg.pairing_weight() * base;
}

GauduchonNormalization gauduchon_normalize(const HermitianBackground& bg) {
  const int n = bg.n();
  const ScalarField f0 = eccentricity(bg);
  ScalarField u = (double(n) / (2.0 * (n - 1))) * f0.map([](double v) { return std::log(v); });
  // Fix the additive constant so the representative has unit volume.
  const double vol = integrate((2.0 * (bg.potential() + u)).exp());
  u += -0.5 * std::log(vol);
  HermitianBackground eta = conformal_change(bg, u);
  return {std::move(eta), std::move(u)};
}

double gauduchon_degree(const HermitianBackground& bg) {
  const auto eta = gauduchon_normalize(bg).background;
  return eta.integrate(scalar_curvature(eta));
}

double formula4_residual(const HermitianBackground& bg, const ScalarField& u) {
  const double n = bg.n();
  const ScalarField w = (-2.0 / n * u).exp();
  const OneFormField dw = gradient(w);
  ScalarField r = w * chern_laplacian(bg, u) + (n / 2.0) * chern_laplacian(bg, w) +
                  (n / 2.0) * (bg.metric_pairing(dw, dw) / w);
  return r.sup_norm();
}

double prescribed_residual(const HermitianBackground& bg, const ScalarField& g,
                           const ScalarField& u) {
  require_same_grid(bg.grid(), g.grid());
  return (scalar_curvature(conformal_change(bg, u)) - g).sup_norm();
}

double IntegralClosure::relative_error() const {
  const double scale = std::abs(gamma) > 1e-12 ? std::abs(gamma) : 1.0;
  return std::abs(integral - gamma) / scale;
}

IntegralClosure integral_closure(const HermitianBackground& bg, const ScalarField& g,
                                 const ScalarField& u) {
  const auto norm = gauduchon_normalize(bg);
  const HermitianBackground& eta = norm.background;
  const ScalarField u_eta = u - norm.exponent;
  const double n = bg.n();
  const double integral = eta.integrate(g * (2.0 / n * u_eta).exp());
  const double gamma = eta.integrate(scalar_curvature(eta));
  return {integral, gamma};
}

ScalarField solve_chern_linear(const HermitianBackground& bg, const ScalarField& c,
                               const ScalarField& rhs, double tol) {
  const ScalarField m = (2.0 / bg.n() * bg.potential()).exp();
  return solve_linear(bg.theta0(), c * m, rhs * m, tol);
}

ScalarField solve_chern_general(const HermitianBackground& bg, const ScalarField& c,
                                const ScalarField& rhs, const LinearSolveOptions& opts) {
  const ScalarField m = (2.0 / bg.n() * bg.potential()).exp();
  return solve_elliptic(bg.theta0(), c * m, rhs * m, opts);
}

}  // namespace pcsc
