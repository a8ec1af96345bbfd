#include "pcsc/obstructions.hpp"

#include "pcsc/calculus.hpp"
#include "pcsc/errors.hpp"

#include <cmath>
#include <limits>

namespace pcsc::obstruction {

namespace {

constexpr double kConstantTol = 1e-6;

double spread(const ScalarField& f) { return f.max() - f.min(); }

// Strict negativity of ∫ g f₀ dV beyond quadrature roundoff.
bool star_negative(const HermitianBackground& bg, const ScalarField& g, double value) {
  return value < -1e-10 * g.sup_norm() * bg.volume();
}

}  // namespace

std::string_view to_string(Verdict v) {
  switch (v) {
    case Verdict::NotRealizable: return "NotRealizable";
    case Verdict::Unknown: return "Unknown";
    case Verdict::TriviallyRealizable: return "TriviallyRealizable";
  }
  return "Unknown";
}

double constant_curvature(const HermitianBackground& bg) {
  const ScalarField S = scalar_curvature(bg);
  const double gamma = S.mean();
  if (spread(S) > kConstantTol * std::max(1.0, std::abs(gamma))) {
    throw Error(ErrorCode::WrongRegime, "scalar curvature is not constant", spread(S));
  }
  if (!(gamma < 0.0)) {
    throw Error(ErrorCode::WrongRegime, "constant scalar curvature is not negative", gamma);
  }
  return gamma;
}

StarResult check_star(const HermitianBackground& bg, const ScalarField& g) {
  require_same_grid(bg.grid(), g.grid());
  constant_curvature(bg);
  const double value = bg.integrate(g * eccentricity(bg));
  return {value, star_negative(bg, g, value)};
}

PositivityResult positivity_test(const HermitianBackground& bg, const ScalarField& g) {
  require_same_grid(bg.grid(), g.grid());
  const double gamma = constant_curvature(bg);
  const double k = 2.0 / bg.n();
  ScalarField psi = solve_chern_linear(bg, ScalarField(bg.grid(), -k * gamma), -k * g);
  const double lo = psi.min();
  return {std::move(psi), lo, lo > 0.0};
}

double c_upper_bound(const HermitianBackground& bg, const ScalarField& g) {
  require_same_grid(bg.grid(), g.grid());
  constant_curvature(bg);
  const double n = bg.n();
  const ScalarField f0 = eccentricity(bg);
  const double star = bg.integrate(g * f0);
  if (!star_negative(bg, g, star)) throw Error(ErrorCode::StarViolated, "integral of g f0 is not negative", star);
  const double m = star / bg.volume();

  const ScalarField phi =
      solve_chern_linear(bg, ScalarField(bg.grid()), (2.0 / n) * (-g + m), 1e-12);
  if (spread(phi) < 1e-9 * std::max(1.0, g.sup_norm())) {
    return -std::numeric_limits<double>::infinity();
  }
  const OneFormField dphi = gradient(phi);
  const double a = (-(n / m) * bg.metric_pairing(dphi, dphi) - phi).max();
  const double lo = (phi + a).min();
  // min(φ + a) = 0 whenever the max defining a sits on a critical point of φ.
  if (!(lo > 1e-12 * (std::abs(a) + phi.sup_norm()))) {
    return -std::numeric_limits<double>::infinity();
  }
  return m / (2.0 * lo);
}

Counterexample make_counterexample(const HermitianBackground& bg, const ScalarField& psi_prime) {
  require_same_grid(bg.grid(), psi_prime.grid());
  const double gamma = constant_curvature(bg);
  if (spread(psi_prime) < 1e-10) {
    throw Error(ErrorCode::ConstantInput, "psi' is constant", spread(psi_prime));
  }
  const double n = bg.n();
  const ScalarField f0 = eccentricity(bg);
  const double vol = bg.volume();
  ScalarField psi = psi_prime - bg.integrate(psi_prime * f0) / vol;
  const double a = -0.5 * psi.min();
  ScalarField cert = psi + a;
  ScalarField g = (n / 2.0) * (-chern_laplacian(bg, psi) + (2.0 / n) * gamma * cert);

  // Both postconditions are checked against independent computations.
  const double star = bg.integrate(g * f0);
  const double expect = gamma * a * vol;
  if (std::abs(star - expect) > 1e-9 * std::max(1.0, std::abs(expect))) {
    throw Error(ErrorCode::NoConvergence, "counterexample fails the integral identity",
                star - expect);
  }
  const auto solved = positivity_test(bg, g);
  const double err = (solved.psi - cert).sup_norm();
  if (err > 1e-7 * std::max(1.0, cert.sup_norm())) {
    throw Error(ErrorCode::NoConvergence, "certificate does not solve the positivity equation",
                err);
  }
  return {std::move(g), std::move(psi), a, std::move(cert)};
}

ScalarField scaling_transport(const ScalarField& u, double lambda, int n) {
  if (!(lambda > 0.0)) throw Error(ErrorCode::InvalidArgument, "lambda must be positive", lambda);
  return u - 0.5 * n * std::log(lambda);
}

ObstructionReport analyze(const HermitianBackground& bg, const ScalarField& g) {
  ObstructionReport r;
  r.gamma = constant_curvature(bg);
  const auto star = check_star(bg, g);
  r.star_value = star.value;
  r.star_pass = star.pass;
  const auto pos = positivity_test(bg, g);
  r.psi_min = pos.min;
  r.psi_pass = pos.pass;
  if (r.star_pass) r.c_upper = c_upper_bound(bg, g);

  if (!r.star_pass || !r.psi_pass) {
    r.verdict = Verdict::NotRealizable;
  } else if (g.max() <= 0.0 && g.min() < 0.0) {
    r.verdict = Verdict::TriviallyRealizable;
  } else {
    r.verdict = Verdict::Unknown;
  }
  return r;
}

}  // namespace pcsc::obstruction
