#include "pcsc/solve_negative.hpp"

#include "pcsc/errors.hpp"
#include "pcsc/obstructions.hpp"

#include <algorithm>
#include <cmath>

namespace pcsc::negative {

namespace {

constexpr double kBlowup = 60.0;

/// Δ^Ch u + S - g·exp(2u/n): ≤ 0 for subsolutions, ≥ 0 for supersolutions.
ScalarField equation(const HermitianBackground& bg, const ScalarField& S, const ScalarField& g,
                     const ScalarField& u) {
  return chern_laplacian(bg, u) + S - g * ((2.0 / bg.n()) * u).exp();
}

struct NewtonOutcome {
  bool converged = false;
  int iterations = 0;
};

/// Newton on Δ^Ch u + source - g·exp(2u/n) = 0 in place. The stopping test
/// uses exp(-2u/n)·G, which at source = S is the prescribed-curvature residual.
NewtonOutcome newton(const HermitianBackground& bg, const ScalarField& source, const ScalarField& g,
                     ScalarField& u, const SolveOptions& opts) {
  const double k = 2.0 / bg.n();
  auto merit = [&](const ScalarField& v, const ScalarField& G) {
    return ((-k * v).exp() * G).sup_norm();
  };
  auto residual = [&](const ScalarField& v) {
    return chern_laplacian(bg, v) + source - g * (k * v).exp();
  };

  ScalarField G = residual(u);
  double r = merit(u, G);
  NewtonOutcome out;
  for (int it = 0; it < opts.newton_max; ++it) {
    if (r < opts.newton_tol) {
      out.converged = true;
      return out;
    }
    ++out.iterations;
    const ScalarField c = -k * g * (k * u).exp();
    ScalarField step(bg.grid());
    try {
      LinearSolveOptions lin;
      lin.tol = 1e-12;
      step = solve_chern_general(bg, c, -G, lin);
    } catch (const Error& e) {
      if (e.code() == ErrorCode::SingularOperator) {
        throw Error(ErrorCode::JacobianSingular, "Newton Jacobian is singular", e.value());
      }
      return out;
    }
    // Backtracking on the sup-norm merit.
    double lambda = 1.0;
    bool accepted = false;
    for (int ls = 0; ls < 30; ++ls, lambda *= 0.5) {
      ScalarField trial = u + lambda * step;
      if (!trial.all_finite() || trial.sup_norm() > kBlowup) continue;
      ScalarField Gt = residual(trial);
      const double rt = merit(trial, Gt);
      if (std::isfinite(rt) && rt < (1.0 - 1e-4 * lambda) * r) {
        u = std::move(trial);
        G = std::move(Gt);
        r = rt;
        accepted = true;
        break;
      }
    }
    if (!accepted) return out;
  }
  out.converged = r < opts.newton_tol;
  return out;
}

/// Continuation from u = 0 at t = 0, where S itself is the target.
Solution continuation(const HermitianBackground& bg, const ScalarField& g,
                      const SolveOptions& opts) {
  const ScalarField S = scalar_curvature(bg);
  Solution sol{ScalarField(bg.grid()), 0.0, 0, {}};
  const double dt_nominal = 1.0 / opts.t_steps;
  double t = 0.0;
  while (t < 1.0) {
    bool advanced = false;
    double dt = std::min(dt_nominal, 1.0 - t);
    for (int halving = 0; halving <= 3 && !advanced; ++halving, dt *= 0.5) {
      const double t_next = (1.0 - t - dt < 1e-14) ? 1.0 : t + dt;
      ScalarField u = sol.u;
      const ScalarField source = t_next * S + (1.0 - t_next) * g;
      const auto step = newton(bg, source, g, u, opts);
      sol.iterations += step.iterations;
      if (step.converged) {
        sol.u = std::move(u);
        t = t_next;
        sol.trace.push_back(t);
        advanced = true;
      }
    }
    if (!advanced) {
      throw Error(ErrorCode::NewtonDiverged, "continuation stalled; t reported as value",
                  std::min(1.0, t + std::min(dt_nominal, 1.0 - t)));
    }
  }
  sol.residual = prescribed_residual(bg, g, sol.u);
  return sol;
}

void require_sign_class(const ScalarField& g) {
  if (g.max() > 0.0) throw Error(ErrorCode::WrongSignClass, "g has a positive value", g.max());
  if (g.sup_norm() == 0.0) throw Error(ErrorCode::WrongSignClass, "g vanishes identically");
}

}  // namespace

void SolveOptions::validate() const {
  if (t_steps < 1 || newton_max < 1 || monotone_max < 1) {
    throw Error(ErrorCode::InvalidArgument, "iteration counts must be positive");
  }
  if (!(newton_tol > 0.0) || !(monotone_tol > 0.0)) {
    throw Error(ErrorCode::InvalidArgument, "tolerances must be positive");
  }
  if (!(K_safety > 1.0)) throw Error(ErrorCode::InvalidArgument, "K_safety must exceed 1", K_safety);
}

YamabeResult yamabe_normalize(const HermitianBackground& bg, const SolveOptions& opts) {
  opts.validate();
  auto gn = gauduchon_normalize(bg);
  const HermitianBackground& eta = gn.background;
  const double gamma = eta.integrate(scalar_curvature(eta));
  if (!(gamma < 0.0)) throw Error(ErrorCode::WrongRegime, "Gauduchon degree is not negative", gamma);

  SolveOptions tight = opts;
  tight.newton_tol = std::min(opts.newton_tol, 1e-9);
  const Solution sol = continuation(eta, ScalarField(bg.grid(), gamma), tight);
  ScalarField exponent = gn.exponent + sol.u;
  HermitianBackground out = conformal_change(bg, exponent);
  const double dev = (scalar_curvature(out) - gamma).sup_norm();
  if (dev > 1e-7) throw Error(ErrorCode::NoConvergence, "normalised curvature not constant", dev);
  return {std::move(out), std::move(exponent), gamma};
}

Solution continuity_solve(const HermitianBackground& bg_const, const ScalarField& g,
                          const SolveOptions& opts) {
  opts.validate();
  require_same_grid(bg_const.grid(), g.grid());
  const double gamma = obstruction::constant_curvature(bg_const);
  Solution sol = continuation(bg_const, g, opts);

  if (g.max() < 0.0) {
    // Maximum principle along the path: exp(2u/n) stays within these limits.
    const double hi = (-gamma - g.min()) / (-g.max());
    const double lo = std::min(-gamma, -g.max()) / (-g.min());
    const double e_max = std::exp(2.0 / bg_const.n() * sol.u.max());
    const double e_min = std::exp(2.0 / bg_const.n() * sol.u.min());
    if (e_max > hi * (1 + 1e-6) || e_min < lo * (1 - 1e-6)) {
      throw Error(ErrorCode::NoConvergence, "solution violates the a-priori sup/inf bounds",
                  e_max);
    }
  }
  return sol;
}

double build_subsolution(const HermitianBackground& bg_const, const ScalarField& g) {
  require_same_grid(bg_const.grid(), g.grid());
  const double gamma = obstruction::constant_curvature(bg_const);
  if (!(g.min() < 0.0)) throw Error(ErrorCode::NoNegativePart, "min g is not negative", g.min());
  const double u_minus = 0.5 * bg_const.n() * std::log(gamma / g.min());
  const ScalarField E =
      equation(bg_const, scalar_curvature(bg_const), g, ScalarField(g.grid(), u_minus));
  if (E.max() > 1e-9 * (std::abs(gamma) + g.sup_norm())) {
    throw Error(ErrorCode::NoConvergence, "subsolution inequality fails", E.max());
  }
  return u_minus;
}

Supersolution build_supersolution(const HermitianBackground& bg_const, const ScalarField& g) {
  require_same_grid(bg_const.grid(), g.grid());
  const double gamma = obstruction::constant_curvature(bg_const);
  require_sign_class(g);
  const double n = bg_const.n();
  const double vol = bg_const.volume();
  const double star = bg_const.integrate(g * eccentricity(bg_const));
  ScalarField phi = solve_chern_linear(bg_const, ScalarField(g.grid()), g - star / vol, 1e-12);

  const double k1 = 1.01 * vol * gamma / star;
  const double k2_bound = (0.5 * n * std::log(k1) - k1 * phi).max();
  const double k2 = k2_bound + 0.01 * std::max(std::abs(k2_bound), 1.0);
  ScalarField u = k1 * phi + k2;

  const ScalarField E = equation(bg_const, scalar_curvature(bg_const), g, u);
  if (E.min() < -1e-9 * (std::abs(gamma) + g.sup_norm())) {
    throw Error(ErrorCode::NoConvergence, "supersolution inequality fails", E.min());
  }
  return {std::move(u), std::move(phi), k1, k2};
}

Solution monotone_solve(const HermitianBackground& bg_const, const ScalarField& g,
                        const ScalarField& u_minus, const ScalarField& u_plus,
                        const SolveOptions& opts) {
  opts.validate();
  require_same_grid(bg_const.grid(), g.grid());
  obstruction::constant_curvature(bg_const);
  const double slack = 1e-10 * std::max(1.0, std::max(u_minus.sup_norm(), u_plus.sup_norm()));
  if ((u_plus - u_minus).min() < -slack) {
    throw Error(ErrorCode::OrderingViolated, "u_minus exceeds u_plus", (u_plus - u_minus).min());
  }
  const ScalarField S = scalar_curvature(bg_const);
  const double scale = S.sup_norm() + g.sup_norm();
  if (equation(bg_const, S, g, u_minus).max() > 1e-8 * scale) {
    throw Error(ErrorCode::OrderingViolated, "u_minus is not a subsolution");
  }
  if (equation(bg_const, S, g, u_plus).min() < -1e-8 * scale) {
    throw Error(ErrorCode::OrderingViolated, "u_plus is not a supersolution");
  }

  const double k = 2.0 / bg_const.n();
  const double K = std::max(opts.K_safety * k * g.sup_norm() * std::exp(k * u_plus.max()), 1e-3);
  const ScalarField Kc(g.grid(), K);

  Solution sol{u_minus, 0.0, 0, {}};
  for (int it = 0; it < opts.monotone_max; ++it) {
    sol.residual = prescribed_residual(bg_const, g, sol.u);
    sol.trace.push_back(sol.residual);
    if (sol.residual < opts.monotone_tol) return sol;
    const ScalarField rhs = g * (k * sol.u).exp() - S + K * sol.u;
    ScalarField next = solve_chern_linear(bg_const, Kc, rhs, 1e-13);
    const double tol = 1e-10 * std::max(1.0, next.sup_norm());
    if ((next - sol.u).min() < -tol) {
      throw Error(ErrorCode::OrderingViolated, "iterates decreased", (next - sol.u).min());
    }
    if ((u_plus - next).min() < -tol) {
      throw Error(ErrorCode::OrderingViolated, "iterate exceeded u_plus", (u_plus - next).min());
    }
    sol.min_increment = sol.iterations == 0 ? (next - sol.u).min()
                                            : std::min(sol.min_increment, (next - sol.u).min());
    sol.u = std::move(next);
    ++sol.iterations;
  }
  throw Error(ErrorCode::MaxIters, "monotone iteration did not converge", sol.residual);
}

Solution solve_nonpositive(const HermitianBackground& bg, const ScalarField& g,
                           const SolveOptions& opts) {
  opts.validate();
  require_same_grid(bg.grid(), g.grid());
  require_sign_class(g);
  const auto y = yamabe_normalize(bg, opts);
  auto sup = build_supersolution(y.background, g);
  const double sub = build_subsolution(y.background, g);
  // Raising u₊ by a constant keeps it a supersolution when g ≤ 0.
  if (sup.u.min() < sub) sup.u += sub - sup.u.min();

  Solution sol = monotone_solve(y.background, g, ScalarField(g.grid(), sub), sup.u, opts);
  sol.u += y.exponent;
  sol.residual = prescribed_residual(bg, g, sol.u);
  if (!(sol.residual < 1e-6)) {
    throw Error(ErrorCode::NoConvergence, "end-to-end residual too large", sol.residual);
  }
  return sol;
}

}  // namespace pcsc::negative
