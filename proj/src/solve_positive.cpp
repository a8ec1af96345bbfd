#include "pcsc/solve_positive.hpp"

#include "pcsc/errors.hpp"

#include <cmath>
#include <limits>

namespace pcsc::positive {

namespace {

void require_positive_gauduchon(const HermitianBackground& bg) {
  if (!is_gauduchon(bg)) throw Error(ErrorCode::WrongRegime, "background is not Gauduchon");
  if (std::abs(bg.volume() - 1.0) > 1e-8) {
    throw Error(ErrorCode::WrongRegime, "background does not have unit volume", bg.volume());
  }
  const double gamma = bg.integrate(scalar_curvature(bg));
  if (!(gamma > 0.0)) throw Error(ErrorCode::WrongRegime, "Gauduchon degree is not positive", gamma);
}

}  // namespace

LocalSolution local_solve(const HermitianBackground& bg, const ScalarField& g,
                          const LocalOptions& opts, const std::optional<ScalarField>& S_in) {
  require_same_grid(bg.grid(), g.grid());
  require_positive_gauduchon(bg);
  if (g.max() <= 0.0 && g.min() < 0.0) {
    throw Error(ErrorCode::WrongRegime, "g must be positive somewhere", g.max());
  }
  const TorusGrid& grid = bg.grid();
  const ScalarField S = S_in ? *S_in : scalar_curvature(bg);
  require_same_grid(grid, S.grid());
  const double k = 2.0 / bg.n();
  const ScalarField m = (k * bg.potential()).exp();
  const ScalarField one(grid, 1.0);

  auto residual = [&](const ScalarField& u) {
    return chern_laplacian(bg, u) + S - g * (k * u).exp();
  };
  auto merit = [&](const ScalarField& u, const ScalarField& F) {
    return ((-k * u).exp() * F).sup_norm();
  };

  LocalSolution sol{ScalarField(grid), 0, 0.0};
  ScalarField F = residual(sol.u);
  sol.residual = merit(sol.u, F);
  LinearSolveOptions lin;
  lin.tol = 1e-12;
  while (sol.residual >= opts.tol) {
    if (sol.iterations >= opts.newton_max) {
      throw Error(ErrorCode::NewtonDiverged, "Newton iteration limit reached", sol.residual);
    }
    ++sol.iterations;
    const ScalarField c = -k * g * (k * sol.u).exp();
    // Rows scaled by m so the bordered preconditioner sees the flat Laplacian.
    LinearMap op = [&](const Eigen::VectorXd& x) {
      const ScalarField f(grid, x);
      return (m * (chern_laplacian(bg, f) + c * f)).values();
    };
    BorderedSolution a{ScalarField(grid), 0.0};
    BorderedSolution b{ScalarField(grid), 0.0};
    try {
      a = solve_bordered(grid, op, -1.0 * (m * F), 0.0, lin);
      b = solve_bordered(grid, op, -1.0 * (m * c), 0.0, lin);
    } catch (const Error& e) {
      throw Error(ErrorCode::NewtonDiverged, std::string("bordered solve failed: ") + e.what());
    }
    // J(x_a + δc(1 + x_b)) = -F - (s_a + δc s_b)/m; choose δc to cancel.
    if (!(std::abs(b.multiplier) > 1e-14 * std::max(1.0, std::abs(a.multiplier)))) {
      throw Error(ErrorCode::NewtonDiverged, "constant mode is degenerate", b.multiplier);
    }
    const double dc = -a.multiplier / b.multiplier;
    const ScalarField step = a.u + dc * (one + b.u);

    bool accepted = false;
    for (double lambda = 1.0; lambda > 1e-6; lambda *= 0.5) {
      ScalarField trial = sol.u + lambda * step;
      if (!trial.all_finite()) continue;
      ScalarField Ft = residual(trial);
      const double r = merit(trial, Ft);
      if (std::isfinite(r) && r < (1.0 - 1e-4 * lambda) * sol.residual) {
        sol.u = std::move(trial);
        F = std::move(Ft);
        sol.residual = r;
        accepted = true;
        break;
      }
    }
    if (!accepted) throw Error(ErrorCode::NewtonDiverged, "line search failed", sol.residual);
    if (sol.u.sup_norm() > opts.radius) {
      throw Error(ErrorCode::NewtonDiverged, "iterate left the local neighbourhood",
                  sol.u.sup_norm());
    }
  }
  return sol;
}

ProbeResult neighborhood_probe(const HermitianBackground& bg, const ScalarField& g_dir,
                               const ScalarField& S_dir, const LocalOptions& opts) {
  require_same_grid(bg.grid(), g_dir.grid());
  require_positive_gauduchon(bg);
  if (!(g_dir.max() > 0.0)) throw Error(ErrorCode::WrongRegime, "g direction is nowhere positive");

  ProbeResult out{0.0, {}, {}, {}};
  bool failed = false;
  for (int j = 20; j >= -4; --j) {
    const double eps = std::ldexp(1.0, -j);
    out.scales.push_back(eps);
    try {
      const auto sol = local_solve(bg, eps * g_dir, opts, eps * S_dir);
      out.converged.push_back(true);
      out.sup_u.push_back(sol.u.sup_norm());
      if (!failed) out.epsilon = eps;
    } catch (const Error& e) {
      if (e.code() == ErrorCode::WrongRegime) throw;
      out.converged.push_back(false);
      out.sup_u.push_back(std::numeric_limits<double>::quiet_NaN());
      failed = true;
    }
  }
  return out;
}

}  // namespace pcsc::positive
