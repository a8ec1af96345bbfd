#include "pcsc/solve_zero.hpp"

#include "pcsc/calculus.hpp"
#include "pcsc/errors.hpp"
#include "pcsc/krylov.hpp"

#include <Eigen/Dense>

#include <cmath>

namespace pcsc::zero {

namespace {

double energy(const HermitianBackground& bg, const ScalarField& v) {
  const OneFormField dv = gradient(v);
  return 0.5 * bg.integrate(bg.metric_pairing(dv, dv));
}

ScalarField dv_mean_free(const HermitianBackground& bg, ScalarField f) {
  return f - bg.integrate(f) / bg.volume();
}

/// Bump Π (1 + cos 2π(x_k - x*_k))/2 peaked at the grid maximum of g.
ScalarField bump_at_max(const ScalarField& g) {
  Eigen::Index imax = 0;
  g.values().maxCoeff(&imax);
  const auto centre = g.grid().coords(std::size_t(imax));
  const double two_pi = 2.0 * std::acos(-1.0);
  return ScalarField::sample(g.grid(), [&](std::span<const double> x) {
    double p = 1.0;
    for (std::size_t k = 0; k < x.size(); ++k) p *= 0.5 * (1.0 + std::cos(two_pi * (x[k] - centre[k])));
    return p;
  });
}

/// Newton in s for ∫ g exp(2(w + sχ)/n) dV = 0.
bool restore(const HermitianBackground& bg, const ScalarField& g, const ScalarField& chi,
             ScalarField& w, double tol) {
  const double k = 2.0 / bg.n();
  double s = 0.0;
  for (int it = 0; it < 40; ++it) {
    const ScalarField e = g * (k * (w + s * chi)).exp();
    const double h = bg.integrate(e);
    if (std::abs(h) < tol) {
      w += s * chi;
      return true;
    }
    const double dh = k * bg.integrate(e * chi);
    if (!(std::abs(dh) > 1e-14)) return false;
    s -= h / dh;
    if (!std::isfinite(s) || std::abs(s) > 10.0) return false;
  }
  return false;
}

struct NewtonState {
  ScalarField v;
  double beta;
  double alpha;
};

/// Bordered Newton on Δ^Ch v = β g exp(2v/n) + α, ∫ g exp(2v/n) dV = 0,
/// ∫ v dV = 0. The v-rows are multiplied by m = exp(2U/n) so their principal
/// part is the flat Laplacian.
bool bordered_newton(const HermitianBackground& bg, const ScalarField& g, NewtonState& st,
                     const ZeroOptions& opts, int& iterations) {
  const TorusGrid& grid = bg.grid();
  const Eigen::Index N = Eigen::Index(grid.size());
  const double k = 2.0 / bg.n();
  const ScalarField m = ((2.0 / bg.n()) * bg.potential()).exp();
  const ScalarField dens = bg.volume_density();
  const double cell = grid.cell_volume();
  const double pi = std::acos(-1.0);
  const double kmax = pi * grid.points_per_axis();

  auto stationarity = [&](const NewtonState& s, const ScalarField& e) {
    return (chern_laplacian(bg, s.v) - s.beta * e - s.alpha).l2_norm();
  };
  auto merit = [&](const NewtonState& s) {
    const ScalarField e = g * (k * s.v).exp();
    return stationarity(s, e) + std::abs(bg.integrate(e)) + std::abs(bg.integrate(s.v));
  };

  double current = merit(st);
  for (int it = 0; it < opts.newton_max; ++it) {
    const ScalarField e = g * (k * st.v).exp();
    const double c2 = bg.integrate(e);
    const double c3 = bg.integrate(st.v);
    if (stationarity(st, e) < opts.stationarity_tol && std::abs(c2) < opts.constraint_tol &&
        std::abs(c3) < opts.constraint_tol) {
      return true;
    }
    ++iterations;
    const ScalarField mL = m * (chern_laplacian(bg, st.v) - st.beta * e - st.alpha);
    const ScalarField react = m * (k * st.beta) * e;
    const ScalarField me = m * e;
    const Eigen::VectorXd rho = (k * cell) * (e * dens).values();
    const Eigen::VectorXd sigma = cell * dens.values();

    LinearMap J = [&](const Eigen::VectorXd& z) {
      Eigen::VectorXd out(N + 2);
      const ScalarField x(grid, z.head(N));
      ScalarField top = laplacian_flat(x) + pairing(gradient(x), bg.theta0()) - react * x -
                        z[N] * me - z[N + 1] * m;
      out.head(N) = top.values();
      out[N] = rho.dot(z.head(N));
      out[N + 1] = sigma.dot(z.head(N));
      return out;
    };
    const ScalarField y_e = inverse_laplacian_flat(me);
    const double me_mean = me.mean();
    Eigen::Matrix2d S;
    S << rho.dot(y_e.values()), rho.sum(), sigma.dot(y_e.values()), sigma.sum();
    const Eigen::FullPivLU<Eigen::Matrix2d> S_lu(S);
    LinearMap P = [&](const Eigen::VectorXd& z) {
      const ScalarField r(grid, z.head(N));
      const ScalarField y_r = inverse_laplacian_flat(r);
      Eigen::Vector2d rhs(z[N] - rho.dot(y_r.values()), z[N + 1] - sigma.dot(y_r.values()));
      Eigen::Vector2d bc = S_lu.isInvertible() ? Eigen::Vector2d(S_lu.solve(rhs)) : Eigen::Vector2d::Zero();
      Eigen::VectorXd out(N + 2);
      out.head(N) = (y_r + bc[0] * y_e + bc[1]).values();
      out[N] = bc[0];
      out[N + 1] = -r.mean() - bc[0] * me_mean;
      return out;
    };
    Eigen::VectorXd rhs(N + 2);
    rhs.head(N) = -mL.values();
    rhs[N] = -c2;
    rhs[N + 1] = -c3;
    const double op_norm = grid.dim() * kmax * kmax + kmax * 2.0 * bg.theta0().sup_norm() +
                           react.sup_norm() + me.sup_norm() + m.sup_norm();
    const auto res = gmres(J, P, rhs, 1e-12, 80, 1600, op_norm);
    if (!res.converged || !res.x.allFinite()) return false;

    NewtonState next{st.v + ScalarField(grid, res.x.head(N)), st.beta + res.x[N],
                     st.alpha + res.x[N + 1]};
    const double trial = merit(next);
    if (!std::isfinite(trial) || trial > 2.0 * current) return false;
    st = std::move(next);
    current = trial;
  }
  return false;
}

}  // namespace

bool check_hypotheses(const HermitianBackground& bg, const ScalarField& g) {
  require_same_grid(bg.grid(), g.grid());
  if (!is_balanced(bg)) throw Error(ErrorCode::WrongRegime, "background is not balanced");
  const double S = scalar_curvature(bg).sup_norm();
  if (!(S < 1e-8)) throw Error(ErrorCode::WrongRegime, "scalar curvature does not vanish", S);
  return g.min() < 0.0 && g.max() > 0.0 && bg.integrate(g) < -1e-12;
}

ScalarField initial_feasible(const HermitianBackground& bg, const ScalarField& g) {
  if (!check_hypotheses(bg, g)) {
    throw Error(ErrorCode::InvalidArgument, "g must change sign and have negative integral");
  }
  const double k = 2.0 / bg.n();
  const ScalarField chi = bump_at_max(g);
  auto H = [&](double s) { return bg.integrate(g * (k * s * chi).exp()); };

  double lo = 0.0;
  double hi = 1.0;
  while (H(hi) <= 0.0) {
    lo = hi;
    hi *= 2.0;
    if (hi > 64.0) throw Error(ErrorCode::BisectionFailed, "no sign change for s <= 64", H(64.0));
  }
  for (int it = 0; it < 200 && hi - lo > 1e-16 * hi; ++it) {
    const double mid = 0.5 * (lo + hi);
    (H(mid) > 0.0 ? hi : lo) = mid;
  }
  // One Newton polish from the bracket midpoint.
  double s = 0.5 * (lo + hi);
  const double slope = k * bg.integrate(g * chi * (k * s * chi).exp());
  if (slope > 0.0) {
    const double s_new = s - H(s) / slope;
    if (s_new >= lo && s_new <= hi) s = s_new;
  }
  ScalarField phi = dv_mean_free(bg, s * chi);
  const double residual = bg.integrate(g * (k * phi).exp());
  if (!(std::abs(residual) < 1e-10)) {
    throw Error(ErrorCode::BisectionFailed, "bisection did not reach the constraint", residual);
  }
  return phi;
}

VariationalState minimize_energy(const HermitianBackground& bg, const ScalarField& g,
                                 const ScalarField& phi0, const ZeroOptions& opts) {
  check_hypotheses(bg, g);
  require_same_grid(bg.grid(), phi0.grid());
  const double k = 2.0 / bg.n();
  const double vol = bg.volume();
  const double ctol = opts.constraint_tol * std::max(1.0, bg.integrate(g.map([](double x) {
    return std::abs(x);
  })));
  const ScalarField chi = dv_mean_free(bg, bump_at_max(g));
  const ScalarField zero(bg.grid());

  VariationalState st{.v = dv_mean_free(bg, phi0)};
  if (!restore(bg, g, chi, st.v, ctol)) {
    throw Error(ErrorCode::LineSearchFailed, "initial point cannot be made feasible");
  }
  st.energy = energy(bg, st.v);
  st.energy_trace.push_back(st.energy);

  bool newton_tried = false;
  bool done = false;
  double tau = 1.0;
  double beta = 0.0;
  double alpha = 0.0;
  for (int it = 0; it < opts.max_iters && !done; ++it) {
    const ScalarField a = k * g * (k * st.v).exp();
    const ScalarField r = dv_mean_free(bg, solve_chern_linear(bg, zero, a - bg.integrate(a) / vol, 1e-12));
    const double t = bg.integrate(st.v * a) / bg.integrate(r * a);
    const ScalarField D = t * r - st.v;
    const ScalarField LD = chern_laplacian(bg, D);
    beta = k * t;
    alpha = -t * bg.integrate(a) / vol;
    st.stationarity = LD.l2_norm();
    if (st.stationarity < opts.stationarity_tol) {
      done = true;
      break;
    }
    if (st.stationarity < opts.newton_switch && !newton_tried) {
      newton_tried = true;
      NewtonState ns{st.v, beta, alpha};
      if (bordered_newton(bg, g, ns, opts, st.newton_iterations)) {
        st.v = std::move(ns.v);
        beta = ns.beta;
        alpha = ns.alpha;
        done = true;
        break;
      }
    }

    const double slope = -bg.integrate(D * LD);
    bool accepted = false;
    for (int ls = 0; ls < 50; ++ls, tau *= 0.5) {
      ScalarField w = st.v + tau * D;
      if (!restore(bg, g, chi, w, ctol)) continue;
      const double E = energy(bg, w);
      if (E <= st.energy + 1e-4 * tau * slope) {
        st.v = std::move(w);
        st.energy = E;
        st.energy_trace.push_back(E);
        accepted = true;
        break;
      }
    }
    if (!accepted) throw Error(ErrorCode::LineSearchFailed, "Armijo backtracking exhausted", st.stationarity);
    tau = std::min(1.0, 2.0 * tau);
    ++st.iterations;
  }
  if (!done) throw Error(ErrorCode::MaxIters, "energy minimisation did not converge", st.stationarity);

  const ScalarField e = g * (k * st.v).exp();
  st.energy = energy(bg, st.v);
  st.energy_trace.push_back(st.energy);
  st.constraint_residual = std::max(std::abs(bg.integrate(e)), std::abs(bg.integrate(st.v)));
  // The multiplier of the discrete iteration; the integrated form
  // ∫e^{-kv}|dv|² / ∫g agrees only when the product rule is resolved.
  st.lambda = -beta / k;
  st.mu = alpha;
  st.stationarity = (chern_laplacian(bg, st.v) - (-k * st.lambda) * e - alpha).l2_norm();
  st.gamma = st.lambda < 0.0 ? 0.5 * bg.n() * std::log(-k * st.lambda) : 0.0;
  return st;
}

ScalarField recover_solution(const VariationalState& state, int n) {
  if (!(state.lambda < 0.0)) {
    throw Error(ErrorCode::NonNegativeMultiplier, "multiplier lambda is not negative", state.lambda);
  }
  return state.v + 0.5 * n * std::log(-2.0 * state.lambda / n);
}

ZeroSolution solve_zero(const HermitianBackground& bg, const ScalarField& g,
                        const ZeroOptions& opts) {
  auto state = minimize_energy(bg, g, initial_feasible(bg, g), opts);
  ScalarField u = recover_solution(state, bg.n());
  const double res = prescribed_residual(bg, g, u);
  return {std::move(state), std::move(u), res};
}

}  // namespace pcsc::zero
