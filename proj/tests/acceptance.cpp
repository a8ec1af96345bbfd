// Acceptance run: one PASS/FAIL line per criterion, nonzero exit if any fail.

#include "pcsc/calculus.hpp"
#include "pcsc/cli.hpp"
#include "pcsc/errors.hpp"
#include "pcsc/hermitian.hpp"
#include "pcsc/krylov.hpp"
#include "pcsc/obstructions.hpp"
#include "pcsc/solve_negative.hpp"
#include "pcsc/solve_positive.hpp"
#include "pcsc/solve_zero.hpp"
#include "support.hpp"

#include <Eigen/Dense>

#include <sys/wait.h>

#include <chrono>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <functional>
#include <iostream>
#include <map>
#include <sstream>
#include <string>

using namespace pcsc;
using namespace pcsc::testing;
namespace fs = std::filesystem;
namespace ob = pcsc::obstruction;
namespace ng = pcsc::negative;

namespace {

struct Outcome {
  bool pass = true;
  std::string detail;
};

/// Accumulates a criterion's checks; the first failing one is reported.
class Tally {
 public:
  void check(bool ok, const std::string& what) {
    if (!ok && pass_) {
      pass_ = false;
      failure_ = what;
    }
  }
  void note(const std::string& s) { notes_ += (notes_.empty() ? "" : ", ") + s; }
  Outcome outcome() const { return {pass_, pass_ ? notes_ : "failed: " + failure_ + " [" + notes_ + "]"}; }

 private:
  bool pass_ = true;
  std::string failure_;
  std::string notes_;
};

std::string sci(double x) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.2e", x);
  return buf;
}

HermitianBackground random_background(const TorusGrid& grid, std::mt19937_64& rng, bool torsion,
                                      bool potential) {
  OneFormField theta = torsion ? random_one_form(grid, rng, 3, 2, 0.6) : OneFormField(grid);
  auto S0 = random_field(grid, rng, 3, 2, 0.5) - 1.0;
  std::optional<ScalarField> U;
  if (potential) U = random_field(grid, rng, 3, 2, 0.3);
  return HermitianBackground(std::move(theta), std::move(S0), std::move(U));
}

HermitianBackground twisted(const TorusGrid& grid, double gamma) {
  OneFormField theta(grid);
  theta[0] = sin_mode(grid, 0, 1, 0.4) + cos_mode(grid, 1, 1, 0.2);
  theta[1] = cos_mode(grid, 0, 1, 0.3);
  return HermitianBackground(theta, ScalarField(grid, gamma));
}

HermitianBackground balanced(const TorusGrid& grid, const ScalarField& U) {
  const double n = grid.complex_dim();
  OneFormField theta = (-2.0 * (n - 1) / n) * gradient(U);
  ScalarField S0 = -1.0 * (laplacian_flat(U) + pairing(gradient(U), theta));
  return HermitianBackground(theta, S0, U);
}

HermitianBackground positive_gauduchon(const TorusGrid& grid) {
  OneFormField theta(grid);
  theta[0] = sin_mode(grid, 0, 1, 0.3);
  theta[1] = cos_mode(grid, 0, 1, 0.2) + sin_mode(grid, 1, 1, 0.2);
  return gauduchon_normalize(HermitianBackground(theta, cos_mode(grid, 1, 1, 0.5) + 2.0)).background;
}

/// g such that u* solves the prescribed problem on bg.
ScalarField manufactured(const HermitianBackground& bg, const ScalarField& ustar) {
  return (-2.0 / bg.n() * ustar).exp() * (chern_laplacian(bg, ustar) + scalar_curvature(bg));
}

Eigen::VectorXd dense_null_vector(const Eigen::MatrixXd& A, Tally& t) {
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(A, Eigen::ComputeFullV);
  const auto& s = svd.singularValues();
  const Eigen::Index last = s.size() - 1;
  t.check(s[last] < 1e-10 * s[0] && s[last - 1] > 1e-6 * s[0], "dense kernel is one-dimensional");
  return svd.matrixV().col(last);
}

/// Converged solutions from every regime, collected for the closure check.
struct Converged {
  std::string label;
  HermitianBackground bg;
  ScalarField g;
  ScalarField u;
};
std::vector<Converged> g_converged;

void record(const std::string& label, const HermitianBackground& bg, const ScalarField& g,
            const ScalarField& u) {
  g_converged.push_back({label, bg, g, u});
}

// ---------------------------------------------------------------------------

Outcome operator_identities() {
  Tally t;
  std::mt19937_64 rng(101);
  double adj = 0.0, f4 = 0.0;
  for (bool torsion : {false, true}) {
    for (int trial = 0; trial < 10; ++trial) {
      const TorusGrid grid(2, 64, 2 + trial % 2);
      const auto bg = random_background(grid, rng, torsion, trial % 3 == 0);
      const auto a = random_field(grid, rng, 4, 3);
      const auto b = random_field(grid, rng, 4, 3);
      const double lhs = bg.integrate(chern_laplacian(bg, a) * b);
      const double rhs = bg.integrate(a * chern_adjoint(bg, b));
      const double rel = std::abs(lhs - rhs) / (std::abs(lhs) + a.l2_norm() * b.l2_norm());
      adj = std::max(adj, rel);
      t.check(rel < 1e-8, "adjointness");
      const double res = formula4_residual(bg, random_field(grid, rng, 4, 2, 0.4));
      f4 = std::max(f4, res);
      t.check(res < 1e-8, "formula residual");
    }
  }
  t.note("20 fields, max adjoint defect " + sci(adj) + ", max formula residual " + sci(f4));
  return t.outcome();
}

Outcome eccentricity_checks() {
  Tally t;
  const TorusGrid grid(2, 32, 2);
  std::mt19937_64 rng(102);
  double min_f0 = 1e300;
  int iff_cases = 0;
  for (int trial = 0; trial < 10; ++trial) {
    const auto bg = random_background(grid, rng, true, trial % 2 == 1);
    const auto f0 = eccentricity(bg);
    min_f0 = std::min(min_f0, f0.min());
    t.check(f0.min() > 0.0, "positivity");
    const bool div_free = torsion_codifferential(bg).sup_norm() < 1e-8;
    t.check(div_free == ((f0 - 1.0).sup_norm() < 1e-7), "f0 = 1 iff divergence-free (random)");
    ++iff_cases;
  }
  // Divergence-free torsion: θ_k independent of x_k.
  for (int trial = 0; trial < 5; ++trial) {
    OneFormField theta(grid);
    theta[0] = sin_mode(grid, 1, 1 + trial % 3, 0.2 + 0.1 * trial);
    theta[1] = cos_mode(grid, 0, 1 + trial % 2, 0.3);
    const HermitianBackground bg(theta, random_field(grid, rng, 3, 2, 0.5) - 1.0);
    const auto f0 = eccentricity(bg);
    const bool div_free = torsion_codifferential(bg).sup_norm() < 1e-8;
    t.check(div_free && (f0 - 1.0).sup_norm() < 1e-7, "f0 = 1 iff divergence-free (constructed)");
    ++iff_cases;
  }

  const TorusGrid small(2, 8, 2);
  OneFormField theta(small);
  theta[0] = sin_mode(small, 0, 1, 0.4);
  const HermitianBackground bg(theta, ScalarField(small, -1.0));
  LinearMap adjoint = [&](const Eigen::VectorXd& x) {
    return chern_adjoint(bg, ScalarField(small, x)).values();
  };
  ScalarField oracle(small, dense_null_vector(assemble_dense(adjoint, Eigen::Index(small.size())), t));
  oracle *= bg.volume() / bg.integrate(oracle);
  const double dense_err = (eccentricity(bg) - oracle).sup_norm();
  t.check(dense_err < 1e-8, "dense oracle");
  t.note("min f0 " + sci(min_f0) + ", " + std::to_string(iff_cases) + " iff cases, dense oracle error " +
         sci(dense_err));
  return t.outcome();
}

Outcome gauduchon_degree_checks() {
  Tally t;
  const TorusGrid grid(2, 32, 2);
  std::mt19937_64 rng(103);
  const auto base = random_background(grid, rng, true, true);
  const double gamma = gauduchon_degree(base);
  double worst = 0.0;
  for (int trial = 0; trial < 10; ++trial) {
    const auto u = random_field(grid, rng, 3, 2, 0.5);
    const double rel = std::abs(gauduchon_degree(conformal_change(base, u)) - gamma) / std::abs(gamma);
    worst = std::max(worst, rel);
    t.check(rel < 1e-6, "invariance");
  }
  double vol_err = 0.0, ecc_err = 0.0;
  for (int trial = 0; trial < 5; ++trial) {
    const auto res = gauduchon_normalize(random_background(grid, rng, true, trial % 2 == 0));
    t.check(is_gauduchon(res.background, 1e-8), "is_gauduchon");
    vol_err = std::max(vol_err, std::abs(res.background.volume() - 1.0));
    ecc_err = std::max(ecc_err, (eccentricity(res.background) - 1.0).sup_norm());
  }
  t.check(vol_err < 1e-10, "unit volume");
  t.check(ecc_err < 1e-7, "eccentricity = 1");
  t.note("gamma " + sci(gamma) + ", max relative drift " + sci(worst) + ", volume error " + sci(vol_err) +
         ", eccentricity error " + sci(ecc_err));
  return t.outcome();
}

Outcome negative_existence() {
  Tally t;
  ng::SolveOptions opts;
  opts.newton_tol = 1e-10;
  opts.monotone_tol = 1e-10;
  std::mt19937_64 rng(104);
  double rec_c = 0.0, rec_m = 0.0, cross = 0.0, uniq = 0.0, min_inc = 1e300;
  for (int n : {2, 3}) {
    const TorusGrid grid(2, 32, n);
    const auto tw = twisted(grid, -6.0);
    for (int trial = 0; trial < 2; ++trial) {
      const auto ustar = random_field(grid, rng, 3, 1, 0.03);
      const auto g = manufactured(tw, ustar);
      t.check(g.max() < 0.0, "manufactured g is negative");
      const auto cont = ng::continuity_solve(tw, g, opts);
      const auto sup = ng::build_supersolution(tw, g);
      const double sub = ng::build_subsolution(tw, g);
      auto up = sup.u;
      if (up.min() < sub) up += sub - up.min();
      const auto mono = ng::monotone_solve(tw, g, ScalarField(grid, sub), up, opts);
      rec_c = std::max(rec_c, (cont.u - ustar).sup_norm());
      rec_m = std::max(rec_m, (mono.u - ustar).sup_norm());
      cross = std::max(cross, (cont.u - mono.u).sup_norm());
      min_inc = std::min(min_inc, mono.min_increment);
      record("negative continuity", tw, g, cont.u);
      record("negative monotone", tw, g, mono.u);

      // Three brackets, one fixed point.
      const auto wide = ng::monotone_solve(tw, g, ScalarField(grid, sub - 0.5), up + 0.5, opts);
      const auto nonpos = ng::solve_nonpositive(tw, g, opts);
      uniq = std::max({uniq, (wide.u - mono.u).sup_norm(), (nonpos.u - mono.u).sup_norm()});
      min_inc = std::min(min_inc, wide.min_increment);
    }
  }
  t.check(rec_c < 1e-6, "continuity recovery");
  t.check(rec_m < 1e-6, "monotone recovery");
  t.check(cross < 1e-6, "cross-method agreement");
  t.check(uniq < 1e-7, "uniqueness probe");
  t.check(min_inc >= -1e-10, "monotone trace");
  t.note("recovery " + sci(rec_c) + " / " + sci(rec_m) + ", cross " + sci(cross) + ", uniqueness " +
         sci(uniq) + ", min increment " + sci(min_inc));
  return t.outcome();
}

Outcome obstruction_ladder() {
  Tally t;
  std::mt19937_64 rng(105);
  int rejected = 0, accepted = 0;
  std::map<std::string, int> codes;
  auto failure_code = [&](const std::function<void()>& f) -> std::optional<ErrorCode> {
    try {
      f();
    } catch (const Error& e) {
      return e.code();
    }
    return std::nullopt;
  };
  for (int trial = 0; trial < 5; ++trial) {
    const int n = 2 + trial % 2;
    const TorusGrid grid(2, 32, n);
    const auto bg = trial < 2 ? flat_background(grid, -1.0) : twisted(grid, -1.0 - trial);
    const auto psi_prime = random_field(grid, rng, 3, 2, 1.0 + trial);
    const auto cex = ob::make_counterexample(bg, psi_prime);
    const auto star = ob::check_star(bg, cex.g);
    const auto pos = ob::positivity_test(bg, cex.g);
    t.check(star.pass && star.value < 0.0, "integral condition holds");
    t.check(!pos.pass && pos.min <= 0.0, "positivity test fails");

    const auto c1 = failure_code([&] { ng::continuity_solve(bg, cex.g); });
    const auto c2 = failure_code([&] {
      const auto sup = ng::build_supersolution(bg, cex.g);
      ng::monotone_solve(bg, cex.g, ScalarField(grid, ng::build_subsolution(bg, cex.g)), sup.u);
    });
    for (const auto& c : {c1, c2}) {
      if (c) {
        ++rejected;
        ++codes[std::string(to_string(*c))];
      } else {
        ++accepted;
      }
    }
  }
  t.check(accepted == 0, "no false acceptances");
  std::string summary;
  for (const auto& [code, count] : codes) summary += (summary.empty() ? "" : " ") + code + "x" + std::to_string(count);
  t.note("5 counterexamples, " + std::to_string(rejected) + " solver rejections (" + summary + "), " +
         std::to_string(accepted) + " acceptances");
  return t.outcome();
}

Outcome scaling_covariance() {
  Tally t;
  std::mt19937_64 rng(107);
  double worst = 0.0;
  int cases = 0;
  ng::SolveOptions opts;
  opts.newton_tol = 1e-11;
  for (int n : {2, 3}) {
    const TorusGrid grid(2, 32, n);
    const auto tw = twisted(grid, -6.0);
    const auto g = manufactured(tw, random_field(grid, rng, 3, 1, 0.03));
    const auto sol = ng::continuity_solve(tw, g, opts);
    for (double lambda : {0.5, 2.0, 4.0}) {
      const double r = prescribed_residual(tw, lambda * g, ob::scaling_transport(sol.u, lambda, n));
      worst = std::max(worst, r);
      t.check(r < 1e-8, "transported residual");
      ++cases;
    }
  }
  t.note(std::to_string(cases) + " transports, max residual " + sci(worst));
  return t.outcome();
}

Outcome zero_variational() {
  Tally t;
  std::mt19937_64 rng(108);
  double res = 0.0, mu = 0.0, lambda_max = -1e300;
  int cases = 0;
  for (int k = 0; k < 5; ++k) {
    const int n = 2 + k % 2;
    const TorusGrid grid(2, 32, n);
    const auto bg = k < 2 ? flat_background(grid) : balanced(grid, sin_mode(grid, k % 2, 1, 0.1 + 0.03 * k));
    const auto ustar = random_field(grid, rng, 3, 2, 0.3);
    const auto g = (-2.0 / n * ustar).exp() * chern_laplacian(bg, ustar);
    t.check(zero::check_hypotheses(bg, g), "hypotheses hold for manufactured data");
    const auto sol = zero::solve_zero(bg, g);
    res = std::max(res, prescribed_residual(bg, g, sol.u));
    mu = std::max(mu, std::abs(sol.state.mu));
    lambda_max = std::max(lambda_max, sol.state.lambda);
    record("zero manufactured", bg, g, sol.u);
    ++cases;
  }
  t.check(res < 1e-5, "manufactured residual");
  t.check(lambda_max < 0.0, "lambda negative");
  t.check(mu < 1e-7, "mu at optimum");

  const TorusGrid grid(2, 32, 2);
  const auto flat = flat_background(grid);
  const auto c = cos_mode(grid, 0, 1);
  t.check(!zero::check_hypotheses(flat, c), "cos rejected");
  const auto shifted = zero::solve_zero(flat, c - 0.1);
  const double rs = prescribed_residual(flat, c - 0.1, shifted.u);
  t.check(rs < 1e-5, "cos - 0.1 solved");
  record("zero cos - 0.1", flat, c - 0.1, shifted.u);
  t.note(std::to_string(cases) + " manufactured, max residual " + sci(res) + ", max lambda " + sci(lambda_max) +
         ", max |mu| " + sci(mu) + ", cos rejected, cos - 0.1 residual " + sci(rs));
  return t.outcome();
}

Outcome positive_local() {
  Tally t;
  std::mt19937_64 rng(109);
  double rec = 0.0;
  for (int n : {2, 3}) {
    const TorusGrid grid(2, 32, n);
    for (bool flat : {true, false}) {
      const auto bg = flat ? flat_background(grid, 1.0) : positive_gauduchon(grid);
      const auto profile = random_field(grid, rng, 3, 2, 1.0);
      for (double eps : {0.1, 0.05, 0.01}) {
        const auto ustar = eps * profile;
        const auto g = manufactured(bg, ustar);
        const auto sol = positive::local_solve(bg, g);
        rec = std::max(rec, (sol.u - ustar).sup_norm());
        record("positive sweep", bg, g, sol.u);
      }
    }
  }
  t.check(rec < 1e-7, "sweep recovery");

  const TorusGrid grid(2, 32, 2);
  const auto bg = positive_gauduchon(grid);
  const auto g_dir = 0.5 * (1.0 + cos_mode(grid, 0, 1));
  const auto probe = positive::neighborhood_probe(bg, g_dir, ScalarField(grid, bg.integrate(g_dir)));
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  int count = 0;
  for (std::size_t i = 0; i < probe.scales.size(); ++i) {
    if (!probe.converged[i] || probe.scales[i] > probe.epsilon || probe.sup_u[i] == 0.0) continue;
    const double x = std::log(probe.scales[i]), y = std::log(probe.sup_u[i]);
    sx += x, sy += y, sxx += x * x, sxy += x * y;
    ++count;
  }
  const double slope = count >= 2 ? (count * sxy - sx * sy) / (count * sxx - sx * sx) : 0.0;
  t.check(count >= 5 && slope >= 0.9, "smallness slope");

  std::string diverged = "none";
  try {
    positive::local_solve(flat_background(grid, 1.0), 10.0 * (1.0 + cos_mode(grid, 0, 1)));
  } catch (const Error& e) {
    diverged = std::string(to_string(e.code()));
  }
  t.check(diverged == "NewtonDiverged", "graceful divergence at scale 10");
  t.note("max recovery " + sci(rec) + ", probe epsilon " + sci(probe.epsilon) + ", slope " + sci(slope) +
         " over " + std::to_string(count) + " scales, scale 10 -> " + diverged);
  return t.outcome();
}

Outcome integral_closure_all() {
  Tally t;
  double worst = 0.0;
  for (const auto& c : g_converged) {
    const double rel = integral_closure(c.bg, c.g, c.u).relative_error();
    worst = std::max(worst, rel);
    t.check(rel < 1e-6, c.label);
  }
  t.check(g_converged.size() >= 20, "enough converged solutions");
  t.note(std::to_string(g_converged.size()) + " solutions across three regimes, max relative error " +
         sci(worst));
  return t.outcome();
}

std::string read_text(const fs::path& p) {
  std::ifstream in(p);
  std::stringstream s;
  s << in.rdbuf();
  return s.str();
}

Outcome mms_convergence() {
  Tally t;
  const fs::path dir = PCSC_FIXTURE_DIR;
  for (const char* name : {"neg_wavy", "zero_ok", "pos_small"}) {
    const auto cfg = cli::parse_config(read_text(dir / (std::string(name) + ".json")), dir);
    cli::RunOptions opts;
    opts.no_meta = true;
    const auto r = cli::run("mms", cfg, opts);
    const auto& table = r.report["mms"]["table"];
    std::string ratios;
    for (std::size_t i = 1; i < table.size(); ++i) {
      const bool ok = table[i].contains("ratio") && table[i]["ratio"].is_number() &&
                      table[i]["ratio"].get<double>() >= 10.0;
      t.check(ok, std::string(name) + " ratio at N = " + std::to_string(table[i]["N"].get<int>()));
      ratios += " " + (table[i].contains("ratio") ? sci(table[i]["ratio"].get<double>()) : "n/a");
    }
    t.check(r.exit_code == 0, std::string(name) + " exit code");
    t.note(r.report["mms"]["regime"].get<std::string>() + " ratios" + ratios);
  }
  return t.outcome();
}

int run_binary(const std::string& args, const fs::path& stdout_path) {
  const std::string cmd = std::string(PCSC_BINARY) + " " + args + " > " + stdout_path.string() + " 2>/dev/null";
  const int status = std::system(cmd.c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

Outcome cli_contract() {
  Tally t;
  const fs::path dir = PCSC_FIXTURE_DIR;
  const fs::path scratch = fs::temp_directory_path() / "pcsc_acceptance";
  fs::create_directories(scratch);
  const std::map<std::string, int> expected{
      {"neg_constant", 0}, {"neg_wavy", 0}, {"neg_counterexample", 2},
      {"zero_ok", 0},      {"zero_reject", 2}, {"zero_unknown", 3},
      {"pos_small", 0},    {"pos_large", 3},  {"pos_reject", 2}};
  int matched = 0, identical = 0;
  for (const auto& [name, code] : expected) {
    const std::string args = "solve --config " + (dir / (name + ".json")).string() + " --no-meta";
    const int a = run_binary(args, scratch / (name + ".a.json"));
    const int b = run_binary(args, scratch / (name + ".b.json"));
    const bool same = read_text(scratch / (name + ".a.json")) == read_text(scratch / (name + ".b.json"));
    t.check(a == code && b == code, name + " exit code " + std::to_string(a));
    t.check(same, name + " byte-identical");
    matched += a == code;
    identical += same;
  }
  t.note(std::to_string(matched) + "/9 exit codes, " + std::to_string(identical) + "/9 byte-identical reports");
  return t.outcome();
}

}  // namespace

int main() {
  struct Criterion {
    int id;
    const char* name;
    Outcome (*fn)();
  };
  // Closure runs after the solver criteria so it sees all their solutions.
  const std::vector<Criterion> order{
      {1, "operator identities", operator_identities},
      {2, "eccentricity", eccentricity_checks},
      {3, "Gauduchon degree", gauduchon_degree_checks},
      {4, "negative regime existence and uniqueness", negative_existence},
      {5, "obstruction ladder", obstruction_ladder},
      {7, "scaling covariance", scaling_covariance},
      {8, "zero regime variational solver", zero_variational},
      {9, "positive regime local solver", positive_local},
      {6, "integral closure", integral_closure_all},
      {10, "manufactured-solution convergence", mms_convergence},
      {11, "CLI determinism and exit codes", cli_contract},
  };
  std::map<int, std::pair<std::string, Outcome>> results;
  for (const auto& c : order) {
    const auto start = std::chrono::steady_clock::now();
    Outcome o;
    try {
      o = c.fn();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    char buf[32];
    std::snprintf(buf, sizeof buf, " (%.2f s)", secs);
    o.detail += buf;
    results[c.id] = {c.name, o};
  }
  int failed = 0;
  for (const auto& [id, entry] : results) {
    const auto& [name, o] = entry;
    std::printf("%s  criterion %2d  %s: %s\n", o.pass ? "PASS" : "FAIL", id, name.c_str(), o.detail.c_str());
    failed += !o.pass;
  }
  std::printf("%d/%zu criteria passed\n", int(results.size()) - failed, results.size());
  return failed == 0 ? 0 : 1;
}
