#include "pcsc/cli.hpp"

#include "pcsc/calculus.hpp"
#include "pcsc/errors.hpp"
#include "pcsc/obstructions.hpp"
#include "pcsc/solve_negative.hpp"
#include "pcsc/solve_positive.hpp"
#include "pcsc/solve_zero.hpp"

#include <chrono>
#include <cmath>
#include <cstdio>
#include <ctime>
#include <fstream>
#include <limits>
#include <set>
#include <sstream>

namespace pcsc::cli {

namespace fs = std::filesystem;

namespace {

constexpr double kTwoPi = 6.283185307179586476925286766559;

[[noreturn]] void config_error(const std::string& where, const std::string& msg) {
  throw Error(ErrorCode::ConfigError, where + ": " + msg);
}

void allow_keys(const Json& obj, const std::set<std::string>& keys, const std::string& where) {
  for (const auto& [key, value] : obj.items()) {
    if (!keys.count(key)) config_error(where, "unknown key '" + key + "'");
  }
}

double get_number(const Json& obj, const std::string& key, const std::string& where,
                  std::optional<double> fallback = std::nullopt) {
  if (!obj.contains(key)) {
    if (fallback) return *fallback;
    config_error(where, "missing number '" + key + "'");
  }
  if (!obj[key].is_number()) config_error(where + "." + key, "expected a number");
  return obj[key].get<double>();
}

int get_int(const Json& obj, const std::string& key, const std::string& where,
            std::optional<int> fallback = std::nullopt) {
  if (!obj.contains(key)) {
    if (fallback) return *fallback;
    config_error(where, "missing integer '" + key + "'");
  }
  if (!obj[key].is_number_integer()) config_error(where + "." + key, "expected an integer");
  return obj[key].get<int>();
}

/// JSON cannot hold non-finite numbers; they are spelled out.
Json num(double x) {
  if (std::isfinite(x)) return x;
  if (std::isnan(x)) return "nan";
  return x > 0 ? "inf" : "-inf";
}

std::string format_g17(double x) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

std::string timestamp() {
  const std::time_t now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&now, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

Json error_json(const Error& e) {
  Json j{{"code", std::string(to_string(e.code()))}, {"message", e.what()}};
  if (e.value()) j["value"] = num(*e.value());
  return j;
}

HermitianBackground build_background(const Json& raw, const TorusGrid& grid,
                                     const fs::path& base) {
  OneFormField theta(grid);
  if (raw.contains("theta0")) {
    const Json& t = raw["theta0"];
    if (!t.is_array() || int(t.size()) != grid.dim()) {
      config_error("theta0", "expected an array of d = " + std::to_string(grid.dim()) +
                                 " field specs");
    }
    for (int k = 0; k < grid.dim(); ++k) {
      theta[k] = evaluate_field(t[std::size_t(k)], grid, base,
                                "theta0[" + std::to_string(k) + "]");
    }
  }
  if (!raw.contains("S0")) config_error("config", "missing field spec 'S0'");
  ScalarField S0 = evaluate_field(raw["S0"], grid, base, "S0");
  std::optional<ScalarField> U;
  if (raw.contains("potential")) U = evaluate_field(raw["potential"], grid, base, "potential");
  return HermitianBackground(std::move(theta), std::move(S0), std::move(U));
}

// ---------------------------------------------------------------------------
// Options

negative::SolveOptions negative_options(const Json& raw) {
  negative::SolveOptions o;
  if (!raw.contains("solver") || !raw["solver"].contains("negative")) return o;
  const Json& j = raw["solver"]["negative"];
  const std::string w = "solver.negative";
  allow_keys(j, {"t_steps", "newton_max", "newton_tol", "monotone_max", "monotone_tol", "K_safety"}, w);
  o.t_steps = get_int(j, "t_steps", w, o.t_steps);
  o.newton_max = get_int(j, "newton_max", w, o.newton_max);
  o.newton_tol = get_number(j, "newton_tol", w, o.newton_tol);
  o.monotone_max = get_int(j, "monotone_max", w, o.monotone_max);
  o.monotone_tol = get_number(j, "monotone_tol", w, o.monotone_tol);
  o.K_safety = get_number(j, "K_safety", w, o.K_safety);
  return o;
}

zero::ZeroOptions zero_options(const Json& raw) {
  zero::ZeroOptions o;
  if (!raw.contains("solver") || !raw["solver"].contains("zero")) return o;
  const Json& j = raw["solver"]["zero"];
  const std::string w = "solver.zero";
  allow_keys(j, {"max_iters", "newton_switch", "newton_max", "stationarity_tol", "constraint_tol"}, w);
  o.max_iters = get_int(j, "max_iters", w, o.max_iters);
  o.newton_switch = get_number(j, "newton_switch", w, o.newton_switch);
  o.newton_max = get_int(j, "newton_max", w, o.newton_max);
  o.stationarity_tol = get_number(j, "stationarity_tol", w, o.stationarity_tol);
  o.constraint_tol = get_number(j, "constraint_tol", w, o.constraint_tol);
  return o;
}

positive::LocalOptions positive_options(const Json& raw) {
  positive::LocalOptions o;
  if (!raw.contains("solver") || !raw["solver"].contains("positive")) return o;
  const Json& j = raw["solver"]["positive"];
  const std::string w = "solver.positive";
  allow_keys(j, {"newton_max", "tol", "radius"}, w);
  o.newton_max = get_int(j, "newton_max", w, o.newton_max);
  o.tol = get_number(j, "tol", w, o.tol);
  o.radius = get_number(j, "radius", w, o.radius);
  return o;
}

// ---------------------------------------------------------------------------
// Regime classification and the certified necessary conditions

enum class Regime { Negative, Zero, Positive };

const char* regime_name(Regime r) {
  switch (r) {
    case Regime::Negative: return "Negative";
    case Regime::Zero: return "Zero";
    case Regime::Positive: return "Positive";
  }
  return "Zero";
}

struct Classification {
  Regime regime;
  double gamma;
};

Classification classify(const HermitianBackground& bg) {
  const double gamma = gauduchon_degree(bg);
  const double scale = std::max(1.0, scalar_curvature(bg).sup_norm());
  if (std::abs(gamma) <= 1e-9 * scale) return {Regime::Zero, gamma};
  return {gamma < 0 ? Regime::Negative : Regime::Positive, gamma};
}

struct Ladder {
  Json report;
  obstruction::Verdict verdict;
};

Ladder ladder(const HermitianBackground& bg, const ScalarField& g, const Classification& cls,
              const negative::SolveOptions& nopts) {
  using obstruction::Verdict;
  Ladder out{Json::object(), Verdict::Unknown};
  const bool g_zero = g.sup_norm() == 0.0;
  switch (cls.regime) {
    case Regime::Negative: {
      const auto y = negative::yamabe_normalize(bg, nopts);
      const auto r = obstruction::analyze(y.background, g);
      out.report = {{"gamma", num(r.gamma)},
                    {"star_value", num(r.star_value)},
                    {"star_pass", r.star_pass},
                    {"psi_min", num(r.psi_min)},
                    {"psi_pass", r.psi_pass},
                    {"c_upper", r.c_upper ? num(*r.c_upper) : Json(nullptr)}};
      out.verdict = r.verdict;
      break;
    }
    case Regime::Zero: {
      const bool sign_change = g.min() < 0.0 && g.max() > 0.0;
      const bool balanced_flat = is_balanced(bg) && scalar_curvature(bg).sup_norm() < 1e-8;
      const double integral = bg.integrate(g);
      out.report = {{"sign_change", sign_change},
                    {"balanced_scalar_flat", balanced_flat},
                    {"integral_g", num(integral)}};
      if (balanced_flat) out.report["hypotheses"] = zero::check_hypotheses(bg, g);
      const bool integral_fails =
          balanced_flat && !(integral < -1e-12 * std::max(1.0, g.sup_norm() * bg.volume()));
      if (g_zero) {
        out.verdict = balanced_flat ? Verdict::TriviallyRealizable : Verdict::Unknown;
      } else if (!sign_change || integral_fails) {
        out.verdict = Verdict::NotRealizable;
      }
      break;
    }
    case Regime::Positive: {
      const bool positive_somewhere = g.max() > 0.0;
      out.report = {{"positive_somewhere", positive_somewhere}};
      if (!positive_somewhere) out.verdict = Verdict::NotRealizable;
      break;
    }
  }
  out.report["verdict"] = std::string(obstruction::to_string(out.verdict));
  return out;
}

// ---------------------------------------------------------------------------
// Regime-dispatched solve

struct Solved {
  ScalarField u;
  Json details;
};

Solved solve_regime(const HermitianBackground& bg, const ScalarField& g, Regime regime,
                    const Json& raw) {
  switch (regime) {
    case Regime::Negative: {
      const auto opts = negative_options(raw);
      if (g.max() <= 0.0 && g.min() < 0.0) {
        auto sol = negative::solve_nonpositive(bg, g, opts);
        return {std::move(sol.u), {{"solver", "monotone"}, {"iterations", sol.iterations}}};
      }
      const auto y = negative::yamabe_normalize(bg, opts);
      auto sol = negative::continuity_solve(y.background, g, opts);
      return {y.exponent + sol.u, {{"solver", "continuity"}, {"iterations", sol.iterations}}};
    }
    case Regime::Zero: {
      auto sol = zero::solve_zero(bg, g, zero_options(raw));
      const auto& st = sol.state;
      return {std::move(sol.u),
              {{"solver", "variational"},
               {"iterations", st.iterations + st.newton_iterations},
               {"lambda", num(st.lambda)},
               {"gamma_shift", num(st.gamma)},
               {"mu", num(st.mu)},
               {"energy", num(st.energy)},
               {"stationarity", num(st.stationarity)}}};
    }
    case Regime::Positive: {
      const auto gn = gauduchon_normalize(bg);
      auto sol = positive::local_solve(gn.background, g, positive_options(raw));
      return {gn.exponent + sol.u, {{"solver", "local_newton"}, {"iterations", sol.iterations}}};
    }
  }
  throw Error(ErrorCode::InvalidArgument, "unknown regime");
}

// ---------------------------------------------------------------------------
// Manufactured solutions: u* = a Σ_axes q(x_k) with the mean-free Poisson
// kernel q(t) = (1 - r²)/(1 - 2r cos 2πt + r²) - 1, whose Fourier
// coefficients decay like r^|k|, so the discretisation error is visible.

struct Profile {
  double q, dq, d2q;
};

Profile poisson_profile(double t, double r) {
  const double th = kTwoPi * t;
  const double D = 1.0 - 2.0 * r * std::cos(th) + r * r;
  const double dD = 2.0 * r * kTwoPi * std::sin(th);
  const double d2D = 2.0 * r * kTwoPi * kTwoPi * std::cos(th);
  const double c = 1.0 - r * r;
  return {c / D - 1.0, -c * dD / (D * D), -c * (d2D / (D * D) - 2.0 * dD * dD / (D * D * D))};
}

Json run_mms(const Config& cfg, const RunOptions& opts, int& exit_code) {
  Json params = cfg.raw.contains("mms") ? cfg.raw["mms"] : Json::object();
  allow_keys(params, {"amplitude", "r", "axes"}, "mms");
  const double amp = get_number(params, "amplitude", "mms", 0.05);
  const double r = get_number(params, "r", "mms", 0.5);
  if (!(r > 0.0 && r < 1.0)) config_error("mms.r", "must lie in (0, 1)");
  std::vector<int> axes{0};
  if (params.contains("axes")) axes = params["axes"].get<std::vector<int>>();
  for (int a : axes) {
    if (a < 0 || a >= cfg.grid.dim()) config_error("mms.axes", "axis out of range");
  }

  Json rows = Json::array();
  std::optional<Regime> regime;
  double prev = 0.0;
  bool pass = true;
  for (int N : {16, 32, 64}) {
    const TorusGrid grid(cfg.grid.dim(), N, cfg.grid.complex_dim());
    const auto bg = build_background(cfg.raw, grid, cfg.base_dir);
    if (!regime) regime = classify(bg).regime;
    const double n = grid.complex_dim();

    ScalarField ustar(grid);
    ScalarField lap(grid);
    OneFormField du(grid);
    for (std::size_t i = 0; i < grid.size(); ++i) {
      const auto x = grid.coords(i);
      for (int a : axes) {
        const auto p = poisson_profile(x[std::size_t(a)], r);
        ustar[i] += amp * p.q;
        du[a][i] = amp * p.dq;
        lap[i] -= amp * p.d2q;
      }
    }
    const ScalarField chern = bg.pairing_weight() * (lap + pairing(du, bg.theta0()));
    const ScalarField g = (-2.0 / n * ustar).exp() * (chern + scalar_curvature(bg));

    Json row{{"N", N}};
    try {
      const auto sol = solve_regime(bg, g, *regime, cfg.raw);
      const double err = (sol.u - ustar).sup_norm();
      row["max_error"] = num(err);
      row["residual"] = num(prescribed_residual(bg, g, sol.u));
      row["solver"] = sol.details;
      if (prev > 0.0) {
        row["ratio"] = num(prev / err);
        if (!(prev / err >= 10.0)) pass = false;
      }
      prev = err;
    } catch (const Error& e) {
      row["error"] = error_json(e);
      pass = false;
    }
    rows.push_back(row);
  }
  exit_code = pass ? 0 : 3;
  (void)opts;
  return {{"regime", regime_name(*regime)},
          {"u_star", {{"profile", "poisson"}, {"amplitude", amp}, {"r", r}, {"axes", axes}}},
          {"table", rows},
          {"pass", pass}};
}

void emit(const ScalarField& f, const std::string& stem, const RunOptions& opts, Json& report) {
  if (!opts.out_dir) return;
  fs::create_directories(*opts.out_dir);
  write_field_csv(f, *opts.out_dir / (stem + ".csv"));
  report["field_outputs"].push_back(stem + ".csv");
  if (f.grid().dim() == 2) {
    write_pgm(f, *opts.out_dir / (stem + ".pgm"));
    report["field_outputs"].push_back(stem + ".pgm");
  }
}

ScalarField required_field(const Config& cfg, const std::string& key) {
  if (!cfg.raw.contains(key)) config_error("config", "command needs field spec '" + key + "'");
  return evaluate_field(cfg.raw[key], cfg.grid, cfg.base_dir, key);
}

}  // namespace

// ---------------------------------------------------------------------------

ScalarField evaluate_field(const Json& spec, const TorusGrid& grid, const fs::path& base_dir,
                           const std::string& where) {
  if (spec.is_number()) return ScalarField(grid, spec.get<double>());
  if (!spec.is_object()) config_error(where, "field spec must be a number or an object");

  if (spec.contains("file")) {
    allow_keys(spec, {"file"}, where);
    if (!spec["file"].is_string()) config_error(where + ".file", "expected a path");
    const fs::path p = spec["file"].get<std::string>();
    return read_field_csv(p.is_absolute() ? p : base_dir / p, grid);
  }
  if (spec.contains("exp")) {
    allow_keys(spec, {"exp", "scale", "shift"}, where);
    const ScalarField inner = evaluate_field(spec["exp"], grid, base_dir, where + ".exp");
    return get_number(spec, "scale", where, 1.0) * inner.exp() + get_number(spec, "shift", where, 0.0);
  }

  allow_keys(spec, {"constant", "terms"}, where);
  ScalarField f(grid, get_number(spec, "constant", where, 0.0));
  if (!spec.contains("terms")) return f;
  if (!spec["terms"].is_array()) config_error(where + ".terms", "expected an array");
  const int N = grid.points_per_axis();
  for (std::size_t t = 0; t < spec["terms"].size(); ++t) {
    const Json& term = spec["terms"][t];
    const std::string tw = where + ".terms[" + std::to_string(t) + "]";
    if (!term.is_object()) config_error(tw, "expected an object");
    allow_keys(term, {"amplitude", "k", "kvec", "phase"}, tw);
    const double amp = get_number(term, "amplitude", tw);
    const Json& kj = term.contains("k") ? term["k"] : term.contains("kvec") ? term["kvec"] : Json();
    if (!kj.is_array() || int(kj.size()) != grid.dim()) {
      config_error(tw, "wave vector must list d = " + std::to_string(grid.dim()) + " integers");
    }
    std::vector<int> k;
    for (const auto& c : kj) {
      if (!c.is_number_integer()) config_error(tw + ".k", "expected integers");
      const int kc = c.get<int>();
      if (2 * std::abs(kc) >= N) {
        throw Error(ErrorCode::UnresolvedMode,
                    tw + ": |k| = " + std::to_string(std::abs(kc)) + " is not below N/2 = " +
                        std::to_string(N / 2));
      }
      k.push_back(kc);
    }
    const std::string phase = term.value("phase", std::string("cos"));
    if (phase != "cos" && phase != "sin") config_error(tw + ".phase", "expected 'cos' or 'sin'");
    const bool is_sin = phase == "sin";
    for (std::size_t i = 0; i < grid.size(); ++i) {
      const auto idx = grid.index(i);
      // Integer phase keeps the samples exact modulo one period.
      long long m = 0;
      for (int a = 0; a < grid.dim(); ++a) m += (long long)k[std::size_t(a)] * idx[std::size_t(a)];
      m %= N;
      const double arg = kTwoPi * double(m) / N;
      f[i] += amp * (is_sin ? std::sin(arg) : std::cos(arg));
    }
  }
  return f;
}

Config parse_config(const std::string& text, const fs::path& base_dir) {
  Json raw;
  try {
    raw = Json::parse(text);
  } catch (const Json::parse_error& e) {
    std::size_t line = 1, col = 1;
    for (std::size_t i = 0; i + 1 < e.byte && i < text.size(); ++i) {
      if (text[i] == '\n') {
        ++line;
        col = 1;
      } else {
        ++col;
      }
    }
    config_error("line " + std::to_string(line) + ", column " + std::to_string(col),
                 "malformed JSON");
  }
  if (!raw.is_object()) config_error("config", "top level must be an object");
  allow_keys(raw, {"grid", "theta0", "S0", "potential", "g", "solver", "u", "psi_prime", "mms",
                   "description"},
             "config");
  if (!raw.contains("grid") || !raw["grid"].is_object()) config_error("config", "missing object 'grid'");
  const Json& gj = raw["grid"];
  allow_keys(gj, {"d", "N", "n"}, "grid");
  std::optional<TorusGrid> grid;
  try {
    grid.emplace(get_int(gj, "d", "grid"), get_int(gj, "N", "grid"), get_int(gj, "n", "grid"));
  } catch (const Error& e) {
    if (e.code() == ErrorCode::ConfigError) throw;
    config_error("grid", e.what());
  }
  if (raw.contains("solver")) {
    if (!raw["solver"].is_object()) config_error("solver", "expected an object");
    allow_keys(raw["solver"], {"negative", "zero", "positive"}, "solver");
  }
  auto bg = build_background(raw, *grid, base_dir);
  if (!raw.contains("g")) config_error("config", "missing field spec 'g'");
  ScalarField g = evaluate_field(raw["g"], *grid, base_dir, "g");
  // Validate option blocks eagerly so typos surface before any solve.
  negative_options(raw).validate();
  zero_options(raw);
  positive_options(raw);
  return {*grid, std::move(bg), std::move(g), std::move(raw), base_dir};
}

void write_field_csv(const ScalarField& f, const fs::path& path) {
  std::ofstream out(path);
  if (!out) throw Error(ErrorCode::ConfigError, "cannot write " + path.string());
  const TorusGrid& grid = f.grid();
  out << "# " << grid.dim() << ' ' << grid.points_per_axis() << ' ' << grid.complex_dim()
      << " row-major\n";
  for (std::size_t i = 0; i < grid.size(); ++i) out << format_g17(f[i]) << '\n';
}

ScalarField read_field_csv(const fs::path& path, const TorusGrid& grid) {
  std::ifstream in(path);
  if (!in) config_error(path.string(), "cannot open field file");
  std::string header;
  std::getline(in, header);
  std::istringstream hs(header);
  std::string hash, order;
  int d = 0, N = 0, n = 0;
  if (!(hs >> hash >> d >> N >> n >> order) || hash != "#" || order != "row-major") {
    config_error(path.string(), "expected header '# d N n row-major'");
  }
  if (d != grid.dim() || N != grid.points_per_axis() || n != grid.complex_dim()) {
    config_error(path.string(), "field dimensions do not match the grid");
  }
  ScalarField f(grid);
  std::string line;
  std::size_t i = 0;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    if (i >= grid.size()) config_error(path.string(), "too many values");
    try {
      std::size_t used = 0;
      f[i] = std::stod(line, &used);
      if (used != line.size()) throw std::invalid_argument(line);
    } catch (const std::exception&) {
      config_error(path.string(), "bad value on data line " + std::to_string(i + 1));
    }
    ++i;
  }
  if (i != grid.size()) config_error(path.string(), "too few values");
  return f;
}

void write_pgm(const ScalarField& f, const fs::path& path) {
  const TorusGrid& grid = f.grid();
  if (grid.dim() != 2) throw Error(ErrorCode::InvalidArgument, "heatmaps need a 2-D field");
  std::ofstream out(path);
  if (!out) throw Error(ErrorCode::ConfigError, "cannot write " + path.string());
  const double lo = f.min(), hi = f.max();
  const int N = grid.points_per_axis();
  out << "P2\n# min " << format_g17(lo) << " max " << format_g17(hi) << "\n"
      << N << ' ' << N << "\n255\n";
  for (int row = 0; row < N; ++row) {
    for (int col = 0; col < N; ++col) {
      const double v = f[std::size_t(row) * std::size_t(N) + std::size_t(col)];
      const int level = hi > lo ? int(std::lround(255.0 * (v - lo) / (hi - lo))) : 0;
      out << level << (col + 1 < N ? ' ' : '\n');
    }
  }
}

std::string dump_report(const Json& report) { return report.dump(2) + "\n"; }

RunResult run(const std::string& command, const Config& cfg, const RunOptions& opts) {
  Json report{{"command", command},
              {"grid",
               {{"d", cfg.grid.dim()}, {"N", cfg.grid.points_per_axis()}, {"n", cfg.grid.complex_dim()}}},
              {"tolerance", opts.tol}};
  if (!opts.no_meta) report["meta"] = {{"tool", "pcsc"}, {"version", "1.0.0"}, {"timestamp", timestamp()}};
  int exit_code = 0;
  const auto& bg = cfg.background;
  const auto& g = cfg.g;

  try {
    if (command == "analyze") {
      const auto cls = classify(bg);
      const auto f0 = eccentricity(bg);
      report["gamma"] = num(cls.gamma);
      report["regime"] = regime_name(cls.regime);
      report["is_gauduchon"] = is_gauduchon(bg);
      report["is_balanced"] = is_balanced(bg);
      report["volume"] = num(bg.volume());
      report["eccentricity"] = {{"min", num(f0.min())}, {"max", num(f0.max())}, {"mean", num(f0.mean())}};
      const auto l = ladder(bg, g, cls, negative_options(cfg.raw));
      report["obstruction"] = l.report;
      exit_code = l.verdict == obstruction::Verdict::NotRealizable ? 2 : 0;
    } else if (command == "solve") {
      const auto cls = classify(bg);
      report["gamma"] = num(cls.gamma);
      report["regime"] = regime_name(cls.regime);
      const auto l = ladder(bg, g, cls, negative_options(cfg.raw));
      report["obstruction"] = l.report;
      if (l.verdict == obstruction::Verdict::NotRealizable) {
        report["status"] = "not_realizable";
        exit_code = 2;
      } else {
        try {
          auto sol = solve_regime(bg, g, cls.regime, cfg.raw);
          const double residual = prescribed_residual(bg, g, sol.u);
          const double closure = integral_closure(bg, g, sol.u).relative_error();
          for (auto& [key, value] : sol.details.items()) report[key] = value;
          report["residual"] = num(residual);
          report["bounds_checked"] = {{"residual_below_tolerance", residual < opts.tol},
                                      {"integral_closure", closure < 1e-6}};
          report["integral_closure_error"] = num(closure);
          report["field_outputs"] = Json::array();
          emit(sol.u, "u", opts, report);
          const bool ok = residual < opts.tol;
          report["status"] = ok ? "solved" : "unknown";
          exit_code = ok ? 0 : 3;
        } catch (const Error& e) {
          if (e.code() == ErrorCode::ConfigError) throw;
          report["status"] = "unknown";
          report["error"] = error_json(e);
          exit_code = 3;
        }
      }
    } else if (command == "verify") {
      const ScalarField u = required_field(cfg, "u");
      const double residual = prescribed_residual(bg, g, u);
      report["residual"] = num(residual);
      report["status"] = residual < opts.tol ? "verified" : "failed";
      exit_code = residual < opts.tol ? 0 : 3;
    } else if (command == "counterexample") {
      const ScalarField psi_prime = required_field(cfg, "psi_prime");
      const auto y = negative::yamabe_normalize(bg, negative_options(cfg.raw));
      const auto cex = obstruction::make_counterexample(y.background, psi_prime);
      const auto star = obstruction::check_star(y.background, cex.g);
      const auto pos = obstruction::positivity_test(y.background, cex.g);
      report["gamma"] = num(y.gamma);
      report["a"] = num(cex.a);
      report["star_value"] = num(star.value);
      report["star_pass"] = star.pass;
      report["psi_min"] = num(pos.min);
      report["psi_pass"] = pos.pass;
      report["certificate"] = {{"min", num(cex.certificate.min())}, {"max", num(cex.certificate.max())}};
      report["field_outputs"] = Json::array();
      emit(cex.g, "g", opts, report);
      emit(cex.certificate, "certificate", opts, report);
      exit_code = 0;
    } else if (command == "mms") {
      report["mms"] = run_mms(cfg, opts, exit_code);
    } else {
      throw Error(ErrorCode::ConfigError, "unknown command '" + command + "'");
    }
  } catch (const Error& e) {
    if (e.code() == ErrorCode::ConfigError || e.code() == ErrorCode::UnresolvedMode) throw;
    report["status"] = "unknown";
    report["error"] = error_json(e);
    exit_code = 3;
  }

  if (opts.out_dir) {
    fs::create_directories(*opts.out_dir);
    std::ofstream(*opts.out_dir / "report.json") << dump_report(report);
  }
  return {std::move(report), exit_code};
}

}  // namespace pcsc::cli
