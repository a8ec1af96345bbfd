#pragma once

#include "pcsc/hermitian.hpp"

#include <json.hpp>

#include <filesystem>
#include <optional>
#include <string>

namespace pcsc::cli {

using Json = nlohmann::json;

struct Config {
  TorusGrid grid;
  HermitianBackground background;
  ScalarField g;
  /// Parsed document, kept for command-specific keys (solver, u, psi_prime, mms).
  Json raw;
  std::filesystem::path base_dir;
};

/// Evaluates a field spec: a number, {constant, terms: [{amplitude, k, phase}]},
/// {file: csv} or {exp: spec, scale, shift} meaning scale·exp(spec) + shift.
ScalarField evaluate_field(const Json& spec, const TorusGrid& grid,
                           const std::filesystem::path& base_dir, const std::string& where);

Config parse_config(const std::string& text, const std::filesystem::path& base_dir = ".");

/// CSV dump: header `# d N n row-major`, one %.17g value per line.
void write_field_csv(const ScalarField& f, const std::filesystem::path& path);
ScalarField read_field_csv(const std::filesystem::path& path, const TorusGrid& grid);

/// 8-bit P2 heatmap of a 2-D field, min-max scaled; the scale is in a comment.
void write_pgm(const ScalarField& f, const std::filesystem::path& path);

struct RunOptions {
  std::optional<std::filesystem::path> out_dir;
  double tol = 1e-6;
  bool no_meta = false;
};

struct RunResult {
  Json report;
  /// 0 success, 2 certified non-realisable, 3 unknown or solver failure.
  int exit_code;
};

RunResult run(const std::string& command, const Config& config, const RunOptions& opts);

/// Canonical text of a report (sorted keys, two-space indent, trailing newline).
std::string dump_report(const Json& report);

}  // namespace pcsc::cli
