#include "pcsc/cli.hpp"
#include "pcsc/errors.hpp"

#include <CLI11.hpp>

#include <fstream>
#include <iostream>
#include <sstream>

int main(int argc, char** argv) {
  CLI::App app{"Prescribed Chern scalar curvature laboratory"};
  std::string command;
  std::string config_path;
  std::string out_dir;
  double tol = 1e-6;
  bool no_meta = false;
  app.add_option("command", command, "analyze | solve | verify | counterexample | mms")
      ->required()
      ->check(CLI::IsMember({"analyze", "solve", "verify", "counterexample", "mms"}));
  app.add_option("--config", config_path, "JSON configuration")->required()->check(CLI::ExistingFile);
  app.add_option("--out", out_dir, "directory for report.json and field dumps");
  app.add_option("--tol", tol, "residual tolerance for success")->check(CLI::PositiveNumber);
  app.add_flag("--no-meta", no_meta, "omit the timestamped meta block");
  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 1;
  }

  try {
    std::ifstream in(config_path);
    std::stringstream text;
    text << in.rdbuf();
    const auto cfg = pcsc::cli::parse_config(text.str(), std::filesystem::path(config_path).parent_path());
    pcsc::cli::RunOptions opts;
    if (!out_dir.empty()) opts.out_dir = out_dir;
    opts.tol = tol;
    opts.no_meta = no_meta;
    const auto result = pcsc::cli::run(command, cfg, opts);
    std::cout << pcsc::cli::dump_report(result.report);
    return result.exit_code;
  } catch (const pcsc::Error& e) {
    std::cerr << "pcsc: " << e.what() << '\n';
    return 1;
  } catch (const nlohmann::json::exception& e) {
    std::cerr << "pcsc: config: " << e.what() << '\n';
    return 1;
  }
}
