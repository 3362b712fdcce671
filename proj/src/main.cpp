#include <qkd/experiments.hpp>

#include <CLI11.hpp>

#include <iostream>

namespace {

constexpr int kExitConfig = 2;
constexpr int kExitSolver = 3;

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Two-photon frequency/time-bin QKD simulator and key-rate sweep driver"};
  app.require_subcommand(1);

  std::string run_path, validate_path;
  auto* run = app.add_subcommand("run", "run an experiment described by a config file");
  run->add_option("config", run_path, "path to the config file")->required();
  auto* val = app.add_subcommand("validate", "parse a config and echo the resolved settings");
  val->add_option("config", validate_path, "path to the config file")->required();
  auto* list = app.add_subcommand("list-experiments", "list available experiments");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : kExitConfig;
  }

  if (list->parsed()) {
    for (const auto& info : qkd::cli::experiment_catalog())
      std::cout << info.name << "\t" << info.summary << "\n";
    return 0;
  }

  qkd::cli::ResolvedConfig cfg;
  try {
    cfg = qkd::cli::load_config(run->parsed() ? run_path : validate_path);
  } catch (const std::exception& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return kExitConfig;
  }

  if (val->parsed()) {
    qkd::cli::json echo = cfg.merged;
    echo["config_hash"] = qkd::cli::config_hash(cfg.merged);
    std::cout << echo.dump(2) << "\n";
    return 0;
  }

  try {
    const int failures = qkd::cli::run_and_write(cfg);
    if (failures > 0) {
      std::cerr << failures << " grid point(s) failed; see the error column\n";
      return kExitSolver;
    }
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitSolver;
  }
  std::cout << "wrote " << cfg.output_dir << "/" << qkd::cli::to_string(cfg.experiment)
            << ".{csv,jsonl,_plot.py,_config.json}\n";
  return 0;
}
