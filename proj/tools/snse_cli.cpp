// Experiment runner: snse_cli <config.json> [--command NAME]
//
// Exit status: 0 success, 1 runtime failure or failed check, 2 invalid config.

#include <cstdio>
#include <exception>
#include <string>

#include <CLI11.hpp>

#include "snse/cli/config.hpp"
#include "snse/cli/experiments.hpp"

int main(int argc, char** argv) {
  CLI::App app{"Truncated stochastic Navier-Stokes experiment runner"};
  std::string config_path, command;
  app.add_option("config", config_path, "experiment config (JSON)")->required()->check(CLI::ExistingFile);
  app.add_option("--command", command, "override the config's command");
  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : 2;
  }

  snse::cli::ExperimentConfig cfg;
  try {
    auto doc = snse::cli::Json::parse(snse::read_text_file(config_path));
    if (!command.empty()) {
      if (!doc.is_object()) throw snse::cli::ConfigError("(root)", "expected an object");
      doc["command"] = command;
    }
    cfg = snse::cli::parse_config(doc);
  } catch (const snse::cli::ConfigError& e) {
    std::fprintf(stderr, "config error: %s\n", e.what());
    return 2;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "config error: (document): %s\n", e.what());
    return 2;
  }

  try {
    const auto dir = snse::cli::resolve_output_dir(cfg);
    const int status = snse::cli::run_experiment(cfg, dir);
    std::printf("%s: %s, artifacts in %s\n", cfg.command.c_str(), status == 0 ? "ok" : "check failed", dir.c_str());
    return status;
  } catch (const snse::NumericalFailure& e) {
    std::fprintf(stderr, "runtime failure at step %zu: %s\n", e.step(), e.what());
    return 1;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "runtime failure: %s\n", e.what());
    return 1;
  }
}
