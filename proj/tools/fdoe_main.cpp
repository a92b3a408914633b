#include <CLI11.hpp>

#include <cstdio>
#include <exception>
#include <iostream>
#include <optional>
#include <string>

#include "fdoe/fdoe.hpp"

namespace {

int run_search(const std::string& config_path, const std::optional<std::string>& out_dir,
               const std::optional<std::uint64_t>& seed, const std::optional<int>& workers,
               bool progress) {
  fdoe::RunConfig config = fdoe::load_run_config(config_path);
  if (out_dir) config.output.directory = *out_dir;
  if (seed) config.search.seed = *seed;
  if (workers) {
    if (*workers < 1) throw fdoe::ConfigError("--workers must be at least 1");
    config.search.workers = *workers;
  }
  if (progress) config.progress = true;

  fdoe::SearchResult result = fdoe::run_design_search(config);
  std::cout << fdoe::format_summary(result, config);
  const auto files = fdoe::write_outputs(result, config);
  std::cout << "Outputs written to " << config.output.directory << " (" << files.size()
            << " files)\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Bayesian A-/D-optimal designs for functional (generalised) linear models"};
  app.require_subcommand(1);

  std::string config_path;
  std::optional<std::string> out_dir;
  std::optional<std::uint64_t> seed;
  std::optional<int> workers;
  bool progress = false;

  CLI::App* search = app.add_subcommand("search", "Run a design search from a JSON config");
  search->add_option("config", config_path, "Path to the search configuration")->required();
  search->add_option("--out", out_dir, "Output directory (overrides the config)");
  search->add_option("--seed", seed, "RNG seed (overrides the config)");
  search->add_option("--workers", workers, "Worker threads for multi-start");
  search->add_flag("--progress", progress, "Print per-sweep progress");

  CLI11_PARSE(app, argc, argv);

  try {
    return run_search(config_path, out_dir, seed, workers, progress);
  } catch (const fdoe::ConfigError& e) {
    std::cerr << "configuration error: " << e.what() << "\n";
    return 2;
  } catch (const fdoe::InfeasibleError& e) {
    std::cerr << "infeasible search: " << e.what() << "\n";
    return 3;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
}
