// Command line harness: seeded, configured experiment runs.

#include <cstdio>
#include <exception>
#include <string>

#include "CLI11.hpp"
#include "tht/experiments.hpp"

int main(int argc, char** argv) {
  CLI::App app{"tempered Hamiltonian transitions experiment harness"};
  app.require_subcommand(1);

  auto* run = app.add_subcommand("run", "run an experiment from a JSON config");
  std::string config_path;
  run->add_option("config", config_path, "experiment config (JSON)")
      ->required();
  tht::RunOverrides overrides;
  std::uint64_t seed = 0;
  int iters = 0, workers = 0, dim = 0;
  std::string out_dir;
  auto* seed_opt = run->add_option("--seed", seed, "override the config seed");
  auto* iters_opt =
      run->add_option("--iters", iters, "override the iteration count");
  auto* workers_opt =
      run->add_option("--workers", workers, "worker threads across chains");
  auto* out_opt = run->add_option(
      "--out", out_dir, "output directory (THT_OUT_DIR as fallback)");
  auto* dim_opt =
      run->add_option("--dim", dim, "override the target dimension");

  CLI11_PARSE(app, argc, argv);

  if (seed_opt->count() > 0) overrides.seed = seed;
  if (iters_opt->count() > 0) overrides.iters = iters;
  if (workers_opt->count() > 0) overrides.workers = workers;
  if (out_opt->count() > 0) overrides.out_dir = out_dir;
  if (dim_opt->count() > 0) overrides.dim = dim;

  try {
    tht::run_experiment(config_path, overrides);
  } catch (const tht::ConfigError& e) {
    std::fprintf(stderr, "config error: %s\n", e.what());
    return 2;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "run failed: %s\n", e.what());
    return 3;
  }
  return 0;
}
