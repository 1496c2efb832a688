#include <cstdint>
#include <iostream>

#include <CLI11.hpp>

#include "ap/experiment.hpp"

namespace {

void add_experiment_flags(CLI::App* cmd, ap::ExperimentConfig* config) {
  cmd->add_option("--n", config->n, "ambient dimension");
  cmd->add_option("--m", config->m, "number of measurements");
  cmd->add_option("--eps", config->eps, "noise level (radius of B)");
  cmd->add_option("--delta", config->delta, "gap stopping tolerance");
  cmd->add_option("--max-iters", config->max_iterations,
                  "bundle iteration limit");
  cmd->add_option("--seed", config->seed, "instance seed");
  cmd->add_option("--out-dir", config->out_dir, "output directory");
  cmd->add_option("--dstar", config->d_star_override,
                  "override the dual optimal value");
  cmd->add_option("--repeat", config->repeat,
                  "run this many consecutive seeds in parallel");
  cmd->set_config("--config", "", "flat key=value config file");
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Two-stage atomic pursuit: a level bundle method on the gauge "
               "dual discovers the support atoms, then a reduced solve "
               "recovers the primal point"};
  app.require_subcommand(1);

  ap::ExperimentConfig bpdn_config;
  CLI::App* bpdn = app.add_subcommand("bpdn", "sparse recovery experiment");
  add_experiment_flags(bpdn, &bpdn_config);
  bpdn->add_option("--sparsity", bpdn_config.sparsity,
                   "nonzeros in the ground truth");

  ap::ExperimentConfig phase_config;
  phase_config.kind = "phase";
  phase_config.n = 16;
  phase_config.m = 96;
  phase_config.delta = 1e-4;
  CLI::App* phase = app.add_subcommand("phase", "phase retrieval experiment");
  add_experiment_flags(phase, &phase_config);
  phase->add_option("--r-max", phase_config.r_max,
                    "spectral bundle basis cap");

  std::uint64_t verify_seed = 7;
  int verify_trials = 64;
  CLI::App* verify =
      app.add_subcommand("verify", "run the invariant suites on random data");
  verify->add_option("--seed", verify_seed, "base seed");
  verify->add_option("--trials", verify_trials, "trials per suite");

  CLI11_PARSE(app, argc, argv);

  if (bpdn->parsed()) return ap::run_experiment(bpdn_config);
  if (phase->parsed()) return ap::run_experiment(phase_config);
  if (verify->parsed()) {
    const int failures = ap::run_verify(verify_seed, verify_trials);
    if (failures != 0) std::cerr << failures << " suite(s) failed\n";
    return failures == 0 ? 0 : 1;
  }
  return 1;
}
