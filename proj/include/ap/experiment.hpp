#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "ap/bundle.hpp"
#include "ap/instance.hpp"

namespace ap {

struct ExperimentConfig {
  std::string kind = "bpdn";  // bpdn | phase
  int n = 64;
  int m = 32;
  int sparsity = 4;  // bpdn only; phase ground truth is rank one
  double eps = 0.0;
  double delta = 1e-6;
  int max_iterations = 500;
  std::uint64_t seed = 1;
  std::string out_dir = "out";
  std::optional<double> d_star_override;
  int repeat = 1;
  int r_max = 10;
};

// Trace CSV schema: iter,model_value,support_value,upper_bound,gap,
// bundle_size,seconds.  All numeric fields but `seconds` are deterministic
// under a fixed config and seed.
void write_trace_csv(const std::string& path,
                     const std::vector<TraceRecord>& trace);

// Builds the instance, runs the solver and stage-two recovery, writes
// trace.csv and result.json under out_dir (per-seed subdirectories when
// repeat > 1, fanned out across threads).  Returns 0 iff every run converged
// to the gap tolerance and recovery succeeded.
int run_experiment(const ExperimentConfig& config);

// Property suites over random instances; prints one line per suite and
// returns the number of failures.
int run_verify(std::uint64_t seed, int trials);

}  // namespace ap
