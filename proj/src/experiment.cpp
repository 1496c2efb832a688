#include "ap/experiment.hpp"

#include <chrono>
#include <cinttypes>
#include <cstdio>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <thread>

#include <json.hpp>

#include "ap/rng.hpp"

namespace ap {

namespace {

std::string format_double(double v) {
  char buffer[40];
  std::snprintf(buffer, sizeof(buffer), "%.17g", v);
  return buffer;
}

std::string iso_timestamp() {
  const auto now = std::chrono::system_clock::now();
  const std::time_t t = std::chrono::system_clock::to_time_t(now);
  std::tm tm{};
  gmtime_r(&t, &tm);
  char buffer[32];
  std::strftime(buffer, sizeof(buffer), "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buffer;
}

const char* status_name(RunStatus status) {
  switch (status) {
    case RunStatus::converged:
      return "converged";
    case RunStatus::iteration_limit:
      return "iteration_limit";
    case RunStatus::infeasible_level_set:
      return "infeasible_level_set";
  }
  return "unknown";
}

const char* recovery_status_name(RecoveryStatus status) {
  switch (status) {
    case RecoveryStatus::ok:
      return "ok";
    case RecoveryStatus::infeasible:
      return "infeasible";
    case RecoveryStatus::stalled:
      return "stalled";
  }
  return "unknown";
}

nlohmann::ordered_json config_json(const ExperimentConfig& config,
                                   std::uint64_t seed) {
  nlohmann::ordered_json j;
  j["kind"] = config.kind;
  j["n"] = config.n;
  j["m"] = config.m;
  if (config.kind == "bpdn") j["sparsity"] = config.sparsity;
  j["eps"] = config.eps;
  j["delta"] = config.delta;
  j["max_iterations"] = config.max_iterations;
  j["seed"] = seed;
  if (config.d_star_override)
    j["d_star_override"] = *config.d_star_override;
  else
    j["d_star_override"] = nullptr;
  if (config.kind == "phase") j["r_max"] = config.r_max;
  return j;
}

int run_single(const ExperimentConfig& config, std::uint64_t seed,
               const std::filesystem::path& dir) {
  std::filesystem::create_directories(dir);

  ProblemInstance instance =
      config.kind == "phase"
          ? generate_phase(config.n, config.m, seed)
          : generate_bpdn(config.n, config.m, config.sparsity, config.eps,
                          seed);
  if (config.d_star_override) instance.d_star = *config.d_star_override;

  SolverConfig solver;
  solver.delta = config.delta;
  solver.d_star = instance.d_star;
  solver.max_iterations = config.max_iterations;

  const Eigen::VectorXd y1 = default_initial_point(instance.region);

  nlohmann::ordered_json result;
  result["config"] = config_json(config, seed);
  result["d_star"] = instance.d_star;

  RunResult run;
  bool recovery_ok = false;

  if (config.kind == "phase") {
    SpectralDualModel model(std::get<RankOneMeasurementOperator>(instance.op),
                            config.r_max);
    run = run_bundle(model, instance.region, solver, y1);
    write_trace_csv((dir / "trace.csv").string(), run.state.trace);

    const auto& op = model.op();
    const SpectralRecovery recovery =
        recover_primal_spectral(model.bundle(), op, instance.region.b);
    recovery_ok = recovery.status == RecoveryStatus::ok;

    nlohmann::ordered_json rec;
    rec["status"] = recovery_status_name(recovery.status);
    rec["gauge"] = recovery.gauge;
    rec["feasibility_residual"] = recovery.residual;
    rec["pg_norm"] = recovery.pg_norm;
    rec["iterations"] = recovery.iterations;
    if (instance.ground_truth_matrix) {
      const double denom = instance.ground_truth_matrix->norm();
      rec["relative_error"] =
          (recovery.x - *instance.ground_truth_matrix).norm() / denom;
    }
    result["recovery"] = rec;

    const Eigen::MatrixXd z_best = op.adjoint(run.state.best_iterate);
    const AtomicSetDescriptor set{AtomicFamily::SpectralPsd, config.n};
    const double pairing = recovery.x.cwiseProduct(z_best).sum();
    const double gauge = gauge_value(set, recovery.x);
    const double support = support_value(set, z_best);
    result["duality"] = {{"pairing", pairing},
                         {"gauge", gauge},
                         {"support", support},
                         {"product", gauge * support}};

    const ComplementarityReport comp =
        strict_complementarity_report(recovery.x, z_best);
    result["strict_complementarity"] = {
        {"primal_rank", comp.primal_rank},
        {"dual_multiplicity", comp.dual_multiplicity},
        {"matched", comp.matched}};
  } else {
    PolyDualModel model(std::get<DenseOperator>(instance.op), instance.set);
    run = run_bundle(model, instance.region, solver, y1);
    write_trace_csv((dir / "trace.csv").string(), run.state.trace);

    const PolyRecovery recovery =
        recover_primal_poly(model.bundle(), model.op(), instance.region);
    recovery_ok = recovery.status == RecoveryStatus::ok;

    nlohmann::ordered_json rec;
    rec["status"] = recovery_status_name(recovery.status);
    rec["gauge"] = recovery.gauge;
    rec["feasibility_residual"] = recovery.residual;
    rec["certified_gap"] = recovery.certified_gap;
    rec["iterations"] = recovery.iterations;
    if (instance.ground_truth_vector) {
      rec["relative_error"] =
          (recovery.x - *instance.ground_truth_vector).norm() /
          instance.ground_truth_vector->norm();
    }
    result["recovery"] = rec;

    const Eigen::VectorXd z_best = model.op().adjoint(run.state.best_iterate);
    const double pairing = recovery.x.dot(z_best);
    const double gauge = gauge_value(instance.set, recovery.x);
    const double support = support_value(instance.set, z_best);
    result["duality"] = {{"pairing", pairing},
                         {"gauge", gauge},
                         {"support", support},
                         {"product", gauge * support}};
  }

  result["status"] = status_name(run.status);
  if (!run.message.empty()) result["message"] = run.message;
  result["iterations"] = run.state.iterations;
  result["final_gap"] = run.state.gap;
  result["final_upper_bound"] = run.state.upper_bound;
  result["bundle_size"] =
      run.state.trace.empty() ? 0 : run.state.trace.back().bundle_size;
  result["y1_adjusted"] = run.state.initial_point_adjusted;
  result["timestamp"] = iso_timestamp();

  std::ofstream out(dir / "result.json");
  out << result.dump(2) << "\n";

  const bool ok = run.status == RunStatus::converged && recovery_ok;
  if (!ok) {
    std::cerr << "run (seed " << seed << ") failed: " << status_name(run.status)
              << (run.message.empty() ? "" : ": " + run.message) << "\n";
  }
  return ok ? 0 : 1;
}

}  // namespace

void write_trace_csv(const std::string& path,
                     const std::vector<TraceRecord>& trace) {
  std::ofstream out(path);
  out << "iter,model_value,support_value,upper_bound,gap,bundle_size,seconds\n";
  char line[256];
  for (const TraceRecord& r : trace) {
    std::snprintf(line, sizeof(line), "%d,%s,%s,%s,%s,%d,%.6f\n", r.iteration,
                  format_double(r.model_value).c_str(),
                  format_double(r.support_value).c_str(),
                  format_double(r.upper_bound).c_str(),
                  format_double(r.gap).c_str(), r.bundle_size, r.seconds);
    out << line;
  }
}

int run_experiment(const ExperimentConfig& config) {
  if (config.kind != "bpdn" && config.kind != "phase") {
    std::cerr << "unknown experiment kind: " << config.kind << "\n";
    return 1;
  }
  if (config.repeat <= 1)
    return run_single(config, config.seed, config.out_dir);

  std::vector<int> codes(config.repeat, 0);
  std::vector<std::thread> workers;
  workers.reserve(config.repeat);
  for (int i = 0; i < config.repeat; ++i) {
    workers.emplace_back([&, i] {
      const std::uint64_t seed = config.seed + static_cast<std::uint64_t>(i);
      const std::filesystem::path dir =
          std::filesystem::path(config.out_dir) /
          ("seed_" + std::to_string(seed));
      codes[i] = run_single(config, seed, dir);
    });
  }
  for (auto& w : workers) w.join();
  for (int code : codes)
    if (code != 0) return code;
  return 0;
}

}  // namespace ap
