#pragma once

#include <functional>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "ap/atoms.hpp"
#include "ap/linops.hpp"
#include "ap/poly.hpp"
#include "ap/projections.hpp"
#include "ap/spectral.hpp"

namespace ap {

struct SolverConfig {
  double delta = 1e-6;      // stopping tolerance on the gap
  double d_star = 0.0;      // known optimal dual value, must be positive
  int max_iterations = 500;

  // Outer Dykstra over {H, B', L}.
  double projection_tolerance = 1e-8;
  int projection_max_iterations = 20000;

  // Per-model level-set projectors (halfspace Dykstra / outer linearization).
  double level_projector_tolerance = 1e-9;
  int level_projector_max_iterations = 5000;

  // Bundle trim tolerance; defaults to `delta` when unset.
  std::optional<double> bundle_trim_delta;
};

struct TraceRecord {
  int iteration;
  double model_value;    // sigma_{A^(k)}(M* y^(k))
  double support_value;  // sigma_A(M* y^(k))
  double upper_bound;    // U^(k)
  double gap;            // U^(k) - d*
  int bundle_size;
  double seconds;        // wall clock since the run started
};

enum class RunStatus { converged, iteration_limit, infeasible_level_set };

struct LevelState {
  Eigen::VectorXd iterate;       // y^(k) at exit
  Eigen::VectorXd center;        // y-hat, fixed to y^(1)
  Eigen::VectorXd best_iterate;  // argmin of the true support values
  double upper_bound = 0.0;      // U^(k)
  double gap = 0.0;              // U^(k) - d*
  int iterations = 0;
  bool initial_point_adjusted = false;  // y1 was projected into B'
  std::vector<TraceRecord> trace;
  std::vector<Eigen::VectorXd> iterate_history;
};

struct RunResult {
  RunStatus status = RunStatus::iteration_limit;
  LevelState state;
  std::string message;
};

// Pluggable dual model: everything the level method needs, expressed over
// y-space so the driver is independent of the primal representation.
class BundleModel {
 public:
  virtual ~BundleModel() = default;

  // Build A^(1) from the face exposed by M* y1.
  virtual void initialize(const Eigen::VectorXd& y1) = 0;

  virtual double true_support_value(const Eigen::VectorXd& y) const = 0;
  virtual double model_value_at(const Eigen::VectorXd& y) const = 0;

  struct Evaluation {
    double model_value;
    double support_value;
  };
  virtual Evaluation evaluate(const Eigen::VectorXd& y) const = 0;

  // Bundle update at the new iterate; keeps the atoms exposed by it and at
  // least one newly exposed atom of the full set.
  virtual void update(const Eigen::VectorXd& y_next, double trim_delta) = 0;

  // Projection of y onto L = {y : model(M*y) <= level}.
  virtual Eigen::VectorXd project_onto_level(const Eigen::VectorXd& y,
                                             double level, double tolerance,
                                             int max_iterations) const = 0;

  // Exact halfspace description of L when the model is polyhedral; empty
  // otherwise.  Lets the level-set projection run one flat polyhedral pass.
  virtual std::vector<Halfspace> level_halfspaces(double level) const {
    (void)level;
    return {};
  }

  // Supporting halfspace of L most violated at y (a linearization of the
  // level constraint), or nullopt when y already satisfies the level.
  virtual std::optional<Halfspace> level_linearization(const Eigen::VectorXd& y,
                                                       double level) const {
    (void)y;
    (void)level;
    return std::nullopt;
  }

  virtual int bundle_size() const = 0;
};

class PolyDualModel : public BundleModel {
 public:
  PolyDualModel(DenseOperator op, AtomicSetDescriptor set);
  // Resume or probe with a preassembled bundle.
  PolyDualModel(DenseOperator op, AtomicSetDescriptor set, PolyBundle bundle);

  void initialize(const Eigen::VectorXd& y1) override;
  double true_support_value(const Eigen::VectorXd& y) const override;
  double model_value_at(const Eigen::VectorXd& y) const override;
  Evaluation evaluate(const Eigen::VectorXd& y) const override;
  void update(const Eigen::VectorXd& y_next, double trim_delta) override;
  Eigen::VectorXd project_onto_level(const Eigen::VectorXd& y, double level,
                                     double tolerance,
                                     int max_iterations) const override;
  std::vector<Halfspace> level_halfspaces(double level) const override;
  int bundle_size() const override;

  const PolyBundle& bundle() const { return bundle_; }
  const DenseOperator& op() const { return op_; }
  const AtomicSetDescriptor& atomic_set() const { return set_; }

 private:
  DenseOperator op_;
  AtomicSetDescriptor set_;
  PolyBundle bundle_;
};

class SpectralDualModel : public BundleModel {
 public:
  SpectralDualModel(RankOneMeasurementOperator op, int r_max = 10);

  void initialize(const Eigen::VectorXd& y1) override;
  double true_support_value(const Eigen::VectorXd& y) const override;
  double model_value_at(const Eigen::VectorXd& y) const override;
  Evaluation evaluate(const Eigen::VectorXd& y) const override;
  void update(const Eigen::VectorXd& y_next, double trim_delta) override;
  Eigen::VectorXd project_onto_level(const Eigen::VectorXd& y, double level,
                                     double tolerance,
                                     int max_iterations) const override;
  std::optional<Halfspace> level_linearization(const Eigen::VectorXd& y,
                                               double level) const override;
  int bundle_size() const override;

  const SpectralBundle& bundle() const { return bundle_; }
  const RankOneMeasurementOperator& op() const { return op_; }

 private:
  RankOneMeasurementOperator op_;
  SpectralBundle bundle_;
};

struct ProjectionResult {
  Eigen::VectorXd point;
  bool converged = false;
  double level_residual = 0.0;      // model(M*y) - d*, clipped at 0
  double halfspace_residual = 0.0;  // <y - y_k, y_hat - y_k>, clipped at 0
  double antipolar_residual = 0.0;  // infeasibility of B', clipped at 0
  int cycles = 0;
};

// proj_{Y^(k)}(y_hat) with Y^(k) = L^(k) n H^(k) n B', by Dykstra over the
// three sets.
ProjectionResult project_onto_level_set(const Eigen::VectorXd& y_hat,
                                        const Eigen::VectorXd& y_k,
                                        const BundleModel& model,
                                        const AntipolarDescriptor& region,
                                        double d_star,
                                        const SolverConfig& config);

// U^{k+1} = min(U^k, new value); gap = U^{k+1} - d*.
std::pair<double, double> upper_bound_and_gap(double upper_bound,
                                              double new_support_value,
                                              double d_star);

using TraceSink = std::function<void(const TraceRecord&)>;
using UpdateInspector =
    std::function<void(const BundleModel&, const Eigen::VectorXd& y_next)>;

// The level bundle loop: track the best true support value, stop on the gap
// test, otherwise project the center onto Y^(k) and update the bundle.  The
// center stays at y^(1) for the whole run.
RunResult run_bundle(BundleModel& model, const AntipolarDescriptor& region,
                     const SolverConfig& config, const Eigen::VectorXd& y1,
                     const TraceSink& sink = {},
                     const UpdateInspector& inspector = {});

}  // namespace ap
