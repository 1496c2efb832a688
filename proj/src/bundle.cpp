#include "ap/bundle.hpp"

#include <chrono>
#include <cmath>
#include <sstream>
#include <stdexcept>

#include <Eigen/Dense>
#include <Eigen/Eigenvalues>

#include "ap/projections.hpp"

namespace ap {

// ---------------------------------------------------------------------------
// Polyhedral dual model
// ---------------------------------------------------------------------------

PolyDualModel::PolyDualModel(DenseOperator op, AtomicSetDescriptor set)
    : op_(std::move(op)), set_(set) {
  if (set_.family == AtomicFamily::SpectralPsd)
    throw std::invalid_argument("PolyDualModel: needs a polyhedral atomic set");
  if (op_.cols() != set_.dim)
    throw std::invalid_argument("PolyDualModel: operator/set dimension mismatch");
}

PolyDualModel::PolyDualModel(DenseOperator op, AtomicSetDescriptor set,
                             PolyBundle bundle)
    : PolyDualModel(std::move(op), set) {
  bundle_ = std::move(bundle);
}

void PolyDualModel::initialize(const Eigen::VectorXd& y1) {
  bundle_.atoms.clear();
  const Eigen::VectorXd z = op_.adjoint(y1);
  const auto atom = exposed_atom(set_, z);
  if (!atom)
    throw std::invalid_argument(
        "PolyDualModel: degenerate start, M*y1 exposes no atom");
  bundle_.atoms.push_back(*atom);
}

double PolyDualModel::true_support_value(const Eigen::VectorXd& y) const {
  return support_value(set_, op_.adjoint(y));
}

double PolyDualModel::model_value_at(const Eigen::VectorXd& y) const {
  return poly_model_value(bundle_, op_.adjoint(y));
}

BundleModel::Evaluation PolyDualModel::evaluate(const Eigen::VectorXd& y) const {
  const Eigen::VectorXd z = op_.adjoint(y);
  return {poly_model_value(bundle_, z), support_value(set_, z)};
}

void PolyDualModel::update(const Eigen::VectorXd& y_next, double trim_delta) {
  const Eigen::VectorXd z = op_.adjoint(y_next);
  // Constraint values of active atoms agree only to the projection residual;
  // widen the trim by a relative tie window so exact-arithmetic ties survive.
  double tie = 0.0;
  if (!bundle_.atoms.empty())
    tie = 1e-9 * std::max(1.0, std::abs(poly_model_value(bundle_, z)));
  bundle_ = poly_bundle_update(bundle_, z, trim_delta + tie, set_);
}

Eigen::VectorXd PolyDualModel::project_onto_level(const Eigen::VectorXd& y,
                                                  double level,
                                                  double tolerance,
                                                  int max_iterations) const {
  return dykstra_halfspaces(y, level_halfspaces(level), tolerance,
                            max_iterations);
}

std::vector<Halfspace> PolyDualModel::level_halfspaces(double level) const {
  std::vector<Halfspace> sets;
  sets.reserve(bundle_.atoms.size());
  for (const PolyAtom& a : bundle_.atoms)
    sets.push_back(
        {static_cast<double>(a.sign) * op_.matrix().col(a.index), level});
  return sets;
}

int PolyDualModel::bundle_size() const {
  return static_cast<int>(bundle_.atoms.size());
}

// ---------------------------------------------------------------------------
// Spectral dual model
// ---------------------------------------------------------------------------

SpectralDualModel::SpectralDualModel(RankOneMeasurementOperator op, int r_max)
    : op_(std::move(op)),
      bundle_(make_spectral_bundle(static_cast<int>(op_.dim()), r_max)) {}

void SpectralDualModel::initialize(const Eigen::VectorXd& y1) {
  bundle_ = make_spectral_bundle(static_cast<int>(op_.dim()), bundle_.r_max);
  const Eigen::MatrixXd z = op_.adjoint(y1);
  const AtomicSetDescriptor set{AtomicFamily::SpectralPsd,
                                static_cast<int>(op_.dim())};
  if (auto atom = exposed_atom(set, z)) bundle_.P = atom->u;
}

double SpectralDualModel::true_support_value(const Eigen::VectorXd& y) const {
  const AtomicSetDescriptor set{AtomicFamily::SpectralPsd,
                                static_cast<int>(op_.dim())};
  return support_value(set, Eigen::MatrixXd(op_.adjoint(y)));
}

double SpectralDualModel::model_value_at(const Eigen::VectorXd& y) const {
  return spectral_model_value(bundle_, op_.adjoint(y));
}

BundleModel::Evaluation SpectralDualModel::evaluate(
    const Eigen::VectorXd& y) const {
  const Eigen::MatrixXd z = op_.adjoint(y);
  const AtomicSetDescriptor set{AtomicFamily::SpectralPsd,
                                static_cast<int>(op_.dim())};
  return {spectral_model_value(bundle_, z), support_value(set, z)};
}

void SpectralDualModel::update(const Eigen::VectorXd& y_next,
                               double /*trim_delta*/) {
  const Eigen::MatrixXd z = op_.adjoint(y_next);
  const SpectralExposed exposed = spectral_exposed_element(bundle_, z);
  bundle_ = spectral_bundle_update(bundle_, exposed, z);
}

std::optional<Halfspace> SpectralDualModel::level_linearization(
    const Eigen::VectorXd& y, double level) const {
  const Eigen::MatrixXd z = op_.adjoint(y);
  const double w_value = bundle_.W.cwiseProduct(z).sum();
  double lambda_value = -std::numeric_limits<double>::infinity();
  Eigen::VectorXd direction;
  const Eigen::Index r = bundle_.P.cols();
  if (r > 0) {
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(
        Eigen::MatrixXd(bundle_.P.transpose() * z * bundle_.P));
    lambda_value = eig.eigenvalues()[r - 1];
    direction = bundle_.P * eig.eigenvectors().col(r - 1);
  }
  if (std::max({0.0, lambda_value, w_value}) <= level) return std::nullopt;

  Halfspace plane;
  plane.offset = level;
  if (lambda_value >= w_value) {
    direction.normalize();
    plane.normal = op_.rank_one_image(direction);
  } else {
    plane.normal = op_.apply(bundle_.W);
  }
  return plane;
}

Eigen::VectorXd SpectralDualModel::project_onto_level(const Eigen::VectorXd& y,
                                                      double level,
                                                      double tolerance,
                                                      int max_iterations) const {
  // Outer linearization: grow a cutting-plane description of L from the
  // most-violated linearization at the current point, reprojecting the
  // original point onto the collected planes.
  Eigen::VectorXd current = y;
  std::vector<Halfspace> planes;
  for (int round = 0; round < 500; ++round) {
    const auto plane = level_linearization(current, level + tolerance);
    if (!plane) return current;
    append_cutting_plane(planes, *plane);
    planes.back().offset = level;
    current = project_polyhedral_intersection(y, planes, tolerance,
                                              max_iterations)
                  .point;
  }
  return current;
}

int SpectralDualModel::bundle_size() const {
  // Aggregate matrix counts as one stored element when active.
  const int w_active = bundle_.W.cwiseAbs().maxCoeff() > 0.0 ? 1 : 0;
  return static_cast<int>(bundle_.P.cols()) + w_active;
}

// ---------------------------------------------------------------------------
// Level-set projection and the main loop
// ---------------------------------------------------------------------------

std::pair<double, double> upper_bound_and_gap(double upper_bound,
                                              double new_support_value,
                                              double d_star) {
  const double next = std::min(upper_bound, new_support_value);
  return {next, next - d_star};
}

ProjectionResult project_onto_level_set(const Eigen::VectorXd& y_hat,
                                        const Eigen::VectorXd& y_k,
                                        const BundleModel& model,
                                        const AntipolarDescriptor& region,
                                        double d_star,
                                        const SolverConfig& config) {
  const Eigen::VectorXd h_normal = y_hat - y_k;
  const double h_offset = h_normal.dot(y_k);
  const bool h_active = h_normal.lpNorm<Eigen::Infinity>() > 0.0;
  const Halfspace h{h_normal, h_offset};

  auto residuals = [&](const Eigen::VectorXd& y) {
    Eigen::VectorXd r(3);
    r[0] = h_active ? halfspace_violation(h, y) : 0.0;
    r[1] = std::max(0.0, -antipolar_residual(region, y));
    r[2] = std::max(0.0, model.model_value_at(y) - d_star);
    return r;
  };

  // Outer-linearization scheme: H, the polyhedral part of L, and (for
  // eps = 0) B' are halfspaces handled exactly; the curved sets contribute
  // supporting halfspaces at their most-violated points until the projection
  // of the center is feasible for everything.
  std::vector<Halfspace> base;
  if (h_active) base.push_back(h);
  if (region.eps == 0.0) base.push_back({-region.b, -1.0});
  const std::vector<Halfspace> level_sets = model.level_halfspaces(d_star);
  base.insert(base.end(), level_sets.begin(), level_sets.end());
  std::vector<Halfspace> planes;  // accumulated linearizations

  auto project_current = [&] {
    std::vector<Halfspace> sets = base;
    sets.insert(sets.end(), planes.begin(), planes.end());
    return project_polyhedral_intersection(y_hat, sets,
                                           config.projection_tolerance,
                                           config.projection_max_iterations);
  };
  DykstraResult dr = project_current();
  const double cut_tolerance =
      std::min(config.projection_tolerance, config.level_projector_tolerance);
  for (int round = 0; round < config.level_projector_max_iterations; ++round) {
    if (!dr.converged) break;
    bool cut_added = false;
    if (auto plane = model.level_linearization(dr.point, d_star + cut_tolerance)) {
      plane->offset = d_star;
      append_cutting_plane(planes, *plane);
      cut_added = true;
    }
    if (region.eps > 0.0 &&
        antipolar_residual(region, dr.point) < -cut_tolerance) {
      // Supporting halfspace of B' at the boundary point nearest the iterate.
      const Eigen::VectorXd boundary = antipolar_project(region, dr.point);
      const Eigen::VectorXd gradient =
          region.b - region.eps * boundary.normalized();
      append_cutting_plane(planes, {-gradient, -gradient.dot(boundary)});
      cut_added = true;
    }
    if (!cut_added) break;
    const int spent = dr.cycles;
    dr = project_current();
    dr.cycles += spent;
  }

  ProjectionResult out;
  out.point = dr.point;
  out.cycles = dr.cycles;
  const Eigen::VectorXd r = residuals(dr.point);
  out.halfspace_residual = r[0];
  out.antipolar_residual = r[1];
  out.level_residual = r[2];
  out.converged = dr.converged && r.maxCoeff() <= config.projection_tolerance;
  return out;
}

RunResult run_bundle(BundleModel& model, const AntipolarDescriptor& region,
                     const SolverConfig& config, const Eigen::VectorXd& y1,
                     const TraceSink& sink, const UpdateInspector& inspector) {
  if (config.delta < 0.0)
    throw std::invalid_argument("run_bundle: delta must be nonnegative");
  if (config.d_star <= 0.0)
    throw std::invalid_argument("run_bundle: d_star must be positive");
  if (config.d_star <= config.delta)
    throw std::invalid_argument("run_bundle: requires d_star > delta");

  const auto started = std::chrono::steady_clock::now();
  auto elapsed = [&] {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() -
                                         started)
        .count();
  };

  RunResult result;
  LevelState& state = result.state;

  Eigen::VectorXd y = y1;
  if (antipolar_residual(region, y) < -1e-12) {
    y = antipolar_project(region, y);
    state.initial_point_adjusted = true;
  }
  model.initialize(y);
  if (inspector) inspector(model, y);

  state.center = y;
  state.iterate = y;
  state.best_iterate = y;
  state.upper_bound = std::numeric_limits<double>::infinity();
  state.iterate_history.push_back(y);

  const double trim = config.bundle_trim_delta.value_or(config.delta);

  for (int k = 1; k <= config.max_iterations; ++k) {
    const BundleModel::Evaluation eval = model.evaluate(y);
    if (eval.support_value < state.upper_bound) {
      state.best_iterate = y;
    }
    std::tie(state.upper_bound, state.gap) =
        upper_bound_and_gap(state.upper_bound, eval.support_value,
                            config.d_star);
    state.iterations = k;

    const TraceRecord record{k,
                             eval.model_value,
                             eval.support_value,
                             state.upper_bound,
                             state.gap,
                             model.bundle_size(),
                             elapsed()};
    state.trace.push_back(record);
    if (sink) sink(record);

    if (state.gap <= config.delta) {
      result.status = RunStatus::converged;
      state.iterate = y;
      return result;
    }
    if (k == config.max_iterations) break;

    const ProjectionResult proj = project_onto_level_set(
        state.center, y, model, region, config.d_star, config);
    if (!proj.converged) {
      result.status = RunStatus::infeasible_level_set;
      state.iterate = y;
      std::ostringstream msg;
      msg << "level-set projection stalled at iteration " << k
          << " (level residual " << proj.level_residual
          << ", halfspace residual " << proj.halfspace_residual
          << ", antipolar residual " << proj.antipolar_residual
          << " after " << proj.cycles
          << " cycles); the level d* may be below the true optimum";
      result.message = msg.str();
      return result;
    }

    y = proj.point;
    model.update(y, trim);
    if (inspector) inspector(model, y);
    state.iterate_history.push_back(y);
  }

  result.status = RunStatus::iteration_limit;
  state.iterate = y;
  result.message = "iteration limit reached before the gap test";
  return result;
}

}  // namespace ap
