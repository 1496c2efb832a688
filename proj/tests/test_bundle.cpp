#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <Eigen/Dense>

#include "ap/bundle.hpp"
#include "ap/instance.hpp"
#include "ap/rng.hpp"
#include "oracles.hpp"

using namespace ap;

TEST_CASE("upper bound tracking is a running minimum") {
  CHECK(upper_bound_and_gap(5.0, 3.0, 1.0) == std::pair{3.0, 2.0});
  CHECK(upper_bound_and_gap(3.0, 7.0, 1.0) == std::pair{3.0, 2.0});
  const auto [u, gap] = upper_bound_and_gap(0.25, 0.4, 0.25);
  CHECK(u == 0.25);
  CHECK(gap == 0.0);
}

TEST_CASE("config validation") {
  const ProblemInstance inst = generate_bpdn(8, 4, 1, 0.0, 1);
  PolyDualModel model(std::get<DenseOperator>(inst.op), inst.set);
  const Eigen::VectorXd y1 = default_initial_point(inst.region);

  SolverConfig bad;
  bad.delta = -1.0;
  bad.d_star = 1.0;
  CHECK_THROWS_AS(run_bundle(model, inst.region, bad, y1), std::invalid_argument);
  bad.delta = 0.5;
  bad.d_star = 0.0;
  CHECK_THROWS_AS(run_bundle(model, inst.region, bad, y1), std::invalid_argument);
  bad.d_star = 0.5;  // must exceed delta
  CHECK_THROWS_AS(run_bundle(model, inst.region, bad, y1), std::invalid_argument);
}

TEST_CASE("one-dimensional dual solves in a few iterations") {
  // min |y| subject to 2y >= 1: optimum 0.5 at y = 0.5.
  DenseOperator op(Eigen::MatrixXd::Identity(1, 1));
  const AtomicSetDescriptor set{AtomicFamily::SignedBasis, 1};
  Eigen::VectorXd b(1);
  b << 2.0;
  const AntipolarDescriptor region{b, 0.0};

  PolyDualModel model(op, set);
  SolverConfig cfg;
  cfg.delta = 1e-8;
  cfg.d_star = 0.5;
  cfg.max_iterations = 10;
  const RunResult run =
      run_bundle(model, region, cfg, default_initial_point(region));
  CHECK(run.status == RunStatus::converged);
  CHECK(run.state.iterations <= 3);
  CHECK(run.state.gap <= 1e-8);
  CHECK(std::abs(run.state.best_iterate[0] - 0.5) <= 1e-8);
}

TEST_CASE("a run started at the optimum stops immediately") {
  const ProblemInstance inst = generate_bpdn(16, 8, 2, 0.0, 5);
  PolyDualModel model(std::get<DenseOperator>(inst.op), inst.set);
  SolverConfig cfg;
  cfg.delta = 1e-6;
  cfg.d_star = inst.d_star;
  cfg.max_iterations = 200;
  const RunResult first = run_bundle(model, inst.region, cfg,
                                     default_initial_point(inst.region));
  REQUIRE(first.status == RunStatus::converged);

  PolyDualModel fresh(std::get<DenseOperator>(inst.op), inst.set);
  const RunResult second =
      run_bundle(fresh, inst.region, cfg, first.state.best_iterate);
  CHECK(second.status == RunStatus::converged);
  CHECK(second.state.iterations == 1);
}

TEST_CASE("an infeasible starting point is moved into the dual region") {
  const ProblemInstance inst = generate_bpdn(12, 6, 2, 0.0, 9);
  PolyDualModel model(std::get<DenseOperator>(inst.op), inst.set);
  SolverConfig cfg;
  cfg.delta = 1e-6;
  cfg.d_star = inst.d_star;
  cfg.max_iterations = 300;
  const Eigen::VectorXd outside = -default_initial_point(inst.region);
  const RunResult run = run_bundle(model, inst.region, cfg, outside);
  CHECK(run.state.initial_point_adjusted);
  for (const Eigen::VectorXd& y : run.state.iterate_history)
    CHECK(antipolar_residual(inst.region, y) >= -1e-7);
}

TEST_CASE("projection returns the center when it is already feasible") {
  const ProblemInstance inst = generate_bpdn(10, 5, 2, 0.0, 13);
  PolyDualModel model(std::get<DenseOperator>(inst.op), inst.set);
  const Eigen::VectorXd y1 = default_initial_point(inst.region);
  model.initialize(y1);

  // Inflate the level so the center satisfies every constraint.
  SolverConfig cfg;
  const double inflated =
      model.true_support_value(y1) + 1.0;
  const ProjectionResult proj =
      project_onto_level_set(y1, y1, model, inst.region, inflated, cfg);
  CHECK(proj.converged);
  CHECK((proj.point - y1).norm() == 0.0);
}

TEST_CASE("projection onto two halfspaces matches the hand computation") {
  // H = {y2 <= 0} via y_k = 0, y_hat = (0,1); B' = {y1 >= 1}; level inactive.
  DenseOperator op(Eigen::MatrixXd::Identity(2, 2));
  const AtomicSetDescriptor set{AtomicFamily::SignedBasis, 2};
  PolyDualModel model(op, set);
  Eigen::VectorXd probe(2);
  probe << 5.0, 0.0;  // exposes +e_0 so the level halfspace is y1 <= level
  model.initialize(probe);

  const AntipolarDescriptor region{Eigen::Vector2d(1, 0), 0.0};
  const Eigen::VectorXd y_hat = Eigen::Vector2d(0, 1);
  const Eigen::VectorXd y_k = Eigen::Vector2d::Zero();
  SolverConfig cfg;
  const ProjectionResult proj =
      project_onto_level_set(y_hat, y_k, model, region, 5.0, cfg);
  CHECK(proj.converged);
  CHECK((proj.point - Eigen::Vector2d(1, 0)).norm() <= 1e-9);
}

TEST_CASE("projection agrees with the brute-force active-set oracle") {
  Rng rng(61);
  int verified = 0;
  while (verified < 25) {
    const int m = 2 + static_cast<int>(rng.integer_below(3));  // dim <= 4
    const int n = m + 2;
    DenseOperator op(rng.normal_matrix(m, n));
    const AtomicSetDescriptor set{AtomicFamily::SignedBasis, n};
    PolyDualModel model(op, set);
    model.initialize(rng.normal_vector(m));  // seeds one atom
    PolyBundle seeded = model.bundle();

    // feasible point with slack, then constraints around it
    const Eigen::VectorXd interior = rng.normal_vector(m);
    double level = -1e300;
    for (const PolyAtom& a : seeded.atoms)
      level = std::max(level, polyatom_dot(a, op.adjoint(interior)));
    level += 0.2 + rng.uniform();
    if (level <= 0.05) continue;

    Eigen::VectorXd b = rng.normal_vector(m);
    if (b.dot(interior) <= 0.1) b = -b;
    if (b.dot(interior) <= 0.1) continue;
    b /= b.dot(interior) / (1.0 + rng.uniform());  // <b, interior> in [1, 2]
    const AntipolarDescriptor region{b, 0.0};

    const Eigen::VectorXd y_k = rng.normal_vector(m);
    Eigen::VectorXd y_hat = rng.normal_vector(m);
    if ((y_hat - y_k).dot(interior - y_k) > 0.0)
      y_hat = y_k - (y_hat - y_k);  // keep the interior inside H

    SolverConfig cfg;
    const ProjectionResult proj =
        project_onto_level_set(y_hat, y_k, model, region, level, cfg);
    REQUIRE(proj.converged);

    std::vector<Eigen::VectorXd> normals;
    std::vector<double> offsets;
    const Eigen::VectorXd h = y_hat - y_k;
    if (h.lpNorm<Eigen::Infinity>() > 0.0) {
      normals.push_back(h);
      offsets.push_back(h.dot(y_k));
    }
    normals.push_back(-b);
    offsets.push_back(-1.0);
    for (const PolyAtom& a : seeded.atoms) {
      normals.push_back(static_cast<double>(a.sign) * op.matrix().col(a.index));
      offsets.push_back(level);
    }
    const auto exact = oracle::project_polyhedron(y_hat, normals, offsets);
    REQUIRE(exact.has_value());
    CHECK((proj.point - *exact).norm() <= 1e-6);
    ++verified;
  }
}

TEST_CASE("sparse recovery pipeline satisfies the trace invariants") {
  const ProblemInstance inst = generate_bpdn(32, 16, 3, 0.0, 17);
  PolyDualModel model(std::get<DenseOperator>(inst.op), inst.set);
  SolverConfig cfg;
  cfg.delta = 1e-6;
  cfg.d_star = inst.d_star;
  cfg.max_iterations = 400;

  std::vector<TraceRecord> streamed;
  const RunResult run =
      run_bundle(model, inst.region, cfg, default_initial_point(inst.region),
                 [&](const TraceRecord& r) { streamed.push_back(r); });
  REQUIRE(run.status == RunStatus::converged);
  CHECK(streamed.size() == run.state.trace.size());

  double previous = std::numeric_limits<double>::infinity();
  for (const TraceRecord& r : run.state.trace) {
    CHECK(r.upper_bound <= previous + 1e-15);
    previous = r.upper_bound;
    CHECK(r.model_value <= r.support_value + 1e-9);
    CHECK(r.gap == doctest::Approx(r.upper_bound - inst.d_star).epsilon(1e-14));
  }
  for (const Eigen::VectorXd& y : run.state.iterate_history)
    CHECK(antipolar_residual(inst.region, y) >= -1e-7);

  // the true support was identified
  const Eigen::VectorXd& x0 = *inst.ground_truth_vector;
  for (int i = 0; i < x0.size(); ++i) {
    if (x0[i] == 0.0) continue;
    bool found = false;
    for (const PolyAtom& a : model.bundle().atoms)
      if (a.index == i && a.sign == (x0[i] > 0 ? 1 : -1)) found = true;
    CHECK(found);
  }

  // duality sandwich with the recovered point and the best iterate
  const PolyRecovery rec =
      recover_primal_poly(model.bundle(), model.op(), inst.region);
  REQUIRE(rec.status == RecoveryStatus::ok);
  const Eigen::VectorXd z = model.op().adjoint(run.state.best_iterate);
  const double pairing = rec.x.dot(z);
  const double product =
      gauge_value(inst.set, rec.x) * support_value(inst.set, z);
  CHECK(pairing >= 1.0 - 1e-6);
  CHECK(pairing <= product + 1e-6 * std::max(1.0, product));
}

TEST_CASE("the model stays a lower minorant at random dual points") {
  const ProblemInstance inst = generate_bpdn(24, 12, 3, 0.0, 29);
  PolyDualModel model(std::get<DenseOperator>(inst.op), inst.set);
  SolverConfig cfg;
  cfg.delta = 1e-6;
  cfg.d_star = inst.d_star;
  cfg.max_iterations = 300;
  const RunResult run = run_bundle(model, inst.region, cfg,
                                   default_initial_point(inst.region));
  REQUIRE(run.status == RunStatus::converged);

  Rng rng(31);
  for (int t = 0; t < 100; ++t) {
    const Eigen::VectorXd y =
        antipolar_project(inst.region, 3.0 * rng.normal_vector(12));
    CHECK(model.model_value_at(y) <= model.true_support_value(y) + 1e-9);
  }
}

TEST_CASE("a level below the true optimum is reported as infeasible") {
  const ProblemInstance inst = generate_bpdn(16, 8, 2, 0.0, 37);
  PolyDualModel model(std::get<DenseOperator>(inst.op), inst.set);
  SolverConfig cfg;
  cfg.delta = 1e-8;
  cfg.d_star = 0.25 * inst.d_star;
  cfg.max_iterations = 100;
  const RunResult run = run_bundle(model, inst.region, cfg,
                                   default_initial_point(inst.region));
  CHECK(run.status == RunStatus::infeasible_level_set);
  CHECK(!run.message.empty());
}
