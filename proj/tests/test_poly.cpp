#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <Eigen/Dense>

#include "ap/bundle.hpp"
#include "ap/instance.hpp"
#include "ap/poly.hpp"
#include "ap/rng.hpp"
#include "oracles.hpp"

using namespace ap;

namespace {

const AtomicSetDescriptor kSigned2{AtomicFamily::SignedBasis, 2};

Eigen::VectorXd vec2(double a, double b) {
  Eigen::VectorXd v(2);
  v << a, b;
  return v;
}

bool contains(const PolyBundle& bundle, const PolyAtom& atom) {
  for (const PolyAtom& a : bundle.atoms)
    if (a == atom) return true;
  return false;
}

}  // namespace

TEST_CASE("model value is the max inner product over stored atoms") {
  PolyBundle bundle{{{0, 1}}};
  CHECK(poly_model_value(bundle, vec2(3, -5)) == 3.0);
  bundle.atoms.push_back({1, -1});
  CHECK(poly_model_value(bundle, vec2(3, -5)) == 5.0);
}

TEST_CASE("model value on an empty bundle is an error") {
  CHECK_THROWS_AS(poly_model_value(PolyBundle{}, vec2(1, 1)),
                  std::invalid_argument);
}

TEST_CASE("model value equals brute force exactly on random bundles") {
  Rng rng(3);
  for (int t = 0; t < 100; ++t) {
    const int n = 4 + static_cast<int>(rng.integer_below(8));
    PolyBundle bundle;
    const int count = 1 + static_cast<int>(rng.integer_below(8));
    for (int j = 0; j < count; ++j)
      bundle.atoms.push_back({static_cast<int>(rng.integer_below(n)),
                              rng.uniform() < 0.5 ? 1 : -1});
    for (int p = 0; p < 100; ++p) {
      const Eigen::VectorXd z = rng.normal_vector(n);
      double brute = -std::numeric_limits<double>::infinity();
      for (const PolyAtom& a : bundle.atoms)
        brute = std::max(brute, a.sign > 0 ? z[a.index] : -z[a.index]);
      CHECK(poly_model_value(bundle, z) == brute);
    }
  }
}

TEST_CASE("bundle update trims away dominated atoms") {
  const PolyBundle bundle{{{0, 1}, {1, 1}}};
  const PolyBundle next =
      poly_bundle_update(bundle, vec2(1, 0.2), 0.01, kSigned2);
  REQUIRE(next.atoms.size() == 1);
  CHECK(next.atoms[0] == PolyAtom{0, 1});
}

TEST_CASE("bundle update adds the newly exposed atom") {
  const PolyBundle bundle{{{0, 1}}};
  const PolyBundle next = poly_bundle_update(bundle, vec2(0.5, 2), 0.0, kSigned2);
  REQUIRE(next.atoms.size() == 2);
  CHECK(next.atoms[0] == PolyAtom{0, 1});
  CHECK(next.atoms[1] == PolyAtom{1, 1});
}

TEST_CASE("bundle update with a huge slack keeps a superset") {
  const PolyBundle bundle{{{0, 1}, {1, -1}}};
  const PolyBundle next = poly_bundle_update(bundle, vec2(-0.3, 4), 100.0, kSigned2);
  for (const PolyAtom& a : bundle.atoms) CHECK(contains(next, a));
  CHECK(contains(next, PolyAtom{1, 1}));  // the exposed atom
  CHECK(next.atoms.size() == 4);          // every atom is within the slack
}

TEST_CASE("bundle update containment properties on random data") {
  Rng rng(5);
  const AtomicSetDescriptor set{AtomicFamily::SignedBasis, 9};
  for (int t = 0; t < 300; ++t) {
    PolyBundle bundle;
    const int count = 1 + static_cast<int>(rng.integer_below(6));
    for (int j = 0; j < count; ++j)
      bundle.atoms.push_back({static_cast<int>(rng.integer_below(9)),
                              rng.uniform() < 0.5 ? 1 : -1});
    const Eigen::VectorXd z = rng.normal_vector(9);
    const double delta = rng.uniform() < 0.3 ? 0.0 : 0.2 * rng.uniform();
    const PolyBundle next = poly_bundle_update(bundle, z, delta, set);

    // exact exposed face of the stored bundle survives
    const double model = poly_model_value(bundle, z);
    for (const PolyAtom& a :
         relaxed_exposed_face(bundle.atoms, z, model, 0.0))
      CHECK(contains(next, a));
    // the full-set exposed atom joins
    const auto fresh = exposed_atom(set, z);
    REQUIRE(fresh.has_value());
    CHECK(contains(next, *fresh));
    // inscribing: every stored atom evaluates below the true support value
    CHECK(poly_model_value(next, z) <= support_value(set, z) + 1e-12);
    // harvested atoms all clear the threshold
    for (const PolyAtom& a : next.atoms)
      CHECK(polyatom_dot(a, z) >= model - delta - 1e-12);
  }
}

TEST_CASE("recovery over the exact support of an identity operator") {
  // x0 = (3, 0, -2, 0), M = I, eps = 0.
  DenseOperator op(Eigen::MatrixXd::Identity(4, 4));
  Eigen::VectorXd b(4);
  b << 3, 0, -2, 0;
  const PolyBundle bundle{{{0, 1}, {2, -1}}};
  const PolyRecovery rec =
      recover_primal_poly(bundle, op, AntipolarDescriptor{b, 0.0});
  REQUIRE(rec.status == RecoveryStatus::ok);
  CHECK((rec.x - b).norm() <= 1e-8);
  CHECK(rec.coefficients[0] == doctest::Approx(3.0).epsilon(1e-8));
  CHECK(rec.coefficients[1] == doctest::Approx(2.0).epsilon(1e-8));
  CHECK(rec.gauge == doctest::Approx(5.0).epsilon(1e-8));
}

TEST_CASE("recovery reproduces the ground truth when the bundle covers it") {
  const ProblemInstance inst = generate_bpdn(32, 16, 4, 0.0, 77);
  const auto& op = std::get<DenseOperator>(inst.op);
  const Eigen::VectorXd& x0 = *inst.ground_truth_vector;

  PolyBundle bundle;
  for (int i = 0; i < 32; ++i)
    if (x0[i] != 0.0) bundle.atoms.push_back({i, x0[i] > 0 ? 1 : -1});
  // a few distractor atoms
  bundle.atoms.push_back({0, x0[0] > 0 ? -1 : 1});
  bundle.atoms.push_back({7, 1});

  const PolyRecovery rec = recover_primal_poly(bundle, op, inst.region);
  REQUIRE(rec.status == RecoveryStatus::ok);
  CHECK((rec.x - x0).norm() / x0.norm() <= 1e-6);

  // coefficients are nonnegative and sum to the recovered gauge
  double total = 0.0;
  for (double c : rec.coefficients) {
    CHECK(c >= 0.0);
    total += c;
  }
  CHECK(total == doctest::Approx(rec.gauge).epsilon(1e-10));
  CHECK(rec.gauge ==
        doctest::Approx(gauge_value(inst.set, rec.x)).epsilon(1e-10));
}

TEST_CASE("recovery flags an unreachable observation") {
  DenseOperator op(Eigen::MatrixXd::Identity(3, 3));
  Eigen::VectorXd b(3);
  b << 1, 1, 1;
  const PolyBundle bundle{{{0, 1}}};  // can only reach multiples of e_0
  const PolyRecovery rec = recover_primal_poly(
      bundle, op, AntipolarDescriptor{b, 0.0},
      PolyRecoveryOptions{.feasibility_tolerance = 1e-8,
                          .gap_tolerance = 1e-8,
                          .max_iterations = 5000});
  CHECK(rec.status == RecoveryStatus::infeasible);
  CHECK(rec.residual > 1.0);
}

TEST_CASE("recovered gauge respects the finite-termination bound") {
  // One small instance per delta; the acceptance suite covers the full grid.
  for (double delta : {1e-2, 1e-3}) {
    const ProblemInstance inst = generate_bpdn(16, 8, 2, 0.0, 21);
    PolyDualModel model(std::get<DenseOperator>(inst.op), inst.set);
    SolverConfig cfg;
    cfg.delta = delta;
    cfg.d_star = inst.d_star;
    cfg.max_iterations = 300;
    const RunResult run = run_bundle(model, inst.region, cfg,
                                     default_initial_point(inst.region));
    REQUIRE(run.status == RunStatus::converged);
    const PolyRecovery rec =
        recover_primal_poly(model.bundle(), model.op(), inst.region);
    REQUIRE(rec.status == RecoveryStatus::ok);
    const auto l1 = oracle::min_l1_norm(model.op().matrix(), inst.region.b);
    REQUIRE(l1.feasible);
    const double bound = delta / (inst.d_star * (inst.d_star - delta));
    CHECK(rec.gauge - l1.objective <= bound + 1e-9);
    CHECK(rec.gauge - l1.objective >= -1e-8);
  }
}
