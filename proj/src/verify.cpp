#include <cmath>
#include <cstdio>
#include <functional>
#include <string>

#include <Eigen/Dense>
#include <Eigen/Eigenvalues>

#include "ap/experiment.hpp"
#include "ap/rng.hpp"

namespace ap {

namespace {

Eigen::MatrixXd random_symmetric(Rng& rng, int n) {
  const Eigen::MatrixXd a = rng.normal_matrix(n, n);
  return 0.5 * (a + a.transpose());
}

Eigen::MatrixXd random_orthonormal(Rng& rng, int n, int r) {
  const Eigen::MatrixXd a = rng.normal_matrix(n, r);
  Eigen::HouseholderQR<Eigen::MatrixXd> qr(a);
  return Eigen::MatrixXd(qr.householderQ()).leftCols(r);
}

// Random PSD matrix with trace exactly `trace`.
Eigen::MatrixXd random_psd(Rng& rng, int n, double trace) {
  const Eigen::MatrixXd a = rng.normal_matrix(n, n);
  Eigen::MatrixXd w = a * a.transpose();
  w *= trace / w.trace();
  return w;
}

SpectralBundle random_spectral_bundle(Rng& rng, int n, int r) {
  SpectralBundle bundle = make_spectral_bundle(n);
  bundle.P = random_orthonormal(rng, n, r);
  bundle.W = random_psd(rng, n, 0.2 + 0.8 * rng.uniform());
  return bundle;
}

struct Verifier {
  int failures = 0;

  void suite(const std::string& name, const std::function<bool()>& body) {
    const bool ok = body();
    std::printf("[%s] %s\n", ok ? " ok " : "FAIL", name.c_str());
    if (!ok) ++failures;
  }
};

bool close(double a, double b, double tol) { return std::abs(a - b) <= tol; }

}  // namespace

int run_verify(std::uint64_t seed, int trials) {
  Verifier v;

  v.suite("linops: adjoint identity and symmetry", [&] {
    Rng rng(seed);
    for (int t = 0; t < trials; ++t) {
      const int m = 2 + static_cast<int>(rng.integer_below(6));
      const int n = m + static_cast<int>(rng.integer_below(6));
      const DenseOperator op(rng.normal_matrix(m, n));
      const Eigen::VectorXd x = rng.normal_vector(n);
      const Eigen::VectorXd y = rng.normal_vector(m);
      const double lhs = op.apply(x).dot(y);
      const double rhs = x.dot(op.adjoint(y));
      if (!close(lhs, rhs, 1e-12 * std::max(1.0, std::abs(lhs)))) return false;

      const RankOneMeasurementOperator rop(rng.normal_matrix(n, m));
      const Eigen::MatrixXd xm = random_symmetric(rng, n);
      const Eigen::MatrixXd back = rop.adjoint(y);
      const double lhs2 = rop.apply(xm).dot(y);
      const double rhs2 = xm.cwiseProduct(back).sum();
      if (!close(lhs2, rhs2, 1e-12 * std::max(1.0, std::abs(lhs2)))) return false;
      if ((back - back.transpose()).norm() != 0.0) return false;
    }
    return true;
  });

  v.suite("atoms: support calculus and gauge pairing", [&] {
    Rng rng(seed + 1);
    const AtomicSetDescriptor vec{AtomicFamily::SignedBasis, 8};
    const AtomicSetDescriptor psd{AtomicFamily::SpectralPsd, 6};
    for (int t = 0; t < trials; ++t) {
      const Eigen::VectorXd z1 = rng.normal_vector(8);
      const Eigen::VectorXd z2 = rng.normal_vector(8);
      const double s = rng.uniform() * 3.0;
      if (!close(support_value(vec, (s * z1).eval()), s * support_value(vec, z1),
                 1e-12 * std::max(1.0, support_value(vec, z1))))
        return false;
      if (support_value(vec, (z1 + z2).eval()) >
          support_value(vec, z1) + support_value(vec, z2) + 1e-12)
        return false;
      const auto atom = exposed_atom(vec, z1);
      if (!atom) return false;
      if (!close(polyatom_dot(*atom, z1), support_value(vec, z1),
                 1e-10 * std::max(1.0, support_value(vec, z1))))
        return false;
      if (gauge_value(vec, Eigen::VectorXd(Eigen::VectorXd::Unit(8, atom->index) *
                                           atom->sign)) > 1.0 + 1e-12)
        return false;

      const Eigen::MatrixXd zm1 = random_symmetric(rng, 6);
      const Eigen::MatrixXd zm2 = random_symmetric(rng, 6);
      if (support_value(psd, (zm1 + zm2).eval()) >
          support_value(psd, zm1) + support_value(psd, zm2) + 1e-12)
        return false;
      if (auto satom = exposed_atom(psd, zm1)) {
        const Eigen::MatrixXd a = satom->u * satom->u.transpose();
        if (!close(a.cwiseProduct(zm1).sum(), support_value(psd, zm1),
                   1e-10 * std::max(1.0, support_value(psd, zm1))))
          return false;
        if (gauge_value(psd, a) > 1.0 + 1e-9) return false;
        if (a.cwiseProduct(zm2).sum() > support_value(psd, zm2) + 1e-9)
          return false;
      }
    }
    return true;
  });

  v.suite("atoms: antipolar projection feasible and idempotent", [&] {
    Rng rng(seed + 2);
    for (int t = 0; t < trials; ++t) {
      const int m = 2 + static_cast<int>(rng.integer_below(5));
      Eigen::VectorXd b = rng.normal_vector(m);
      b *= (1.0 + rng.uniform()) / b.norm();
      const double eps = rng.uniform() < 0.5 ? 0.0 : 0.3 * b.norm() * rng.uniform();
      const AntipolarDescriptor region{b, eps};
      const Eigen::VectorXd y = 3.0 * rng.normal_vector(m);
      const Eigen::VectorXd p = antipolar_project(region, y);
      if (antipolar_residual(region, p) < -1e-8) return false;
      if ((antipolar_project(region, p) - p).norm() > 1e-9) return false;
    }
    return true;
  });

  v.suite("poly: model inscribes the support function", [&] {
    Rng rng(seed + 3);
    const AtomicSetDescriptor set{AtomicFamily::SignedBasis, 10};
    for (int t = 0; t < trials; ++t) {
      PolyBundle bundle;
      const int count = 1 + static_cast<int>(rng.integer_below(6));
      for (int j = 0; j < count; ++j)
        bundle.atoms.push_back({static_cast<int>(rng.integer_below(10)),
                                rng.uniform() < 0.5 ? 1 : -1});
      const Eigen::VectorXd z = rng.normal_vector(10);
      const double model = poly_model_value(bundle, z);
      if (model > support_value(set, z) + 1e-9) return false;

      const PolyBundle next = poly_bundle_update(bundle, z, 0.0, set);
      const auto fresh = exposed_atom(set, z);
      bool has_fresh = false;
      for (const PolyAtom& a : next.atoms)
        if (fresh && a == *fresh) has_fresh = true;
      if (fresh && !has_fresh) return false;
      for (const PolyAtom& a :
           relaxed_exposed_face(bundle.atoms, z, model, 0.0)) {
        bool kept = false;
        for (const PolyAtom& n : next.atoms)
          if (n == a) kept = true;
        if (!kept) return false;
      }
    }
    return true;
  });

  v.suite("spectral: closed-form model dominates sampled elements", [&] {
    Rng rng(seed + 4);
    const AtomicSetDescriptor psd{AtomicFamily::SpectralPsd, 8};
    for (int t = 0; t < trials; ++t) {
      const SpectralBundle bundle =
          random_spectral_bundle(rng, 8, 1 + static_cast<int>(rng.integer_below(4)));
      const Eigen::MatrixXd z = random_symmetric(rng, 8);
      const double model = spectral_model_value(bundle, z);
      if (model > support_value(psd, z) + 1e-9) return false;
      const int r = static_cast<int>(bundle.P.cols());
      for (int s = 0; s < 50; ++s) {
        const double alpha = rng.uniform();
        const Eigen::MatrixXd vmat = random_psd(rng, r, (1.0 - alpha) * rng.uniform());
        const Eigen::MatrixXd element =
            alpha * bundle.W + bundle.P * vmat * bundle.P.transpose();
        if (element.cwiseProduct(z).sum() > model + 1e-9) return false;
      }
      const SpectralExposed exposed = spectral_exposed_element(bundle, z);
      const Eigen::MatrixXd attained =
          exposed.alpha * bundle.W +
          bundle.P * exposed.v * bundle.P.transpose();
      if (!close(attained.cwiseProduct(z).sum(), model,
                 1e-9 * std::max(1.0, std::abs(model))))
        return false;

      const SpectralBundle next = spectral_bundle_update(bundle, exposed, z);
      if (next.P.cols() > 0) {
        const Eigen::MatrixXd gram = next.P.transpose() * next.P;
        if ((gram - Eigen::MatrixXd::Identity(next.P.cols(), next.P.cols()))
                .cwiseAbs()
                .maxCoeff() > 1e-10)
          return false;
      }
      if (next.W.trace() > 1.0 + 1e-9) return false;
      Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(next.W,
                                                         Eigen::EigenvaluesOnly);
      if (eig.eigenvalues().minCoeff() < -1e-9) return false;
      if (attained.cwiseProduct(z).sum() >
          spectral_model_value(next, z) + 1e-8)
        return false;
    }
    return true;
  });

  v.suite("bundle: pipeline invariants on a small instance", [&] {
    Rng rng(seed + 5);
    for (int t = 0; t < std::max(1, trials / 16); ++t) {
      const ProblemInstance instance =
          generate_bpdn(24, 12, 3, 0.0, seed + 100 + t);
      PolyDualModel model(std::get<DenseOperator>(instance.op), instance.set);
      SolverConfig config;
      config.delta = 1e-6;
      config.d_star = instance.d_star;
      config.max_iterations = 400;
      const RunResult run = run_bundle(
          model, instance.region, config,
          default_initial_point(instance.region));
      if (run.status != RunStatus::converged) return false;
      double previous = std::numeric_limits<double>::infinity();
      for (const TraceRecord& r : run.state.trace) {
        if (r.upper_bound > previous + 1e-15) return false;
        previous = r.upper_bound;
        if (r.model_value > r.support_value + 1e-9) return false;
        if (std::abs(r.gap - (r.upper_bound - instance.d_star)) > 1e-12)
          return false;
      }
      for (const Eigen::VectorXd& y : run.state.iterate_history)
        if (antipolar_residual(instance.region, y) < -1e-7) return false;

      const PolyRecovery recovery =
          recover_primal_poly(model.bundle(), model.op(), instance.region);
      if (recovery.status != RecoveryStatus::ok) return false;
      const Eigen::VectorXd z =
          model.op().adjoint(run.state.best_iterate);
      const double pairing = recovery.x.dot(z);
      const double product = gauge_value(instance.set, recovery.x) *
                             support_value(instance.set, z);
      if (pairing < 1.0 - 1e-6) return false;
      if (pairing > product + 1e-6 * std::max(1.0, product)) return false;
    }
    return true;
  });

  return v.failures;
}

}  // namespace ap
