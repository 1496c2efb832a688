#include "ap/spectral.hpp"

#include <cmath>
#include <stdexcept>
#include <vector>

#include <Eigen/Dense>
#include <Eigen/Eigenvalues>

#include "ap/atoms.hpp"

namespace ap {

namespace {

constexpr double kDenominatorFloor = 1e-12;
constexpr double kColumnDropTolerance = 1e-10;

void check_square(const SpectralBundle& bundle, const Eigen::MatrixXd& z) {
  if (z.rows() != bundle.W.rows() || z.cols() != bundle.W.cols())
    throw std::invalid_argument("spectral model: dimension mismatch");
}

// Modified Gram-Schmidt; columns whose residual falls below the drop
// tolerance are removed.
Eigen::MatrixXd orthonormalize(const std::vector<Eigen::VectorXd>& columns,
                               Eigen::Index dim) {
  Eigen::MatrixXd q(dim, static_cast<Eigen::Index>(columns.size()));
  Eigen::Index kept = 0;
  for (const Eigen::VectorXd& col : columns) {
    Eigen::VectorXd w = col;
    for (Eigen::Index j = 0; j < kept; ++j) w -= q.col(j).dot(w) * q.col(j);
    // Second pass for numerical orthogonality.
    for (Eigen::Index j = 0; j < kept; ++j) w -= q.col(j).dot(w) * q.col(j);
    const double n = w.norm();
    if (n < kColumnDropTolerance) continue;
    q.col(kept++) = w / n;
  }
  return q.leftCols(kept);
}

}  // namespace

SpectralBundle make_spectral_bundle(int dim, int r_max) {
  SpectralBundle bundle;
  bundle.W = Eigen::MatrixXd::Zero(dim, dim);
  bundle.P = Eigen::MatrixXd::Zero(dim, 0);
  bundle.r_max = r_max;
  return bundle;
}

double spectral_model_value(const SpectralBundle& bundle,
                            const Eigen::MatrixXd& z) {
  check_square(bundle, z);
  double value = std::max(0.0, bundle.W.cwiseProduct(z).sum());
  if (bundle.P.cols() > 0) {
    const Eigen::MatrixXd t = bundle.P.transpose() * z * bundle.P;
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(t,
                                                       Eigen::EigenvaluesOnly);
    value = std::max(value, eig.eigenvalues().maxCoeff());
  }
  return value;
}

SpectralExposed spectral_exposed_element(const SpectralBundle& bundle,
                                         const Eigen::MatrixXd& z) {
  check_square(bundle, z);
  const Eigen::Index r = bundle.P.cols();
  const double w_value = bundle.W.cwiseProduct(z).sum();

  double lambda_value = -std::numeric_limits<double>::infinity();
  Eigen::VectorXd leading;
  if (r > 0) {
    const Eigen::MatrixXd t = bundle.P.transpose() * z * bundle.P;
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(t);
    lambda_value = eig.eigenvalues()[r - 1];
    leading = eig.eigenvectors().col(r - 1);
  }

  const double best = std::max({0.0, lambda_value, w_value});
  SpectralExposed exposed;
  exposed.v = Eigen::MatrixXd::Zero(r, r);
  if (r > 0 && lambda_value == best) {
    exposed.v = leading * leading.transpose();
  } else if (w_value == best) {
    exposed.alpha = 1.0;
  }
  return exposed;
}

SpectralBundle spectral_bundle_update(const SpectralBundle& bundle,
                                      const SpectralExposed& exposed,
                                      const Eigen::MatrixXd& z_next) {
  check_square(bundle, z_next);
  const Eigen::Index n = bundle.W.rows();
  const Eigen::Index r = bundle.P.cols();
  if (exposed.v.rows() != r || exposed.v.cols() != r)
    throw std::invalid_argument("spectral_bundle_update: exposed element has wrong size");

  // Split the exposed V: Q1 spans the leading eigenvalue (with multiplicity),
  // Lambda2/Q2 hold the remainder destined for aggregation.
  Eigen::MatrixXd q1(n, 0);
  Eigen::MatrixXd aggregate_numerator = exposed.alpha * bundle.W;
  double aggregate_denominator = exposed.alpha;
  double lambda1 = 0.0;
  if (r > 0) {
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(exposed.v);
    const Eigen::VectorXd lambda = eig.eigenvalues();
    lambda1 = lambda[r - 1];
    const double split = lambda1 - 1e-8 * std::abs(lambda1);
    std::vector<Eigen::VectorXd> top;
    for (Eigen::Index i = r - 1; i >= 0; --i) {
      if (lambda[i] >= split) {
        top.emplace_back(bundle.P * eig.eigenvectors().col(i));
      } else {
        const double weight = std::max(lambda[i], 0.0);
        const Eigen::VectorXd dir = bundle.P * eig.eigenvectors().col(i);
        aggregate_numerator += weight * dir * dir.transpose();
        aggregate_denominator += weight;
      }
    }
    q1.resize(n, static_cast<Eigen::Index>(top.size()));
    for (size_t i = 0; i < top.size(); ++i)
      q1.col(static_cast<Eigen::Index>(i)) = top[i];
  }

  // New basis direction from the full atomic set; skipped when z_next has no
  // positive eigenvalue.
  const AtomicSetDescriptor spectral_set{AtomicFamily::SpectralPsd,
                                         static_cast<int>(n)};
  std::vector<Eigen::VectorXd> columns;
  for (Eigen::Index j = 0; j < q1.cols(); ++j) columns.push_back(q1.col(j));
  const auto atom = exposed_atom(spectral_set, z_next);
  const bool has_new_direction = atom.has_value();

  // Cap the basis: the newest direction is always kept, trailing face columns
  // fold into the aggregate with their leading-eigenvalue weight.
  SpectralBundle next;
  next.r_max = bundle.r_max;
  const size_t face_budget = static_cast<size_t>(
      std::max(0, bundle.r_max - (has_new_direction ? 1 : 0)));
  if (columns.size() > face_budget) {
    for (size_t i = face_budget; i < columns.size(); ++i) {
      aggregate_numerator += lambda1 * columns[i] * columns[i].transpose();
      aggregate_denominator += lambda1;
    }
    columns.resize(face_budget);
  }
  if (has_new_direction) columns.push_back(atom->u);

  next.P = orthonormalize(columns, n);
  if (aggregate_denominator > kDenominatorFloor) {
    next.W = aggregate_numerator / aggregate_denominator;
    next.W = 0.5 * (next.W + next.W.transpose()).eval();
  } else {
    next.W = Eigen::MatrixXd::Zero(n, n);
  }
  return next;
}

SpectralRecovery recover_primal_spectral(const SpectralBundle& bundle,
                                         const RankOneMeasurementOperator& op,
                                         const Eigen::VectorXd& b,
                                         const SpectralRecoveryOptions& options) {
  const Eigen::Index n = op.dim();
  const Eigen::Index r = bundle.P.cols();
  if (bundle.W.rows() != n)
    throw std::invalid_argument("recover_primal_spectral: dimension mismatch");

  const bool has_w = bundle.W.cwiseAbs().maxCoeff() > 0.0;

  auto assemble = [&](double s, const Eigen::MatrixXd& coeff) {
    Eigen::MatrixXd x = s * bundle.W;
    if (r > 0) x += bundle.P * coeff * bundle.P.transpose();
    return x;
  };

  // Lipschitz constant of the gradient via power iteration on Phi* Phi,
  // Phi(s, S) = M(s*W + P S P^T).
  double lip = 1.0;
  {
    double s = has_w ? 1.0 : 0.0;
    Eigen::MatrixXd coeff = Eigen::MatrixXd::Identity(r, r);
    double norm = std::sqrt(s * s + coeff.squaredNorm());
    if (norm == 0.0) norm = 1.0;
    s /= norm;
    coeff /= norm;
    for (int it = 0; it < 80; ++it) {
      const Eigen::VectorXd image = op.apply(assemble(s, coeff));
      const Eigen::MatrixXd back = op.adjoint(image);
      double s_next = has_w ? bundle.W.cwiseProduct(back).sum() : 0.0;
      Eigen::MatrixXd coeff_next =
          r > 0 ? Eigen::MatrixXd(bundle.P.transpose() * back * bundle.P)
                : Eigen::MatrixXd::Zero(0, 0);
      norm = std::sqrt(s_next * s_next + coeff_next.squaredNorm());
      if (norm < 1e-300) break;
      s = s_next / norm;
      coeff = coeff_next / norm;
      lip = norm;
    }
  }
  const double step = 1.0 / std::max(lip, 1e-12);

  double s = 0.0;
  Eigen::MatrixXd coeff = Eigen::MatrixXd::Zero(r, r);

  SpectralRecovery out;
  int it = 0;
  double pg_norm = 0.0;
  for (; it < options.max_iterations; ++it) {
    const Eigen::MatrixXd x = assemble(s, coeff);
    const Eigen::VectorXd residual = op.apply(x) - b;
    const Eigen::MatrixXd back = op.adjoint(residual);

    double s_next = s;
    if (has_w) s_next = std::max(0.0, s - step * bundle.W.cwiseProduct(back).sum());
    Eigen::MatrixXd coeff_next = coeff;
    if (r > 0) {
      coeff_next = coeff - step * (bundle.P.transpose() * back * bundle.P);
      coeff_next = 0.5 * (coeff_next + coeff_next.transpose()).eval();
      Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(coeff_next);
      coeff_next = eig.eigenvectors() *
                   eig.eigenvalues().cwiseMax(0.0).asDiagonal() *
                   eig.eigenvectors().transpose();
    }

    pg_norm = std::sqrt(std::pow(s_next - s, 2) + (coeff_next - coeff).squaredNorm()) /
              step;
    s = s_next;
    coeff = coeff_next;
    if (pg_norm <= options.pg_tolerance) {
      ++it;
      break;
    }
  }

  out.x = assemble(s, coeff);
  out.w_weight = s;
  out.basis_coeff = coeff;
  out.gauge = out.x.trace();
  out.residual = (op.apply(out.x) - b).norm();
  out.pg_norm = pg_norm;
  out.iterations = it;
  out.status = pg_norm <= options.pg_tolerance ? RecoveryStatus::ok
                                               : RecoveryStatus::stalled;
  return out;
}

ComplementarityReport strict_complementarity_report(const Eigen::MatrixXd& x,
                                                    const Eigen::MatrixXd& z) {
  ComplementarityReport report;
  {
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(x, Eigen::EigenvaluesOnly);
    const double top = eig.eigenvalues().cwiseAbs().maxCoeff();
    for (Eigen::Index i = 0; i < eig.eigenvalues().size(); ++i)
      if (eig.eigenvalues()[i] > 1e-6 * top) ++report.primal_rank;
  }
  {
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(z, Eigen::EigenvaluesOnly);
    const double top = eig.eigenvalues().maxCoeff();
    const double window = 1e-6 * std::max(1.0, std::abs(top));
    for (Eigen::Index i = 0; i < eig.eigenvalues().size(); ++i)
      if (eig.eigenvalues()[i] >= top - window) ++report.dual_multiplicity;
  }
  report.matched = report.primal_rank == report.dual_multiplicity;
  return report;
}

}  // namespace ap
