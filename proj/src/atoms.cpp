#include "ap/atoms.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>

#include <Eigen/Dense>
#include <Eigen/Eigenvalues>

namespace ap {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

void check_vector_shape(const AtomicSetDescriptor& set,
                        const Eigen::VectorXd& z) {
  if (set.family == AtomicFamily::SpectralPsd)
    throw std::invalid_argument("atoms: spectral set given a vector argument");
  if (z.size() != set.dim)
    throw std::invalid_argument("atoms: vector dimension mismatch");
}

void check_matrix_shape(const AtomicSetDescriptor& set,
                        const Eigen::MatrixXd& z) {
  if (set.family != AtomicFamily::SpectralPsd)
    throw std::invalid_argument("atoms: polyhedral set given a matrix argument");
  if (z.rows() != set.dim || z.cols() != set.dim)
    throw std::invalid_argument("atoms: matrix dimension mismatch");
}

}  // namespace

double support_value(const AtomicSetDescriptor& set, const Eigen::VectorXd& z) {
  check_vector_shape(set, z);
  if (set.family == AtomicFamily::SignedBasis)
    return z.lpNorm<Eigen::Infinity>();
  return std::max(0.0, z.maxCoeff());
}

double support_value(const AtomicSetDescriptor& set, const Eigen::MatrixXd& z) {
  check_matrix_shape(set, z);
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(z,
                                                     Eigen::EigenvaluesOnly);
  return std::max(0.0, eig.eigenvalues().maxCoeff());
}

std::optional<PolyAtom> exposed_atom(const AtomicSetDescriptor& set,
                                     const Eigen::VectorXd& z) {
  check_vector_shape(set, z);
  const bool signed_set = set.family == AtomicFamily::SignedBasis;
  int best = -1;
  double best_value = 0.0;
  for (int i = 0; i < set.dim; ++i) {
    const double v = signed_set ? std::abs(z[i]) : z[i];
    if (v > best_value) {  // strict: ties keep the lowest index
      best_value = v;
      best = i;
    }
  }
  if (best < 0) return std::nullopt;  // support value is zero
  const int sign = signed_set && z[best] < 0.0 ? -1 : 1;
  return PolyAtom{best, sign};
}

std::optional<SpectralAtom> exposed_atom(const AtomicSetDescriptor& set,
                                         const Eigen::MatrixXd& z) {
  check_matrix_shape(set, z);
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(z);
  const Eigen::Index top = z.rows() - 1;  // Eigen sorts ascending
  if (eig.eigenvalues()[top] <= 0.0) return std::nullopt;
  Eigen::VectorXd u = eig.eigenvectors().col(top);
  u.normalize();
  // Sign convention: largest-magnitude entry positive, first such entry on
  // ties.
  Eigen::Index pivot = 0;
  for (Eigen::Index i = 1; i < u.size(); ++i)
    if (std::abs(u[i]) > std::abs(u[pivot])) pivot = i;
  if (u[pivot] < 0.0) u = -u;
  return SpectralAtom{std::move(u)};
}

double polyatom_dot(const PolyAtom& a, const Eigen::VectorXd& z) {
  return static_cast<double>(a.sign) * z[a.index];
}

std::vector<PolyAtom> relaxed_exposed_face(std::span<const PolyAtom> bundle_atoms,
                                           const Eigen::VectorXd& z,
                                           double model_value, double delta) {
  std::vector<PolyAtom> face;
  face.reserve(bundle_atoms.size());
  for (const PolyAtom& a : bundle_atoms) {
    if (polyatom_dot(a, z) < model_value - delta) continue;
    bool seen = false;
    for (const PolyAtom& kept : face)
      if (kept == a) {
        seen = true;
        break;
      }
    if (!seen) face.push_back(a);
  }
  return face;
}

double gauge_value(const AtomicSetDescriptor& set, const Eigen::VectorXd& x) {
  check_vector_shape(set, x);
  if (set.family == AtomicFamily::SignedBasis) return x.lpNorm<1>();
  const double tol = 1e-9 * std::max(1.0, x.lpNorm<Eigen::Infinity>());
  if (x.minCoeff() < -tol) return kInf;
  return x.sum();
}

double gauge_value(const AtomicSetDescriptor& set, const Eigen::MatrixXd& x) {
  check_matrix_shape(set, x);
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(x,
                                                     Eigen::EigenvaluesOnly);
  const double tol = 1e-9 * std::max(1.0, x.norm());
  if (eig.eigenvalues().minCoeff() < -tol) return kInf;
  return x.trace();
}

double antipolar_residual(const AntipolarDescriptor& region,
                          const Eigen::VectorXd& y) {
  return region.b.dot(y) - region.eps * y.norm() - 1.0;
}

namespace {

// Point on the dual path of the projection problem: minimizer of
// 0.5*||u - y||^2 - lambda*(<b,u> - eps*||u|| - 1) over u.
Eigen::VectorXd dual_path_point(const AntipolarDescriptor& region,
                                const Eigen::VectorXd& y, double lambda) {
  const Eigen::VectorXd w = y + lambda * region.b;
  const double nw = w.norm();
  const double radial = nw - lambda * region.eps;
  if (radial <= 0.0 || nw == 0.0)
    return Eigen::VectorXd::Zero(y.size());
  return (radial / nw) * w;
}

}  // namespace

Eigen::VectorXd antipolar_project(const AntipolarDescriptor& region,
                                  const Eigen::VectorXd& y) {
  if (region.b.size() != y.size())
    throw std::invalid_argument("antipolar_project: dimension mismatch");
  if (region.eps < 0.0 || region.b.norm() <= region.eps)
    throw std::invalid_argument(
        "antipolar_project: infeasible region (||b|| must exceed eps)");

  if (antipolar_residual(region, y) >= 0.0) return y;

  if (region.eps == 0.0) {
    const double shift = (1.0 - region.b.dot(y)) / region.b.squaredNorm();
    return y + std::max(0.0, shift) * region.b;
  }

  // Residual along the dual path is nondecreasing in lambda; bracket the root
  // geometrically and bisect.
  auto residual_at = [&](double lambda) {
    return antipolar_residual(region, dual_path_point(region, y, lambda));
  };
  double lo = 0.0;
  double hi = 1.0;
  int growth = 0;
  while (residual_at(hi) < 0.0) {
    lo = hi;
    hi *= 2.0;
    if (++growth > 200)
      throw std::runtime_error("antipolar_project: failed to bracket multiplier");
  }
  for (int it = 0; it < 200 && hi - lo > 1e-10 * std::max(1.0, hi); ++it) {
    const double mid = 0.5 * (lo + hi);
    (residual_at(mid) < 0.0 ? lo : hi) = mid;
  }
  return dual_path_point(region, y, hi);
}

}  // namespace ap
