#pragma once

#include <optional>
#include <span>
#include <vector>

#include <Eigen/Core>

namespace ap {

// Atomic families with closed-form gauge/support calculus:
//   SignedBasis  {+-e_1, ..., +-e_n}   gauge ||.||_1, support ||.||_inf
//   NonnegBasis  cone{e_1, ..., e_n}   gauge sum + nonneg indicator
//   SpectralPsd  {u u^T : ||u||_2 = 1} gauge trace + PSD indicator,
//                                      support max{lambda_max, 0}
enum class AtomicFamily { SignedBasis, NonnegBasis, SpectralPsd };

struct AtomicSetDescriptor {
  AtomicFamily family;
  int dim;  // ambient n (vector length, or matrix side for SpectralPsd)
};

// sign * e_index; sign is +1 for NonnegBasis atoms.
struct PolyAtom {
  int index;
  int sign;

  friend bool operator==(const PolyAtom&, const PolyAtom&) = default;
};

// Unit vector u representing the atom u u^T.
struct SpectralAtom {
  Eigen::VectorXd u;
};

// Dual feasible region B' = {y : <b,y> - eps*||y||_2 >= 1}; eps = 0 gives the
// halfspace <b,y> >= 1.
struct AntipolarDescriptor {
  Eigen::VectorXd b;
  double eps = 0.0;
};

double support_value(const AtomicSetDescriptor& set, const Eigen::VectorXd& z);
double support_value(const AtomicSetDescriptor& set, const Eigen::MatrixXd& z);

// One atom attaining the support value, or nullopt when the support value is
// zero (z = 0, or z with no positive eigenvalue for SpectralPsd) and the
// exposed face carries no usable subgradient.  Polyhedral ties break to the
// lowest index; the spectral eigenvector is fixed by making its
// largest-magnitude entry positive.
std::optional<PolyAtom> exposed_atom(const AtomicSetDescriptor& set,
                                     const Eigen::VectorXd& z);
std::optional<SpectralAtom> exposed_atom(const AtomicSetDescriptor& set,
                                         const Eigen::MatrixXd& z);

// Atoms a among `bundle_atoms` with <a,z> >= model_value - delta, in input
// order with duplicates removed.  `model_value` must be the support value of
// z over `bundle_atoms`.
std::vector<PolyAtom> relaxed_exposed_face(std::span<const PolyAtom> bundle_atoms,
                                           const Eigen::VectorXd& z,
                                           double model_value, double delta);

// Gauge of x; +infinity outside the cone hull (NonnegBasis outside the
// nonnegative orthant, SpectralPsd outside the PSD cone up to a relative
// eigenvalue tolerance of 1e-9).
double gauge_value(const AtomicSetDescriptor& set, const Eigen::VectorXd& x);
double gauge_value(const AtomicSetDescriptor& set, const Eigen::MatrixXd& x);

double polyatom_dot(const PolyAtom& a, const Eigen::VectorXd& z);

// <b,y> - eps*||y|| - 1; nonnegative iff y is antipolar-feasible.
double antipolar_residual(const AntipolarDescriptor& region,
                          const Eigen::VectorXd& y);

// Euclidean projection onto B'.  eps = 0 is the closed-form halfspace
// projection; eps > 0 solves the scalar dual of the projection problem by
// safeguarded bisection on the multiplier (relative tolerance 1e-10, at most
// 200 iterations).  Requires ||b|| > eps, otherwise B' is empty.
Eigen::VectorXd antipolar_project(const AntipolarDescriptor& region,
                                  const Eigen::VectorXd& y);

}  // namespace ap
