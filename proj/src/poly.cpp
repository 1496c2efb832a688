#include "ap/poly.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>

#include <Eigen/Dense>

namespace ap {

double poly_model_value(const PolyBundle& bundle, const Eigen::VectorXd& z) {
  if (bundle.atoms.empty())
    throw std::invalid_argument("poly_model_value: empty bundle");
  double best = -std::numeric_limits<double>::infinity();
  for (const PolyAtom& a : bundle.atoms)
    best = std::max(best, polyatom_dot(a, z));
  return best;
}

PolyBundle poly_bundle_update(const PolyBundle& bundle,
                              const Eigen::VectorXd& z_next, double delta,
                              const AtomicSetDescriptor& full_set) {
  const double model = bundle.atoms.empty()
                           ? support_value(full_set, z_next)
                           : poly_model_value(bundle, z_next);
  PolyBundle next;
  next.atoms = relaxed_exposed_face(bundle.atoms, z_next, model, delta);
  if (!exposed_atom(full_set, z_next)) return next;  // degenerate: face only

  const double threshold = model - delta;
  const bool signed_set = full_set.family == AtomicFamily::SignedBasis;
  auto harvest = [&](int index, int sign) {
    const PolyAtom atom{index, sign};
    if (polyatom_dot(atom, z_next) < threshold) return;
    for (const PolyAtom& kept : next.atoms)
      if (kept == atom) return;
    next.atoms.push_back(atom);
  };
  for (int i = 0; i < full_set.dim; ++i) {
    harvest(i, 1);
    if (signed_set) harvest(i, -1);
  }
  return next;
}

namespace {

// Columns G_j = M a_j for the bundle atoms; signed basis atoms are just
// signed columns of M.
Eigen::MatrixXd atom_image_matrix(const PolyBundle& bundle,
                                  const DenseOperator& op) {
  Eigen::MatrixXd g(op.rows(), static_cast<Eigen::Index>(bundle.atoms.size()));
  for (Eigen::Index j = 0; j < g.cols(); ++j) {
    const PolyAtom& a = bundle.atoms[static_cast<size_t>(j)];
    g.col(j) = static_cast<double>(a.sign) * op.matrix().col(a.index);
  }
  return g;
}

double operator_norm_estimate(const Eigen::MatrixXd& g) {
  Eigen::VectorXd v = Eigen::VectorXd::Ones(g.cols()).normalized();
  double norm = 1.0;
  for (int it = 0; it < 100; ++it) {
    Eigen::VectorXd w = g.transpose() * (g * v);
    const double n = w.norm();
    if (n == 0.0) return 1.0;
    v = w / n;
    norm = std::sqrt(n);
  }
  return norm;
}

// Value of the restricted dual max <b,u> - eps*||u|| s.t. G^T u <= 1, after
// scaling into the feasible set.  The saddle-point variable of the
// primal-dual iteration is u = -y.
double restricted_dual_value(const Eigen::MatrixXd& g,
                             const Eigen::VectorXd& b, double eps,
                             const Eigen::VectorXd& y) {
  const double worst = (-(g.transpose() * y)).maxCoeff();
  const double scale = std::max(1.0, worst);
  return (-b.dot(y) - eps * y.norm()) / scale;
}

// Cancel simultaneously-active opposite-sign pairs (+e_i, -e_i): subtracting
// the common mass keeps Gc unchanged and lowers the objective.
void cancel_opposite_pairs(const PolyBundle& bundle, Eigen::VectorXd& c) {
  const auto k = static_cast<Eigen::Index>(bundle.atoms.size());
  for (Eigen::Index j = 0; j < k; ++j)
    for (Eigen::Index l = j + 1; l < k; ++l) {
      const PolyAtom& a = bundle.atoms[static_cast<size_t>(j)];
      const PolyAtom& b2 = bundle.atoms[static_cast<size_t>(l)];
      if (a.index == b2.index && a.sign != b2.sign) {
        const double common = std::min(c[j], c[l]);
        if (common > 0.0) {
          c[j] -= common;
          c[l] -= common;
        }
      }
    }
}

// Try to refine the iterate to an exact vertex: least-squares on the apparent
// support.  Only accepted when it stays feasible and does not increase the
// objective.
bool polish(const Eigen::MatrixXd& g, const Eigen::VectorXd& b, double eps,
            Eigen::VectorXd& c) {
  const double peak = c.maxCoeff();
  if (peak <= 0.0) return false;
  std::vector<Eigen::Index> support;
  for (Eigen::Index j = 0; j < c.size(); ++j)
    if (c[j] > 1e-7 * peak) support.push_back(j);
  if (support.empty() || static_cast<Eigen::Index>(support.size()) > g.rows())
    return false;

  Eigen::MatrixXd gs(g.rows(), static_cast<Eigen::Index>(support.size()));
  for (size_t j = 0; j < support.size(); ++j) gs.col(j) = g.col(support[j]);
  Eigen::VectorXd cs = gs.colPivHouseholderQr().solve(b);
  if (cs.minCoeff() < -1e-12) return false;
  cs = cs.cwiseMax(0.0);

  const double residual = (gs * cs - b).norm();
  if (residual > std::max(eps, 1e-10 * std::max(1.0, b.norm()))) return false;
  if (cs.sum() > c.sum() + 1e-12) return false;

  c.setZero();
  for (size_t j = 0; j < support.size(); ++j) c[support[j]] = cs[j];
  return true;
}

}  // namespace

PolyRecovery recover_primal_poly(const PolyBundle& bundle,
                                 const DenseOperator& op,
                                 const AntipolarDescriptor& region,
                                 const PolyRecoveryOptions& options) {
  if (bundle.atoms.empty())
    throw std::invalid_argument("recover_primal_poly: empty bundle");

  const Eigen::MatrixXd g = atom_image_matrix(bundle, op);
  const Eigen::VectorXd& b = region.b;
  const double eps = region.eps;
  const auto k = g.cols();

  const double step = 0.99 / std::max(operator_norm_estimate(g), 1e-12);

  // Chambolle-Pock on  min_{c>=0} 1'c + indicator(||Gc - b|| <= eps).
  Eigen::VectorXd c = Eigen::VectorXd::Zero(k);
  Eigen::VectorXd c_bar = c;
  Eigen::VectorXd y = Eigen::VectorXd::Zero(g.rows());

  PolyRecovery out;
  auto finish = [&](RecoveryStatus status, int iterations, double gap) {
    cancel_opposite_pairs(bundle, c);
    out.coefficients.assign(c.data(), c.data() + c.size());
    out.x = Eigen::VectorXd::Zero(op.cols());
    for (Eigen::Index j = 0; j < k; ++j) {
      const PolyAtom& a = bundle.atoms[static_cast<size_t>(j)];
      out.x[a.index] += static_cast<double>(a.sign) * c[j];
    }
    out.gauge = c.sum();
    out.residual = (g * c - b).norm();
    out.certified_gap = gap;
    out.iterations = iterations;
    out.status = status;
    return out;
  };

  int it = 0;
  for (; it < options.max_iterations; ++it) {
    // Dual ascent: prox of the support function of the eps-ball around b.
    Eigen::VectorXd v = y + step * (g * c_bar);
    Eigen::VectorXd center = v / step - b;
    if (eps > 0.0 && center.norm() > eps) center *= eps / center.norm();
    if (eps == 0.0) center.setZero();
    y = v - step * (b + center);

    // Primal descent with the nonnegativity clamp.
    Eigen::VectorXd c_next =
        (c - step * (g.transpose() * y).eval()).array() - step;
    c_next = c_next.cwiseMax(0.0);
    c_bar = 2.0 * c_next - c;
    c = c_next;

    if (it % 50 != 49) continue;

    Eigen::VectorXd candidate = c;
    cancel_opposite_pairs(bundle, candidate);
    const bool polished = polish(g, b, eps, candidate);
    const Eigen::VectorXd& probe = polished ? candidate : c;

    const double feas = (g * probe - b).norm() - eps;
    if (feas > options.feasibility_tolerance) continue;
    const double primal = probe.sum();
    const double dual = restricted_dual_value(g, b, eps, y);
    const double gap = primal - dual;
    if (gap <= options.gap_tolerance * std::max(1.0, primal)) {
      c = probe;
      return finish(RecoveryStatus::ok, it + 1, gap);
    }
  }

  const double feas = (g * c - b).norm() - eps;
  const double gap = c.sum() - restricted_dual_value(g, b, eps, y);
  return finish(feas > options.feasibility_tolerance ? RecoveryStatus::infeasible
                                                     : RecoveryStatus::stalled,
                it, gap);
}

}  // namespace ap
