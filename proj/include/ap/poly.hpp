#pragma once

#include <vector>

#include <Eigen/Core>

#include "ap/atoms.hpp"
#include "ap/linops.hpp"

namespace ap {

// Finite inner approximation A^(k): an ordered, duplicate-free atom list.
// Its support function max_j <a_j, z> is the cutting-plane model.
struct PolyBundle {
  std::vector<PolyAtom> atoms;
};

// max_j <a_j, z> over the stored atoms (no zero floor; the model is the
// support function of the finite list).  Throws on an empty bundle.
double poly_model_value(const PolyBundle& bundle, const Eigen::VectorXd& z);

// Relaxed-face update: every atom of the full set within delta of the stored
// model value at z_next joins the bundle,
//   A^{k+1} = {a in A : <a, z> >= sigma_{A^(k)}(z) - delta},
// which keeps the stored exposed face and always contains the full-set
// argmax (the model minorizes the support function).  Stored atoms that
// survive keep their order; harvested atoms follow by ascending index.  When
// z_next exposes nothing (support value zero) only the stored face is kept.
PolyBundle poly_bundle_update(const PolyBundle& bundle,
                              const Eigen::VectorXd& z_next, double delta,
                              const AtomicSetDescriptor& full_set);

enum class RecoveryStatus { ok, infeasible, stalled };

struct PolyRecovery {
  Eigen::VectorXd x;                 // assembled primal point
  std::vector<double> coefficients;  // one weight per bundle atom, >= 0
  double gauge = 0.0;                // sum of coefficients
  double residual = 0.0;             // ||Mx - b||
  double certified_gap = 0.0;        // restricted primal-dual gap at exit
  int iterations = 0;
  RecoveryStatus status = RecoveryStatus::ok;
};

struct PolyRecoveryOptions {
  double feasibility_tolerance = 1e-8;
  double gap_tolerance = 1e-8;  // relative
  int max_iterations = 200000;
};

// Restricted atomic pursuit over the bundle atoms:
//   minimize sum c_a  subject to ||M(sum c_a a) - b|| <= eps, c >= 0,
// solved by a primal-dual first-order method with an active-set polish; the
// result is certified by the restricted duality gap.
PolyRecovery recover_primal_poly(const PolyBundle& bundle,
                                 const DenseOperator& op,
                                 const AntipolarDescriptor& region,
                                 const PolyRecoveryOptions& options = {});

}  // namespace ap
