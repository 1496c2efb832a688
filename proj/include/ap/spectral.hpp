#pragma once

#include <Eigen/Core>

#include "ap/linops.hpp"
#include "ap/poly.hpp"  // RecoveryStatus

namespace ap {

// Spectral inner approximation
//   A^(k) = {alpha*W + P V P^T : alpha >= 0, V >= 0, alpha + tr(V) <= 1}
// with W the PSD aggregation matrix (trace <= 1) and P an orthonormal basis.
// P may have zero columns (degenerate model before any exposed direction).
struct SpectralBundle {
  Eigen::MatrixXd W;  // n x n symmetric PSD, trace <= 1
  Eigen::MatrixXd P;  // n x r, orthonormal columns
  int r_max = 10;     // basis cap; overflow folds into W
};

SpectralBundle make_spectral_bundle(int dim, int r_max = 10);

// Closed-form model value max{0, lambda_max(P^T Z P), <W, Z>}.
double spectral_model_value(const SpectralBundle& bundle,
                            const Eigen::MatrixXd& z);

// A maximizer (alpha, V) of <alpha*W + P V P^T, Z> over the model set.  Ties
// prefer the lambda_max branch, then the W branch, then zero.
struct SpectralExposed {
  double alpha = 0.0;
  Eigen::MatrixXd v;  // r x r PSD
};

SpectralExposed spectral_exposed_element(const SpectralBundle& bundle,
                                         const Eigen::MatrixXd& z);

// Aggregation update: split the exposed V into its leading eigenvalue block
// (kept in the basis) and the remainder (folded into W), then append the
// leading eigenvector of z_next to the basis.  Basis overflow beyond r_max
// folds the dropped columns' weight into W as well.
SpectralBundle spectral_bundle_update(const SpectralBundle& bundle,
                                      const SpectralExposed& exposed,
                                      const Eigen::MatrixXd& z_next);

struct SpectralRecovery {
  Eigen::MatrixXd x;            // recovered PSD matrix s*W + P S P^T
  double w_weight = 0.0;        // s
  Eigen::MatrixXd basis_coeff;  // S, r x r PSD
  double gauge = 0.0;           // trace(x)
  double residual = 0.0;        // ||Mx - b||
  double pg_norm = 0.0;         // projected-gradient norm at exit
  int iterations = 0;
  RecoveryStatus status = RecoveryStatus::ok;
};

struct SpectralRecoveryOptions {
  double pg_tolerance = 1e-9;
  int max_iterations = 50000;
};

// Least squares over the cone of the model set:
//   minimize 0.5*||Mx - b||^2  over  x = s*W + P S P^T, s >= 0, S >= 0,
// by projected gradient with a power-iteration step size.
SpectralRecovery recover_primal_spectral(const SpectralBundle& bundle,
                                         const RankOneMeasurementOperator& op,
                                         const Eigen::VectorXd& b,
                                         const SpectralRecoveryOptions& options = {});

// Strict-complementarity diagnostic: rank of the recovered primal vs the
// multiplicity of the top eigenvalue of the dual certificate M*y.
struct ComplementarityReport {
  int primal_rank = 0;
  int dual_multiplicity = 0;
  bool matched = false;
};

ComplementarityReport strict_complementarity_report(const Eigen::MatrixXd& x,
                                                    const Eigen::MatrixXd& z);

}  // namespace ap
