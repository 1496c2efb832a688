#pragma once

#include <cstdint>
#include <optional>
#include <variant>

#include <Eigen/Core>

#include "ap/atoms.hpp"
#include "ap/linops.hpp"

namespace ap {

struct ProblemInstance {
  std::variant<DenseOperator, RankOneMeasurementOperator> op;
  AtomicSetDescriptor set;
  AntipolarDescriptor region;
  std::optional<Eigen::VectorXd> ground_truth_vector;
  std::optional<Eigen::MatrixXd> ground_truth_matrix;
  double d_star = 0.0;
  std::uint64_t seed = 0;
};

// Sparse-recovery instance: Gaussian M scaled by 1/sqrt(m), k-sparse +-1
// signal, b = M x0 plus (for eps > 0) Gaussian noise rescaled to norm eps/2.
// d* is 1/||x0||_1 in the noiseless case and a reference dual solve otherwise.
// Draw order from the seed: M (column-major), support indices, signs, noise.
ProblemInstance generate_bpdn(int n, int m, int sparsity, double eps,
                              std::uint64_t seed);

// Magnitude-only measurements of a unit-norm Gaussian signal, lifted to the
// PSD matrix space: b_i = <x0 x0^T, m_i m_i^T>, d* = 1.
ProblemInstance generate_phase(int n, int m, std::uint64_t seed);

// Projected subgradient reference solve of min ||M^T y||_inf over B'.
// Returns the best objective value seen, an upper bound on the dual optimum.
double reference_dual_value_bpdn(const DenseOperator& op,
                                 const AntipolarDescriptor& region,
                                 int iterations = 20000);

// b/<b,b> (so <b,y> = 1), projected into B' when eps > 0.
Eigen::VectorXd default_initial_point(const AntipolarDescriptor& region);

}  // namespace ap
