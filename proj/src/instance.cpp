#include "ap/instance.hpp"

#include <cmath>
#include <stdexcept>

#include "ap/rng.hpp"

namespace ap {

ProblemInstance generate_bpdn(int n, int m, int sparsity, double eps,
                              std::uint64_t seed) {
  if (n <= 0 || m <= 0 || sparsity <= 0 || sparsity > n || m > n)
    throw std::invalid_argument("generate_bpdn: invalid dimensions");
  if (eps < 0.0) throw std::invalid_argument("generate_bpdn: negative eps");

  Rng rng(seed);
  Eigen::MatrixXd a = rng.normal_matrix(m, n) / std::sqrt(double(m));

  Eigen::VectorXd x0 = Eigen::VectorXd::Zero(n);
  const std::vector<int> support = rng.sample_without_replacement(n, sparsity);
  for (int idx : support) x0[idx] = rng.uniform() < 0.5 ? 1.0 : -1.0;

  Eigen::VectorXd b = a * x0;
  if (eps > 0.0) {
    Eigen::VectorXd noise = rng.normal_vector(m);
    noise *= (eps / 2.0) / noise.norm();
    b += noise;
  }

  ProblemInstance instance{
      DenseOperator(std::move(a)),
      AtomicSetDescriptor{AtomicFamily::SignedBasis, n},
      AntipolarDescriptor{b, eps},
      x0,
      std::nullopt,
      0.0,
      seed};
  if (eps == 0.0) {
    instance.d_star = 1.0 / x0.lpNorm<1>();
  } else {
    instance.d_star = reference_dual_value_bpdn(
        std::get<DenseOperator>(instance.op), instance.region);
  }
  return instance;
}

ProblemInstance generate_phase(int n, int m, std::uint64_t seed) {
  if (n <= 0 || m <= 0)
    throw std::invalid_argument("generate_phase: invalid dimensions");

  Rng rng(seed);
  Eigen::VectorXd x0 = rng.normal_vector(n).normalized();
  Eigen::MatrixXd vectors = rng.normal_matrix(n, m);

  Eigen::VectorXd b(m);
  for (int i = 0; i < m; ++i) {
    const double ip = x0.dot(vectors.col(i));
    b[i] = ip * ip;
  }

  return ProblemInstance{
      RankOneMeasurementOperator(std::move(vectors)),
      AtomicSetDescriptor{AtomicFamily::SpectralPsd, n},
      AntipolarDescriptor{b, 0.0},
      std::nullopt,
      Eigen::MatrixXd(x0 * x0.transpose()),
      1.0,  // trace(x0 x0^T) = 1 for the unit-norm signal
      seed};
}

double reference_dual_value_bpdn(const DenseOperator& op,
                                 const AntipolarDescriptor& region,
                                 int iterations) {
  Eigen::VectorXd y = default_initial_point(region);
  const AtomicSetDescriptor set{AtomicFamily::SignedBasis,
                                static_cast<int>(op.cols())};
  double best = support_value(set, op.adjoint(y));
  const double base_step = std::max(1.0, y.norm());
  for (int k = 1; k <= iterations; ++k) {
    const Eigen::VectorXd z = op.adjoint(y);
    const auto atom = exposed_atom(set, z);
    if (!atom) break;
    const Eigen::VectorXd g =
        static_cast<double>(atom->sign) * op.matrix().col(atom->index);
    y = antipolar_project(region, y - (base_step / std::sqrt(double(k))) * g);
    best = std::min(best, support_value(set, op.adjoint(y)));
  }
  return best;
}

Eigen::VectorXd default_initial_point(const AntipolarDescriptor& region) {
  if (region.b.squaredNorm() == 0.0)
    throw std::invalid_argument("default_initial_point: b must be nonzero");
  Eigen::VectorXd y = region.b / region.b.squaredNorm();
  if (region.eps > 0.0) y = antipolar_project(region, y);
  return y;
}

}  // namespace ap
