#include "ap/linops.hpp"

#include <stdexcept>

namespace ap {

namespace {

void require(bool ok, const char* what) {
  if (!ok) throw std::invalid_argument(what);
}

}  // namespace

DenseOperator::DenseOperator(Eigen::MatrixXd matrix)
    : matrix_(std::move(matrix)) {
  require(matrix_.rows() > 0 && matrix_.cols() > 0,
          "DenseOperator: empty matrix");
}

Eigen::VectorXd DenseOperator::apply(const Eigen::VectorXd& x) const {
  require(x.size() == cols(), "DenseOperator::apply: dimension mismatch");
  return matrix_ * x;
}

Eigen::VectorXd DenseOperator::adjoint(const Eigen::VectorXd& y) const {
  require(y.size() == rows(), "DenseOperator::adjoint: dimension mismatch");
  return matrix_.transpose() * y;
}

RankOneMeasurementOperator::RankOneMeasurementOperator(Eigen::MatrixXd vectors)
    : vectors_(std::move(vectors)) {
  require(vectors_.rows() > 0 && vectors_.cols() > 0,
          "RankOneMeasurementOperator: empty measurement set");
}

Eigen::VectorXd RankOneMeasurementOperator::apply(
    const Eigen::MatrixXd& x) const {
  require(x.rows() == dim() && x.cols() == dim(),
          "RankOneMeasurementOperator::apply: dimension mismatch");
  const Eigen::Index m = measurement_count();
  Eigen::VectorXd out(m);
  for (Eigen::Index i = 0; i < m; ++i) {
    const auto mi = vectors_.col(i);
    out[i] = mi.dot(x * mi);
  }
  return out;
}

Eigen::VectorXd RankOneMeasurementOperator::rank_one_image(
    const Eigen::VectorXd& u) const {
  require(u.size() == dim(),
          "RankOneMeasurementOperator::rank_one_image: dimension mismatch");
  return (vectors_.transpose() * u).array().square();
}

Eigen::MatrixXd RankOneMeasurementOperator::adjoint(
    const Eigen::VectorXd& y) const {
  require(y.size() == measurement_count(),
          "RankOneMeasurementOperator::adjoint: dimension mismatch");
  Eigen::MatrixXd z =
      vectors_ * y.asDiagonal() * vectors_.transpose();
  // Exactly symmetric output; the product above can drift at roundoff level.
  z = 0.5 * (z + z.transpose()).eval();
  return z;
}

}  // namespace ap
