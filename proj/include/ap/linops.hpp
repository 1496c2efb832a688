#pragma once

#include <Eigen/Core>

namespace ap {

// Dense measurement operator M : R^n -> R^m with adjoint M^T.
class DenseOperator {
 public:
  using Primal = Eigen::VectorXd;

  explicit DenseOperator(Eigen::MatrixXd matrix);

  Eigen::Index rows() const { return matrix_.rows(); }
  Eigen::Index cols() const { return matrix_.cols(); }

  Eigen::VectorXd apply(const Eigen::VectorXd& x) const;
  Eigen::VectorXd adjoint(const Eigen::VectorXd& y) const;

  const Eigen::MatrixXd& matrix() const { return matrix_; }

 private:
  Eigen::MatrixXd matrix_;
};

// Rank-one measurement family: forward map (M X)_i = <X, m_i m_i^T>, adjoint
// M^* y = sum_i y_i m_i m_i^T.  The primal space is the symmetric n-by-n
// matrices under the trace inner product.
class RankOneMeasurementOperator {
 public:
  using Primal = Eigen::MatrixXd;

  // Columns of `vectors` are the measurement vectors m_i (n-by-m).
  explicit RankOneMeasurementOperator(Eigen::MatrixXd vectors);

  Eigen::Index measurement_count() const { return vectors_.cols(); }
  Eigen::Index dim() const { return vectors_.rows(); }

  Eigen::VectorXd apply(const Eigen::MatrixXd& x) const;
  Eigen::MatrixXd adjoint(const Eigen::VectorXd& y) const;

  // M(u u^T) without forming the outer product: entry i is <m_i, u>^2.
  Eigen::VectorXd rank_one_image(const Eigen::VectorXd& u) const;

  const Eigen::MatrixXd& vectors() const { return vectors_; }

 private:
  Eigen::MatrixXd vectors_;
};

}  // namespace ap
