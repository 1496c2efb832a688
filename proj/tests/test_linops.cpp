#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <Eigen/Dense>

#include "ap/linops.hpp"
#include "ap/rng.hpp"

using ap::DenseOperator;
using ap::RankOneMeasurementOperator;
using ap::Rng;

TEST_CASE("dense operator on the identity") {
  DenseOperator op(Eigen::Matrix2d::Identity());
  Eigen::Vector2d x(3.0, -1.0);
  CHECK(op.apply(x) == x);
  Eigen::Vector2d y(1.0, 2.0);
  CHECK(op.adjoint(y) == y);
}

TEST_CASE("dense operator adjoint identity on random pairs") {
  Rng rng(11);
  DenseOperator op(rng.normal_matrix(4, 6));
  for (int t = 0; t < 100; ++t) {
    const Eigen::VectorXd x = rng.normal_vector(6);
    const Eigen::VectorXd y = rng.normal_vector(4);
    const double lhs = op.apply(x).dot(y);
    const double rhs = x.dot(op.adjoint(y));
    CHECK(lhs == doctest::Approx(rhs).epsilon(1e-12));
  }
}

TEST_CASE("dense operator rejects shape mismatches") {
  DenseOperator op(Eigen::MatrixXd::Ones(3, 5));
  CHECK_THROWS_AS(op.apply(Eigen::VectorXd::Ones(4)), std::invalid_argument);
  CHECK_THROWS_AS(op.adjoint(Eigen::VectorXd::Ones(5)), std::invalid_argument);
}

TEST_CASE("rank-one operator forward values") {
  // Single measurement vector e_1 in R^2.
  Eigen::MatrixXd vectors(2, 1);
  vectors << 1.0, 0.0;
  RankOneMeasurementOperator op(vectors);
  Eigen::Matrix2d x = Eigen::Vector2d(5.0, 2.0).asDiagonal();
  const Eigen::VectorXd out = op.apply(x);
  REQUIRE(out.size() == 1);
  CHECK(out[0] == doctest::Approx(5.0));
}

TEST_CASE("rank-one adjoint is a weighted sum of outer products") {
  Eigen::MatrixXd vectors(2, 1);
  vectors << 1.0, 1.0;
  RankOneMeasurementOperator op(vectors);
  Eigen::VectorXd y(1);
  y << 2.0;
  const Eigen::MatrixXd z = op.adjoint(y);
  Eigen::Matrix2d expected;
  expected << 2.0, 2.0, 2.0, 2.0;
  CHECK((z - expected).norm() == doctest::Approx(0.0));
}

TEST_CASE("rank-one adjoint is exactly symmetric and matches the trace pairing") {
  Rng rng(5);
  RankOneMeasurementOperator op(rng.normal_matrix(5, 9));
  for (int t = 0; t < 100; ++t) {
    const Eigen::VectorXd y = rng.normal_vector(9);
    const Eigen::MatrixXd z = op.adjoint(y);
    CHECK((z - z.transpose()).norm() == 0.0);

    Eigen::MatrixXd x = rng.normal_matrix(5, 5);
    x = (0.5 * (x + x.transpose())).eval();
    const double lhs = op.apply(x).dot(y);
    const double rhs = x.cwiseProduct(z).sum();
    CHECK(lhs == doctest::Approx(rhs).epsilon(1e-12));
  }
}

TEST_CASE("rank-one forward entries are quadratic forms") {
  Rng rng(17);
  RankOneMeasurementOperator op(rng.normal_matrix(4, 6));
  Eigen::MatrixXd x = rng.normal_matrix(4, 4);
  x = (0.5 * (x + x.transpose())).eval();
  const Eigen::VectorXd out = op.apply(x);
  for (int i = 0; i < 6; ++i) {
    const Eigen::VectorXd mi = op.vectors().col(i);
    CHECK(out[i] == doctest::Approx(mi.dot(x * mi)).epsilon(1e-12));
  }
}
