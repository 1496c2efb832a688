#pragma once

#include <optional>
#include <vector>

#include <Eigen/Core>

// Independent reference solvers used only by the tests.  They share no code
// with the solver paths they certify.
namespace oracle {

struct LpResult {
  bool feasible = false;
  bool bounded = true;
  double objective = 0.0;
  Eigen::VectorXd x;
};

// Two-phase dense simplex with Bland's rule for
//   minimize c'x  subject to  A x = b, x >= 0.
LpResult solve_lp(const Eigen::MatrixXd& a, const Eigen::VectorXd& b,
                  const Eigen::VectorXd& c);

// minimize ||x||_1 subject to M x = b, via the standard split x = u - v.
struct L1Result {
  bool feasible = false;
  double objective = 0.0;
  Eigen::VectorXd x;
};

L1Result min_l1_norm(const Eigen::MatrixXd& m, const Eigen::VectorXd& b);

// Exact projection of `point` onto {y : <g_i, y> <= c_i} by enumerating
// active sets of the least-distance QP.  nullopt when no KKT-consistent
// active set exists (infeasible or degenerate data).
std::optional<Eigen::VectorXd> project_polyhedron(
    const Eigen::VectorXd& point, const std::vector<Eigen::VectorXd>& normals,
    const std::vector<double>& offsets);

}  // namespace oracle
