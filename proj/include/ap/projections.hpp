#pragma once

#include <functional>
#include <vector>

#include <Eigen/Core>

namespace ap {

// Halfspace {y : <normal, y> <= offset}.
struct Halfspace {
  Eigen::VectorXd normal;
  double offset;
};

double halfspace_violation(const Halfspace& h, const Eigen::VectorXd& y);

Eigen::VectorXd project_halfspace(const Halfspace& h, const Eigen::VectorXd& y);

// Dykstra's alternating projection onto the intersection of halfspaces.
// Stops when the worst violation and the per-cycle movement both fall below
// `tolerance`; returns the last iterate either way.
Eigen::VectorXd dykstra_halfspaces(const Eigen::VectorXd& start,
                                   const std::vector<Halfspace>& sets,
                                   double tolerance, int max_cycles);

struct DykstraResult {
  Eigen::VectorXd point;
  bool converged = false;
  int cycles = 0;
  Eigen::VectorXd final_residuals;
};

// Append a cutting plane, dropping stored planes that are numerically
// parallel to it (linearizations taken at nearby points of a smooth
// constraint collapse onto each other and poison the projection).
void append_cutting_plane(std::vector<Halfspace>& planes, Halfspace plane);

// Exact projection onto an intersection of halfspaces: chunked Dykstra passes
// interleaved with an active-set polish (least-distance KKT solve on the
// constraints Dykstra has pinned).  The polish is only accepted when the
// multipliers are dual-feasible and every constraint holds, so the fallback
// path is plain Dykstra.
DykstraResult project_polyhedral_intersection(const Eigen::VectorXd& start,
                                              const std::vector<Halfspace>& sets,
                                              double tolerance, int max_cycles);

}  // namespace ap
