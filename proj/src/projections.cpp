#include "ap/projections.hpp"

#include <cmath>
#include <optional>

#include <Eigen/Dense>

namespace ap {

double halfspace_violation(const Halfspace& h, const Eigen::VectorXd& y) {
  return std::max(0.0, h.normal.dot(y) - h.offset);
}

Eigen::VectorXd project_halfspace(const Halfspace& h, const Eigen::VectorXd& y) {
  const double overshoot = h.normal.dot(y) - h.offset;
  if (overshoot <= 0.0) return y;
  return y - (overshoot / h.normal.squaredNorm()) * h.normal;
}

Eigen::VectorXd dykstra_halfspaces(const Eigen::VectorXd& start,
                                   const std::vector<Halfspace>& sets,
                                   double tolerance, int max_cycles) {
  if (sets.empty()) return start;
  Eigen::VectorXd y = start;
  std::vector<Eigen::VectorXd> corrections(
      sets.size(), Eigen::VectorXd::Zero(start.size()));
  for (int cycle = 0; cycle < max_cycles; ++cycle) {
    const Eigen::VectorXd previous = y;
    for (size_t i = 0; i < sets.size(); ++i) {
      const Eigen::VectorXd shifted = y + corrections[i];
      y = project_halfspace(sets[i], shifted);
      corrections[i] = shifted - y;
    }
    double violation = 0.0;
    for (const Halfspace& h : sets)
      violation = std::max(violation, halfspace_violation(h, y));
    const double movement = (y - previous).lpNorm<Eigen::Infinity>();
    if (violation <= tolerance &&
        movement <= tolerance * std::max(1.0, y.lpNorm<Eigen::Infinity>()))
      break;
  }
  return y;
}

namespace {

// Lawson-Hanson nonnegative least squares: min ||E u - f|| s.t. u >= 0.
// The interpolation step of the inner loop makes the objective strictly
// decrease, which rules out the active-set cycling a plain drop/add rule
// suffers on degenerate data.
Eigen::VectorXd nnls(const Eigen::MatrixXd& e, const Eigen::VectorXd& f) {
  const Eigen::Index n = e.cols();
  Eigen::VectorXd u = Eigen::VectorXd::Zero(n);
  std::vector<bool> passive(static_cast<size_t>(n), false);
  Eigen::Index passive_count = 0;

  const double tol = 1e-13 * std::max(1.0, e.cwiseAbs().maxCoeff()) *
                     std::max(1.0, f.norm());
  Eigen::VectorXd w = e.transpose() * (f - e * u);

  auto solve_passive = [&](Eigen::VectorXd& z) {
    Eigen::MatrixXd ep(e.rows(), passive_count);
    std::vector<Eigen::Index> cols;
    for (Eigen::Index j = 0; j < n; ++j)
      if (passive[static_cast<size_t>(j)]) {
        ep.col(static_cast<Eigen::Index>(cols.size())) = e.col(j);
        cols.push_back(j);
      }
    const Eigen::VectorXd zp = ep.colPivHouseholderQr().solve(f);
    z.setZero();
    for (size_t i = 0; i < cols.size(); ++i) z[cols[i]] = zp[static_cast<Eigen::Index>(i)];
  };

  for (int outer = 0; outer < 3 * static_cast<int>(n) + 10; ++outer) {
    Eigen::Index best = -1;
    double best_w = tol;
    for (Eigen::Index j = 0; j < n; ++j)
      if (!passive[static_cast<size_t>(j)] && w[j] > best_w) {
        best_w = w[j];
        best = j;
      }
    if (best < 0) break;
    passive[static_cast<size_t>(best)] = true;
    ++passive_count;

    for (int inner = 0; inner < 3 * static_cast<int>(n) + 10; ++inner) {
      Eigen::VectorXd z(n);
      solve_passive(z);
      bool interior = true;
      for (Eigen::Index j = 0; j < n; ++j)
        if (passive[static_cast<size_t>(j)] && z[j] <= 0.0) interior = false;
      if (interior) {
        u = z;
        break;
      }
      double alpha = 1.0;
      for (Eigen::Index j = 0; j < n; ++j)
        if (passive[static_cast<size_t>(j)] && z[j] <= 0.0)
          alpha = std::min(alpha, u[j] / (u[j] - z[j]));
      u += alpha * (z - u);
      for (Eigen::Index j = 0; j < n; ++j)
        if (passive[static_cast<size_t>(j)] && u[j] <= 1e-14) {
          passive[static_cast<size_t>(j)] = false;
          --passive_count;
          u[j] = 0.0;
        }
    }
    w = e.transpose() * (f - e * u);
  }
  return u;
}

// Least-distance step of Lawson-Hanson: min ||y - start|| s.t. <g_i,y> <= c_i
// through the NNLS reduction.  nullopt when the constraints are detected to
// be incompatible.
std::optional<Eigen::VectorXd> least_distance_projection(
    const Eigen::VectorXd& start, const std::vector<Halfspace>& sets) {
  const Eigen::Index n = start.size();
  const auto k = static_cast<Eigen::Index>(sets.size());
  Eigen::MatrixXd e(n + 1, k);
  for (Eigen::Index j = 0; j < k; ++j) {
    e.col(j).head(n) = -sets[static_cast<size_t>(j)].normal;
    e(n, j) = sets[static_cast<size_t>(j)].normal.dot(start) -
              sets[static_cast<size_t>(j)].offset;
  }
  Eigen::VectorXd f = Eigen::VectorXd::Zero(n + 1);
  f[n] = 1.0;
  const Eigen::VectorXd u = nnls(e, f);
  const Eigen::VectorXd residual = e * u - f;
  if (std::abs(residual[n]) < 1e-12) return std::nullopt;
  return start - residual.head(n) / residual[n];
}

// Active-set refinement for the least-distance problem
//   min ||y - start||  s.t.  <g_i, y> <= c_i:
// solve the equality KKT system on a working set, drop the most negative
// multiplier, add the most violated constraint, until KKT holds.  Returns
// nullopt when the working set goes singular or the round budget runs out
// (caller falls back to Dykstra).
std::optional<Eigen::VectorXd> active_set_polish(
    const Eigen::VectorXd& start, const std::vector<Halfspace>& sets,
    std::vector<size_t> working) {
  const int max_rounds = 4 * static_cast<int>(sets.size()) + 8;
  for (int round = 0; round < max_rounds; ++round) {
    Eigen::VectorXd y = start;
    Eigen::VectorXd lambda;
    if (!working.empty()) {
      if (working.size() > static_cast<size_t>(start.size()))
        working.resize(static_cast<size_t>(start.size()));
      Eigen::MatrixXd g(static_cast<Eigen::Index>(working.size()), start.size());
      for (size_t i = 0; i < working.size(); ++i)
        g.row(static_cast<Eigen::Index>(i)) = sets[working[i]].normal.transpose();

      // Rank-revealing pass: near-parallel linearizations make the working
      // set dependent, so keep only an independent subset.
      Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(g.transpose());
      qr.setThreshold(1e-10);
      const Eigen::Index rank = qr.rank();
      if (rank < static_cast<Eigen::Index>(working.size())) {
        const auto& perm = qr.colsPermutation().indices();
        std::vector<size_t> independent;
        for (Eigen::Index i = 0; i < rank; ++i)
          independent.push_back(working[static_cast<size_t>(perm[i])]);
        working = std::move(independent);
        g.resize(static_cast<Eigen::Index>(working.size()), start.size());
        for (size_t i = 0; i < working.size(); ++i)
          g.row(static_cast<Eigen::Index>(i)) = sets[working[i]].normal.transpose();
      }
      Eigen::VectorXd rhs(static_cast<Eigen::Index>(working.size()));
      for (size_t i = 0; i < working.size(); ++i)
        rhs[static_cast<Eigen::Index>(i)] = sets[working[i]].offset;

      const Eigen::MatrixXd gram = g * g.transpose();
      Eigen::FullPivLU<Eigen::MatrixXd> lu(gram);
      if (!lu.isInvertible()) {
        working.pop_back();  // shed the newest constraint and retry
        continue;
      }
      const Eigen::VectorXd target = g * start - rhs;
      lambda = lu.solve(target);
      for (int refine = 0; refine < 3; ++refine)  // ill-conditioned gram
        lambda += lu.solve(target - gram * lambda);

      Eigen::Index drop = -1;
      double most_negative = -1e-10 * std::max(1.0, lambda.lpNorm<Eigen::Infinity>());
      for (Eigen::Index i = 0; i < lambda.size(); ++i)
        if (lambda[i] < most_negative) {
          most_negative = lambda[i];
          drop = i;
        }
      if (drop >= 0) {
        working.erase(working.begin() + drop);
        continue;
      }
      y = start - g.transpose() * lambda;
    }

    size_t add = sets.size();
    double worst = 0.0;
    for (size_t j = 0; j < sets.size(); ++j) {
      const Halfspace& h = sets[j];
      const double scale = std::max({1.0, std::abs(h.offset), h.normal.norm()});
      const double violation = h.normal.dot(y) - h.offset;
      if (violation > std::max(1e-11 * scale, worst)) {
        worst = violation;
        add = j;
      }
    }
    if (add == sets.size()) return y;  // KKT point
    bool present = false;
    for (size_t i : working)
      if (i == add) present = true;
    if (present) return std::nullopt;  // numerically stuck
    working.push_back(add);
  }
  return std::nullopt;
}

}  // namespace

void append_cutting_plane(std::vector<Halfspace>& planes, Halfspace plane) {
  const double norm = plane.normal.norm();
  if (norm == 0.0) return;
  std::erase_if(planes, [&](const Halfspace& old) {
    const double old_norm = old.normal.norm();
    if (old_norm == 0.0) return true;
    const double cosine = old.normal.dot(plane.normal) / (old_norm * norm);
    return cosine > 1.0 - 1e-9 &&
           std::abs(old.offset / old_norm - plane.offset / norm) <
               1e-9 * std::max(1.0, std::abs(plane.offset) / norm);
  });
  planes.push_back(std::move(plane));
}

DykstraResult project_polyhedral_intersection(const Eigen::VectorXd& start,
                                              const std::vector<Halfspace>& sets,
                                              double tolerance, int max_cycles) {
  DykstraResult result;
  auto violations = [&](const Eigen::VectorXd& y) {
    Eigen::VectorXd v(static_cast<Eigen::Index>(sets.size()));
    for (size_t i = 0; i < sets.size(); ++i)
      v[static_cast<Eigen::Index>(i)] = halfspace_violation(sets[i], y);
    return v;
  };
  if (sets.empty() || violations(start).maxCoeff() == 0.0) {
    result.point = start;
    result.converged = true;
    result.final_residuals = Eigen::VectorXd::Zero(std::max<size_t>(sets.size(), 1));
    return result;
  }

  // Direct least-distance solve; Dykstra below is the fallback when the
  // NNLS route comes back infeasible or insufficiently accurate.
  if (auto direct = least_distance_projection(start, sets)) {
    const Eigen::VectorXd v = violations(*direct);
    if (v.maxCoeff() <= tolerance) {
      result.point = *direct;
      result.converged = true;
      result.cycles = 1;
      result.final_residuals = v;
      return result;
    }
  }

  Eigen::VectorXd y = start;
  std::vector<Eigen::VectorXd> corrections(
      sets.size(), Eigen::VectorXd::Zero(start.size()));
  int chunk = 40;
  while (result.cycles < max_cycles) {
    const int stop_at = std::min(max_cycles, result.cycles + chunk);
    chunk = std::min(2 * chunk, 2000);
    bool settled = false;
    for (; result.cycles < stop_at; ++result.cycles) {
      const Eigen::VectorXd previous = y;
      for (size_t i = 0; i < sets.size(); ++i) {
        const Eigen::VectorXd shifted = y + corrections[i];
        y = project_halfspace(sets[i], shifted);
        corrections[i] = shifted - y;
      }
      if (violations(y).maxCoeff() <= tolerance &&
          (y - previous).lpNorm<Eigen::Infinity>() <=
              tolerance * std::max(1.0, y.lpNorm<Eigen::Infinity>())) {
        settled = true;
        ++result.cycles;
        break;
      }
    }

    // Identify constraints Dykstra is pinning and try to finish exactly.
    const double worst = violations(y).maxCoeff();
    std::vector<size_t> active;
    for (size_t i = 0; i < sets.size(); ++i) {
      const Halfspace& h = sets[i];
      const double scale = std::max({1.0, std::abs(h.offset), h.normal.norm()});
      if (std::abs(h.normal.dot(y) - h.offset) <=
          std::max(4.0 * worst, 1e-7 * scale))
        active.push_back(i);
    }
    if (auto polished = active_set_polish(start, sets, active)) {
      result.point = *polished;
      result.converged = true;
      result.final_residuals = violations(*polished);
      return result;
    }
    if (settled) break;
  }

  result.point = y;
  result.final_residuals = violations(y);
  result.converged = result.final_residuals.maxCoeff() <= tolerance;
  return result;
}


}  // namespace ap
