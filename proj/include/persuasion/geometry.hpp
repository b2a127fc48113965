#pragma once

// Belief-simplex geometry: convex-hull membership with witnesses,
// Caratheodory-minimal decompositions and boundary search along segments.

#include "persuasion/core_model.hpp"
#include "persuasion/lp.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <span>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace persuasion {

inline constexpr double kHullTolerance = 1e-8;
inline constexpr double kBisectionTolerance = 1e-10;
inline constexpr int kBisectionMaxIterations = 200;

/// A finite list of equal-length vectors (beliefs, or scaled beliefs such as
/// the origin), with optional labels for reporting.
struct PointSet {
  std::vector<std::vector<double>> points;
  std::vector<std::string> labels;  // empty or same length as points

  std::size_t size() const { return points.size(); }
  bool empty() const { return points.empty(); }
  std::size_t dim() const { return points.empty() ? 0 : points.front().size(); }

  void add(std::vector<double> p, std::string label = {}) {
    if (!points.empty() && p.size() != dim())
      throw std::invalid_argument("point set: dimension mismatch");
    if (!labels.empty() || !label.empty()) {
      labels.resize(points.size());
      labels.push_back(std::move(label));
    }
    points.push_back(std::move(p));
  }

  std::string label(std::size_t i) const {
    return i < labels.size() && !labels[i].empty() ? labels[i] : "p" + std::to_string(i);
  }
};

struct Atom {
  std::size_t index = 0;  // into the PointSet
  double weight = 0.0;
};

struct ConvexCombination {
  std::vector<Atom> atoms;
  std::vector<double> target;
};

/// Coordinate-wise max |sum_i w_i p_i - target| and |sum w - 1|.
inline double reconstruction_error(const ConvexCombination& cc, const PointSet& pts) {
  std::vector<double> acc(cc.target.size(), 0.0);
  double wsum = 0.0;
  for (const auto& a : cc.atoms) {
    wsum += a.weight;
    for (std::size_t k = 0; k < acc.size(); ++k) acc[k] += a.weight * pts.points[a.index][k];
  }
  double err = std::abs(wsum - 1.0);
  for (std::size_t k = 0; k < acc.size(); ++k) err = std::max(err, std::abs(acc[k] - cc.target[k]));
  return err;
}

namespace detail {

inline void check_dims(std::span<const double> target, const PointSet& pts) {
  for (const auto& p : pts.points)
    if (p.size() != target.size()) throw std::invalid_argument("hull: dimension mismatch");
}

// Removes atoms until the lifted points [p_i; 1] are linearly independent.
inline void reduce_to_independent(ConvexCombination& cc, const PointSet& pts) {
  const std::size_t d = cc.target.size();
  while (true) {
    const auto k = static_cast<Eigen::Index>(cc.atoms.size());
    if (k <= 1) return;
    Eigen::MatrixXd M(static_cast<Eigen::Index>(d) + 1, k);
    for (Eigen::Index j = 0; j < k; ++j) {
      const auto& p = pts.points[cc.atoms[j].index];
      for (std::size_t r = 0; r < d; ++r) M(static_cast<Eigen::Index>(r), j) = p[r];
      M(static_cast<Eigen::Index>(d), j) = 1.0;
    }
    Eigen::FullPivLU<Eigen::MatrixXd> lu(M);
    lu.setThreshold(1e-10);
    if (lu.rank() == k) return;
    Eigen::VectorXd z = lu.kernel().col(0);
    if (z.maxCoeff() <= 0.0) z = -z;
    double theta = std::numeric_limits<double>::infinity();
    Eigen::Index drop = -1;
    for (Eigen::Index j = 0; j < k; ++j) {
      if (z(j) > 1e-14) {
        const double t = cc.atoms[j].weight / z(j);
        if (t < theta) {
          theta = t;
          drop = j;
        }
      }
    }
    if (drop < 0) return;
    for (Eigen::Index j = 0; j < k; ++j) cc.atoms[j].weight -= theta * z(j);
    cc.atoms[drop].weight = 0.0;
    std::erase_if(cc.atoms, [](const Atom& a) { return a.weight <= 0.0; });
  }
}

}  // namespace detail

/// Finds weights lambda >= 0 with sum 1 and sum lambda_i p_i = target, if any
/// exist within `tol`. The witness is a basic solution of the weight LP.
inline std::optional<ConvexCombination> hull_membership(std::span<const double> target,
                                                        const PointSet& pts,
                                                        double tol = kHullTolerance) {
  detail::check_dims(target, pts);
  if (pts.empty()) return std::nullopt;
  const std::size_t d = target.size(), k = pts.size();

  LinearProgram lp;
  lp.objective.assign(k, 0.0);
  lp.eq_matrix.assign(d + 1, std::vector<double>(k, 0.0));
  lp.eq_rhs.assign(d + 1, 0.0);
  for (std::size_t r = 0; r < d; ++r) {
    for (std::size_t j = 0; j < k; ++j) lp.eq_matrix[r][j] = pts.points[j][r];
    lp.eq_rhs[r] = target[r];
  }
  for (std::size_t j = 0; j < k; ++j) lp.eq_matrix[d][j] = 1.0;
  lp.eq_rhs[d] = 1.0;

  LpOptions opt;
  opt.feasibility_tol = tol;
  const auto res = solve_lp(lp, opt);
  if (!res.optimal()) return std::nullopt;

  ConvexCombination cc;
  cc.target.assign(target.begin(), target.end());
  double wsum = 0.0;
  for (std::size_t j = 0; j < k; ++j) wsum += res.x[j];
  if (wsum <= 0.0) return std::nullopt;
  for (std::size_t j = 0; j < k; ++j)
    if (res.x[j] > 0.0) cc.atoms.push_back({j, res.x[j] / wsum});
  if (reconstruction_error(cc, pts) > tol) return std::nullopt;
  return cc;
}

inline std::optional<ConvexCombination> hull_membership(const Belief& target, const PointSet& pts,
                                                        double tol = kHullTolerance) {
  return hull_membership(target.weights(), pts, tol);
}

/// Convex decomposition of `target` whose atoms are affinely independent, so
/// at most dim + 1 of them (at most |states| for points on the simplex).
inline ConvexCombination caratheodory_decompose(std::span<const double> target, const PointSet& pts,
                                                double tol = kHullTolerance) {
  auto cc = hull_membership(target, pts, tol);
  if (!cc) throw std::invalid_argument("caratheodory: target lies outside the convex hull");
  detail::reduce_to_independent(*cc, pts);
  return *cc;
}

/// For rho_hat(omega1) >= 0 > rho_hat(omega0), the largest gamma in [0, 1]
/// such that rho_hat(gamma * omega0 + (1 - gamma) * omega1) >= 0, assuming
/// the negative set along the segment is an interval ending at gamma = 1.
/// The returned gamma is always on the nonnegative side, within `tol` of the
/// supremum.
template <class F>
double segment_bisection(F&& rho_hat, std::span<const double> omega0, std::span<const double> omega1,
                         double tol = kBisectionTolerance, int max_iterations = kBisectionMaxIterations) {
  if (omega0.size() != omega1.size()) throw std::invalid_argument("bisection: dimension mismatch");
  std::vector<double> mu(omega0.size());
  auto at = [&](double g) {
    for (std::size_t i = 0; i < mu.size(); ++i) mu[i] = g * omega0[i] + (1.0 - g) * omega1[i];
    return rho_hat(std::span<const double>(mu));
  };
  if (!(at(1.0) < 0.0))
    throw std::invalid_argument("bisection: differential utility at omega0 must be negative");
  if (!(at(0.0) >= 0.0))
    throw std::invalid_argument("bisection: differential utility at omega1 must be nonnegative");
  double lo = 0.0, hi = 1.0;
  for (int it = 0; it < max_iterations; ++it) {
    if (hi - lo <= tol) return lo;
    const double mid = 0.5 * (lo + hi);
    if (at(mid) >= 0.0)
      lo = mid;
    else
      hi = mid;
  }
  if (hi - lo <= tol) return lo;
  throw std::runtime_error("bisection: no convergence within " + std::to_string(max_iterations) +
                           " iterations");
}

}  // namespace persuasion
