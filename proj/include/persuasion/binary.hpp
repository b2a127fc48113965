#pragma once

// Exact solver for two-action persuasion when the set of beliefs where action
// 1 is strictly suboptimal is convex. The hull of beliefs inducing action 1 is
// then the polytope spanned by the pure states where 1 is optimal and the
// boundary mixtures between those and the states where 0 is uniquely optimal.

#include "persuasion/core_model.hpp"
#include "persuasion/geometry.hpp"
#include "persuasion/lp.hpp"
#include "persuasion/plan.hpp"
#include "persuasion/queue_model.hpp"

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <cstdio>
#include <optional>
#include <random>
#include <stdexcept>
#include <string>
#include <vector>

namespace persuasion::binary {

inline constexpr double kBoundaryTolerance = 1e-9;

struct StateClassification {
  std::vector<std::size_t> k1;  // rho_hat(e_w) >= -eps
  std::vector<std::size_t> k0;  // rho_hat(e_w) <= +eps
  std::vector<std::size_t> l0;  // k0 minus k1

  bool in_k1(std::size_t w) const { return std::ranges::find(k1, w) != k1.end(); }
  bool in_l0(std::size_t w) const { return std::ranges::find(l0, w) != l0.end(); }
};

/// chi = gamma * e_{omega0} + (1 - gamma) * e_{omega1}, on the boundary of
/// the action-1 region.
struct K01Vertex {
  std::size_t omega0 = 0;
  std::size_t omega1 = 0;
  double gamma = 0.0;
  std::vector<double> chi;
  bool corner = false;  // gamma == 0: omega1 itself sits on the boundary toward omega0
};

inline void require_binary(const PersuasionInstance& inst) {
  if (inst.num_actions() != 2) throw std::invalid_argument("binary persuasion needs exactly two actions");
}

inline StateClassification classify_states(const PersuasionInstance& inst) {
  require_binary(inst);
  StateClassification c;
  const std::size_t n = inst.num_states();
  for (std::size_t w = 0; w < n; ++w) {
    const auto e = Belief::point_mass(n, w);
    const double d = differential_utility(inst.receiver, e);
    const bool one = d >= -kBoundaryTolerance;
    const bool zero = d <= kBoundaryTolerance;
    if (one) c.k1.push_back(w);
    if (zero) c.k0.push_back(w);
    if (zero && !one) c.l0.push_back(w);
  }
  return c;
}

inline std::string mix_label(const StateSpace& states, std::size_t w0, std::size_t w1, double gamma) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.6g", gamma);
  return "mix(" + states.label(w0) + "," + states.label(w1) + "," + buf + ")";
}

/// One boundary vertex per (omega0 in L0, omega1 in K1) pair.
inline std::vector<K01Vertex> compute_k01(const PersuasionInstance& inst, const StateClassification& cls,
                                          double tol = kBisectionTolerance) {
  require_binary(inst);
  if (!inst.receiver.convex_p1_complement())
    throw std::invalid_argument(
        "compute_k01: model does not declare a convex region where action 1 is suboptimal");
  const std::size_t n = inst.num_states();
  const auto& model = inst.receiver;
  auto rho_hat = [&](std::span<const double> mu) { return differential_utility(model, mu); };
  const auto& qtag = model.queue_tag();

  std::vector<K01Vertex> out;
  out.reserve(cls.l0.size() * cls.k1.size());
  for (std::size_t w0 : cls.l0) {
    for (std::size_t w1 : cls.k1) {
      K01Vertex v{w0, w1, 0.0, {}, false};
      const auto e0 = Belief::point_mass(n, w0), e1 = Belief::point_mass(n, w1);
      bool done = false;
      if (qtag && w0 > w1) {
        try {
          v.gamma = queue::gamma_closed_form(static_cast<long long>(w0), static_cast<long long>(w1),
                                             qtag->tau, qtag->beta);
          done = true;
        } catch (const std::exception&) {
          // fall through to bisection
        }
      }
      if (!done) {
        if (rho_hat(e1.weights()) < 0.0)
          v.gamma = 0.0;  // omega1 is a boundary state within tolerance
        else
          v.gamma = segment_bisection(rho_hat, e0.weights(), e1.weights(), tol);
      }
      v.corner = v.gamma == 0.0;
      v.chi.assign(n, 0.0);
      v.chi[w0] += v.gamma;
      v.chi[w1] += 1.0 - v.gamma;
      out.push_back(std::move(v));
    }
  }
  return out;
}

inline std::vector<K01Vertex> compute_k01(const PersuasionInstance& inst, double tol = kBisectionTolerance) {
  return compute_k01(inst, classify_states(inst), tol);
}

/// Vertex sets of the binary program: index 0 holds the pure states of L0,
/// index 1 the pure states of K1 followed by the K01 mixtures.
inline std::vector<PointSet> binary_vertex_sets(const PersuasionInstance& inst, const StateClassification& cls,
                                                const std::vector<K01Vertex>& k01) {
  const std::size_t n = inst.num_states();
  std::vector<PointSet> sets(2);
  for (std::size_t w : cls.l0) sets[0].add(Belief::point_mass(n, w).vec(), inst.states.label(w));
  for (std::size_t w : cls.k1) sets[1].add(Belief::point_mass(n, w).vec(), inst.states.label(w));
  for (const auto& v : k01) {
    if (v.corner) continue;  // duplicates the pure vertex e_{omega1}
    sets[1].add(v.chi, mix_label(inst.states, v.omega0, v.omega1, v.gamma));
  }
  return sets;
}

struct BinarySolution {
  OptimalPlan plan;
  StateClassification classification;
  std::vector<K01Vertex> k01;
  std::vector<PointSet> vertex_sets;
};

inline void require_sender_prefers_one(const PersuasionInstance& inst) {
  for (std::size_t w = 0; w < inst.num_states(); ++w)
    if (inst.sender(w, 1) < inst.sender(w, 0))
      throw std::invalid_argument("binary persuasion: sender must weakly prefer action 1 in every state (state " +
                                  inst.states.label(w) + ")");
}

/// Solves the exact linear program over vertex weights. Throws
/// std::invalid_argument when the instance is not a binary persuasion
/// instance with a declared convex action-0 region.
inline BinarySolution solve_binary_detailed(const PersuasionInstance& inst, double tol = kBisectionTolerance) {
  require_binary(inst);
  require_sender_prefers_one(inst);
  BinarySolution sol;
  sol.classification = classify_states(inst);
  sol.k01 = compute_k01(inst, sol.classification, tol);
  sol.vertex_sets = binary_vertex_sets(inst, sol.classification, sol.k01);

  const std::size_t n = inst.num_states();
  const auto& v0 = sol.vertex_sets[0];
  const auto& v1 = sol.vertex_sets[1];
  const std::size_t cols = v0.size() + v1.size();
  LinearProgram lp;
  lp.objective.assign(cols, 0.0);
  lp.eq_matrix.assign(n, std::vector<double>(cols, 0.0));
  lp.eq_rhs = inst.prior.vec();
  for (std::size_t j = 0; j < v0.size(); ++j) {
    lp.objective[j] = inst.sender.expected(v0.points[j], 0);
    for (std::size_t w = 0; w < n; ++w) lp.eq_matrix[w][j] = v0.points[j][w];
  }
  for (std::size_t j = 0; j < v1.size(); ++j) {
    lp.objective[v0.size() + j] = inst.sender.expected(v1.points[j], 1);
    for (std::size_t w = 0; w < n; ++w) lp.eq_matrix[w][v0.size() + j] = v1.points[j][w];
  }
  const auto res = solve_lp(lp);
  if (!res.optimal())
    throw std::runtime_error(std::string("binary persuasion LP: ") + to_string(res.status));

  std::vector<std::vector<double>> weights(2);
  weights[0].assign(res.x.begin(), res.x.begin() + static_cast<std::ptrdiff_t>(v0.size()));
  weights[1].assign(res.x.begin() + static_cast<std::ptrdiff_t>(v0.size()), res.x.end());
  sol.plan = plan_from_weights(sol.vertex_sets, weights, inst.sender, n);
  return sol;
}

inline OptimalPlan solve_binary(const PersuasionInstance& inst) { return solve_binary_detailed(inst).plan; }

/// Whether the receiver can be made to take action 1 in every state, i.e.
/// whether the prior lies in the hull of K1 and K01.
inline bool full_persuasion_binary(const PersuasionInstance& inst, double tol = kBisectionTolerance) {
  require_binary(inst);
  const auto cls = classify_states(inst);
  const auto k01 = compute_k01(inst, cls, tol);
  const auto sets = binary_vertex_sets(inst, cls, k01);
  if (sets[1].empty()) return false;
  return hull_membership(inst.prior, sets[1]).has_value();
}

// ---------------------------------------------------------------------------
// Structure checks

struct ThresholdReport {
  bool holds = false;
  std::optional<std::size_t> threshold;  // first state (in order) not fully taking action 1
  std::optional<std::pair<std::size_t, std::size_t>> witness;  // (threshold, later state with t_1 > 0)
};

/// Checks t_1(w) = prior(w) before some state and t_1(w) = 0 after it, in
/// the given order.
inline ThresholdReport verify_threshold(const OptimalPlan& plan, const std::vector<std::size_t>& order,
                                        double tol = 1e-8) {
  if (plan.num_actions() != 2) throw std::invalid_argument("verify_threshold: plan must have two actions");
  const auto mu = plan.state_marginal();
  const auto& t1 = plan.t[1];
  ThresholdReport rep;
  std::size_t p = order.size();
  for (std::size_t i = 0; i < order.size(); ++i) {
    if (std::abs(t1[order[i]] - mu[order[i]]) > tol) {
      p = i;
      break;
    }
  }
  if (p == order.size()) {
    rep.holds = true;
    return rep;
  }
  rep.threshold = order[p];
  for (std::size_t i = p + 1; i < order.size(); ++i) {
    if (t1[order[i]] > tol) {
      rep.witness = std::make_pair(order[p], order[i]);
      return rep;
    }
  }
  rep.holds = true;
  return rep;
}

struct MonotonicityReport {
  bool holds = true;
  std::optional<std::pair<std::size_t, std::size_t>> witness;  // (w, w') violating the order
};

/// Checks that along `order`, every state is either in K1 or is an L0 state
/// whose boundary weights dominate those of every later L0 state.
inline MonotonicityReport check_monotonicity(const StateClassification& cls, const std::vector<K01Vertex>& k01,
                                             const std::vector<std::size_t>& order) {
  auto gamma = [&](std::size_t w0, std::size_t w1) {
    for (const auto& v : k01)
      if (v.omega0 == w0 && v.omega1 == w1) return v.gamma;
    return 0.0;
  };
  MonotonicityReport rep;
  for (std::size_t i = 0; i < order.size(); ++i) {
    const std::size_t w = order[i];
    if (cls.in_k1(w)) continue;
    for (std::size_t j = i + 1; j < order.size(); ++j) {
      const std::size_t w2 = order[j];
      bool ok = cls.in_l0(w) && cls.in_l0(w2);
      for (std::size_t h : cls.k1) {
        if (!ok) break;
        ok = gamma(w, h) > gamma(w2, h);
      }
      if (!ok) {
        rep.holds = false;
        rep.witness = std::make_pair(w, w2);
        return rep;
      }
    }
  }
  return rep;
}

/// Random midpoint test of the declared convexity of {rho_hat < 0}: for
/// random pairs of beliefs with negative differential utility, the midpoint
/// must not be (meaningfully) nonnegative.
inline bool spot_check_convex_p1_complement(const UtilityModel& model, std::size_t pairs, std::uint64_t seed,
                                            double tol = 1e-7) {
  std::mt19937_64 rng(seed);
  std::exponential_distribution<double> expo(1.0);
  const std::size_t n = model.states();
  auto draw = [&] {
    std::vector<double> w(n);
    double s = 0.0;
    for (auto& x : w) s += (x = expo(rng));
    for (auto& x : w) x /= s;
    return w;
  };
  std::size_t tested = 0;
  for (std::size_t attempt = 0; attempt < pairs * 50 && tested < pairs; ++attempt) {
    const auto a = draw(), b = draw();
    if (differential_utility(model, a) >= 0.0 || differential_utility(model, b) >= 0.0) continue;
    std::vector<double> mid(n);
    for (std::size_t i = 0; i < n; ++i) mid[i] = 0.5 * (a[i] + b[i]);
    if (differential_utility(model, mid) >= tol) return false;
    ++tested;
  }
  return true;
}

}  // namespace persuasion::binary
