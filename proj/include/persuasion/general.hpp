#pragma once

// Persuasion for arbitrary finite action sets. The hull of each action's
// optimality region is approximated by the grid beliefs (denominator k) at
// which the action is a receiver best response; the resulting program is a
// linear program over vertex weights whose value is a lower bound that
// increases under grid refinement.

#include "persuasion/core_model.hpp"
#include "persuasion/geometry.hpp"
#include "persuasion/lp.hpp"
#include "persuasion/plan.hpp"

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <span>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace persuasion::general {

inline constexpr std::size_t kMaxGridCandidates = 2'000'000;

struct GridSpec {
  std::size_t k = 1;
};

/// Binomial(k + n - 1, n - 1), saturating at kMaxGridCandidates + 1.
inline std::size_t grid_size(std::size_t k, std::size_t n) {
  if (n == 0) return 0;
  double c = 1.0;
  for (std::size_t i = 1; i < n; ++i) {
    c = c * static_cast<double>(k + i) / static_cast<double>(i);
    if (c > static_cast<double>(kMaxGridCandidates)) return kMaxGridCandidates + 1;
  }
  return static_cast<std::size_t>(std::llround(c));
}

/// Default denominator: 24 for up to 4 states, 8 for up to 6, otherwise the
/// largest k <= 8 under the candidate cap.
inline GridSpec default_grid(std::size_t num_states) {
  if (num_states <= 4) return {24};
  if (num_states <= 6) return {8};
  std::size_t k = 8;
  while (k > 1 && grid_size(k, num_states) > kMaxGridCandidates) --k;
  return {k};
}

/// Calls f(weights) for every belief whose coordinates are multiples of 1/k.
template <class F>
void for_each_grid_belief(std::size_t n, std::size_t k, F&& f) {
  if (k == 0) throw std::invalid_argument("grid: denominator must be >= 1");
  if (grid_size(k, n) > kMaxGridCandidates)
    throw std::invalid_argument("grid: too many candidates (k=" + std::to_string(k) + ", states=" +
                                std::to_string(n) + ")");
  std::vector<std::size_t> counts(n, 0);
  std::vector<double> mu(n);
  // Enumerate compositions of k into n parts.
  auto rec = [&](auto&& self, std::size_t idx, std::size_t remaining) -> void {
    if (idx + 1 == n) {
      counts[idx] = remaining;
      for (std::size_t i = 0; i < n; ++i) mu[i] = static_cast<double>(counts[i]) / static_cast<double>(k);
      f(std::span<const double>(mu));
      return;
    }
    for (std::size_t c = remaining + 1; c-- > 0;) {
      counts[idx] = c;
      self(self, idx + 1, remaining - c);
    }
  };
  rec(rec, 0, k);
}

/// Grid beliefs where `action` is among the receiver's optimal actions,
/// followed by the caller-supplied extra points.
inline PointSet grid_vertices(const PersuasionInstance& inst, std::size_t action, GridSpec grid,
                              const PointSet& extra = {}) {
  if (action >= inst.num_actions()) throw std::out_of_range("grid_vertices: action out of range");
  PointSet out;
  for_each_grid_belief(inst.num_states(), grid.k, [&](std::span<const double> mu) {
    const auto br = best_response(inst.receiver, inst.sender, mu);
    if (std::ranges::find(br.optimal, action) != br.optimal.end())
      out.add(std::vector<double>(mu.begin(), mu.end()));
  });
  for (std::size_t i = 0; i < extra.size(); ++i) out.add(extra.points[i], extra.label(i));
  return out;
}

inline std::vector<PointSet> grid_vertex_sets(const PersuasionInstance& inst, GridSpec grid) {
  std::vector<PointSet> sets;
  for (std::size_t a = 0; a < inst.num_actions(); ++a) sets.push_back(grid_vertices(inst, a, grid));
  return sets;
}

/// Raised when the supplied vertex sets cannot reproduce the prior.
class InfeasibleCover : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Maximizes sum_a v_a . t_a over t_a in the cone of the action's points,
/// subject to sum_a t_a = prior.
inline OptimalPlan solve_general(const PersuasionInstance& inst, const std::vector<PointSet>& vertex_sets) {
  const std::size_t n = inst.num_states(), m = inst.num_actions();
  if (vertex_sets.size() != m) throw std::invalid_argument("solve_general: need one point set per action");
  std::size_t cols = 0;
  for (const auto& s : vertex_sets) {
    for (const auto& p : s.points)
      if (p.size() != n) throw std::invalid_argument("solve_general: point dimension mismatch");
    cols += s.size();
  }
  LinearProgram lp;
  lp.objective.assign(cols, 0.0);
  lp.eq_matrix.assign(n, std::vector<double>(cols, 0.0));
  lp.eq_rhs = inst.prior.vec();
  std::size_t j = 0;
  for (std::size_t a = 0; a < m; ++a) {
    for (const auto& p : vertex_sets[a].points) {
      lp.objective[j] = inst.sender.expected(p, a);
      for (std::size_t w = 0; w < n; ++w) lp.eq_matrix[w][j] = p[w];
      ++j;
    }
  }
  const auto res = solve_lp(lp);
  if (res.status == LpStatus::infeasible)
    throw InfeasibleCover("solve_general: vertex sets cannot cover the prior");
  if (!res.optimal()) throw std::runtime_error(std::string("solve_general LP: ") + to_string(res.status));

  std::vector<std::vector<double>> weights(m);
  j = 0;
  for (std::size_t a = 0; a < m; ++a) {
    weights[a].assign(res.x.begin() + static_cast<std::ptrdiff_t>(j),
                      res.x.begin() + static_cast<std::ptrdiff_t>(j + vertex_sets[a].size()));
    j += vertex_sets[a].size();
  }
  return plan_from_weights(vertex_sets, weights, inst.sender, n);
}

inline OptimalPlan solve_general(const PersuasionInstance& inst, GridSpec grid) {
  return solve_general(inst, grid_vertex_sets(inst, grid));
}

/// Replaces an action's decomposition by its mean posterior whenever the
/// action is already a receiver best response there (always the case for
/// expected-utility receivers), so that one signal induces the action.
inline OptimalPlan coalesce_plan(const PersuasionInstance& inst, OptimalPlan plan) {
  for (std::size_t a = 0; a < plan.num_actions(); ++a) {
    const auto m = plan.mean_posterior(a);
    if (m.empty() || plan.decomposition[a].size() <= 1) continue;
    const auto br = best_response(inst.receiver, inst.sender, m);
    if (std::ranges::find(br.optimal, a) == br.optimal.end()) continue;
    plan.decomposition[a] = {SignalAtom{m, 1.0, "recommend(" + inst.actions.label(a) + ")"}};
  }
  return plan;
}

// ---------------------------------------------------------------------------
// Benefits from persuasion

struct BaselineValues {
  double no_info = 0.0;    // sender payoff when the receiver acts on the prior
  double full_info = 0.0;  // sender payoff when the state is revealed
  std::size_t prior_action = 0;
};

inline BaselineValues baseline_values(const PersuasionInstance& inst) {
  BaselineValues b;
  const auto br = best_response(inst, inst.prior);
  b.prior_action = br.selected;
  b.no_info = inst.sender.expected(inst.prior.weights(), br.selected);
  const std::size_t n = inst.num_states();
  for (std::size_t w = 0; w < n; ++w) {
    const auto e = Belief::point_mass(n, w);
    b.full_info += inst.prior[w] * inst.sender(w, best_response(inst, e).selected);
  }
  return b;
}

struct BenefitReport {
  bool benefits = false;
  double gain = 0.0;  // plan value minus no-information value
  // Best certificate: the belief in an action's hull maximizing the sender's
  // gain from that action over the prior action.
  std::size_t certificate_action = 0;
  std::vector<double> certificate_belief;
  double certificate_value = 0.0;
};

inline BenefitReport benefit_check(const PersuasionInstance& inst, const OptimalPlan& plan,
                                   const std::vector<PointSet>& vertex_sets, double tol = 1e-7) {
  const auto base = baseline_values(inst);
  BenefitReport rep;
  rep.gain = plan.value - base.no_info;
  rep.benefits = plan.value > base.no_info + tol;
  rep.certificate_value = -std::numeric_limits<double>::infinity();
  const std::size_t n = inst.num_states();
  for (std::size_t a = 0; a < vertex_sets.size(); ++a) {
    // A linear objective over a hull attains its max at a vertex.
    for (const auto& p : vertex_sets[a].points) {
      double g = 0.0;
      for (std::size_t w = 0; w < n; ++w) g += p[w] * (inst.sender(w, a) - inst.sender(w, base.prior_action));
      if (g > rep.certificate_value) {
        rep.certificate_value = g;
        rep.certificate_action = a;
        rep.certificate_belief = p;
      }
    }
  }
  if (!std::isfinite(rep.certificate_value)) rep.certificate_value = 0.0;
  return rep;
}

/// Whether a scheme exists under which every state gets its (unique)
/// sender-optimal action, judged against the given per-action vertex sets.
inline bool full_persuasion_general(const PersuasionInstance& inst, const std::vector<PointSet>& vertex_sets) {
  const std::size_t n = inst.num_states(), m = inst.num_actions();
  std::vector<std::vector<double>> target(m, std::vector<double>(n, 0.0));
  for (std::size_t w = 0; w < n; ++w) {
    std::size_t best = 0;
    for (std::size_t a = 1; a < m; ++a)
      if (inst.sender(w, a) > inst.sender(w, best)) best = a;
    for (std::size_t a = 0; a < m; ++a)
      if (a != best && inst.sender(w, a) == inst.sender(w, best))
        throw std::invalid_argument("full persuasion: sender-optimal action not unique in state " +
                                    inst.states.label(w));
    target[best][w] = inst.prior[w];
  }
  for (std::size_t a = 0; a < m; ++a) {
    double b = 0.0;
    for (double x : target[a]) b += x;
    if (b <= 0.0) continue;
    for (auto& x : target[a]) x /= b;
    if (!hull_membership(target[a], vertex_sets[a])) return false;
  }
  return true;
}

inline bool full_persuasion_general(const PersuasionInstance& inst, GridSpec grid) {
  return full_persuasion_general(inst, grid_vertex_sets(inst, grid));
}

/// Concavification on the grid: max E_eta[vhat(s)] over distributions eta on
/// grid beliefs with mean equal to the prior, where vhat is the sender's
/// payoff under the receiver's sender-preferred best response.
inline double concavify_oracle(const PersuasionInstance& inst, GridSpec grid) {
  const std::size_t n = inst.num_states();
  LinearProgram lp;
  lp.eq_matrix.assign(n + 1, {});
  lp.eq_rhs = inst.prior.vec();
  lp.eq_rhs.push_back(1.0);
  for_each_grid_belief(n, grid.k, [&](std::span<const double> s) {
    const auto br = best_response(inst.receiver, inst.sender, s);
    lp.objective.push_back(inst.sender.expected(s, br.selected));
    for (std::size_t w = 0; w < n; ++w) lp.eq_matrix[w].push_back(s[w]);
    lp.eq_matrix[n].push_back(1.0);
  });
  const auto res = solve_lp(lp);
  if (!res.optimal()) throw std::runtime_error(std::string("concavify LP: ") + to_string(res.status));
  return res.value;
}

}  // namespace persuasion::general
