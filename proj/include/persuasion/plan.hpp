#pragma once

#include "persuasion/core_model.hpp"
#include "persuasion/geometry.hpp"

#include <cmath>
#include <cstddef>
#include <string>
#include <vector>

namespace persuasion {

/// One posterior used to induce an action, with its share of that action's
/// probability mass.
struct SignalAtom {
  std::vector<double> belief;
  double weight = 0.0;  // lambda; sums to 1 within the action
  std::string label;
};

/// Joint state/action distribution chosen by the sender, together with a
/// decomposition of each action's mean posterior into receiver-optimal
/// posteriors.
struct OptimalPlan {
  std::vector<std::vector<double>> t;                     // t[action][state]
  double value = 0.0;
  std::vector<std::vector<SignalAtom>> decomposition;     // per action

  std::size_t num_actions() const { return t.size(); }
  std::size_t num_states() const { return t.empty() ? 0 : t.front().size(); }

  /// Probability that `action` is taken.
  double action_probability(std::size_t action) const {
    double s = 0.0;
    for (double x : t.at(action)) s += x;
    return s;
  }

  /// Mean posterior conditional on `action`; empty when the action is never taken.
  std::vector<double> mean_posterior(std::size_t action) const {
    const double b = action_probability(action);
    if (b <= 0.0) return {};
    std::vector<double> m = t.at(action);
    for (auto& x : m) x /= b;
    return m;
  }

  /// State marginal implied by the plan (sum over actions).
  std::vector<double> state_marginal() const {
    std::vector<double> mu(num_states(), 0.0);
    for (const auto& ta : t)
      for (std::size_t w = 0; w < mu.size(); ++w) mu[w] += ta[w];
    return mu;
  }
};

/// Builds a plan from nonnegative weights over per-action point sets:
/// t_a = sum_i weights[a][i] * points[a][i].
inline OptimalPlan plan_from_weights(const std::vector<PointSet>& vertex_sets,
                                     const std::vector<std::vector<double>>& weights,
                                     const SenderUtility& sender, std::size_t num_states) {
  OptimalPlan plan;
  const std::size_t m = vertex_sets.size();
  plan.t.assign(m, std::vector<double>(num_states, 0.0));
  plan.decomposition.resize(m);
  for (std::size_t a = 0; a < m; ++a) {
    double b = 0.0;
    for (std::size_t i = 0; i < vertex_sets[a].size(); ++i) {
      const double w = weights[a][i];
      if (w <= 0.0) continue;
      const auto& p = vertex_sets[a].points[i];
      double mass = 0.0;
      for (std::size_t s = 0; s < num_states; ++s) {
        plan.t[a][s] += w * p[s];
        mass += p[s];
      }
      b += w * mass;
      plan.decomposition[a].push_back({p, w * mass, vertex_sets[a].label(i)});
    }
    if (b > 0.0)
      for (auto& atom : plan.decomposition[a]) atom.weight /= b;
  }
  plan.value = 0.0;
  for (std::size_t a = 0; a < m; ++a) plan.value += sender.expected(plan.t[a], a);
  return plan;
}

}  // namespace persuasion
