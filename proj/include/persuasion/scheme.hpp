#pragma once

// Signaling schemes: construction from a plan's decompositions, Bayes
// plausibility and obedience diagnostics, valuation and sampling.

#include "persuasion/core_model.hpp"
#include "persuasion/plan.hpp"

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <limits>
#include <random>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace persuasion {

struct Signal {
  std::string label;
  std::vector<double> posterior;
  std::size_t action = 0;  // action the signal is meant to induce
  double marginal = 0.0;   // probability the signal is sent
};

struct SignalingScheme {
  std::vector<Signal> signals;
  std::vector<std::vector<double>> conditional;  // conditional[state][signal] = pi(signal | state)
  std::vector<double> prior;

  std::size_t num_signals() const { return signals.size(); }
  std::size_t num_states() const { return prior.size(); }
};

namespace detail {

inline double max_abs_diff(const std::vector<double>& a, const std::vector<double>& b) {
  double d = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) d = std::max(d, std::abs(a[i] - b[i]));
  return d;
}

inline void fill_conditional(SignalingScheme& s) {
  const std::size_t n = s.prior.size(), k = s.signals.size();
  s.conditional.assign(n, std::vector<double>(k, 0.0));
  for (std::size_t w = 0; w < n; ++w) {
    if (s.prior[w] <= 0.0) {
      // Unreachable state: any valid row will do.
      if (k > 0) s.conditional[w][0] = 1.0;
      continue;
    }
    for (std::size_t j = 0; j < k; ++j)
      s.conditional[w][j] = s.signals[j].marginal * s.signals[j].posterior[w] / s.prior[w];
  }
}

}  // namespace detail

inline constexpr double kCoalesceTolerance = 1e-12;

/// Merges signals whose posteriors coincide; the merged signal keeps the
/// first label and the sender-preferred intended action.
inline SignalingScheme coalesce(const SignalingScheme& in, const SenderUtility& sender) {
  SignalingScheme out;
  out.prior = in.prior;
  std::vector<std::vector<std::size_t>> groups;
  for (std::size_t j = 0; j < in.signals.size(); ++j) {
    bool placed = false;
    for (auto& g : groups) {
      if (detail::max_abs_diff(in.signals[g.front()].posterior, in.signals[j].posterior) <= kCoalesceTolerance) {
        g.push_back(j);
        placed = true;
        break;
      }
    }
    if (!placed) groups.push_back({j});
  }
  for (const auto& g : groups) {
    Signal s = in.signals[g.front()];
    s.marginal = 0.0;
    for (std::size_t j : g) {
      s.marginal += in.signals[j].marginal;
      const auto& cand = in.signals[j];
      if (sender.expected(s.posterior, cand.action) > sender.expected(s.posterior, s.action)) s.action = cand.action;
    }
    out.signals.push_back(std::move(s));
  }
  out.conditional.assign(in.conditional.size(), std::vector<double>(groups.size(), 0.0));
  for (std::size_t w = 0; w < in.conditional.size(); ++w)
    for (std::size_t gi = 0; gi < groups.size(); ++gi)
      for (std::size_t j : groups[gi]) out.conditional[w][gi] += in.conditional[w][j];
  return out;
}

/// One signal per decomposition atom: signal mu_i^a is sent in state w with
/// probability b_a * lambda_i^a * mu_i^a(w) / prior(w). Atoms shared by
/// several actions are merged first.
inline SignalingScheme scheme_from_plan(const OptimalPlan& plan, const SenderUtility& sender,
                                        double tol = 1e-8) {
  const std::size_t n = plan.num_states();
  SignalingScheme s;
  s.prior = plan.state_marginal();
  double total = 0.0;
  for (double x : s.prior) total += x;
  if (total <= 0.0) throw std::invalid_argument("scheme_from_plan: plan carries no mass");
  for (auto& x : s.prior) x /= total;

  for (std::size_t a = 0; a < plan.num_actions(); ++a) {
    const double b = plan.action_probability(a) / total;
    std::vector<double> recon(n, 0.0);
    for (const auto& atom : plan.decomposition[a]) {
      const double mass = b * atom.weight;
      for (std::size_t w = 0; w < n; ++w) recon[w] += mass * atom.belief[w];
      if (mass <= 1e-15) continue;
      s.signals.push_back({atom.label, atom.belief, a, mass});
    }
    for (std::size_t w = 0; w < n; ++w)
      if (std::abs(recon[w] - plan.t[a][w] / total) > tol)
        throw std::invalid_argument("scheme_from_plan: decomposition of action " + std::to_string(a) +
                                    " does not reproduce the plan");
  }
  detail::fill_conditional(s);
  return coalesce(s, sender);
}

inline SignalingScheme scheme_from_plan(const OptimalPlan& plan, const PersuasionInstance& inst) {
  return scheme_from_plan(plan, inst.sender);
}

/// Reveals the state: one signal per state with positive prior.
inline SignalingScheme full_information_scheme(const PersuasionInstance& inst) {
  SignalingScheme s;
  s.prior = inst.prior.vec();
  const std::size_t n = inst.num_states();
  for (std::size_t w = 0; w < n; ++w) {
    if (s.prior[w] <= 0.0) continue;
    const auto e = Belief::point_mass(n, w);
    s.signals.push_back({inst.states.label(w), e.vec(), best_response(inst, e).selected, s.prior[w]});
  }
  detail::fill_conditional(s);
  return s;
}

/// Reveals nothing: a single signal whose posterior is the prior.
inline SignalingScheme no_information_scheme(const PersuasionInstance& inst) {
  SignalingScheme s;
  s.prior = inst.prior.vec();
  s.signals.push_back({"prior", s.prior, best_response(inst, inst.prior).selected, 1.0});
  detail::fill_conditional(s);
  return s;
}

// ---------------------------------------------------------------------------

inline constexpr double kResidualFlag = 1e-8;
inline constexpr double kObedienceFlag = -1e-6;

struct ValidationReport {
  double bayes_residual = 0.0;      // row sums and marginal consistency
  double posterior_residual = 0.0;  // stated vs. Bayes-implied posteriors
  double prior_residual = 0.0;      // scheme prior vs. instance prior
  std::vector<double> obedience_margins;
  std::vector<std::size_t> disobedient;  // signals with margin below -1e-6

  bool ok() const {
    return bayes_residual <= kResidualFlag && posterior_residual <= kResidualFlag &&
           prior_residual <= kResidualFlag && disobedient.empty();
  }
};

inline ValidationReport validate_scheme(const SignalingScheme& s, const PersuasionInstance& inst) {
  ValidationReport rep;
  const std::size_t n = s.num_states(), k = s.num_signals();
  if (n != inst.num_states() || s.conditional.size() != n)
    throw std::invalid_argument("validate_scheme: state dimension mismatch");
  for (std::size_t w = 0; w < n; ++w) {
    rep.prior_residual = std::max(rep.prior_residual, std::abs(s.prior[w] - inst.prior[w]));
    if (s.conditional[w].size() != k) throw std::invalid_argument("validate_scheme: ragged conditional");
    if (s.prior[w] <= 0.0) continue;
    double row = 0.0;
    for (double p : s.conditional[w]) row += p;
    rep.bayes_residual = std::max(rep.bayes_residual, std::abs(row - 1.0));
  }
  for (std::size_t j = 0; j < k; ++j) {
    const auto& sig = s.signals[j];
    double marg = 0.0;
    for (std::size_t w = 0; w < n; ++w) marg += s.prior[w] * s.conditional[w][j];
    rep.bayes_residual = std::max(rep.bayes_residual, std::abs(marg - sig.marginal));
    if (marg > 0.0) {
      for (std::size_t w = 0; w < n; ++w)
        rep.posterior_residual =
            std::max(rep.posterior_residual, std::abs(s.prior[w] * s.conditional[w][j] / marg - sig.posterior[w]));
    }
    double margin = std::numeric_limits<double>::infinity();
    const double own = inst.receiver.evaluate(sig.posterior, sig.action);
    for (std::size_t a = 0; a < inst.num_actions(); ++a)
      if (a != sig.action) margin = std::min(margin, own - inst.receiver.evaluate(sig.posterior, a));
    rep.obedience_margins.push_back(margin);
    if (margin < kObedienceFlag) rep.disobedient.push_back(j);
  }
  return rep;
}

/// Sender's expected payoff when the receiver best-responds (sender-preferred)
/// to each signal's posterior.
inline double scheme_value(const SignalingScheme& s, const PersuasionInstance& inst) {
  double v = 0.0;
  for (const auto& sig : s.signals) {
    if (sig.marginal <= 0.0) continue;
    const auto br = best_response(inst.receiver, inst.sender, sig.posterior);
    v += sig.marginal * inst.sender.expected(sig.posterior, br.selected);
  }
  return v;
}

/// Reproducible stream of (state, signal) draws: state from the prior, signal
/// from the conditional row of that state.
class SchemeSampler {
 public:
  SchemeSampler(const SignalingScheme& s, std::uint64_t seed)
      : rng_(seed), state_dist_(s.prior.begin(), s.prior.end()) {
    rows_.reserve(s.conditional.size());
    for (const auto& row : s.conditional) {
      double sum = 0.0;
      for (double p : row) sum += p;
      if (sum > 0.0)
        rows_.emplace_back(row.begin(), row.end());
      else
        rows_.emplace_back();  // never drawn when the state has zero prior
    }
  }

  std::pair<std::size_t, std::size_t> next() {
    const std::size_t w = state_dist_(rng_);
    return {w, rows_[w](rng_)};
  }

  /// Signal for a given state (used by simulators that supply their own state).
  std::size_t signal_for(std::size_t state) { return rows_.at(state)(rng_); }

  std::mt19937_64& engine() { return rng_; }

 private:
  std::mt19937_64 rng_;
  std::discrete_distribution<std::size_t> state_dist_;
  std::vector<std::discrete_distribution<std::size_t>> rows_;
};

}  // namespace persuasion
