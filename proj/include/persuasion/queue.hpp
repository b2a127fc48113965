#pragma once

// Throughput-maximizing signaling for an unobservable M/M/1/C queue whose
// customers have mean-standard-deviation utility over their waiting time. The
// prior over queue lengths seen by arrivals is endogenous: it is the
// stationary law of the birth-death chain induced by the joining decisions.

#include "persuasion/binary.hpp"
#include "persuasion/core_model.hpp"
#include "persuasion/lp.hpp"
#include "persuasion/plan.hpp"
#include "persuasion/queue_model.hpp"
#include "persuasion/scheme.hpp"

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <random>
#include <stdexcept>
#include <string>
#include <vector>

namespace persuasion::queue {

struct QueueSolution {
  QueueInstance params;
  /// Unnormalized joint masses over queue lengths 0..C-1 (t[0] leave,
  /// t[1] join); together with lambda * t[1][C-1] they form the stationary law.
  OptimalPlan plan;
  /// Same plan conditioned on the queue not being full; its state marginal is
  /// the arrival-seen prior.
  OptimalPlan conditional_plan;
  PersuasionInstance instance;  // receiver model with the endogenous prior
  SignalingScheme scheme;       // Join_1..Join_J sorted by mean wait, then Leave
  double join_probability = 0.0;  // fraction of all arrivals that join
  double throughput = 0.0;        // lambda * join_probability
  std::vector<double> occupancy;  // stationary P(queue length = n), n = 0..C
};

namespace detail {

inline bool is_leave(const Signal& s) { return s.action == 0; }

}  // namespace detail

/// Solves the endogenous-prior program
///   max sum t1   s.t.  t1 in cone(K1 u K01), t0 in cone(L0),
///   t0(w+1) + t1(w+1) = lambda t1(w)  (w < C-1),
///   sum t0 + sum t1 + lambda t1(C-1) = 1,
/// and builds the Join/Leave scheme.
inline QueueSolution solve_queue(const QueueInstance& q) {
  q.validate();
  auto inst = make_queue_instance(q);
  const std::size_t n = q.capacity;
  const auto cls = binary::classify_states(inst);
  if (cls.k1.empty())
    throw DegenerateModel("queue: joining is never optimal, even with an empty queue (tau too small)");
  const auto k01 = binary::compute_k01(inst, cls);
  auto sets = binary::binary_vertex_sets(inst, cls, k01);
  const auto& v0 = sets[0];
  const auto& v1 = sets[1];

  const std::size_t c1 = v1.size(), c0 = v0.size(), cols = c1 + c0;
  LinearProgram lp;
  lp.objective.assign(cols, 0.0);
  lp.eq_matrix.assign(n, std::vector<double>(cols, 0.0));
  lp.eq_rhs.assign(n, 0.0);
  lp.eq_rhs[n - 1] = 1.0;
  auto column = [&](std::size_t j) -> const std::vector<double>& {
    return j < c1 ? v1.points[j] : v0.points[j - c1];
  };
  for (std::size_t j = 0; j < cols; ++j) {
    const auto& p = column(j);
    const bool join = j < c1;
    double mass = 0.0;
    for (double x : p) mass += x;
    if (join) lp.objective[j] = mass;
    for (std::size_t w = 0; w + 1 < n; ++w)
      lp.eq_matrix[w][j] = p[w + 1] - (join ? q.lambda * p[w] : 0.0);
    lp.eq_matrix[n - 1][j] = mass + (join ? q.lambda * p[n - 1] : 0.0);
  }
  const auto res = solve_lp(lp);
  if (!res.optimal()) throw std::runtime_error(std::string("queue LP: ") + to_string(res.status));

  std::vector<std::vector<double>> weights(2);
  weights[1].assign(res.x.begin(), res.x.begin() + static_cast<std::ptrdiff_t>(c1));
  weights[0].assign(res.x.begin() + static_cast<std::ptrdiff_t>(c1), res.x.end());
  auto plan = plan_from_weights(sets, weights, inst.sender, n);

  QueueSolution sol{q, plan, plan, inst, {}, 0.0, 0.0, {}};
  sol.join_probability = plan.action_probability(1);
  sol.throughput = q.lambda * sol.join_probability;
  sol.occupancy.assign(n + 1, 0.0);
  for (std::size_t w = 0; w < n; ++w) sol.occupancy[w] = plan.t[0][w] + plan.t[1][w];
  sol.occupancy[n] = q.lambda * plan.t[1][n - 1];

  const double open = 1.0 - sol.occupancy[n];
  for (auto& ta : sol.conditional_plan.t)
    for (auto& x : ta) x /= open;
  sol.conditional_plan.value /= open;
  std::vector<double> prior(sol.occupancy.begin(), sol.occupancy.end() - 1);
  for (auto& x : prior) x /= open;
  sol.instance = make_queue_instance(q, Belief(prior));

  // All leave posteriors lie in the convex region where leaving is strictly
  // optimal, so they are pooled into one Leave signal at the mean posterior.
  auto pooled = sol.conditional_plan;
  if (const auto m0 = pooled.mean_posterior(0); !m0.empty())
    pooled.decomposition[0] = {SignalAtom{m0, 1.0, "Leave"}};
  auto scheme = scheme_from_plan(pooled, inst.sender);

  // Order: Join signals by increasing mean wait, then Leave.
  std::vector<std::size_t> order(scheme.num_signals());
  for (std::size_t j = 0; j < order.size(); ++j) order[j] = j;
  std::ranges::stable_sort(order, [&](std::size_t a, std::size_t b) {
    const bool la = detail::is_leave(scheme.signals[a]), lb = detail::is_leave(scheme.signals[b]);
    if (la != lb) return lb;
    return waiting_moments(scheme.signals[a].posterior).mean < waiting_moments(scheme.signals[b].posterior).mean;
  });
  SignalingScheme sorted;
  sorted.prior = scheme.prior;
  sorted.conditional.assign(n, std::vector<double>(order.size(), 0.0));
  std::size_t join_idx = 0;
  for (std::size_t j = 0; j < order.size(); ++j) {
    Signal s = scheme.signals[order[j]];
    s.label = detail::is_leave(s) ? "Leave" : "Join_" + std::to_string(++join_idx);
    sorted.signals.push_back(std::move(s));
    for (std::size_t w = 0; w < n; ++w) sorted.conditional[w][j] = scheme.conditional[w][order[j]];
  }
  sol.scheme = std::move(sorted);
  return sol;
}

/// Largest |balance residual| and |normalization residual| of a solution.
inline std::pair<double, double> balance_residuals(const QueueSolution& sol) {
  const auto& t0 = sol.plan.t[0];
  const auto& t1 = sol.plan.t[1];
  const std::size_t n = t0.size();
  double bal = 0.0, total = 0.0;
  for (std::size_t w = 0; w + 1 < n; ++w)
    bal = std::max(bal, std::abs(t0[w + 1] + t1[w + 1] - sol.params.lambda * t1[w]));
  for (std::size_t w = 0; w < n; ++w) total += t0[w] + t1[w];
  total += sol.params.lambda * t1[n - 1];
  return {bal, std::abs(total - 1.0)};
}

// ---------------------------------------------------------------------------

struct JoinSupport {
  std::size_t low = 0;   // state where joining is optimal
  std::size_t high = 0;  // state where leaving is optimal (== low for pure signals)
  double mean_wait = 0.0;
  double var_wait = 0.0;
  double utility = 0.0;  // differential utility at the posterior
};

struct SandwichReport {
  bool applicable = false;  // false when nobody is ever turned away
  bool zero_utility = true;
  bool two_support = true;
  bool nested = true;
  bool moment_order = true;
  std::vector<JoinSupport> joins;

  bool passed() const { return !applicable || (zero_utility && two_support && nested && moment_order); }
};

/// Checks the nested support structure of the Join signals: each Join
/// posterior sits on the indifference boundary, has at most two support
/// states, the supports nest, and mean waits increase while variances
/// decrease along Join_1..Join_J.
inline SandwichReport verify_sandwich(const QueueSolution& sol, double utility_tol = 1e-6,
                                      double support_tol = 1e-12) {
  SandwichReport rep;
  double leave_mass = 0.0;
  for (double x : sol.plan.t[0]) leave_mass += x;
  rep.applicable = leave_mass > support_tol;
  if (!rep.applicable) return rep;

  for (const auto& s : sol.scheme.signals) {
    if (s.action != 1) continue;
    JoinSupport js;
    std::vector<std::size_t> support;
    for (std::size_t w = 0; w < s.posterior.size(); ++w)
      if (s.posterior[w] > support_tol) support.push_back(w);
    if (support.size() > 2 || support.empty()) rep.two_support = false;
    if (!support.empty()) {
      js.low = support.front();
      js.high = support.back();
    }
    const auto mom = waiting_moments(s.posterior);
    js.mean_wait = mom.mean;
    js.var_wait = mom.variance;
    js.utility = differential_utility(sol.instance.receiver, s.posterior);
    if (std::abs(js.utility) > utility_tol) rep.zero_utility = false;
    rep.joins.push_back(js);
  }
  for (std::size_t j = 1; j < rep.joins.size(); ++j) {
    const auto& prev = rep.joins[j - 1];
    const auto& cur = rep.joins[j];
    if (!(prev.low <= cur.low && cur.high <= prev.high)) rep.nested = false;
    if (!(prev.mean_wait <= cur.mean_wait + 1e-12 && prev.var_wait >= cur.var_wait - 1e-12))
      rep.moment_order = false;
  }
  for (const auto& j : rep.joins)
    if (j.low > j.high) rep.nested = false;
  return rep;
}

// ---------------------------------------------------------------------------

struct SimulationResult {
  std::uint64_t arrivals = 0;  // counted after burn-in
  std::uint64_t joins = 0;
  double empirical_join_rate = 0.0;           // joins / arrivals
  std::vector<double> empirical_occupancy;    // time-average P(length = n), n = 0..C
  std::vector<double> occupancy_stderr;       // batch-means standard errors
  std::vector<double> signal_frequencies;     // share of arrivals (below capacity) receiving each signal
};

inline constexpr std::uint64_t kMinSimulationEvents = 10'000;

/// Event-driven simulation of the queue under a scheme: Poisson(lambda)
/// arrivals, unit-rate exponential service, capacity C. An arrival below
/// capacity draws a signal from the scheme's row for the current length and
/// takes the signal's intended action. The first 10% of events are burn-in.
inline SimulationResult simulate_queue(const QueueInstance& q, const SignalingScheme& scheme,
                                       std::uint64_t horizon_events, std::uint64_t seed) {
  q.validate();
  if (horizon_events < kMinSimulationEvents)
    throw std::invalid_argument("simulate_queue: horizon must be at least 10^4 events");
  if (scheme.num_states() != q.capacity)
    throw std::invalid_argument("simulate_queue: scheme states differ from queue capacity");

  SchemeSampler sampler(scheme, seed);
  auto& rng = sampler.engine();
  std::exponential_distribution<double> expo(1.0);
  std::uniform_real_distribution<double> unif(0.0, 1.0);

  const std::size_t C = q.capacity;
  const std::uint64_t burn_in = horizon_events / 10;
  constexpr std::size_t kBatches = 50;
  const std::uint64_t batch_len = std::max<std::uint64_t>(1, (horizon_events - burn_in) / kBatches);

  SimulationResult out;
  std::vector<double> time_in(C + 1, 0.0);
  std::vector<std::vector<double>> batch_time(kBatches, std::vector<double>(C + 1, 0.0));
  std::vector<std::uint64_t> signal_counts(scheme.num_signals(), 0);
  std::uint64_t signalled = 0;
  double total_time = 0.0;

  std::size_t len = 0;
  for (std::uint64_t ev = 0; ev < horizon_events; ++ev) {
    const double rate = q.lambda + (len > 0 ? 1.0 : 0.0);
    if (rate <= 0.0) {
      // Empty system with no arrivals: it stays empty forever.
      if (ev >= burn_in) {
        time_in[len] += 1.0;
        total_time += 1.0;
        batch_time[std::min<std::uint64_t>((ev - burn_in) / batch_len, kBatches - 1)][len] += 1.0;
      }
      continue;
    }
    const double dt = expo(rng) / rate;
    const bool counted = ev >= burn_in;
    if (counted) {
      time_in[len] += dt;
      total_time += dt;
      batch_time[std::min<std::uint64_t>((ev - burn_in) / batch_len, kBatches - 1)][len] += dt;
    }
    const bool arrival = unif(rng) * rate < q.lambda;
    if (!arrival) {
      --len;
      continue;
    }
    if (counted) ++out.arrivals;
    if (len >= C) continue;  // blocked
    const std::size_t sig = sampler.signal_for(len);
    if (counted) {
      ++signal_counts[sig];
      ++signalled;
    }
    if (scheme.signals[sig].action == 1) {
      ++len;
      if (counted) ++out.joins;
    }
  }

  out.empirical_join_rate = out.arrivals ? static_cast<double>(out.joins) / static_cast<double>(out.arrivals) : 0.0;
  out.empirical_occupancy.assign(C + 1, 0.0);
  if (total_time > 0.0)
    for (std::size_t s = 0; s <= C; ++s) out.empirical_occupancy[s] = time_in[s] / total_time;

  out.occupancy_stderr.assign(C + 1, 0.0);
  std::vector<double> batch_total(kBatches, 0.0);
  for (std::size_t b = 0; b < kBatches; ++b)
    for (double x : batch_time[b]) batch_total[b] += x;
  for (std::size_t s = 0; s <= C; ++s) {
    double mean = 0.0, sq = 0.0;
    std::size_t used = 0;
    for (std::size_t b = 0; b < kBatches; ++b) {
      if (batch_total[b] <= 0.0) continue;
      const double f = batch_time[b][s] / batch_total[b];
      mean += f;
      sq += f * f;
      ++used;
    }
    if (used > 1) {
      mean /= static_cast<double>(used);
      const double var = (sq - static_cast<double>(used) * mean * mean) / static_cast<double>(used - 1);
      out.occupancy_stderr[s] = std::sqrt(std::max(0.0, var) / static_cast<double>(used));
    }
  }

  out.signal_frequencies.assign(scheme.num_signals(), 0.0);
  if (signalled)
    for (std::size_t j = 0; j < signal_counts.size(); ++j)
      out.signal_frequencies[j] = static_cast<double>(signal_counts[j]) / static_cast<double>(signalled);
  return out;
}

/// Stationary law of the M/M/1/C queue when everybody joins: P(n) ~ lambda^n.
inline std::vector<double> mm1c_stationary(double lambda, std::size_t capacity) {
  std::vector<double> p(capacity + 1);
  double s = 0.0, x = 1.0;
  for (std::size_t n = 0; n <= capacity; ++n) {
    p[n] = x;
    s += x;
    x *= lambda;
  }
  for (auto& v : p) v /= s;
  return p;
}

}  // namespace persuasion::queue
