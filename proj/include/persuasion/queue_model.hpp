#pragma once

// Waiting-time utility for an unobservable M/M/1/C queue. A customer who
// arrives to find n others waits for n + 1 independent unit exponentials;
// joining is worth tau minus mean wait minus beta standard deviations.

#include "persuasion/core_model.hpp"

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace persuasion::queue {

struct QueueInstance {
  double lambda = 0.0;  // arrival rate, per unit mean service time
  std::size_t capacity = 0;
  double tau = 0.0;   // value of service, in service-time units
  double beta = 0.0;  // risk coefficient on the standard deviation

  void validate() const {
    if (!(lambda >= 0.0) || !std::isfinite(lambda))
      throw std::invalid_argument("queue: lambda must be finite and >= 0");
    if (capacity < 2) throw std::invalid_argument("queue: capacity must be >= 2");
    if (!(tau > 0.0) || !std::isfinite(tau)) throw std::invalid_argument("queue: tau must be > 0");
    if (!(beta >= 0.0) || !std::isfinite(beta))
      throw std::invalid_argument("queue: beta must be >= 0");
  }
};

struct Moments {
  double mean = 0.0;
  double variance = 0.0;
};

/// Waiting time moments for a customer who finds `n` others in the system.
inline Moments waiting_moments(long long n) {
  if (n < 0) throw std::invalid_argument("waiting_moments: negative queue length");
  const double k = static_cast<double>(n) + 1.0;
  return {k, k};
}

/// Waiting time moments under a belief over queue lengths (mixture).
inline Moments waiting_moments(std::span<const double> belief) {
  double mean = 0.0, second = 0.0;
  for (std::size_t n = 0; n < belief.size(); ++n) {
    const double k = static_cast<double>(n) + 1.0;
    mean += belief[n] * k;
    second += belief[n] * (k + k * k);
  }
  return {mean, std::max(0.0, second - mean * mean)};
}

/// tau - (E[X] + beta * sd[X]) at the point mass on queue length n.
inline double join_utility_at(long long n, double tau, double beta) {
  const auto m = waiting_moments(n);
  return tau - m.mean - beta * std::sqrt(m.variance);
}

/// Largest weight gamma on queue length n (where leaving is strictly better)
/// mixed with queue length m (where joining is weakly better) that keeps
/// joining optimal. Throws std::invalid_argument on violated preconditions and
/// std::domain_error when the discriminant is negative.
inline double gamma_closed_form(long long n, long long m, double tau, double beta) {
  if (n <= m) throw std::invalid_argument("gamma_closed_form: requires n > m");
  if (m < 0) throw std::invalid_argument("gamma_closed_form: negative queue length");
  if (join_utility_at(m, tau, beta) < 0.0 || !(join_utility_at(n, tau, beta) < 0.0))
    throw std::invalid_argument("gamma_closed_form: requires joining optimal at m, not at n");
  const double d = static_cast<double>(n - m);
  const double slack = tau - 1.0 - static_cast<double>(m);
  const double b2 = beta * beta;
  const double h = b2 * (d + 1.0) * (d + 1.0) + 4.0 * slack * (d + 1.0) +
                   4.0 * (1.0 + b2) * (1.0 + static_cast<double>(m)) - 4.0 * slack * slack;
  if (h < 0.0) throw std::domain_error("gamma_closed_form: negative discriminant");
  const double g = (2.0 * slack + b2 * (d + 1.0) - beta * std::sqrt(h)) / (2.0 * d * (1.0 + b2));
  return std::clamp(g, 0.0, 1.0);
}

/// Binary receiver model over queue lengths 0..C-1 with actions
/// {leave, join}; leaving is worth zero.
inline UtilityModel make_queue_model(std::size_t capacity, double tau, double beta) {
  const std::size_t n = capacity;
  std::vector<std::vector<double>> u(n, std::vector<double>(2, 0.0)), g_mean = u, g_var = u;
  for (std::size_t s = 0; s < n; ++s) {
    const auto mom = waiting_moments(static_cast<long long>(s));
    u[s][1] = tau - mom.mean;
    g_mean[s][1] = mom.mean;
    g_var[s][1] = mom.variance;
  }
  auto model = make_mean_stdev(u, g_mean, g_var, beta);
  model.set_queue_tag({tau, beta});
  return model;
}

/// Persuasion instance over queue lengths with throughput payoff v(n, a) = a.
/// The prior is a placeholder (uniform) until the endogenous one is known.
inline PersuasionInstance make_queue_instance(const QueueInstance& q,
                                              std::optional<Belief> prior = std::nullopt) {
  q.validate();
  const std::size_t n = q.capacity;
  std::vector<std::vector<double>> v(n, std::vector<double>{0.0, 1.0});
  return PersuasionInstance(StateSpace::numbered(n), ActionSpace({"leave", "join"}),
                            prior ? *prior : Belief::uniform(n), SenderUtility::from_rows(v),
                            make_queue_model(n, q.tau, q.beta));
}

}  // namespace persuasion::queue
