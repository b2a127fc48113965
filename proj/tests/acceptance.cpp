// Acceptance run: one PASS/FAIL line per criterion, nonzero exit on failure.

#include "persuasion/io.hpp"
#include "test_support.hpp"

#include <chrono>
#include <cstdio>
#include <functional>
#include <sstream>
#include <string>

using namespace persuasion;
namespace ts = testing_support;

namespace {

struct Outcome {
  bool ok = true;
  std::ostringstream detail;

  void require(bool cond, const std::string& what) {
    if (!cond) {
      ok = false;
      detail << " [failed: " << what << "]";
    }
  }
};

double max_abs(const std::vector<double>& a, const std::vector<double>& b) {
  double d = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) d = std::max(d, std::abs(a[i] - b[i]));
  return d;
}

// 1. Example 1 exact solve, full persuasion and obedience.
void example_one(Outcome& o) {
  const auto inst = io::instance_from_json(io::read_json_file(std::string(SAMPLES_DIR) + "/example1.json"));
  const auto plan = binary::solve_binary(inst);
  o.require(std::abs(plan.value - 1.0) <= 1e-9, "value 1");
  o.require(binary::full_persuasion_binary(inst), "full persuasion");
  const auto emitted = scheme_from_plan(plan, inst);
  const auto rep = validate_scheme(emitted, inst);
  o.require(rep.ok(), "emitted scheme validates");
  const auto three = validate_scheme(ts::example1_three_signal_scheme(), inst);
  double min_margin = 1e300;
  for (double m : three.obedience_margins) min_margin = std::min(min_margin, m);
  o.require(min_margin >= 1.0 / 12.0 - 1e-8, "three-signal margins >= 1/12");
  o.detail << "value=" << plan.value << " signals=" << emitted.num_signals() << " min_margin=" << min_margin;
}

// 2. Best single action-1 posterior under the two-signal restriction.
void two_signal_cap(Outcome& o) {
  const auto inst = ts::example1();
  const auto& prior = inst.prior.vec();
  double best = 0.0;
  std::vector<double> arg;
  general::for_each_grid_belief(4, 24, [&](std::span<const double> mu) {
    if (differential_utility(inst.receiver, mu) < 0.0) return;
    double b = 1.0;
    for (std::size_t w = 0; w < 4; ++w)
      if (mu[w] > 0.0) b = std::min(b, prior[w] / mu[w]);
    if (b > best) {
      best = b;
      arg.assign(mu.begin(), mu.end());
    }
  });
  o.require(std::abs(best - 0.375) <= 0.005, "cap 3/8");
  o.detail << "b=" << best << " at (" << arg[0] << "," << arg[1] << "," << arg[2] << "," << arg[3] << ")";
}

// 3. Queue figure reproduction.
void queue_figure(Outcome& o) {
  const queue::QueueInstance q{0.95, 100, 7.5, 2.5};
  const auto sol = queue::solve_queue(q);
  const auto& s = sol.scheme;
  std::size_t joins = 0, leaves = 0;
  for (const auto& sig : s.signals) (sig.action == 1 ? joins : leaves) += 1;
  o.require(joins == 4 && leaves == 1, "4 Join + 1 Leave");

  std::vector<std::size_t> order(q.capacity);
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
  const auto th = binary::verify_threshold(sol.conditional_plan, order);
  o.require(th.holds && th.threshold && *th.threshold == 4, "threshold at 4");

  const std::vector<std::vector<double>> expected = {
      {0.76, 0, 0, 0, 0.24}, {0.59, 0, 0, 0.41, 0}, {0, 0.64, 0, 0.36, 0}, {0, 0, 0.93, 0.07, 0}};
  const std::vector<double> waits = {1.97, 2.24, 2.72, 3.07};
  double worst_post = 0.0, worst_wait = 0.0;
  if (joins == 4) {
    for (std::size_t j = 0; j < 4; ++j) {
      std::vector<double> head(s.signals[j].posterior.begin(), s.signals[j].posterior.begin() + 5);
      double tail = 0.0;
      for (std::size_t w = 5; w < s.signals[j].posterior.size(); ++w) tail += s.signals[j].posterior[w];
      worst_post = std::max({worst_post, max_abs(head, expected[j]), tail});
      worst_wait = std::max(worst_wait, std::abs(queue::waiting_moments(s.signals[j].posterior).mean - waits[j]));
    }
  }
  o.require(worst_post <= 0.015, "posteriors within 0.015");
  o.require(worst_wait <= 0.02, "mean waits within 0.02");
  const auto sw = queue::verify_sandwich(sol);
  o.require(sw.applicable && sw.zero_utility && sw.two_support && sw.nested && sw.moment_order, "sandwich");
  o.detail << "joins=" << joins << " max|dpost|=" << worst_post << " max|dwait|=" << worst_wait
           << " join_prob=" << sol.join_probability;
}

// 4. Closed-form boundary weight against bisection.
void gamma_agreement(Outcome& o) {
  double worst = 0.0;
  int pairs = 0;
  for (double tau : {5.0, 7.5, 10.0})
    for (double beta : {0.0, 1.0, 2.5}) {
      const auto model = queue::make_queue_model(21, tau, beta);
      auto f = [&](std::span<const double> mu) { return differential_utility(model, mu); };
      for (long long m = 0; m <= 2; ++m)
        for (long long n = 3; n <= 20; ++n) {
          if (queue::join_utility_at(m, tau, beta) < 0.0 || queue::join_utility_at(n, tau, beta) >= 0.0) continue;
          const double g = queue::gamma_closed_form(n, m, tau, beta);
          const double b = segment_bisection(f, Belief::point_mass(21, static_cast<std::size_t>(n)).weights(),
                                             Belief::point_mass(21, static_cast<std::size_t>(m)).weights());
          worst = std::max(worst, std::abs(g - b));
          ++pairs;
        }
    }
  o.require(pairs > 0, "grid nonempty");
  o.require(worst <= 1e-8, "max |closed form - bisection| <= 1e-8");
  o.detail << "pairs=" << pairs << " max_diff=" << worst;
}

// 5. Grid solver against concavification and the recommendation LP.
void oracle_equivalence(Outcome& o) {
  std::mt19937_64 rng(5150);
  double worst_cc = 0.0, worst_rec = 0.0;
  int eum = 0;
  for (int t = 0; t < 50; ++t) {
    const std::size_t n = 2 + static_cast<std::size_t>(t) % 3, m = 2 + static_cast<std::size_t>(t / 3) % 2;
    const bool linear = t % 2 == 0;
    const auto inst = linear ? ts::random_eum_instance(rng, n, m) : ts::random_mean_stdev_instance(rng, n, m);
    const double v = general::solve_general(inst, general::GridSpec{12}).value;
    worst_cc = std::max(worst_cc, std::abs(v - general::concavify_oracle(inst, {12})));
    if (linear) {
      const auto& u = std::get<ExpectedParams>(inst.receiver.params()).u.rows();
      worst_rec = std::max(worst_rec, std::abs(v - ts::recommendation_oracle(inst, u)));
      ++eum;
    }
  }
  o.require(worst_cc <= 1e-7, "grid = concavification");
  o.require(worst_rec <= 1e-7, "grid = recommendation LP (EUM)");
  o.detail << "instances=50 eum=" << eum << " max|grid-concav|=" << worst_cc << " max|grid-rec|=" << worst_rec;
}

// 6. Simulation against the program's stationary predictions.
void simulation(Outcome& o) {
  const queue::QueueInstance q{0.95, 100, 7.5, 2.5};
  const auto sol = queue::solve_queue(q);
  const std::uint64_t seed = 12345;
  const auto r = queue::simulate_queue(q, sol.scheme, 1'000'000, seed);
  const double p = sol.join_probability;
  const double se = std::sqrt(p * (1 - p) / static_cast<double>(r.arrivals));
  const double z = (r.empirical_join_rate - p) / se;
  o.require(std::abs(z) <= 3.0, "join fraction within 3 binomial SE");

  const queue::QueueInstance small{0.8, 3, 100.0, 1.0};
  const auto full = full_information_scheme(queue::make_queue_instance(small));
  const auto rs = queue::simulate_queue(small, full, 1'000'000, seed);
  const auto law = queue::mm1c_stationary(small.lambda, small.capacity);
  double worst_z = 0.0;
  for (std::size_t w = 0; w <= small.capacity; ++w)
    worst_z = std::max(worst_z, std::abs(rs.empirical_occupancy[w] - law[w]) / rs.occupancy_stderr[w]);
  o.require(worst_z <= 3.0, "M/M/1/3 occupancy within 3 sigma");
  o.detail << "seed=" << seed << " lp=" << p << " sim=" << r.empirical_join_rate << " z=" << z
           << " mm1c_max_z=" << worst_z;
}

// 7. Property suites in compact form.
void properties(Outcome& o) {
  std::mt19937_64 rng(777);
  int schemes = 0;
  double worst_res = 0.0;
  bool dominates = true, coalesce_ok = true, hull_ok = true, refine_ok = true, mono_ok = true;

  auto check_scheme = [&](const SignalingScheme& s, const PersuasionInstance& inst) {
    const auto rep = validate_scheme(s, inst);
    worst_res = std::max({worst_res, rep.bayes_residual, rep.posterior_residual});
    ++schemes;
  };

  for (int t = 0; t < 30; ++t) {
    const auto inst = t % 3 == 0   ? ts::random_eum_instance(rng, 3, 3)
                      : t % 3 == 1 ? ts::random_mean_stdev_instance(rng, 3, 2)
                                   : ts::random_binary_mean_stdev(rng, 4);
    const auto plan = t % 3 == 2 ? binary::solve_binary(inst)
                                 : general::coalesce_plan(inst, general::solve_general(inst, general::GridSpec{12}));
    const auto s = scheme_from_plan(plan, inst);
    check_scheme(s, inst);
    const auto base = general::baseline_values(inst);
    if (plan.value < std::max(base.no_info, base.full_info) - 1e-9) dominates = false;

    // Coalescence: split the first signal in two and merge back.
    auto split = s;
    split.signals.push_back(split.signals[0]);
    split.signals[0].marginal /= 2;
    split.signals.back().marginal /= 2;
    for (auto& row : split.conditional) {
      row.push_back(row[0] / 2);
      row[0] /= 2;
    }
    const double v0 = scheme_value(s, inst);
    if (std::abs(scheme_value(split, inst) - v0) > 1e-10 ||
        std::abs(scheme_value(coalesce(split, inst.sender), inst) - v0) > 1e-10)
      coalesce_ok = false;
  }
  const auto qsol = queue::solve_queue({0.95, 100, 7.5, 2.5});
  check_scheme(qsol.scheme, qsol.instance);
  check_scheme(scheme_from_plan(binary::solve_binary(ts::example1()), ts::example1()), ts::example1());

  // Hull identities on random beliefs.
  for (int t = 0; t < 30; ++t) {
    const auto inst = ts::random_binary_mean_stdev(rng, 2 + static_cast<std::size_t>(t) % 3);
    const auto cls = binary::classify_states(inst);
    const auto sets = binary::binary_vertex_sets(inst, cls, binary::compute_k01(inst, cls));
    PointSet zero_side = sets[0];
    for (const auto& p : sets[1].points)
      if (std::abs(differential_utility(inst.receiver, p)) <= 1e-7) zero_side.add(p);
    for (int k = 0; k < 20; ++k) {
      const auto mu = ts::random_simplex_point(rng, inst.num_states());
      const bool in1 = hull_membership(mu, sets[1], 1e-6).has_value();
      if (differential_utility(inst.receiver, mu) >= 0.0 && !in1) hull_ok = false;
      if (!in1 && !hull_membership(mu, zero_side, 1e-6)) hull_ok = false;
    }
  }

  // Boundary-weight monotonicity and decreasing differences.
  for (double tau : {5.0, 7.5, 10.0})
    for (double beta : {0.0, 1.0, 2.5}) {
      auto ok = [&](long long n, long long m) {
        return queue::join_utility_at(m, tau, beta) >= 0.0 && queue::join_utility_at(n, tau, beta) < 0.0;
      };
      auto g = [&](long long n, long long m) { return queue::gamma_closed_form(n, m, tau, beta); };
      auto f = [&](long long n, long long m) { return std::log(g(n, m) / (1 - g(n, m))); };
      for (long long n = 3; n <= 20; ++n)
        for (long long m = 0; m <= 2; ++m) {
          if (!ok(n, m)) continue;
          const double here = g(n, m) * n + (1 - g(n, m)) * m;
          if (m < 2 && ok(n, m + 1) && g(n, m + 1) * n + (1 - g(n, m + 1)) * (m + 1) < here - 1e-10) mono_ok = false;
          if (ok(n + 1, m) && g(n + 1, m) * (n + 1) + (1 - g(n + 1, m)) * m > here + 1e-10) mono_ok = false;
          for (long long k = m + 1; k <= 2; ++k)
            for (long long l = n + 1; l <= 20; ++l) {
              if (!ok(n, k) || !ok(l, k) || !ok(l, m)) continue;
              if (g(n, k) <= 0 || g(n, k) >= 1 || g(n, m) <= 0 || g(n, m) >= 1) continue;
              if (f(n, k) - f(n, m) < f(l, k) - f(l, m) - 1e-12) mono_ok = false;
            }
        }
    }

  // Grid refinement.
  for (int t = 0; t < 10; ++t) {
    const auto inst = ts::random_mean_stdev_instance(rng, 3, 2);
    const double a = general::solve_general(inst, general::GridSpec{4}).value;
    const double b = general::solve_general(inst, general::GridSpec{8}).value;
    const double c = general::solve_general(inst, general::GridSpec{24}).value;
    if (a > b + 1e-9 || b > c + 1e-9) refine_ok = false;
  }

  o.require(worst_res <= 1e-8, "scheme residuals <= 1e-8");
  o.require(dominates, "value >= baselines");
  o.require(hull_ok, "hull identities");
  o.require(mono_ok, "monotonicity / decreasing differences");
  o.require(refine_ok, "grid refinement monotone");
  o.require(coalesce_ok, "coalescence invariance");
  o.detail << "schemes=" << schemes << " max_residual=" << worst_res;
}

}  // namespace

int main() {
  struct Criterion {
    int id;
    const char* name;
    double budget_s;
    std::function<void(Outcome&)> run;
  };
  const std::vector<Criterion> criteria = {
      {1, "example 1 exact solve and full persuasion", 0.1, example_one},
      {2, "example 1 two-signal cap", 5.0, two_signal_cap},
      {3, "queue figure reproduction", 5.0, queue_figure},
      {4, "closed-form vs bisection boundary weights", 2.0, gamma_agreement},
      {5, "grid solver oracle equivalence", 60.0, oracle_equivalence},
      {6, "simulation consistency", 30.0, simulation},
      {7, "property suites", 1e300, properties},
  };
  int failed = 0;
  for (const auto& c : criteria) {
    Outcome o;
    const auto t0 = std::chrono::steady_clock::now();
    try {
      c.run(o);
    } catch (const std::exception& e) {
      o.ok = false;
      o.detail << " [exception: " << e.what() << "]";
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    if (secs > c.budget_s) {
      o.ok = false;
      o.detail << " [over time budget " << c.budget_s << " s]";
    }
    if (!o.ok) ++failed;
    std::printf("%s criterion %d: %s (%.3f s) %s\n", o.ok ? "PASS" : "FAIL", c.id, c.name, secs,
                o.detail.str().c_str());
  }
  return failed == 0 ? 0 : 1;
}
