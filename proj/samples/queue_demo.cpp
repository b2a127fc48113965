// Solves the queue-signaling program for the parameters on the command line
// (defaults: lambda 0.95, beta 2.5, tau 7.5, C 100) and prints the scheme.

#include "persuasion/persuasion.hpp"

#include <cmath>
#include <cstdio>
#include <cstdlib>

int main(int argc, char** argv) {
  persuasion::queue::QueueInstance q{0.95, 100, 7.5, 2.5};
  if (argc > 1) q.lambda = std::atof(argv[1]);
  if (argc > 2) q.beta = std::atof(argv[2]);
  if (argc > 3) q.tau = std::atof(argv[3]);
  if (argc > 4) q.capacity = static_cast<std::size_t>(std::atol(argv[4]));

  const auto sol = persuasion::queue::solve_queue(q);
  std::printf("join probability %.6f, throughput %.6f\n", sol.join_probability, sol.throughput);
  std::printf("%-8s %10s %8s %8s  support\n", "signal", "P(signal)", "E[X]", "sd[X]");
  for (const auto& s : sol.scheme.signals) {
    const auto m = persuasion::queue::waiting_moments(s.posterior);
    std::printf("%-8s %10.5f %8.4f %8.4f ", s.label.c_str(), s.marginal, m.mean, std::sqrt(m.variance));
    for (std::size_t w = 0; w < s.posterior.size(); ++w)
      if (s.posterior[w] > 1e-9) std::printf(" %.4f*e%zu", s.posterior[w], w);
    std::printf("\n");
  }
  std::printf("\nP(signal | queue length)\n");
  for (std::size_t w = 0; w < sol.scheme.num_states(); ++w) {
    if (sol.scheme.prior[w] < 1e-12) continue;
    std::printf("%3zu:", w);
    for (double p : sol.scheme.conditional[w]) std::printf(" %.4f", p);
    std::printf("\n");
  }
  return 0;
}
