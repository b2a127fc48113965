// persuade: command-line front-end for the persuasion solvers.
//
// Exit codes: 0 success, 1 usage/I/O/parse errors, 2 infeasible or
// degenerate models (and schemes that fail validation).

#include "persuasion/general.hpp"
#include "persuasion/io.hpp"
#include "persuasion/persuasion.hpp"

#include <CLI11.hpp>

#include <cstdint>
#include <iostream>
#include <optional>
#include <string>

namespace {

using persuasion::io::json;
namespace io = persuasion::io;
namespace pb = persuasion::binary;
namespace pg = persuasion::general;
namespace pq = persuasion::queue;

constexpr int kExitOk = 0;
constexpr int kExitUsage = 1;
constexpr int kExitModel = 2;

void emit(const std::string& text, const std::string& out_path) {
  if (out_path.empty())
    std::cout << text;
  else
    io::write_text_file(out_path, text);
}

bool binary_applicable(const persuasion::PersuasionInstance& inst) {
  if (inst.num_actions() != 2 || !inst.receiver.convex_p1_complement()) return false;
  for (std::size_t w = 0; w < inst.num_states(); ++w)
    if (inst.sender(w, 1) < inst.sender(w, 0)) return false;
  return true;
}

pg::GridSpec pick_grid(const persuasion::PersuasionInstance& inst, std::size_t k) {
  return k > 0 ? pg::GridSpec{k} : pg::default_grid(inst.num_states());
}

json solve_report(const persuasion::PersuasionInstance& inst, std::size_t grid_k, bool force_grid) {
  json rep;
  persuasion::OptimalPlan plan;
  std::vector<persuasion::PointSet> sets;
  bool full = false;
  if (!force_grid && binary_applicable(inst)) {
    auto sol = pb::solve_binary_detailed(inst);
    plan = std::move(sol.plan);
    sets = std::move(sol.vertex_sets);
    full = pb::full_persuasion_binary(inst);
    rep["method"] = "binary";
  } else {
    const auto grid = pick_grid(inst, grid_k);
    sets = pg::grid_vertex_sets(inst, grid);
    plan = pg::coalesce_plan(inst, pg::solve_general(inst, sets));
    try {
      full = pg::full_persuasion_general(inst, sets);
    } catch (const std::invalid_argument&) {
      full = false;  // ambiguous sender-optimal action
    }
    rep["method"] = "grid";
    rep["k"] = grid.k;
  }
  const auto base = pg::baseline_values(inst);
  const auto ben = pg::benefit_check(inst, plan, sets);
  const auto scheme = persuasion::scheme_from_plan(plan, inst);
  const auto val = persuasion::validate_scheme(scheme, inst);
  rep["value"] = plan.value;
  rep["baselines"] = {{"no_information", base.no_info},
                      {"full_information", base.full_info},
                      {"prior_action", inst.actions.label(base.prior_action)}};
  rep["benefit"] = {{"benefits", ben.benefits},
                    {"gain", ben.gain},
                    {"certificate_action", inst.actions.label(ben.certificate_action)},
                    {"certificate_belief", ben.certificate_belief},
                    {"certificate_value", ben.certificate_value}};
  rep["full_persuasion"] = full;
  rep["plan"] = io::plan_to_json(plan, inst);
  rep["scheme"] = io::scheme_to_json(scheme);
  rep["validation"] = io::validation_to_json(val);
  return rep;
}

pq::QueueInstance queue_params(double lambda, double beta, double tau, std::size_t capacity) {
  pq::QueueInstance q{lambda, capacity, tau, beta};
  q.validate();
  return q;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Optimal information disclosure to risk-conscious receivers"};
  app.require_subcommand(1);

  std::string instance_path, scheme_path, out_path, plot_path, format = "json", input_path;
  std::size_t grid_k = 0;
  bool force_grid = false;
  double lambda = 0.0, beta = 0.0, tau = 0.0;
  std::size_t capacity = 0;
  std::uint64_t sim_events = 0, seed = 0;

  auto* solve = app.add_subcommand("solve", "Solve a persuasion instance and emit the optimal scheme");
  solve->add_option("--instance", instance_path, "Instance JSON")->required();
  solve->add_option("--grid", grid_k, "Grid denominator for the general solver (default: by state count)");
  solve->add_flag("--force-grid", force_grid, "Use the grid solver even for binary instances");
  solve->add_option("-o,--output", out_path, "Write the report here instead of stdout");

  auto* queue = app.add_subcommand("queue", "Solve the queue-signaling program");
  queue->add_option("--lambda", lambda, "Arrival rate")->required();
  queue->add_option("--beta", beta, "Risk-aversion weight on the standard deviation")->required();
  queue->add_option("--tau", tau, "Service value")->required();
  queue->add_option("--capacity", capacity, "Queue capacity C")->required();
  auto* q_sim = queue->add_option("--simulate", sim_events, "Also simulate this many events");
  auto* q_seed = queue->add_option("--seed", seed, "Simulation seed");
  q_sim->needs(q_seed);
  queue->add_option("--emit-plot-data", plot_path, "Write figure data to this file");
  queue->add_option("--format", format, "Plot data format")->check(CLI::IsMember({"json", "csv"}));
  queue->add_option("-o,--output", out_path, "Write the solution here instead of stdout");

  auto* check = app.add_subcommand("check-full", "Decide whether full persuasion is achievable");
  check->add_option("--instance", instance_path, "Instance JSON")->required();
  check->add_option("--grid", grid_k, "Grid denominator for non-binary instances");

  auto* validate = app.add_subcommand("validate", "Check a scheme against an instance");
  validate->add_option("--instance", instance_path, "Instance JSON")->required();
  validate->add_option("--scheme", scheme_path, "Scheme JSON")->required();

  auto* simulate = app.add_subcommand("simulate", "Simulate the queue under its optimal (or a given) scheme");
  simulate->add_option("--lambda", lambda, "Arrival rate")->required();
  simulate->add_option("--beta", beta, "Risk-aversion weight")->required();
  simulate->add_option("--tau", tau, "Service value")->required();
  simulate->add_option("--capacity", capacity, "Queue capacity C")->required();
  simulate->add_option("--events", sim_events, "Number of events (>= 10000)")->required();
  simulate->add_option("--seed", seed, "Random seed")->required();
  simulate->add_option("--scheme", scheme_path, "Scheme JSON (default: the optimal scheme)");

  auto* roundtrip = app.add_subcommand("roundtrip", "Parse and re-serialize an instance or scheme");
  roundtrip->add_option("--input", input_path, "Instance or scheme JSON")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    std::cerr << "error: " << e.what() << "\n\n" << app.help();
    return kExitUsage;
  }

  try {
    if (*solve) {
      const auto inst = io::instance_from_json(io::read_json_file(instance_path));
      emit(io::dump(solve_report(inst, grid_k, force_grid)), out_path);
    } else if (*queue) {
      const auto q = queue_params(lambda, beta, tau, capacity);
      const auto sol = pq::solve_queue(q);
      auto j = io::queue_solution_to_json(sol);
      j["validation"] = io::validation_to_json(persuasion::validate_scheme(sol.scheme, sol.instance));
      const auto sw = pq::verify_sandwich(sol);
      j["sandwich"] = {{"applicable", sw.applicable},
                       {"zero_utility", sw.zero_utility},
                       {"two_support", sw.two_support},
                       {"nested", sw.nested},
                       {"moment_order", sw.moment_order}};
      if (sim_events > 0) {
        const auto sim = pq::simulate_queue(q, sol.scheme, sim_events, seed);
        j["simulation"] = {{"events", sim_events},
                           {"seed", seed},
                           {"arrivals", sim.arrivals},
                           {"joins", sim.joins},
                           {"empirical_join_rate", sim.empirical_join_rate},
                           {"signal_frequencies", sim.signal_frequencies}};
      }
      if (!plot_path.empty())
        io::write_text_file(plot_path, format == "csv" ? io::queue_plot_csv(sol) : io::dump(io::queue_plot_data(sol)));
      emit(io::dump(j), out_path);
    } else if (*check) {
      const auto inst = io::instance_from_json(io::read_json_file(instance_path));
      json j;
      if (binary_applicable(inst)) {
        j["method"] = "binary";
        j["full_persuasion"] = pb::full_persuasion_binary(inst);
      } else {
        const auto grid = pick_grid(inst, grid_k);
        j["method"] = "grid";
        j["k"] = grid.k;
        j["full_persuasion"] = pg::full_persuasion_general(inst, grid);
      }
      std::cout << io::dump(j);
    } else if (*validate) {
      const auto inst = io::instance_from_json(io::read_json_file(instance_path));
      const auto s = io::scheme_from_json(io::read_json_file(scheme_path));
      const auto rep = persuasion::validate_scheme(s, inst);
      auto j = io::validation_to_json(rep);
      j["value"] = persuasion::scheme_value(s, inst);
      std::cout << io::dump(j);
      if (!rep.ok()) {
        std::cerr << "scheme failed validation\n";
        return kExitModel;
      }
    } else if (*simulate) {
      const auto q = queue_params(lambda, beta, tau, capacity);
      persuasion::SignalingScheme s;
      double lp_join = -1.0;
      if (scheme_path.empty()) {
        const auto sol = pq::solve_queue(q);
        s = sol.scheme;
        lp_join = sol.join_probability;
      } else {
        s = io::scheme_from_json(io::read_json_file(scheme_path));
      }
      const auto sim = pq::simulate_queue(q, s, sim_events, seed);
      json j{{"events", sim_events},
             {"seed", seed},
             {"arrivals", sim.arrivals},
             {"joins", sim.joins},
             {"empirical_join_rate", sim.empirical_join_rate},
             {"empirical_occupancy", sim.empirical_occupancy},
             {"occupancy_stderr", sim.occupancy_stderr},
             {"signal_frequencies", sim.signal_frequencies}};
      if (lp_join >= 0.0) j["lp_join_probability"] = lp_join;
      std::cout << io::dump(j);
    } else if (*roundtrip) {
      const auto j = io::read_json_file(input_path);
      const bool is_scheme = j.is_object() && j.contains("signals");
      std::cout << io::dump(is_scheme ? io::scheme_to_json(io::scheme_from_json(j))
                                      : io::instance_to_json(io::instance_from_json(j)));
    }
  } catch (const persuasion::DegenerateModel& e) {
    std::cerr << "degenerate model: " << e.what() << '\n';
    return kExitModel;
  } catch (const pg::InfeasibleCover& e) {
    std::cerr << "infeasible: " << e.what() << '\n';
    return kExitModel;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitUsage;
  }
  return kExitOk;
}
