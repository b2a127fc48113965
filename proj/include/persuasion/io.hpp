#pragma once

// JSON interchange for instances, plans, schemes and reports. Parsing errors
// carry the path of the offending field, e.g. "prior[1]: negative weight".

#include "persuasion/core_model.hpp"
#include "persuasion/plan.hpp"
#include "persuasion/queue.hpp"
#include "persuasion/scheme.hpp"

#include <json.hpp>

#include <cmath>
#include <cstddef>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <type_traits>
#include <variant>
#include <vector>

namespace persuasion::io {

using json = nlohmann::json;

class SchemaError : public std::invalid_argument {
 public:
  SchemaError(const std::string& path, const std::string& msg) : std::invalid_argument(path + ": " + msg) {}
};

namespace detail {

inline const json& field(const json& j, const char* key, const std::string& path) {
  if (!j.is_object()) throw SchemaError(path.empty() ? "$" : path, "expected an object");
  auto it = j.find(key);
  if (it == j.end()) throw SchemaError(path.empty() ? key : path + "." + key, "missing field");
  return *it;
}

inline std::string join(const std::string& path, const char* key) { return path.empty() ? key : path + "." + key; }
inline std::string index(const std::string& path, std::size_t i) { return path + "[" + std::to_string(i) + "]"; }

inline double number(const json& j, const std::string& path) {
  if (!j.is_number()) throw SchemaError(path, "expected a number");
  return j.get<double>();
}

inline std::vector<double> vector(const json& j, const std::string& path) {
  if (!j.is_array()) throw SchemaError(path, "expected an array of numbers");
  std::vector<double> out;
  for (std::size_t i = 0; i < j.size(); ++i) out.push_back(number(j[i], index(path, i)));
  return out;
}

inline std::vector<std::vector<double>> matrix(const json& j, const std::string& path) {
  if (!j.is_array()) throw SchemaError(path, "expected an array of arrays");
  std::vector<std::vector<double>> out;
  for (std::size_t i = 0; i < j.size(); ++i) {
    out.push_back(vector(j[i], index(path, i)));
    if (out.back().size() != out.front().size()) throw SchemaError(index(path, i), "ragged row");
  }
  return out;
}

inline void expect_shape(const std::vector<std::vector<double>>& m, std::size_t rows, std::size_t cols,
                         const std::string& path) {
  if (m.size() != rows || (rows > 0 && m.front().size() != cols))
    throw SchemaError(path, "expected a " + std::to_string(rows) + " x " + std::to_string(cols) + " table");
}

inline std::vector<std::string> labels(const json& j, const std::string& path) {
  if (!j.is_array() || j.empty()) throw SchemaError(path, "expected a nonempty array of labels");
  std::vector<std::string> out;
  for (std::size_t i = 0; i < j.size(); ++i) {
    if (j[i].is_string())
      out.push_back(j[i].get<std::string>());
    else if (j[i].is_number_integer())
      out.push_back(std::to_string(j[i].get<long long>()));
    else
      throw SchemaError(index(path, i), "expected a string label");
  }
  return out;
}

inline Belief belief(const json& j, const std::string& path) {
  auto w = vector(j, path);
  for (std::size_t i = 0; i < w.size(); ++i)
    if (w[i] < -kNegativeWeightTolerance)
      throw SchemaError(index(path, i), "negative weight " + std::to_string(w[i]));
  try {
    return Belief(std::move(w));
  } catch (const std::invalid_argument& e) {
    throw SchemaError(path, e.what());
  }
}

}  // namespace detail

// ---------------------------------------------------------------------------
// Receiver models

inline UtilityModel model_from_json(const json& j, std::size_t n, std::size_t m, const std::string& path) {
  using namespace detail;
  const auto& kind_j = field(j, "kind", path);
  if (!kind_j.is_string()) throw SchemaError(join(path, "kind"), "expected a string");
  const auto kind = kind_j.get<std::string>();
  auto table = [&](const char* key) {
    auto t = matrix(field(j, key, path), join(path, key));
    expect_shape(t, n, m, join(path, key));
    return t;
  };
  auto build = [&]() -> UtilityModel {
    try {
      if (kind == "expected") return make_expected(table("u"));
      if (kind == "mean_stdev")
        return make_mean_stdev(table("u"), table("g_mean"), table("g_var"),
                               number(field(j, "beta", path), join(path, "beta")));
      if (kind == "queue") {
        if (m != 2) throw SchemaError(path, "queue receivers have exactly two actions");
        return queue::make_queue_model(n, number(field(j, "tau", path), join(path, "tau")),
                                       number(field(j, "beta", path), join(path, "beta")));
      }
      if (kind == "maximin") {
        const auto& tj = field(j, "tables", path);
        if (!tj.is_array() || tj.empty()) throw SchemaError(join(path, "tables"), "expected a nonempty array");
        std::vector<std::vector<std::vector<double>>> tables;
        for (std::size_t i = 0; i < tj.size(); ++i) {
          const auto p = index(join(path, "tables"), i);
          tables.push_back(matrix(tj[i], p));
          expect_shape(tables.back(), n, m, p);
        }
        return make_maximin(tables);
      }
      if (kind == "cvar") {
        const auto& lj = field(j, "losses", path);
        const auto lp = join(path, "losses");
        if (!lj.is_array() || lj.size() != n) throw SchemaError(lp, "expected one entry per state");
        std::vector<std::vector<std::vector<LossAtom>>> losses(n);
        for (std::size_t w = 0; w < n; ++w) {
          if (!lj[w].is_array() || lj[w].size() != m) throw SchemaError(index(lp, w), "expected one entry per action");
          losses[w].resize(m);
          for (std::size_t a = 0; a < m; ++a) {
            const auto ap = index(index(lp, w), a);
            if (!lj[w][a].is_array()) throw SchemaError(ap, "expected an array of atoms");
            for (std::size_t k = 0; k < lj[w][a].size(); ++k) {
              const auto kp = index(ap, k);
              losses[w][a].push_back({number(field(lj[w][a][k], "value", kp), join(kp, "value")),
                                      number(field(lj[w][a][k], "prob", kp), join(kp, "prob"))});
            }
          }
        }
        return make_cvar(std::move(losses), number(field(j, "tau", path), join(path, "tau")));
      }
      if (kind == "custom")
        throw SchemaError(join(path, "kind"), "custom evaluators cannot be loaded from JSON");
      throw SchemaError(join(path, "kind"), "unknown model kind '" + kind + "'");
    } catch (const SchemaError&) {
      throw;
    } catch (const std::invalid_argument& e) {
      throw SchemaError(path, e.what());
    }
  };
  auto model = build();
  if (auto it = j.find("convex_p1_complement"); it != j.end()) {
    if (!it->is_boolean()) throw SchemaError(join(path, "convex_p1_complement"), "expected a boolean");
    model.set_convex_p1_complement(it->get<bool>());
  }
  return model;
}

inline json model_to_json(const UtilityModel& model) {
  json j;
  if (const auto& q = model.queue_tag()) {
    j["kind"] = "queue";
    j["tau"] = q->tau;
    j["beta"] = q->beta;
  } else {
    std::visit(
        [&](const auto& p) {
          using P = std::decay_t<decltype(p)>;
          if constexpr (std::is_same_v<P, ExpectedParams>) {
            j["kind"] = "expected";
            j["u"] = p.u.rows();
          } else if constexpr (std::is_same_v<P, MeanStdevParams>) {
            j["kind"] = "mean_stdev";
            j["u"] = p.u.rows();
            j["g_mean"] = p.g_mean.rows();
            j["g_var"] = p.g_var.rows();
            j["beta"] = p.beta;
          } else if constexpr (std::is_same_v<P, MaximinParams>) {
            j["kind"] = "maximin";
            j["tables"] = json::array();
            for (const auto& t : p.tables) j["tables"].push_back(t.rows());
          } else if constexpr (std::is_same_v<P, CvarParams>) {
            j["kind"] = "cvar";
            j["tau"] = p.tau;
            j["losses"] = json::array();
            for (const auto& row : p.losses) {
              json r = json::array();
              for (const auto& cell : row) {
                json c = json::array();
                for (const auto& atom : cell) c.push_back({{"value", atom.value}, {"prob", atom.prob}});
                r.push_back(c);
              }
              j["losses"].push_back(r);
            }
          } else {
            throw std::invalid_argument("receiver.kind: custom evaluators cannot be serialized");
          }
        },
        model.params());
  }
  j["convex_p1_complement"] = model.convex_p1_complement();
  return j;
}

// ---------------------------------------------------------------------------
// Instances

inline PersuasionInstance instance_from_json(const json& j) {
  using namespace detail;
  if (!j.is_object()) throw SchemaError("$", "expected an object");
  StateSpace states = [&] {
    try {
      return StateSpace(labels(field(j, "states", ""), "states"));
    } catch (const SchemaError&) {
      throw;
    } catch (const std::invalid_argument& e) {
      throw SchemaError("states", e.what());
    }
  }();
  ActionSpace actions = [&] {
    try {
      return ActionSpace(labels(field(j, "actions", ""), "actions"));
    } catch (const SchemaError&) {
      throw;
    } catch (const std::invalid_argument& e) {
      throw SchemaError("actions", e.what());
    }
  }();
  const std::size_t n = states.size(), m = actions.size();
  auto prior = belief(field(j, "prior", ""), "prior");
  if (prior.size() != n) throw SchemaError("prior", "expected " + std::to_string(n) + " weights");
  auto v = matrix(field(j, "sender_v", ""), "sender_v");
  expect_shape(v, n, m, "sender_v");
  auto model = model_from_json(field(j, "receiver", ""), n, m, "receiver");
  return PersuasionInstance(std::move(states), std::move(actions), std::move(prior), SenderUtility::from_rows(v),
                            std::move(model));
}

inline json instance_to_json(const PersuasionInstance& inst) {
  return json{{"states", inst.states.labels()},
              {"actions", inst.actions.labels()},
              {"prior", inst.prior.vec()},
              {"sender_v", inst.sender.rows()},
              {"receiver", model_to_json(inst.receiver)}};
}

// ---------------------------------------------------------------------------
// Schemes

inline json scheme_to_json(const SignalingScheme& s) {
  json sig = json::array();
  for (const auto& x : s.signals)
    sig.push_back({{"label", x.label}, {"posterior", x.posterior}, {"action", x.action}, {"marginal", x.marginal}});
  return json{{"signals", sig}, {"conditional", s.conditional}, {"prior", s.prior}};
}

inline SignalingScheme scheme_from_json(const json& j) {
  using namespace detail;
  SignalingScheme s;
  s.prior = vector(field(j, "prior", ""), "prior");
  for (std::size_t i = 0; i < s.prior.size(); ++i)
    if (s.prior[i] < -kNegativeWeightTolerance)
      throw SchemaError(index("prior", i), "negative weight " + std::to_string(s.prior[i]));
  const auto& sj = field(j, "signals", "");
  if (!sj.is_array()) throw SchemaError("signals", "expected an array");
  for (std::size_t i = 0; i < sj.size(); ++i) {
    const auto p = index("signals", i);
    Signal x;
    const auto& lj = field(sj[i], "label", p);
    if (!lj.is_string()) throw SchemaError(join(p, "label"), "expected a string");
    x.label = lj.get<std::string>();
    x.posterior = vector(field(sj[i], "posterior", p), join(p, "posterior"));
    if (x.posterior.size() != s.prior.size()) throw SchemaError(join(p, "posterior"), "length differs from prior");
    const auto& aj = field(sj[i], "action", p);
    if (!aj.is_number_integer() || aj.get<long long>() < 0)
      throw SchemaError(join(p, "action"), "expected a nonnegative action index");
    x.action = aj.get<std::size_t>();
    x.marginal = number(field(sj[i], "marginal", p), join(p, "marginal"));
    if (x.marginal < 0.0) throw SchemaError(join(p, "marginal"), "negative probability");
    s.signals.push_back(std::move(x));
  }
  s.conditional = matrix(field(j, "conditional", ""), "conditional");
  if (s.conditional.size() != s.prior.size()) throw SchemaError("conditional", "expected one row per state");
  for (std::size_t w = 0; w < s.conditional.size(); ++w) {
    if (s.conditional[w].size() != s.signals.size())
      throw SchemaError(index("conditional", w), "expected one entry per signal");
    for (std::size_t k = 0; k < s.conditional[w].size(); ++k)
      if (s.conditional[w][k] < 0.0)
        throw SchemaError(index(index("conditional", w), k), "negative probability");
  }
  return s;
}

// ---------------------------------------------------------------------------
// Plans and reports

inline json plan_to_json(const OptimalPlan& plan, const PersuasionInstance& inst) {
  json actions = json::array();
  for (std::size_t a = 0; a < plan.num_actions(); ++a) {
    json atoms = json::array();
    for (const auto& at : plan.decomposition[a])
      atoms.push_back({{"label", at.label}, {"belief", at.belief}, {"weight", at.weight}});
    const auto m = plan.mean_posterior(a);
    actions.push_back({{"action", inst.actions.label(a)},
                       {"t", plan.t[a]},
                       {"probability", plan.action_probability(a)},
                       {"mean_posterior", m.empty() ? json(nullptr) : json(m)},
                       {"decomposition", atoms}});
  }
  return json{{"value", plan.value}, {"actions", actions}};
}

inline json validation_to_json(const ValidationReport& r) {
  json margins = json::array();
  for (double m : r.obedience_margins) margins.push_back(std::isfinite(m) ? json(m) : json(nullptr));
  return json{{"bayes_residual", r.bayes_residual},
              {"posterior_residual", r.posterior_residual},
              {"prior_residual", r.prior_residual},
              {"obedience_margins", margins},
              {"disobedient_signals", r.disobedient},
              {"ok", r.ok()}};
}

inline json queue_solution_to_json(const queue::QueueSolution& sol) {
  const auto [bal, norm] = queue::balance_residuals(sol);
  return json{{"lambda", sol.params.lambda},
              {"capacity", sol.params.capacity},
              {"tau", sol.params.tau},
              {"beta", sol.params.beta},
              {"join_probability", sol.join_probability},
              {"throughput", sol.throughput},
              {"occupancy", sol.occupancy},
              {"balance_residual", bal},
              {"normalization_residual", norm},
              {"t_leave", sol.plan.t[0]},
              {"t_join", sol.plan.t[1]},
              {"scheme", scheme_to_json(sol.scheme)}};
}

/// Per-state signal probabilities and the posterior table of a queue scheme.
inline json queue_plot_data(const queue::QueueSolution& sol, double support_tol = 1e-12) {
  const auto& s = sol.scheme;
  json labels = json::array();
  for (const auto& x : s.signals) labels.push_back(x.label);
  json rows = json::array();
  for (std::size_t w = 0; w < s.num_states(); ++w) {
    if (s.prior[w] <= support_tol) continue;
    rows.push_back({{"state", w}, {"probabilities", s.conditional[w]}});
  }
  json table = json::array();
  for (const auto& x : s.signals) {
    json support = json::array();
    for (std::size_t w = 0; w < x.posterior.size(); ++w)
      if (x.posterior[w] > support_tol) support.push_back({{"state", w}, {"weight", x.posterior[w]}});
    const auto mom = queue::waiting_moments(x.posterior);
    table.push_back({{"signal", x.label},
                     {"support", support},
                     {"mean_wait", mom.mean},
                     {"sd_wait", std::sqrt(mom.variance)}});
  }
  return json{{"signals", labels}, {"conditional", rows}, {"posteriors", table}};
}

inline std::string queue_plot_csv(const queue::QueueSolution& sol, double support_tol = 1e-12) {
  std::ostringstream os;
  os.precision(17);
  os << "kind,signal,state,value\n";
  const auto& s = sol.scheme;
  for (std::size_t w = 0; w < s.num_states(); ++w) {
    if (s.prior[w] <= support_tol) continue;
    for (std::size_t k = 0; k < s.num_signals(); ++k)
      os << "conditional," << s.signals[k].label << ',' << w << ',' << s.conditional[w][k] << '\n';
  }
  for (const auto& x : s.signals) {
    for (std::size_t w = 0; w < x.posterior.size(); ++w)
      if (x.posterior[w] > support_tol) os << "posterior," << x.label << ',' << w << ',' << x.posterior[w] << '\n';
    const auto mom = queue::waiting_moments(x.posterior);
    os << "mean_wait," << x.label << ",," << mom.mean << '\n';
    os << "sd_wait," << x.label << ",," << std::sqrt(mom.variance) << '\n';
  }
  return os.str();
}

// ---------------------------------------------------------------------------
// Files

inline json read_json_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open '" + path + "'");
  try {
    return json::parse(in);
  } catch (const json::parse_error& e) {
    throw std::runtime_error("'" + path + "': " + e.what());
  }
}

inline void write_text_file(const std::string& path, const std::string& text) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write '" + path + "'");
  out << text;
  if (!out) throw std::runtime_error("failed writing '" + path + "'");
}

inline std::string dump(const json& j) { return j.dump(2) + "\n"; }

}  // namespace persuasion::io
