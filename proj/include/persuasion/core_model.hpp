#pragma once

// Problem data model for persuading a risk-conscious receiver over a finite
// state space: states, actions, beliefs, the sender's payoff table and the
// receiver's (possibly nonlinear) utility model.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <functional>
#include <limits>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <unordered_set>
#include <utility>
#include <variant>
#include <vector>

namespace persuasion {

/// Raised when a model cannot be solved in a meaningful way (e.g. no state
/// ever makes the sender-preferred action optimal).
class DegenerateModel : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

inline constexpr double kTieTolerance = 1e-9;
inline constexpr double kNegativeWeightTolerance = 1e-12;
inline constexpr double kRenormalizeTolerance = 1e-6;

namespace detail {

inline void require_distinct(const std::vector<std::string>& labels, const char* what) {
  if (labels.empty()) throw std::invalid_argument(std::string(what) + ": must not be empty");
  std::unordered_set<std::string> seen;
  for (const auto& l : labels) {
    if (!seen.insert(l).second)
      throw std::invalid_argument(std::string(what) + ": duplicate label '" + l + "'");
  }
}

inline double dot(std::span<const double> a, std::span<const double> b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

}  // namespace detail

class StateSpace {
 public:
  explicit StateSpace(std::vector<std::string> labels) : labels_(std::move(labels)) {
    detail::require_distinct(labels_, "states");
  }

  /// States labelled "0", "1", ..., "n-1".
  static StateSpace numbered(std::size_t n) {
    std::vector<std::string> l;
    l.reserve(n);
    for (std::size_t i = 0; i < n; ++i) l.push_back(std::to_string(i));
    return StateSpace(std::move(l));
  }

  std::size_t size() const { return labels_.size(); }
  const std::string& label(std::size_t i) const { return labels_.at(i); }
  const std::vector<std::string>& labels() const { return labels_; }

 private:
  std::vector<std::string> labels_;
};

class ActionSpace {
 public:
  explicit ActionSpace(std::vector<std::string> labels) : labels_(std::move(labels)) {
    detail::require_distinct(labels_, "actions");
  }

  std::size_t size() const { return labels_.size(); }
  const std::string& label(std::size_t i) const { return labels_.at(i); }
  const std::vector<std::string>& labels() const { return labels_; }

 private:
  std::vector<std::string> labels_;
};

/// A probability vector over the state space. Always stored normalized.
class Belief {
 public:
  Belief() = default;

  /// Accepts weights that sum to one within 1e-6 (renormalized) and are no
  /// more negative than -1e-12 (clamped to zero). Anything else throws.
  explicit Belief(std::vector<double> weights) : w_(std::move(weights)) {
    if (w_.empty()) throw std::invalid_argument("belief: empty weight vector");
    double sum = 0.0;
    for (std::size_t i = 0; i < w_.size(); ++i) {
      if (!std::isfinite(w_[i]))
        throw std::invalid_argument("belief[" + std::to_string(i) + "]: not finite");
      if (w_[i] < -kNegativeWeightTolerance)
        throw std::invalid_argument("belief[" + std::to_string(i) +
                                    "]: negative weight " + std::to_string(w_[i]));
      w_[i] = std::max(w_[i], 0.0);
      sum += w_[i];
    }
    if (std::abs(sum - 1.0) > kRenormalizeTolerance)
      throw std::invalid_argument("belief: weights sum to " + std::to_string(sum) +
                                  ", expected 1");
    for (auto& x : w_) x /= sum;
  }

  static Belief point_mass(std::size_t n, std::size_t state) {
    std::vector<double> w(n, 0.0);
    w.at(state) = 1.0;
    return Belief(std::move(w));
  }

  static Belief uniform(std::size_t n) { return Belief(std::vector<double>(n, 1.0 / n)); }

  /// gamma * a + (1 - gamma) * b
  static Belief mix(const Belief& a, const Belief& b, double gamma) {
    std::vector<double> w(a.size());
    for (std::size_t i = 0; i < w.size(); ++i) w[i] = gamma * a[i] + (1.0 - gamma) * b[i];
    return Belief(std::move(w));
  }

  std::size_t size() const { return w_.size(); }
  double operator[](std::size_t i) const { return w_[i]; }
  std::span<const double> weights() const { return w_; }
  const std::vector<double>& vec() const { return w_; }

  friend bool operator==(const Belief&, const Belief&) = default;

 private:
  std::vector<double> w_;
};

/// Sender payoff v(state, action).
class SenderUtility {
 public:
  SenderUtility(std::size_t states, std::size_t actions, std::vector<double> row_major)
      : n_(states), m_(actions), v_(std::move(row_major)) {
    if (v_.size() != n_ * m_) throw std::invalid_argument("sender_v: dimension mismatch");
    for (double x : v_)
      if (!std::isfinite(x)) throw std::invalid_argument("sender_v: entries must be finite");
  }

  static SenderUtility from_rows(const std::vector<std::vector<double>>& rows) {
    if (rows.empty()) throw std::invalid_argument("sender_v: empty table");
    std::vector<double> flat;
    for (const auto& r : rows) {
      if (r.size() != rows.front().size())
        throw std::invalid_argument("sender_v: ragged table");
      flat.insert(flat.end(), r.begin(), r.end());
    }
    return SenderUtility(rows.size(), rows.front().size(), std::move(flat));
  }

  double operator()(std::size_t state, std::size_t action) const { return v_[state * m_ + action]; }
  std::size_t states() const { return n_; }
  std::size_t actions() const { return m_; }

  /// Expected sender payoff of `action` under `weights` (unnormalized allowed).
  double expected(std::span<const double> weights, std::size_t action) const {
    double s = 0.0;
    for (std::size_t w = 0; w < n_; ++w) s += weights[w] * (*this)(w, action);
    return s;
  }

  std::vector<std::vector<double>> rows() const {
    std::vector<std::vector<double>> r(n_, std::vector<double>(m_));
    for (std::size_t i = 0; i < n_; ++i)
      for (std::size_t j = 0; j < m_; ++j) r[i][j] = (*this)(i, j);
    return r;
  }

 private:
  std::size_t n_, m_;
  std::vector<double> v_;
};

// ---------------------------------------------------------------------------
// Receiver utility models

/// |states| x |actions| table, row major access via at(state, action).
struct Table {
  std::size_t states = 0;
  std::size_t actions = 0;
  std::vector<double> data;

  static Table from_rows(const std::vector<std::vector<double>>& rows, const char* what) {
    if (rows.empty()) throw std::invalid_argument(std::string(what) + ": empty table");
    Table t;
    t.states = rows.size();
    t.actions = rows.front().size();
    for (const auto& r : rows) {
      if (r.size() != t.actions) throw std::invalid_argument(std::string(what) + ": ragged table");
      for (double x : r)
        if (!std::isfinite(x))
          throw std::invalid_argument(std::string(what) + ": entries must be finite");
      t.data.insert(t.data.end(), r.begin(), r.end());
    }
    return t;
  }

  double at(std::size_t s, std::size_t a) const { return data[s * actions + a]; }

  std::vector<std::vector<double>> rows() const {
    std::vector<std::vector<double>> r(states, std::vector<double>(actions));
    for (std::size_t i = 0; i < states; ++i)
      for (std::size_t j = 0; j < actions; ++j) r[i][j] = at(i, j);
    return r;
  }
};

struct ExpectedParams {
  Table u;
};

/// E[u] - beta * sqrt(Var(g)), with g described per (state, action) by its
/// conditional mean and variance.
struct MeanStdevParams {
  Table u;
  Table g_mean;
  Table g_var;
  double beta = 0.0;
};

struct MaximinParams {
  std::vector<Table> tables;
};

/// One atom of a finite-support loss distribution.
struct LossAtom {
  double value = 0.0;
  double prob = 0.0;
};

/// -E[loss | loss > tau]; losses[state][action] is a finite distribution.
struct CvarParams {
  std::vector<std::vector<std::vector<LossAtom>>> losses;
  double tau = 0.0;
};

using Evaluator = std::function<double(std::span<const double> belief, std::size_t action)>;

struct CustomParams {
  Evaluator evaluator;
};

/// Marks a mean-stdev model as the queue-waiting utility so that boundary
/// beliefs can be computed in closed form.
struct QueueTag {
  double tau = 0.0;
  double beta = 0.0;
};

enum class ModelKind { expected, mean_stdev, maximin, cvar, custom };

inline const char* to_string(ModelKind k) {
  switch (k) {
    case ModelKind::expected: return "expected";
    case ModelKind::mean_stdev: return "mean_stdev";
    case ModelKind::maximin: return "maximin";
    case ModelKind::cvar: return "cvar";
    case ModelKind::custom: return "custom";
  }
  return "?";
}

class UtilityModel {
 public:
  using Params = std::variant<ExpectedParams, MeanStdevParams, MaximinParams, CvarParams, CustomParams>;

  UtilityModel(Params params, std::size_t states, std::size_t actions, bool convex_p1_complement)
      : params_(std::move(params)),
        states_(states),
        actions_(actions),
        convex_p1c_(convex_p1_complement) {}

  ModelKind kind() const { return static_cast<ModelKind>(params_.index()); }
  const Params& params() const { return params_; }
  std::size_t states() const { return states_; }
  std::size_t actions() const { return actions_; }

  /// Whether {mu : rho(mu,1) - rho(mu,0) < 0} is declared convex. Only
  /// meaningful for two actions.
  bool convex_p1_complement() const { return convex_p1c_; }
  void set_convex_p1_complement(bool v) { convex_p1c_ = v; }

  const std::optional<QueueTag>& queue_tag() const { return queue_; }
  void set_queue_tag(QueueTag t) { queue_ = t; }

  /// rho(mu, a). `belief` is assumed to be a valid probability vector.
  double evaluate(std::span<const double> belief, std::size_t action) const {
    return std::visit([&](const auto& p) { return eval(p, belief, action); }, params_);
  }

 private:
  static double eval(const ExpectedParams& p, std::span<const double> mu, std::size_t a) {
    double s = 0.0;
    for (std::size_t w = 0; w < mu.size(); ++w) s += mu[w] * p.u.at(w, a);
    return s;
  }

  static double eval(const MeanStdevParams& p, std::span<const double> mu, std::size_t a) {
    double eu = 0.0, mean = 0.0, second = 0.0;
    for (std::size_t w = 0; w < mu.size(); ++w) {
      const double m = p.g_mean.at(w, a);
      eu += mu[w] * p.u.at(w, a);
      mean += mu[w] * m;
      second += mu[w] * (p.g_var.at(w, a) + m * m);
    }
    const double var = std::max(0.0, second - mean * mean);
    return eu - p.beta * std::sqrt(var);
  }

  static double eval(const MaximinParams& p, std::span<const double> mu, std::size_t a) {
    double best = std::numeric_limits<double>::infinity();
    for (const auto& t : p.tables) {
      double s = 0.0;
      for (std::size_t w = 0; w < mu.size(); ++w) s += mu[w] * t.at(w, a);
      best = std::min(best, s);
    }
    return best;
  }

  static double eval(const CvarParams& p, std::span<const double> mu, std::size_t a) {
    double tail_mass = 0.0, tail_loss = 0.0;
    for (std::size_t w = 0; w < mu.size(); ++w) {
      if (mu[w] <= 0.0) continue;
      for (const auto& atom : p.losses[w][a]) {
        if (atom.value > p.tau) {
          tail_mass += mu[w] * atom.prob;
          tail_loss += mu[w] * atom.prob * atom.value;
        }
      }
    }
    // No mass beyond tau: nothing to lose in the tail.
    if (tail_mass <= 0.0) return 0.0;
    return -tail_loss / tail_mass;
  }

  static double eval(const CustomParams& p, std::span<const double> mu, std::size_t a) {
    return p.evaluator(mu, a);
  }

  Params params_;
  std::size_t states_;
  std::size_t actions_;
  bool convex_p1c_;
  std::optional<QueueTag> queue_;
};

// ---------------------------------------------------------------------------
// Model factories

inline UtilityModel make_expected(const std::vector<std::vector<double>>& u) {
  auto t = Table::from_rows(u, "receiver.u");
  const auto n = t.states, m = t.actions;
  return UtilityModel(ExpectedParams{std::move(t)}, n, m, /*affine differential*/ true);
}

inline UtilityModel make_mean_stdev(const std::vector<std::vector<double>>& u,
                                    const std::vector<std::vector<double>>& g_mean,
                                    const std::vector<std::vector<double>>& g_var, double beta) {
  if (!(beta >= 0.0) || !std::isfinite(beta))
    throw std::invalid_argument("receiver.beta: must be finite and >= 0");
  MeanStdevParams p{Table::from_rows(u, "receiver.u"), Table::from_rows(g_mean, "receiver.g_mean"),
                    Table::from_rows(g_var, "receiver.g_var"), beta};
  if (p.g_mean.states != p.u.states || p.g_mean.actions != p.u.actions ||
      p.g_var.states != p.u.states || p.g_var.actions != p.u.actions)
    throw std::invalid_argument("receiver: u, g_mean and g_var dimensions differ");
  for (double v : p.g_var.data)
    if (v < 0.0) throw std::invalid_argument("receiver.g_var: variances must be >= 0");
  // rho(., 1) is convex in the belief; the differential is convex (hence has a
  // convex negative set) whenever g is deterministic and constant under action 0.
  bool riskless_zero = p.u.actions == 2;
  if (riskless_zero) {
    for (std::size_t w = 0; w < p.u.states; ++w) {
      if (p.g_var.at(w, 0) != 0.0 || p.g_mean.at(w, 0) != p.g_mean.at(0, 0)) riskless_zero = false;
    }
  }
  const auto n = p.u.states, m = p.u.actions;
  return UtilityModel(std::move(p), n, m, riskless_zero);
}

inline UtilityModel make_maximin(const std::vector<std::vector<std::vector<double>>>& tables) {
  if (tables.empty()) throw std::invalid_argument("receiver.tables: need at least one table");
  MaximinParams p;
  for (const auto& t : tables) p.tables.push_back(Table::from_rows(t, "receiver.tables"));
  const auto n = p.tables.front().states, m = p.tables.front().actions;
  for (const auto& t : p.tables)
    if (t.states != n || t.actions != m)
      throw std::invalid_argument("receiver.tables: dimension mismatch between tables");
  // rho(., 0) is concave; if rho(., 1) is affine the differential is convex.
  bool affine_one = m == 2;
  if (affine_one) {
    for (const auto& t : p.tables)
      for (std::size_t w = 0; w < n; ++w)
        if (t.at(w, 1) != p.tables.front().at(w, 1)) affine_one = false;
  }
  return UtilityModel(std::move(p), n, m, affine_one);
}

inline UtilityModel make_cvar(std::vector<std::vector<std::vector<LossAtom>>> losses, double tau) {
  if (losses.empty() || losses.front().empty())
    throw std::invalid_argument("receiver.losses: empty");
  const auto n = losses.size(), m = losses.front().size();
  for (std::size_t w = 0; w < n; ++w) {
    if (losses[w].size() != m) throw std::invalid_argument("receiver.losses: ragged table");
    for (std::size_t a = 0; a < m; ++a) {
      double mass = 0.0;
      for (const auto& atom : losses[w][a]) {
        if (atom.prob < 0.0 || !std::isfinite(atom.value))
          throw std::invalid_argument("receiver.losses[" + std::to_string(w) + "][" +
                                      std::to_string(a) + "]: invalid atom");
        mass += atom.prob;
      }
      if (std::abs(mass - 1.0) > kRenormalizeTolerance)
        throw std::invalid_argument("receiver.losses[" + std::to_string(w) + "][" +
                                    std::to_string(a) + "]: probabilities must sum to 1");
    }
  }
  return UtilityModel(CvarParams{std::move(losses), tau}, n, m, false);
}

/// The evaluator must be deterministic and continuous in the belief. The
/// caller declares whether the differential has a convex negative set.
inline UtilityModel make_custom(Evaluator f, std::size_t states, std::size_t actions,
                                bool convex_p1_complement) {
  if (!f) throw std::invalid_argument("custom model: empty evaluator");
  return UtilityModel(CustomParams{std::move(f)}, states, actions, convex_p1_complement);
}

// ---------------------------------------------------------------------------

struct PersuasionInstance {
  StateSpace states;
  ActionSpace actions;
  Belief prior;
  SenderUtility sender;
  UtilityModel receiver;

  PersuasionInstance(StateSpace s, ActionSpace a, Belief p, SenderUtility v, UtilityModel r)
      : states(std::move(s)), actions(std::move(a)), prior(std::move(p)), sender(std::move(v)),
        receiver(std::move(r)) {
    const auto n = states.size(), m = actions.size();
    if (prior.size() != n) throw std::invalid_argument("prior: length differs from states");
    if (sender.states() != n || sender.actions() != m)
      throw std::invalid_argument("sender_v: dimensions differ from states x actions");
    if (receiver.states() != n || receiver.actions() != m)
      throw std::invalid_argument("receiver: dimensions differ from states x actions");
  }

  std::size_t num_states() const { return states.size(); }
  std::size_t num_actions() const { return actions.size(); }
};

// ---------------------------------------------------------------------------
// Receiver behaviour

inline double rho(const UtilityModel& model, const Belief& belief, std::size_t action) {
  if (belief.size() != model.states()) throw std::invalid_argument("rho: belief dimension mismatch");
  if (action >= model.actions()) throw std::out_of_range("rho: action index out of range");
  return model.evaluate(belief.weights(), action);
}

/// rho(mu, 1) - rho(mu, 0). Action 1 is optimal iff this is >= 0.
inline double differential_utility(const UtilityModel& model, std::span<const double> belief) {
  if (model.actions() != 2)
    throw std::invalid_argument("differential utility requires exactly two actions");
  return model.evaluate(belief, 1) - model.evaluate(belief, 0);
}

inline double differential_utility(const UtilityModel& model, const Belief& belief) {
  if (belief.size() != model.states())
    throw std::invalid_argument("differential utility: belief dimension mismatch");
  return differential_utility(model, belief.weights());
}

struct BestResponse {
  std::vector<std::size_t> optimal;  // all actions within the tie tolerance of the max
  std::size_t selected = 0;          // sender-preferred among `optimal`
};

/// Receiver best responses at `belief`. Ties within kTieTolerance are broken in
/// favour of the sender, then by lowest index.
inline BestResponse best_response(const UtilityModel& model, const SenderUtility& sender,
                                  std::span<const double> belief) {
  const std::size_t m = model.actions();
  std::vector<double> vals(m);
  double best = -std::numeric_limits<double>::infinity();
  for (std::size_t a = 0; a < m; ++a) {
    vals[a] = model.evaluate(belief, a);
    best = std::max(best, vals[a]);
  }
  BestResponse out;
  double best_sender = -std::numeric_limits<double>::infinity();
  for (std::size_t a = 0; a < m; ++a) {
    if (vals[a] < best - kTieTolerance) continue;
    out.optimal.push_back(a);
    const double sv = sender.expected(belief, a);
    if (sv > best_sender) {
      best_sender = sv;
      out.selected = a;
    }
  }
  return out;
}

inline BestResponse best_response(const PersuasionInstance& inst, const Belief& belief) {
  if (belief.size() != inst.num_states())
    throw std::invalid_argument("best_response: belief dimension mismatch");
  return best_response(inst.receiver, inst.sender, belief.weights());
}

}  // namespace persuasion
