#pragma once

// Dense two-phase primal simplex for   max c.x  s.t.  A x = b,  x >= 0.
//
// Pricing is Dantzig's rule; after a run of degenerate pivots the solver
// switches to Bland's rule until the objective moves again, which guarantees
// termination. The final basis is re-solved with an LU factorization to
// tighten primal feasibility.

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <stdexcept>
#include <string>
#include <vector>

namespace persuasion {

struct LinearProgram {
  std::vector<double> objective;              // c, length n
  std::vector<std::vector<double>> eq_matrix;  // A, m rows of length n
  std::vector<double> eq_rhs;                 // b, length m

  std::size_t num_vars() const { return objective.size(); }
  std::size_t num_rows() const { return eq_rhs.size(); }

  void validate() const {
    if (eq_matrix.size() != eq_rhs.size())
      throw std::invalid_argument("lp: row count differs between matrix and rhs");
    for (double c : objective)
      if (!std::isfinite(c)) throw std::invalid_argument("lp: non-finite objective coefficient");
    for (std::size_t i = 0; i < eq_matrix.size(); ++i) {
      if (eq_matrix[i].size() != objective.size())
        throw std::invalid_argument("lp: row " + std::to_string(i) + " has wrong length");
      for (double a : eq_matrix[i])
        if (!std::isfinite(a)) throw std::invalid_argument("lp: non-finite matrix entry");
      if (!std::isfinite(eq_rhs[i])) throw std::invalid_argument("lp: non-finite rhs");
    }
  }
};

enum class LpStatus { optimal, infeasible, unbounded, numerical_failure };

inline const char* to_string(LpStatus s) {
  switch (s) {
    case LpStatus::optimal: return "optimal";
    case LpStatus::infeasible: return "infeasible";
    case LpStatus::unbounded: return "unbounded";
    case LpStatus::numerical_failure: return "numerical_failure";
  }
  return "?";
}

struct LpOptions {
  double feasibility_tol = 1e-9;  // phase-one objective threshold (scaled by 1 + |b|_1)
  double cost_tol = 1e-10;        // reduced-cost optimality threshold
  double pivot_tol = 1e-9;        // smallest admissible pivot magnitude
  std::size_t max_iterations = 0;  // 0 = automatic
};

struct LpResult {
  LpStatus status = LpStatus::numerical_failure;
  std::vector<double> x;
  double value = 0.0;
  std::vector<std::size_t> basis;  // structural basic variables
  double phase_one_residual = 0.0;

  bool optimal() const { return status == LpStatus::optimal; }
};

namespace detail {

class Tableau {
 public:
  // rows: m constraints; cols: n structural + m artificial + rhs
  Tableau(const LinearProgram& lp)
      : m_(lp.num_rows()), n_(lp.num_vars()), width_(n_ + m_ + 1), t_((m_ + 1) * width_, 0.0),
        basis_(m_), active_(m_, true) {
    for (std::size_t i = 0; i < m_; ++i) {
      const double sign = lp.eq_rhs[i] < 0.0 ? -1.0 : 1.0;
      for (std::size_t j = 0; j < n_; ++j) at(i, j) = sign * lp.eq_matrix[i][j];
      at(i, n_ + i) = 1.0;
      rhs(i) = sign * lp.eq_rhs[i];
      basis_[i] = n_ + i;
    }
  }

  double& at(std::size_t r, std::size_t c) { return t_[r * width_ + c]; }
  double at(std::size_t r, std::size_t c) const { return t_[r * width_ + c]; }
  double& rhs(std::size_t r) { return at(r, width_ - 1); }
  double rhs(std::size_t r) const { return at(r, width_ - 1); }
  // Objective row holds reduced costs d_j = c_B B^-1 A_j - c_j (minimization
  // sense of -c); entering candidates have d_j < 0.
  double& cost(std::size_t c) { return at(m_, c); }
  double objective() const { return at(m_, width_ - 1); }

  std::size_t rows() const { return m_; }
  std::size_t structural() const { return n_; }
  std::size_t basic(std::size_t r) const { return basis_[r]; }
  bool active(std::size_t r) const { return active_[r]; }
  void deactivate(std::size_t r) { active_[r] = false; }
  bool is_artificial(std::size_t c) const { return c >= n_ && c < n_ + m_; }

  void set_costs(const std::vector<double>& c_full) {
    // c_full has length n + m (maximization coefficients)
    for (std::size_t j = 0; j < width_; ++j) cost(j) = 0.0;
    for (std::size_t j = 0; j + 1 < width_; ++j) cost(j) = -c_full[j];
    for (std::size_t r = 0; r < m_; ++r) {
      if (!active_[r]) continue;
      const double cb = c_full[basis_[r]];
      if (cb == 0.0) continue;
      for (std::size_t j = 0; j < width_; ++j) cost(j) += cb * at(r, j);
    }
  }

  void pivot(std::size_t r, std::size_t c) {
    const double p = at(r, c);
    double* row = &t_[r * width_];
    for (std::size_t j = 0; j < width_; ++j) row[j] /= p;
    row[c] = 1.0;
    for (std::size_t i = 0; i <= m_; ++i) {
      if (i == r || (i < m_ && !active_[i])) continue;
      double* other = &t_[i * width_];
      const double f = other[c];
      if (f == 0.0) continue;
      for (std::size_t j = 0; j < width_; ++j) other[j] -= f * row[j];
      other[c] = 0.0;
    }
    basis_[r] = c;
  }

  bool finite() const {
    for (double v : t_)
      if (!std::isfinite(v)) return false;
    return true;
  }

 private:
  std::size_t m_, n_, width_;
  std::vector<double> t_;
  std::vector<std::size_t> basis_;
  std::vector<bool> active_;
};

enum class PhaseOutcome { optimal, unbounded, iteration_limit, numerical };

// Runs simplex iterations on the current tableau. Columns with allowed[j] ==
// false never enter.
inline PhaseOutcome run_phase(Tableau& tab, const std::vector<bool>& allowed, const LpOptions& opt,
                              std::size_t max_iter) {
  const std::size_t ncols = allowed.size();
  std::size_t degenerate_run = 0;
  bool bland = false;
  constexpr std::size_t kDegenerateSwitch = 50;
  for (std::size_t iter = 0; iter < max_iter; ++iter) {
    std::size_t enter = ncols;
    double most_negative = -opt.cost_tol;
    for (std::size_t j = 0; j < ncols; ++j) {
      if (!allowed[j]) continue;
      const double d = tab.cost(j);
      if (d < most_negative) {
        enter = j;
        if (bland) break;
        most_negative = d;
      }
    }
    if (enter == ncols) return PhaseOutcome::optimal;

    std::size_t leave = tab.rows();
    double best_ratio = std::numeric_limits<double>::infinity();
    for (std::size_t r = 0; r < tab.rows(); ++r) {
      if (!tab.active(r)) continue;
      const double a = tab.at(r, enter);
      if (a <= opt.pivot_tol) continue;
      const double ratio = std::max(tab.rhs(r), 0.0) / a;
      if (ratio < best_ratio - 1e-12 ||
          (std::abs(ratio - best_ratio) <= 1e-12 && leave < tab.rows() &&
           tab.basic(r) < tab.basic(leave))) {
        best_ratio = ratio;
        leave = r;
      }
    }
    if (leave == tab.rows()) return PhaseOutcome::unbounded;

    const bool degenerate = best_ratio <= 1e-12;
    tab.pivot(leave, enter);
    if (degenerate) {
      if (++degenerate_run >= kDegenerateSwitch) bland = true;
    } else {
      degenerate_run = 0;
      bland = false;
    }
    if ((iter & 63) == 0 && !tab.finite()) return PhaseOutcome::numerical;
  }
  return PhaseOutcome::iteration_limit;
}

}  // namespace detail

/// Solves max c.x s.t. A x = b, x >= 0.
inline LpResult solve_lp(const LinearProgram& lp, const LpOptions& opt = {}) {
  lp.validate();
  const std::size_t m = lp.num_rows(), n = lp.num_vars();
  LpResult res;
  if (m == 0) {
    // Feasible set is the nonnegative orthant.
    for (double c : lp.objective)
      if (c > 0.0) {
        res.status = LpStatus::unbounded;
        return res;
      }
    res.status = LpStatus::optimal;
    res.x.assign(n, 0.0);
    return res;
  }

  const std::size_t max_iter = opt.max_iterations ? opt.max_iterations : 50 * (m + n) + 1000;
  detail::Tableau tab(lp);

  double b_norm = 0.0;
  for (double b : lp.eq_rhs) b_norm += std::abs(b);

  // Phase one: maximize -sum(artificials).
  std::vector<double> c1(n + m, 0.0);
  for (std::size_t i = 0; i < m; ++i) c1[n + i] = -1.0;
  tab.set_costs(c1);
  std::vector<bool> allowed(n + m, true);
  auto outcome = detail::run_phase(tab, allowed, opt, max_iter);
  if (outcome == detail::PhaseOutcome::iteration_limit || outcome == detail::PhaseOutcome::numerical ||
      outcome == detail::PhaseOutcome::unbounded) {
    res.status = LpStatus::numerical_failure;
    return res;
  }
  res.phase_one_residual = std::abs(tab.objective());
  if (res.phase_one_residual > opt.feasibility_tol * (1.0 + b_norm)) {
    res.status = LpStatus::infeasible;
    return res;
  }

  // Drive remaining artificials out of the basis; rows where that is
  // impossible are linearly dependent and dropped.
  for (std::size_t r = 0; r < m; ++r) {
    if (!tab.is_artificial(tab.basic(r))) continue;
    std::size_t best = n;
    double best_abs = opt.pivot_tol;
    for (std::size_t j = 0; j < n; ++j) {
      const double a = std::abs(tab.at(r, j));
      if (a > best_abs) {
        best_abs = a;
        best = j;
      }
    }
    if (best < n)
      tab.pivot(r, best);
    else
      tab.deactivate(r);
  }

  // Phase two.
  std::vector<double> c2(n + m, 0.0);
  std::copy(lp.objective.begin(), lp.objective.end(), c2.begin());
  tab.set_costs(c2);
  for (std::size_t i = 0; i < m; ++i) allowed[n + i] = false;
  outcome = detail::run_phase(tab, allowed, opt, max_iter);
  if (outcome == detail::PhaseOutcome::unbounded) {
    res.status = LpStatus::unbounded;
    return res;
  }
  if (outcome != detail::PhaseOutcome::optimal) {
    res.status = LpStatus::numerical_failure;
    return res;
  }

  std::vector<std::size_t> rows_kept, basic_cols;
  res.x.assign(n, 0.0);
  for (std::size_t r = 0; r < m; ++r) {
    if (!tab.active(r)) continue;
    const std::size_t b = tab.basic(r);
    if (b >= n) continue;  // artificial left at zero level in a dependent row
    rows_kept.push_back(r);
    basic_cols.push_back(b);
    res.x[b] = std::max(0.0, tab.rhs(r));
  }

  // Refine the basic solution from the original data when the basis is square
  // on the kept rows.
  if (!basic_cols.empty()) {
    const auto k = static_cast<Eigen::Index>(basic_cols.size());
    Eigen::MatrixXd B(k, k);
    Eigen::VectorXd rhs(k);
    for (Eigen::Index i = 0; i < k; ++i) {
      rhs(i) = lp.eq_rhs[rows_kept[i]];
      for (Eigen::Index j = 0; j < k; ++j) B(i, j) = lp.eq_matrix[rows_kept[i]][basic_cols[j]];
    }
    Eigen::PartialPivLU<Eigen::MatrixXd> lu(B);
    const Eigen::VectorXd xb = lu.solve(rhs);
    bool usable = xb.allFinite();
    for (Eigen::Index j = 0; usable && j < k; ++j) usable = xb(j) > -1e-9;
    if (usable) {
      std::vector<double> refined = res.x;
      for (Eigen::Index j = 0; j < k; ++j) refined[basic_cols[j]] = std::max(0.0, xb(j));
      auto residual = [&](const std::vector<double>& x) {
        double worst = 0.0;
        for (std::size_t i = 0; i < m; ++i) {
          double s = -lp.eq_rhs[i];
          for (std::size_t j = 0; j < n; ++j) s += lp.eq_matrix[i][j] * x[j];
          worst = std::max(worst, std::abs(s));
        }
        return worst;
      };
      if (residual(refined) <= residual(res.x)) res.x = std::move(refined);
    }
  }

  res.basis = basic_cols;
  res.value = 0.0;
  for (std::size_t j = 0; j < n; ++j) res.value += lp.objective[j] * res.x[j];
  res.status = LpStatus::optimal;
  return res;
}

}  // namespace persuasion
