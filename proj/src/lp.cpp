#include "svcloc/lp.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace svcloc::lp {

std::string to_string(Status status) {
  switch (status) {
    case Status::Optimal: return "optimal";
    case Status::Infeasible: return "infeasible";
    case Status::Unbounded: return "unbounded";
    case Status::Stalled: return "stalled";
  }
  return "unknown";
}

Index LinearProgram::add_variable(double objective, double lower, double upper) {
  objective_.push_back(objective);
  lower_.push_back(lower);
  upper_.push_back(upper);
  return objective_.size() - 1;
}

Index LinearProgram::add_row(std::vector<Term> terms, RowType type, double rhs) {
  rows_.push_back({std::move(terms), type, rhs});
  return rows_.size() - 1;
}

void LinearProgram::set_bounds(Index var, double lower, double upper) {
  lower_[var] = lower;
  upper_[var] = upper;
}

void LinearProgram::check() const {
  for (Index j = 0; j < num_variables(); ++j) {
    if (!std::isfinite(objective_[j])) throw std::invalid_argument("non-finite objective coefficient");
    if (std::isnan(lower_[j]) || std::isnan(upper_[j]) || lower_[j] > upper_[j] || lower_[j] == kInfinity ||
        upper_[j] == -kInfinity)
      throw std::invalid_argument("inconsistent bounds on variable " + std::to_string(j));
  }
  for (const auto& row : rows_) {
    if (!std::isfinite(row.rhs)) throw std::invalid_argument("non-finite right-hand side");
    for (const auto& [var, coef] : row.terms) {
      if (var >= num_variables()) throw std::invalid_argument("row references unknown variable");
      if (!std::isfinite(coef)) throw std::invalid_argument("non-finite row coefficient");
    }
  }
}

namespace {

enum class VarState : std::uint8_t { Basic, AtLower, AtUpper, Free, Fixed };

struct Column {
  std::vector<Index> rows;
  std::vector<double> values;
};

// Primal simplex on: max c^T x  s.t.  A x + s = b,  lo <= x <= hi,  s >= 0,
// where every row has been normalized to "<=" form. The basis inverse is kept
// dense and updated by elementary row operations; it is rebuilt from scratch
// every refactor_interval pivots.
class BoundedSimplex {
 public:
  BoundedSimplex(const LinearProgram& lp, const Tolerances& tol) : lp_(lp), tol_(tol) { build(); }

  LpSolution run();

 private:
  struct InternalRow {
    Index original;
    double sign;
  };

  void build();
  void initial_basis();
  Status iterate(const std::vector<double>& cost);
  void compute_duals(const std::vector<double>& cost, std::vector<double>& pi) const;
  void ftran(Index var, std::vector<double>& alpha) const;
  void pivot(Index leave_pos, const std::vector<double>& alpha);
  bool refactor();
  void recompute_basic_values();
  double reduced_cost(Index var, const std::vector<double>& cost, const std::vector<double>& pi) const;

  const LinearProgram& lp_;
  Tolerances tol_;

  Index m_ = 0;
  Index n_struct_ = 0;
  std::vector<InternalRow> internal_rows_;
  std::vector<Column> cols_;
  std::vector<double> b_;
  std::vector<double> lo_, hi_, x_;
  std::vector<double> cost_;
  std::vector<VarState> state_;
  std::vector<Index> basis_;
  std::vector<long> position_;
  std::vector<double> binv_;
  Index slack_begin_ = 0;
  Index artificial_begin_ = 0;
  Index iterations_ = 0;
  Index max_iterations_ = 0;
  Index pivots_since_refactor_ = 0;
};

void BoundedSimplex::build() {
  n_struct_ = lp_.num_variables();
  for (Index k = 0; k < lp_.num_rows(); ++k) {
    switch (lp_.row(k).type) {
      case RowType::LessEqual: internal_rows_.push_back({k, 1.0}); break;
      case RowType::GreaterEqual: internal_rows_.push_back({k, -1.0}); break;
      case RowType::Equal:
        internal_rows_.push_back({k, 1.0});
        internal_rows_.push_back({k, -1.0});
        break;
    }
  }
  m_ = internal_rows_.size();

  const double sense = lp_.sense() == Sense::Maximize ? 1.0 : -1.0;
  cols_.assign(n_struct_ + m_, {});
  b_.resize(m_);
  for (Index r = 0; r < m_; ++r) {
    const auto& row = lp_.row(internal_rows_[r].original);
    const double s = internal_rows_[r].sign;
    b_[r] = s * row.rhs;
    for (const auto& [var, coef] : row.terms) {
      if (coef == 0.0) continue;
      cols_[var].rows.push_back(r);
      cols_[var].values.push_back(s * coef);
    }
  }
  // Merge duplicate entries of the same (row, var).
  for (Index j = 0; j < n_struct_; ++j) {
    auto& c = cols_[j];
    std::vector<std::pair<Index, double>> merged;
    for (Index k = 0; k < c.rows.size(); ++k) merged.emplace_back(c.rows[k], c.values[k]);
    std::sort(merged.begin(), merged.end(), [](const auto& a, const auto& b) { return a.first < b.first; });
    c.rows.clear();
    c.values.clear();
    for (const auto& [r, v] : merged) {
      if (!c.rows.empty() && c.rows.back() == r)
        c.values.back() += v;
      else {
        c.rows.push_back(r);
        c.values.push_back(v);
      }
    }
  }

  slack_begin_ = n_struct_;
  for (Index r = 0; r < m_; ++r) cols_[slack_begin_ + r] = {{r}, {1.0}};
  artificial_begin_ = slack_begin_ + m_;

  lo_.resize(n_struct_ + m_);
  hi_.resize(n_struct_ + m_);
  cost_.assign(n_struct_ + m_, 0.0);
  for (Index j = 0; j < n_struct_; ++j) {
    lo_[j] = lp_.lower(j);
    hi_[j] = lp_.upper(j);
    cost_[j] = sense * lp_.objective(j);
  }
  for (Index r = 0; r < m_; ++r) {
    lo_[slack_begin_ + r] = 0.0;
    hi_[slack_begin_ + r] = kInfinity;
  }

  max_iterations_ = tol_.max_iterations ? tol_.max_iterations : std::max<Index>(20000, 50 * (m_ + n_struct_));
}

void BoundedSimplex::initial_basis() {
  const Index n = n_struct_ + m_;
  x_.assign(n, 0.0);
  state_.assign(n, VarState::AtLower);
  for (Index j = 0; j < n_struct_; ++j) {
    if (lo_[j] == hi_[j]) {
      state_[j] = VarState::Fixed;
      x_[j] = lo_[j];
    } else if (std::isfinite(lo_[j])) {
      state_[j] = VarState::AtLower;
      x_[j] = lo_[j];
    } else if (std::isfinite(hi_[j])) {
      state_[j] = VarState::AtUpper;
      x_[j] = hi_[j];
    } else {
      state_[j] = VarState::Free;
      x_[j] = 0.0;
    }
  }

  std::vector<double> residual = b_;
  for (Index j = 0; j < n_struct_; ++j) {
    if (x_[j] == 0.0) continue;
    for (Index k = 0; k < cols_[j].rows.size(); ++k) residual[cols_[j].rows[k]] -= cols_[j].values[k] * x_[j];
  }

  basis_.assign(m_, 0);
  for (Index r = 0; r < m_; ++r) {
    if (residual[r] >= -tol_.feasibility) {
      const Index s = slack_begin_ + r;
      basis_[r] = s;
      state_[s] = VarState::Basic;
      x_[s] = std::max(residual[r], 0.0);
    } else {
      // Artificial with column -e_r carries the infeasibility.
      const Index a = cols_.size();
      cols_.push_back({{r}, {-1.0}});
      lo_.push_back(0.0);
      hi_.push_back(kInfinity);
      cost_.push_back(0.0);
      x_.push_back(-residual[r]);
      state_.push_back(VarState::Basic);
      basis_[r] = a;
      const Index s = slack_begin_ + r;
      state_[s] = VarState::AtLower;
      x_[s] = 0.0;
    }
  }
  position_.assign(cols_.size(), -1);
  for (Index r = 0; r < m_; ++r) position_[basis_[r]] = static_cast<long>(r);

  // Basis matrix is diagonal with entries +1 (slack) or -1 (artificial).
  binv_.assign(m_ * m_, 0.0);
  for (Index r = 0; r < m_; ++r) binv_[r * m_ + r] = basis_[r] >= artificial_begin_ ? -1.0 : 1.0;
}

void BoundedSimplex::compute_duals(const std::vector<double>& cost, std::vector<double>& pi) const {
  pi.assign(m_, 0.0);
  for (Index i = 0; i < m_; ++i) {
    const double cb = cost[basis_[i]];
    if (cb == 0.0) continue;
    const double* row = &binv_[i * m_];
    for (Index r = 0; r < m_; ++r) pi[r] += cb * row[r];
  }
}

double BoundedSimplex::reduced_cost(Index var, const std::vector<double>& cost, const std::vector<double>& pi) const {
  double d = cost[var];
  const auto& c = cols_[var];
  for (Index k = 0; k < c.rows.size(); ++k) d -= pi[c.rows[k]] * c.values[k];
  return d;
}

void BoundedSimplex::ftran(Index var, std::vector<double>& alpha) const {
  alpha.assign(m_, 0.0);
  const auto& c = cols_[var];
  for (Index i = 0; i < m_; ++i) {
    const double* row = &binv_[i * m_];
    double s = 0.0;
    for (Index k = 0; k < c.rows.size(); ++k) s += row[c.rows[k]] * c.values[k];
    alpha[i] = s;
  }
}

void BoundedSimplex::pivot(Index leave_pos, const std::vector<double>& alpha) {
  double* prow = &binv_[leave_pos * m_];
  const double inv = 1.0 / alpha[leave_pos];
  for (Index r = 0; r < m_; ++r) prow[r] *= inv;
  for (Index i = 0; i < m_; ++i) {
    if (i == leave_pos || alpha[i] == 0.0) continue;
    double* row = &binv_[i * m_];
    const double f = alpha[i];
    for (Index r = 0; r < m_; ++r) row[r] -= f * prow[r];
  }
}

bool BoundedSimplex::refactor() {
  // Gauss-Jordan on [B | I] with partial pivoting.
  std::vector<double> a(m_ * m_, 0.0);
  for (Index i = 0; i < m_; ++i) {
    const auto& c = cols_[basis_[i]];
    for (Index k = 0; k < c.rows.size(); ++k) a[c.rows[k] * m_ + i] = c.values[k];
  }
  std::vector<double> inv(m_ * m_, 0.0);
  for (Index i = 0; i < m_; ++i) inv[i * m_ + i] = 1.0;
  for (Index col = 0; col < m_; ++col) {
    Index best = col;
    double best_abs = std::abs(a[col * m_ + col]);
    for (Index r = col + 1; r < m_; ++r) {
      const double v = std::abs(a[r * m_ + col]);
      if (v > best_abs) {
        best_abs = v;
        best = r;
      }
    }
    if (best_abs < 1e-13) return false;
    if (best != col) {
      for (Index k = 0; k < m_; ++k) {
        std::swap(a[best * m_ + k], a[col * m_ + k]);
        std::swap(inv[best * m_ + k], inv[col * m_ + k]);
      }
    }
    const double p = 1.0 / a[col * m_ + col];
    for (Index k = 0; k < m_; ++k) {
      a[col * m_ + k] *= p;
      inv[col * m_ + k] *= p;
    }
    for (Index r = 0; r < m_; ++r) {
      if (r == col) continue;
      const double f = a[r * m_ + col];
      if (f == 0.0) continue;
      for (Index k = 0; k < m_; ++k) {
        a[r * m_ + k] -= f * a[col * m_ + k];
        inv[r * m_ + k] -= f * inv[col * m_ + k];
      }
    }
  }
  // Row i of B^{-1} belongs to basis position i: B^{-1} maps row space to
  // basis positions, and column i of B is basis_[i], so inv is already B^{-1}.
  binv_ = std::move(inv);
  pivots_since_refactor_ = 0;
  return true;
}

void BoundedSimplex::recompute_basic_values() {
  std::vector<double> rhs = b_;
  for (Index j = 0; j < cols_.size(); ++j) {
    if (state_[j] == VarState::Basic || x_[j] == 0.0) continue;
    const auto& c = cols_[j];
    for (Index k = 0; k < c.rows.size(); ++k) rhs[c.rows[k]] -= c.values[k] * x_[j];
  }
  for (Index i = 0; i < m_; ++i) {
    const double* row = &binv_[i * m_];
    double s = 0.0;
    for (Index r = 0; r < m_; ++r) s += row[r] * rhs[r];
    x_[basis_[i]] = s;
  }
}

Status BoundedSimplex::iterate(const std::vector<double>& cost) {
  std::vector<double> pi, alpha;
  Index degenerate = 0;
  bool bland = false;
  const Index n = cols_.size();

  for (;;) {
    if (iterations_ >= max_iterations_) return Status::Stalled;
    if (pivots_since_refactor_ >= tol_.refactor_interval) {
      if (!refactor()) return Status::Stalled;
      recompute_basic_values();
    }

    compute_duals(cost, pi);

    // Pricing.
    Index enter = n;
    double enter_d = 0.0, best_score = 0.0;
    for (Index j = 0; j < n; ++j) {
      const VarState st = state_[j];
      if (st == VarState::Basic || st == VarState::Fixed) continue;
      const double d = reduced_cost(j, cost, pi);
      bool eligible = false;
      if (st == VarState::AtLower) eligible = d > tol_.optimality;
      else if (st == VarState::AtUpper) eligible = d < -tol_.optimality;
      else eligible = std::abs(d) > tol_.optimality;
      if (!eligible) continue;
      if (bland) {
        enter = j;
        enter_d = d;
        break;
      }
      if (std::abs(d) > best_score) {
        best_score = std::abs(d);
        enter = j;
        enter_d = d;
      }
    }
    if (enter == n) return Status::Optimal;

    const double dir = enter_d > 0.0 ? 1.0 : -1.0;
    ftran(enter, alpha);

    // Harris two-pass ratio test: basic x_B moves by -theta * dir * alpha.
    // Pass one bounds the step with every bound relaxed by `relax`; pass two
    // picks, among rows whose exact ratio fits that step, the largest pivot.
    double max_alpha = 0.0;
    for (double a : alpha) max_alpha = std::max(max_alpha, std::abs(a));
    const double pivot_floor = std::max(tol_.pivot, 1e-9 * max_alpha);
    const double relax = 0.1 * tol_.feasibility;
    auto exact_ratio = [&](Index i, double relaxation) {
      const double delta = dir * alpha[i];
      const Index v = basis_[i];
      if (delta > 0.0) return std::isfinite(lo_[v]) ? (x_[v] - lo_[v] + relaxation) / delta : kInfinity;
      return std::isfinite(hi_[v]) ? (hi_[v] - x_[v] + relaxation) / -delta : kInfinity;
    };
    double theta_max = kInfinity;
    for (Index i = 0; i < m_; ++i)
      if (std::abs(alpha[i]) > pivot_floor) theta_max = std::min(theta_max, exact_ratio(i, relax));
    double theta = kInfinity;
    if (std::isfinite(lo_[enter]) && std::isfinite(hi_[enter])) theta = hi_[enter] - lo_[enter];
    long leave = -1;
    double leave_alpha = 0.0;
    if (theta_max < theta) {
      for (Index i = 0; i < m_; ++i) {
        if (std::abs(alpha[i]) <= pivot_floor) continue;
        const double ratio = exact_ratio(i, 0.0);
        if (ratio > theta_max) continue;
        bool take = leave < 0;
        if (!take) {
          if (bland) take = basis_[i] < basis_[static_cast<Index>(leave)];
          else take = std::abs(alpha[i]) > std::abs(leave_alpha);
        }
        if (take) {
          leave = static_cast<long>(i);
          leave_alpha = alpha[i];
        }
      }
      theta = std::max(exact_ratio(static_cast<Index>(leave), 0.0), 0.0);
    }
    if (!std::isfinite(theta)) return Status::Unbounded;

    ++iterations_;
    if (theta <= 1e-12) {
      if (++degenerate >= tol_.degenerate_streak) bland = true;
    } else {
      degenerate = 0;
      bland = false;
    }

    // Apply the step.
    if (theta != 0.0) {
      x_[enter] += dir * theta;
      for (Index i = 0; i < m_; ++i)
        if (alpha[i] != 0.0) x_[basis_[i]] -= theta * dir * alpha[i];
    }

    if (leave < 0) {
      // The entering variable reaches its opposite bound first.
      if (dir > 0) {
        state_[enter] = VarState::AtUpper;
        x_[enter] = hi_[enter];
      } else {
        state_[enter] = VarState::AtLower;
        x_[enter] = lo_[enter];
      }
      continue;
    }

    const Index r = static_cast<Index>(leave);
    const Index out = basis_[r];
    const double delta = dir * alpha[r];
    if (delta > 0.0) {
      state_[out] = lo_[out] == hi_[out] ? VarState::Fixed : VarState::AtLower;
      x_[out] = lo_[out];
    } else {
      state_[out] = lo_[out] == hi_[out] ? VarState::Fixed : VarState::AtUpper;
      x_[out] = hi_[out];
    }
    position_[out] = -1;
    basis_[r] = enter;
    position_[enter] = static_cast<long>(r);
    state_[enter] = VarState::Basic;
    pivot(r, alpha);
    ++pivots_since_refactor_;
  }
}

LpSolution BoundedSimplex::run() {
  LpSolution sol;
  initial_basis();

  double bnorm = 0.0;
  for (double v : b_) bnorm = std::max(bnorm, std::abs(v));

  if (cols_.size() > artificial_begin_) {
    std::vector<double> phase1(cols_.size(), 0.0);
    for (Index a = artificial_begin_; a < cols_.size(); ++a) phase1[a] = -1.0;
    const Status s = iterate(phase1);
    if (s == Status::Stalled) {
      sol.status = Status::Stalled;
      sol.iterations = iterations_;
      return sol;
    }
    if (refactor()) recompute_basic_values();
    double infeas = 0.0;
    for (Index a = artificial_begin_; a < cols_.size(); ++a) infeas += std::max(x_[a], 0.0);
    if (infeas > tol_.feasibility * (1.0 + bnorm)) {
      sol.status = Status::Infeasible;
      sol.iterations = iterations_;
      return sol;
    }
    for (Index a = artificial_begin_; a < cols_.size(); ++a) {
      hi_[a] = 0.0;
      if (state_[a] != VarState::Basic) {
        state_[a] = VarState::Fixed;
        x_[a] = 0.0;
      }
    }
  }

  cost_.resize(cols_.size(), 0.0);
  Status s = iterate(cost_);
  if (s == Status::Optimal) {
    // Confirm on a fresh factorization; drift may have hidden an improving column.
    if (!refactor()) s = Status::Stalled;
    else {
      recompute_basic_values();
      s = iterate(cost_);
    }
  }
  sol.iterations = iterations_;
  sol.status = s;
  if (s != Status::Optimal) return sol;

  std::vector<double> pi;
  compute_duals(cost_, pi);
  for (Index r = 0; r < m_; ++r)
    if (state_[slack_begin_ + r] == VarState::Basic) pi[r] = 0.0;

  const double sense = lp_.sense() == Sense::Maximize ? 1.0 : -1.0;
  sol.primal.assign(x_.begin(), x_.begin() + static_cast<long>(n_struct_));
  sol.dual.assign(lp_.num_rows(), 0.0);
  for (Index r = 0; r < m_; ++r) sol.dual[internal_rows_[r].original] += sense * internal_rows_[r].sign * pi[r];
  sol.reduced_cost.assign(n_struct_, 0.0);
  for (Index j = 0; j < n_struct_; ++j)
    sol.reduced_cost[j] = state_[j] == VarState::Basic ? 0.0 : sense * reduced_cost(j, cost_, pi);
  sol.objective = 0.0;
  for (Index j = 0; j < n_struct_; ++j) sol.objective += lp_.objective(j) * sol.primal[j];
  return sol;
}

}  // namespace

LpSolution solve_lp(const LinearProgram& lp, const Tolerances& tol) {
  lp.check();
  BoundedSimplex simplex(lp, tol);
  return simplex.run();
}

OptimalityReport check_optimality(const LinearProgram& lp, const LpSolution& sol, const Tolerances& tol) {
  OptimalityReport rep;
  if (sol.status != Status::Optimal) return rep;
  const Index n = lp.num_variables();
  // Work in maximization form: flip signs for a minimization.
  const double sense = lp.sense() == Sense::Maximize ? 1.0 : -1.0;
  const double scale = 1.0 + std::abs(sol.objective);

  for (Index j = 0; j < n; ++j) {
    const double x = sol.primal[j];
    rep.primal_residual = std::max({rep.primal_residual, lp.lower(j) - x, x - lp.upper(j)});
  }
  double dual_obj = 0.0;
  for (Index k = 0; k < lp.num_rows(); ++k) {
    const auto& row = lp.row(k);
    double ax = 0.0;
    for (const auto& [var, coef] : row.terms) ax += coef * sol.primal[var];
    const double slack = row.rhs - ax;
    const double y = sense * sol.dual[k];
    switch (row.type) {
      case RowType::LessEqual:
        rep.primal_residual = std::max(rep.primal_residual, -slack);
        rep.dual_residual = std::max(rep.dual_residual, -y);
        break;
      case RowType::GreaterEqual:
        rep.primal_residual = std::max(rep.primal_residual, slack);
        rep.dual_residual = std::max(rep.dual_residual, y);
        break;
      case RowType::Equal: rep.primal_residual = std::max(rep.primal_residual, std::abs(slack)); break;
    }
    rep.complementarity = std::max(rep.complementarity, std::abs(y * slack));
    dual_obj += y * row.rhs;
  }

  // Reduced costs recomputed from the duals, not trusted from the solver.
  std::vector<double> d(n);
  for (Index j = 0; j < n; ++j) d[j] = sense * lp.objective(j);
  for (Index k = 0; k < lp.num_rows(); ++k)
    for (const auto& [var, coef] : lp.row(k).terms) d[var] -= sense * sol.dual[k] * coef;
  for (Index j = 0; j < n; ++j) {
    const double x = sol.primal[j];
    if (d[j] > 0.0) {
      if (!std::isfinite(lp.upper(j))) {
        rep.dual_residual = std::max(rep.dual_residual, d[j]);
        continue;
      }
      dual_obj += d[j] * lp.upper(j);
      rep.complementarity = std::max(rep.complementarity, std::abs(d[j] * (lp.upper(j) - x)));
    } else if (d[j] < 0.0) {
      if (!std::isfinite(lp.lower(j))) {
        rep.dual_residual = std::max(rep.dual_residual, -d[j]);
        continue;
      }
      dual_obj += d[j] * lp.lower(j);
      rep.complementarity = std::max(rep.complementarity, std::abs(d[j] * (x - lp.lower(j))));
    }
  }
  rep.dual_objective = sense * dual_obj;
  rep.duality_gap = std::abs(sol.objective - rep.dual_objective);
  rep.ok = rep.primal_residual <= tol.feasibility * scale && rep.dual_residual <= tol.duality * scale &&
           rep.duality_gap <= tol.duality * scale && rep.complementarity <= tol.complementarity * scale;
  return rep;
}

}  // namespace svcloc::lp
