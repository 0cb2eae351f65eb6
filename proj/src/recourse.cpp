#include "svcloc/recourse.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

namespace svcloc {

namespace {

struct RecourseLp {
  lp::LinearProgram program{lp::Sense::Maximize};
  std::vector<Index> arcs;                 // arcs carried by the LP
  std::vector<Index> x_var, q_var;         // per carried arc
  std::vector<Index> cap_row, dem_row, sum_row;  // per candidate / site, npos if absent
};

constexpr Index npos = static_cast<Index>(-1);

RecourseLp build_lp(const Instance& inst, const LocationDecision& y, std::span<const double> demand,
                    std::span<const double> capacity, bool open_arcs_only) {
  RecourseLp m;
  for (Index a = 0; a < inst.num_arcs(); ++a)
    if (!open_arcs_only || y.is_open(inst.arc_candidate(a))) m.arcs.push_back(a);

  for (Index a : m.arcs) {
    const double hi = y.is_open(inst.arc_candidate(a)) ? 1.0 : 0.0;
    m.x_var.push_back(m.program.add_variable(inst.utility(a)));
    m.q_var.push_back(m.program.add_variable(0.0, 0.0, hi));
  }

  std::vector<std::vector<lp::Term>> cap(inst.num_candidates()), dem(inst.num_sites()), sum(inst.num_sites());
  for (Index k = 0; k < m.arcs.size(); ++k) {
    const Index a = m.arcs[k];
    const Index i = inst.arc_site(a), j = inst.arc_candidate(a);
    cap[j].emplace_back(m.x_var[k], 1.0);
    dem[i].emplace_back(m.x_var[k], 1.0);
    dem[i].emplace_back(m.q_var[k], -demand[a]);
    sum[i].emplace_back(m.q_var[k], 1.0);
  }
  m.cap_row.assign(inst.num_candidates(), npos);
  m.dem_row.assign(inst.num_sites(), npos);
  m.sum_row.assign(inst.num_sites(), npos);
  for (Index j = 0; j < inst.num_candidates(); ++j)
    if (!cap[j].empty())
      m.cap_row[j] = m.program.add_row(std::move(cap[j]), lp::RowType::LessEqual,
                                       y.is_open(j) ? capacity[j] : 0.0);
  for (Index i = 0; i < inst.num_sites(); ++i) {
    if (dem[i].empty()) continue;
    m.dem_row[i] = m.program.add_row(std::move(dem[i]), lp::RowType::LessEqual, 0.0);
    m.sum_row[i] = m.program.add_row(std::move(sum[i]), lp::RowType::LessEqual, 1.0);
  }
  return m;
}

// Picks beta for a site with no opened neighbor. Its gamma is zero, each arc
// then needs tau_ij = D_ij beta and alpha_j >= u_ij - beta; the candidate
// values of beta are the breakpoints {0} and {u_ij}.
double unserved_site_beta(const Instance& inst, std::span<const double> demand, std::span<const double> capacity,
                          Index i) {
  double best_beta = 0.0, best_cost = kInfinity;
  auto cost_of = [&](double beta) {
    double c = 0.0;
    for (Index a = inst.arc_begin(i); a < inst.arc_end(i); ++a) {
      const Index j = inst.arc_candidate(a);
      c += capacity[j] * std::max(0.0, inst.utility(a) - beta) + demand[a] * beta;
    }
    return c;
  };
  std::vector<double> options{0.0};
  for (Index a = inst.arc_begin(i); a < inst.arc_end(i); ++a) options.push_back(inst.utility(a));
  std::sort(options.begin(), options.end());
  for (double beta : options) {
    const double c = cost_of(beta);
    if (c < best_cost - 1e-12) {
      best_cost = c;
      best_beta = beta;
    }
  }
  return best_beta;
}

// Among the duals whose objective at y does not exceed `value`, finds one
// minimizing the objective at the core point y0. Solved through its dual:
//   max  sum u x - value * theta
//   s.t. sum_i x_ij - C_j y_j theta <= C_j y0_j     (alpha_j)
//        sum_j x_ij - sum_j D_ij q_ij <= 0          (beta_i)
//        sum_j q_ij - theta <= 1                    (gamma_i)
//        q_ij - y_j theta <= y0_j                   (tau_ij)
void pareto_duals(const Instance& inst, const LocationDecision& y, std::span<const double> demand,
                  std::span<const double> core, double value, const lp::Tolerances& tol, RecourseSolution& sol) {
  lp::LinearProgram prog(lp::Sense::Maximize);
  const double target = value + 1e-9 * (1.0 + std::abs(value));
  const Index theta = prog.add_variable(-target);
  const Index n_arcs = inst.num_arcs();
  std::vector<Index> x_var(n_arcs), q_var(n_arcs), tau_row(n_arcs, npos);
  std::vector<std::vector<lp::Term>> cap(inst.num_candidates()), dem(inst.num_sites()), sum(inst.num_sites());
  for (Index a = 0; a < n_arcs; ++a) {
    const Index i = inst.arc_site(a), j = inst.arc_candidate(a);
    const bool open = y.is_open(j);
    x_var[a] = prog.add_variable(inst.utility(a));
    q_var[a] = prog.add_variable(0.0, 0.0, open ? kInfinity : core[j]);
    if (open) tau_row[a] = prog.add_row({{q_var[a], 1.0}, {theta, -1.0}}, lp::RowType::LessEqual, core[j]);
    cap[j].emplace_back(x_var[a], 1.0);
    dem[i].emplace_back(x_var[a], 1.0);
    dem[i].emplace_back(q_var[a], -demand[a]);
    sum[i].emplace_back(q_var[a], 1.0);
  }
  std::vector<Index> cap_row(inst.num_candidates(), npos), dem_row(inst.num_sites(), npos),
      sum_row(inst.num_sites(), npos);
  for (Index j = 0; j < inst.num_candidates(); ++j) {
    if (cap[j].empty()) continue;
    if (y.is_open(j)) cap[j].emplace_back(theta, -sol.capacity[j]);
    cap_row[j] = prog.add_row(std::move(cap[j]), lp::RowType::LessEqual, sol.capacity[j] * core[j]);
  }
  for (Index i = 0; i < inst.num_sites(); ++i) {
    if (dem[i].empty()) continue;
    dem_row[i] = prog.add_row(std::move(dem[i]), lp::RowType::LessEqual, 0.0);
    sum[i].emplace_back(theta, -1.0);
    sum_row[i] = prog.add_row(std::move(sum[i]), lp::RowType::LessEqual, 1.0);
  }
  const lp::LpSolution lps = lp::solve_lp(prog, tol);
  sol.lp_iterations += lps.iterations;
  if (lps.status != lp::Status::Optimal)
    throw SolverError("core-point dual LP ended with status " + lp::to_string(lps.status));
  for (Index j = 0; j < inst.num_candidates(); ++j)
    sol.alpha[j] = cap_row[j] == npos ? 0.0 : std::max(0.0, lps.dual[cap_row[j]]);
  for (Index i = 0; i < inst.num_sites(); ++i) {
    sol.beta[i] = dem_row[i] == npos ? 0.0 : std::max(0.0, lps.dual[dem_row[i]]);
    sol.gamma[i] = sum_row[i] == npos ? 0.0 : std::max(0.0, lps.dual[sum_row[i]]);
  }
  for (Index a = 0; a < n_arcs; ++a)
    sol.tau[a] = std::max(0.0, tau_row[a] != npos ? lps.dual[tau_row[a]] : lps.reduced_cost[q_var[a]]);
}

}  // namespace

std::vector<double> effective_capacity(const Instance& inst, std::span<const double> demand) {
  std::vector<double> top(inst.num_sites(), 0.0);
  for (Index i = 0; i < inst.num_sites(); ++i)
    for (Index a = inst.arc_begin(i); a < inst.arc_end(i); ++a) top[i] = std::max(top[i], demand[a]);
  std::vector<double> cap(inst.num_candidates());
  for (Index j = 0; j < inst.num_candidates(); ++j) {
    double reach = 0.0;
    for (Index a : inst.arcs_of_candidate(j)) reach += top[inst.arc_site(a)];
    cap[j] = std::min(inst.capacity(j), reach);
  }
  return cap;
}

std::vector<double> default_core_point(const Instance& inst) {
  double spend = 0.0;
  for (Index j = 0; j < inst.num_candidates(); ++j) spend += inst.open_cost(j);
  const double share = spend > 0.0 ? 0.5 * inst.budget() / spend : 0.5;
  return std::vector<double>(inst.num_candidates(), std::clamp(share, 1e-3, 0.5));
}

RecourseSolution evaluate_recourse(const Instance& inst, const LocationDecision& y, std::span<const double> demand,
                                   DualSelection selection, std::span<const double> core_point,
                                   const lp::Tolerances& tol) {
  if (y.size() != inst.num_candidates()) throw std::invalid_argument("decision size differs from candidate count");
  if (demand.size() != inst.num_arcs()) throw std::invalid_argument("demand does not cover the instance support");

  const Index n_arcs = inst.num_arcs();
  RecourseSolution sol;
  sol.allocation.x.assign(n_arcs, 0.0);
  sol.allocation.q.assign(n_arcs, 0.0);
  sol.alpha.assign(inst.num_candidates(), 0.0);
  sol.beta.assign(inst.num_sites(), 0.0);
  sol.gamma.assign(inst.num_sites(), 0.0);
  sol.tau.assign(n_arcs, 0.0);

  const bool canonical = selection != DualSelection::Raw;
  sol.capacity = effective_capacity(inst, demand);
  const RecourseLp m = build_lp(inst, y, demand, sol.capacity, canonical);
  if (!m.arcs.empty()) {
    const lp::LpSolution lps = lp::solve_lp(m.program, tol);
    sol.lp_iterations = lps.iterations;
    if (lps.status != lp::Status::Optimal) {
      sol.status = lps.status;
      throw SolverError("recourse LP ended with status " + lp::to_string(lps.status));
    }
    sol.value = lps.objective;
    for (Index k = 0; k < m.arcs.size(); ++k) {
      const Index a = m.arcs[k];
      sol.allocation.x[a] = lps.primal[m.x_var[k]];
      sol.allocation.q[a] = lps.primal[m.q_var[k]];
      sol.tau[a] = std::max(0.0, lps.reduced_cost[m.q_var[k]]);
    }
    for (Index j = 0; j < inst.num_candidates(); ++j)
      if (m.cap_row[j] != npos) sol.alpha[j] = std::max(0.0, lps.dual[m.cap_row[j]]);
    for (Index i = 0; i < inst.num_sites(); ++i) {
      if (m.dem_row[i] == npos) continue;
      sol.beta[i] = std::max(0.0, lps.dual[m.dem_row[i]]);
      sol.gamma[i] = std::max(0.0, lps.dual[m.sum_row[i]]);
    }
  }

  if (canonical) {
    for (Index i = 0; i < inst.num_sites(); ++i) {
      bool served = false;
      double top = 0.0;
      for (Index a = inst.arc_begin(i); a < inst.arc_end(i); ++a)
        if (y.is_open(inst.arc_candidate(a))) {
          served = true;
          top = std::max(top, demand[a]);
        }
      if (served) {
        sol.gamma[i] = top * sol.beta[i];
      } else {
        sol.beta[i] = unserved_site_beta(inst, demand, sol.capacity, i);
        sol.gamma[i] = 0.0;
      }
      for (Index a = inst.arc_begin(i); a < inst.arc_end(i); ++a)
        sol.tau[a] = std::max(0.0, demand[a] * sol.beta[i] - sol.gamma[i]);
    }
    for (Index j = 0; j < inst.num_candidates(); ++j) {
      if (y.is_open(j)) continue;
      double need = 0.0;
      for (Index a : inst.arcs_of_candidate(j)) need = std::max(need, inst.utility(a) - sol.beta[inst.arc_site(a)]);
      sol.alpha[j] = need;
    }
  }
  if (selection == DualSelection::Pareto) {
    std::vector<double> fallback;
    if (core_point.empty()) {
      fallback = default_core_point(inst);
      core_point = fallback;
    }
    if (core_point.size() != inst.num_candidates()) throw std::invalid_argument("core point size differs from candidate count");
    pareto_duals(inst, y, demand, core_point, sol.value, tol, sol);
  }
  sol.dual_objective = recourse_dual_objective(inst, y, sol);
  return sol;
}

double recourse_dual_objective(const Instance& inst, const LocationDecision& y, const RecourseSolution& sol) {
  double total = 0.0;
  for (Index j = 0; j < inst.num_candidates(); ++j)
    if (y.is_open(j)) total += (sol.capacity.empty() ? inst.capacity(j) : sol.capacity[j]) * sol.alpha[j];
  for (Index i = 0; i < inst.num_sites(); ++i) total += sol.gamma[i];
  for (Index a = 0; a < inst.num_arcs(); ++a)
    if (y.is_open(inst.arc_candidate(a))) total += sol.tau[a];
  return total;
}

double recourse_dual_violation(const Instance& inst, std::span<const double> demand, const RecourseSolution& sol) {
  double worst = 0.0;
  for (double v : sol.alpha) worst = std::max(worst, -v);
  for (double v : sol.beta) worst = std::max(worst, -v);
  for (double v : sol.gamma) worst = std::max(worst, -v);
  for (double v : sol.tau) worst = std::max(worst, -v);
  for (Index a = 0; a < inst.num_arcs(); ++a) {
    const Index i = inst.arc_site(a), j = inst.arc_candidate(a);
    // column of x_ij: alpha_j + beta_i >= u_ij
    worst = std::max(worst, inst.utility(a) - sol.alpha[j] - sol.beta[i]);
    // column of q_ij: gamma_i + tau_ij >= D_ij beta_i
    worst = std::max(worst, demand[a] * sol.beta[i] - sol.gamma[i] - sol.tau[a]);
  }
  return worst;
}

bool scenario_consistent(const Instance& inst, std::span<const double> demand) {
  for (Index i = 0; i < inst.num_sites(); ++i)
    for (Index a = inst.arc_begin(i); a < inst.arc_end(i); ++a)
      for (Index b = a + 1; b < inst.arc_end(i); ++b) {
        const bool a_dominates = inst.utility(a) >= inst.utility(b) && demand[a] >= demand[b];
        const bool b_dominates = inst.utility(b) >= inst.utility(a) && demand[b] >= demand[a];
        if (!a_dominates && !b_dominates) return false;
      }
  return true;
}

double closed_form_uncap_value(const Instance& inst, const LocationDecision& y, std::span<const double> demand) {
  if (!scenario_consistent(inst, demand))
    throw SchemaError("closed-form value requires utilities and demand to be consistent");
  double total = 0.0;
  for (Index i = 0; i < inst.num_sites(); ++i) {
    double best = 0.0;
    for (Index a = inst.arc_begin(i); a < inst.arc_end(i); ++a)
      if (y.is_open(inst.arc_candidate(a))) best = std::max(best, inst.utility(a) * demand[a]);
    total += best;
  }
  return total;
}

GreedyResult greedy_recourse(const Instance& inst, const LocationDecision& y, std::span<const double> demand) {
  GreedyResult res;
  res.allocation.x.assign(inst.num_arcs(), 0.0);
  res.allocation.q.assign(inst.num_arcs(), 0.0);

  std::vector<Index> order;
  for (Index a = 0; a < inst.num_arcs(); ++a)
    if (y.is_open(inst.arc_candidate(a))) order.push_back(a);
  // Arcs are numbered by (site, candidate), so a stable sort keeps that order on ties.
  std::stable_sort(order.begin(), order.end(), [&](Index a, Index b) { return inst.utility(a) > inst.utility(b); });

  std::vector<double> site_left(inst.num_sites(), 0.0);
  for (Index i = 0; i < inst.num_sites(); ++i) {
    const auto top = demand_argmax(inst, demand, i, y);
    if (top) {
      site_left[i] = demand[*top];
      res.allocation.q[*top] = 1.0;
    }
  }
  std::vector<double> cap_left(inst.capacities().begin(), inst.capacities().end());
  for (Index a : order) {
    const Index i = inst.arc_site(a), j = inst.arc_candidate(a);
    const double flow = std::min(site_left[i], cap_left[j]);
    if (flow <= 0.0) continue;
    res.allocation.x[a] = flow;
    site_left[i] -= flow;
    cap_left[j] -= flow;
    res.value += inst.utility(a) * flow;
  }
  return res;
}

double ScenarioCut::evaluate(const LocationDecision& y) const {
  double v = r;
  for (Index j = 0; j < t.size(); ++j)
    if (y.is_open(j)) v += t[j];
  return v;
}

ScenarioCut cut_coefficients(const RecourseSolution& sol, const Instance& inst) {
  if (sol.status != lp::Status::Optimal) throw std::invalid_argument("cut requested from a non-optimal recourse solution");
  ScenarioCut cut;
  cut.r = std::accumulate(sol.gamma.begin(), sol.gamma.end(), 0.0);
  cut.t.assign(inst.num_candidates(), 0.0);
  for (Index j = 0; j < inst.num_candidates(); ++j) {
    double t = (sol.capacity.empty() ? inst.capacity(j) : sol.capacity[j]) * sol.alpha[j];
    for (Index a : inst.arcs_of_candidate(j)) t += sol.tau[a];
    cut.t[j] = t;
  }
  return cut;
}

}  // namespace svcloc
