#pragma once

#include <span>
#include <vector>

#include "svcloc/lp.hpp"
#include "svcloc/model.hpp"

namespace svcloc {

/**
 * How dual values are chosen when the recourse LP has several dual optima.
 *
 * Raw reports the duals returned by the simplex run on the full LP.
 * Canonical solves the LP over opened arcs only and then completes the duals
 * of closed candidates and unserved sites in closed form, choosing, among
 * the dual optima with the same multipliers on opened arcs, the one that
 * prices opening a closed candidate by its actual demand gain. Both are
 * optimal for the dual of the recourse LP; they differ only in how tight the
 * resulting cuts are at other decisions.
 *
 * Pareto picks, among all optimal duals, one minimizing the cut evaluated at
 * a core point strictly inside the hull of budget-feasible decisions, which
 * yields a cut not dominated by any other optimal dual. It costs a second LP.
 */
enum class DualSelection { Canonical, Raw, Pareto };

/// Optimal second-stage solution with duals of every constraint family.
struct RecourseSolution {
  lp::Status status = lp::Status::Optimal;
  double value = 0.0;
  Allocation allocation;
  std::vector<double> alpha;  ///< per candidate: capacity rows
  std::vector<double> beta;   ///< per site: demand rows
  std::vector<double> gamma;  ///< per site: sum of q <= 1 rows
  std::vector<double> tau;    ///< per arc: q <= y rows
  std::vector<double> capacity;  ///< capacities the duals refer to, see effective_capacity
  double dual_objective = 0.0;
  Index lp_iterations = 0;
};

/**
 * min(C_j, sum over sites i with j in F_i of max_k D_ik). Flow into j never
 * exceeds the second term, so Q(y, D) is the same under these capacities for
 * every y, while the cut coefficients C_j alpha_j stay on the scale of demand.
 */
std::vector<double> effective_capacity(const Instance& instance, std::span<const double> demand);

/**
 * Second-stage value Q(y, D): maximize total utility of served demand.
 *
 *   max  sum u_ij x_ij
 *   s.t. sum_i x_ij <= C_j y_j                  (alpha_j)
 *        sum_j x_ij - sum_j D_ij q_ij <= 0     (beta_i)
 *        sum_j q_ij <= 1                       (gamma_i)
 *        q_ij <= y_j                           (tau_ij)
 *        x, q >= 0
 *
 * q_ij <= y_j is imposed as a variable bound; tau is read from reduced costs.
 * The LP uses effective_capacity(), recorded in the solution.
 * Throws SolverError when the LP does not reach optimality.
 */
RecourseSolution evaluate_recourse(const Instance& instance, const LocationDecision& y,
                                   std::span<const double> demand,
                                   DualSelection selection = DualSelection::Canonical,
                                   std::span<const double> core_point = {}, const lp::Tolerances& tol = {});

/// Point y0 with 0 < y0_j < 1 and sum_j b_j y0_j < B, used by DualSelection::Pareto.
std::vector<double> default_core_point(const Instance& instance);

/// Dual objective sum C_j y_j alpha_j + sum gamma_i + sum y_j tau_ij of a recourse solution.
double recourse_dual_objective(const Instance& instance, const LocationDecision& y,
                               const RecourseSolution& sol);

/// Largest violation of dual feasibility (sign and column constraints) of a recourse solution.
double recourse_dual_violation(const Instance& instance, std::span<const double> demand,
                               const RecourseSolution& sol);

/**
 * True when, in this scenario, every pair of candidates in a neighborhood is
 * ordered the same way by utility and by demand (weakly).
 */
bool scenario_consistent(const Instance& instance, std::span<const double> demand);

/**
 * Uncapacitated value sum_i max_{open j} u_ij D_ij. Valid only when utilities
 * and demand are consistent in this scenario; throws SchemaError otherwise.
 */
double closed_form_uncap_value(const Instance& instance, const LocationDecision& y,
                               std::span<const double> demand);

struct GreedyResult {
  double value = 0.0;
  Allocation allocation;
};

/**
 * Feasible allocation that routes flow along opened arcs in nonincreasing
 * utility order (ties by site, then candidate), each site limited to its
 * demand under the maximum attraction rule. A lower bound on Q.
 */
GreedyResult greedy_recourse(const Instance& instance, const LocationDecision& y,
                             std::span<const double> demand);

/// Benders cut Q(y', D) <= r + sum_j t_j y'_j derived from an optimal recourse solution.
struct ScenarioCut {
  double r = 0.0;
  std::vector<double> t;

  double evaluate(const LocationDecision& y) const;
};

/// Throws std::invalid_argument for a non-optimal solution.
ScenarioCut cut_coefficients(const RecourseSolution& sol, const Instance& instance);

}  // namespace svcloc
