#pragma once

#include <optional>
#include <span>
#include <vector>

#include "svcloc/lp.hpp"
#include "svcloc/model.hpp"

namespace svcloc {

struct DdslSolution {
  LocationDecision y;
  Allocation allocation;
  double objective = 0.0;
  Index nodes = 0;
};

/// Deterministic location model with maximum attraction demand, solved as one MILP.
DdslSolution solve_ddsl(const Instance& instance, std::span<const double> demand,
                        const lp::MilpOptions& options = {});

/// A pair of candidates in one neighborhood that neither dominates jointly.
struct ConsistencyWitness {
  Index site = 0;
  Index first = 0;   ///< candidate
  Index second = 0;  ///< candidate
  Index scenario = 0;
};

struct ConsistencyCertificate {
  /// One candidate of every pair dominates the other in utility and in all scenarios at once.
  bool strong = false;
  /// Consistency of each scenario on its own.
  std::vector<bool> per_scenario;
  /// Per site, candidates from most to least attractive; filled when strong.
  std::vector<std::vector<Index>> order;
  std::optional<ConsistencyWitness> witness;
};

ConsistencyCertificate check_consistency(const Instance& instance, const ScenarioSet& scenarios);

struct StaticSolution {
  LocationDecision y;
  double objective = 0.0;
  Index nodes = 0;
};

/**
 * Single MILP for the uncapacitated problem under strong consistency:
 *
 *   max  gamma - lambda d + sum_w mu0_w (beta_w - alpha_w)
 *   s.t. sum_j b_j y_j <= B
 *        sum_ij u_ij D^w_ij s_ij + alpha_w - beta_w - gamma >= 0   for all w
 *        lambda >= alpha_w + beta_w                               for all w
 *        s_ij <= y_j,  sum_j s_ij <= 1
 *        y binary, s in [0,1], lambda, alpha, beta >= 0, gamma free
 *
 * Capacities are ignored. Throws SchemaError when consistency is not strong.
 */
StaticSolution solve_uncap_reformulation(const Instance& instance, const ScenarioSet& scenarios,
                                         const AmbiguitySet& ambiguity, const lp::MilpOptions& options = {});

/// Every budget-feasible decision; throws SchemaError once more than `limit` exist.
std::vector<LocationDecision> enumerate_feasible(const Instance& instance, Index limit = Index{1} << 20);

/// Exhaustive search over budget-feasible decisions with the exact worst-case value of each.
StaticSolution brute_force_dro(const Instance& instance, const ScenarioSet& scenarios,
                               const AmbiguitySet& ambiguity, Index threads = 1);

/// Copy of the instance with every capacity raised to `capacity`.
Instance with_capacity(const Instance& instance, double capacity);

}  // namespace svcloc
