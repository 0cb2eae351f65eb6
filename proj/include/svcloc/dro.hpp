#pragma once

#include <functional>
#include <iosfwd>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <vector>

#include "svcloc/lp.hpp"
#include "svcloc/model.hpp"
#include "svcloc/recourse.hpp"

namespace svcloc {

/// Minimizing measure of the expected recourse over the total-variation ball.
struct WorstCaseMeasure {
  std::vector<double> mu;
  double value = 0.0;
};

/**
 * Moves min(d/2, 1 - mu0[w*]) probability mass onto the scenario w* with the
 * smallest Q (lowest index on ties), taking it from the scenarios with the
 * largest Q first. Throws SchemaError for an invalid ambiguity set.
 */
WorstCaseMeasure worst_case_measure(std::span<const double> Q, const AmbiguitySet& ambiguity);

/// Same quantity computed by solving the linear program over (mu, |mu - mu0|).
WorstCaseMeasure worst_case_measure_lp(std::span<const double> Q, const AmbiguitySet& ambiguity);

/// Aggregated cut eta <= sum_w mu_w (r_w + sum_j t_wj y_j), stored in expanded and collapsed form.
struct AggregatedCut {
  std::vector<double> mu;
  std::vector<ScenarioCut> scenario_cuts;
  double constant = 0.0;          ///< sum_w mu_w r_w
  std::vector<double> slope;      ///< sum_w mu_w t_wj

  static AggregatedCut combine(std::vector<double> mu, std::vector<ScenarioCut> cuts, Index candidates);
  double evaluate(const LocationDecision& y) const;
};

struct MasterState {
  std::vector<AggregatedCut> cuts;
  std::set<LocationDecision> visited;
  double eta_cap = 0.0;
  Index iteration = 0;
};

struct MasterResult {
  LocationDecision y;
  double eta = 0.0;
  Index nodes = 0;
};

/// Solves max eta s.t. budget, eta <= every cut, 0 <= eta <= eta_cap, y binary.
MasterResult solve_master(const MasterState& state, const Instance& instance, const lp::MilpOptions& options = {});

struct IterationRecord {
  Index n = 0;
  double eta = 0.0;
  double certified = 0.0;       ///< worst-case value at this iteration's y
  double best_certified = 0.0;
  double gap = 0.0;             ///< eta - best_certified
  double seconds = 0.0;
  double master_seconds = 0.0;  ///< part of seconds spent in the master problem
  Index solset_size = 0;
  Index master_nodes = 0;
  std::string fingerprint;
};

struct DroOptions {
  Index max_iterations = 500;
  double rel_tol = 1e-6;          ///< termination gap, relative to 1 + |eta|
  double report_tol = 1e-5;       ///< allowed |eta* - certified| at termination
  Index threads = 0;              ///< 0 = machine parallelism
  DualSelection duals = DualSelection::Pareto;
  bool certify_measure = false;   ///< cross-check every worst-case measure against its LP
  lp::MilpOptions master = default_master_options();
  std::function<void(const IterationRecord&)> on_iteration;  ///< called after every iteration
  /// Called with every aggregated cut and the decision that generated it.
  std::function<void(const AggregatedCut&, const LocationDecision&)> on_cut;

  static lp::MilpOptions default_master_options() {
    lp::MilpOptions o;
    o.abs_gap = 1e-9;
    o.rel_gap = 1e-9;
    return o;
  }
};

struct DroSolution {
  LocationDecision y;
  double eta = 0.0;             ///< final master bound
  double value = 0.0;           ///< certified worst-case value at y
  std::vector<double> measure;  ///< worst-case measure at y
  Index iterations = 0;
  double seconds = 0.0;
  bool converged = false;
  std::string termination;      ///< "repeated", "gap" or "iteration_limit"
  std::vector<IterationRecord> log;

  double gap() const { return eta - value; }
};

/**
 * Cutting-plane method: alternate between the master problem and the
 * scenario recourse problems, adding one aggregated cut per iteration.
 * Stops when the master returns an already visited decision or when its bound
 * is within rel_tol of the best certified value. Throws SolverError when the
 * reported bound and certified value disagree beyond report_tol.
 */
DroSolution solve_dro(const Instance& instance, const ScenarioSet& scenarios, const AmbiguitySet& ambiguity,
                      const DroOptions& options = {});

/// Worst-case expected recourse at y over the ambiguity set.
double certified_value(const Instance& instance, const LocationDecision& y, const ScenarioSet& scenarios,
                       const AmbiguitySet& ambiguity, Index threads = 1);

/// Per-scenario recourse values at y, evaluated in parallel and returned in scenario order.
std::vector<double> scenario_values(const Instance& instance, const LocationDecision& y,
                                    const ScenarioSet& scenarios, Index threads = 1);

/// Solve log as CSV: a "# seed=" comment line, a header, one row per iteration.
void write_solve_log(std::ostream& out, const DroSolution& sol, std::uint64_t seed, bool timings = true);

struct SweepRow {
  double d = 0.0;
  bool ok = false;
  double objective = 0.0;  ///< certified worst-case value of the returned decision
  std::string fingerprint;
  Index iterations = 0;
  double seconds = 0.0;
  bool converged = false;
  std::string error;       ///< set when the solve threw
};

/// One solve per radius, in grid order. A failing point is recorded and the sweep continues.
std::vector<SweepRow> sweep_d(const Instance& instance, const ScenarioSet& scenarios, std::span<const double> nominal,
                              std::span<const double> grid, const DroOptions& options = {});

/// Columns d,objective,fingerprint,iterations,seconds,converged,error after a "# seed=" line.
void write_sweep_csv(std::ostream& out, const std::vector<SweepRow>& rows, std::uint64_t seed, bool timings = true);

}  // namespace svcloc
