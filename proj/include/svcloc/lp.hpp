#pragma once

#include <cmath>
#include <string>
#include <utility>
#include <vector>

#include "svcloc/common.hpp"

namespace svcloc::lp {

enum class Sense { Maximize, Minimize };
enum class RowType { LessEqual, Equal, GreaterEqual };
enum class Status { Optimal, Infeasible, Unbounded, Stalled };

std::string to_string(Status status);

using Term = std::pair<Index, double>;

struct Row {
  std::vector<Term> terms;
  RowType type = RowType::LessEqual;
  double rhs = 0.0;
};

/// A linear program over bounded variables. Bounds may be infinite.
class LinearProgram {
 public:
  explicit LinearProgram(Sense sense = Sense::Maximize) : sense_(sense) {}

  Index add_variable(double objective, double lower = 0.0, double upper = kInfinity);
  Index add_row(std::vector<Term> terms, RowType type, double rhs);

  void set_bounds(Index var, double lower, double upper);
  void set_objective(Index var, double coefficient) { objective_[var] = coefficient; }
  void set_rhs(Index row, double rhs) { rows_[row].rhs = rhs; }

  Sense sense() const { return sense_; }
  Index num_variables() const { return objective_.size(); }
  Index num_rows() const { return rows_.size(); }
  double objective(Index var) const { return objective_[var]; }
  double lower(Index var) const { return lower_[var]; }
  double upper(Index var) const { return upper_[var]; }
  const Row& row(Index r) const { return rows_[r]; }
  const std::vector<Row>& rows() const { return rows_; }

  /// Throws std::invalid_argument on dimension mismatches or non-finite coefficients.
  void check() const;

 private:
  Sense sense_;
  std::vector<double> objective_;
  std::vector<double> lower_;
  std::vector<double> upper_;
  std::vector<Row> rows_;
};

struct Tolerances {
  double feasibility = 1e-8;
  double duality = 1e-7;
  double complementarity = 1e-7;
  double optimality = 1e-9;  ///< reduced-cost threshold for pricing
  double pivot = 1e-9;
  Index max_iterations = 0;   ///< 0 picks a size-based default
  Index degenerate_streak = 50;  ///< switch to Bland's rule after this many degenerate pivots
  Index refactor_interval = 100;
};

/**
 * Solution of an LP.
 *
 * dual[r] is the sensitivity of the optimal objective to rhs of row r, in the
 * problem's own sense: nonnegative on <= rows of a maximization. reduced_cost
 * is c_j - sum_r dual[r] * a_rj; nonzero entries mark variables held at a bound
 * and act as duals of those bounds.
 */
struct LpSolution {
  Status status = Status::Stalled;
  double objective = 0.0;
  std::vector<double> primal;
  std::vector<double> dual;
  std::vector<double> reduced_cost;
  Index iterations = 0;
};

LpSolution solve_lp(const LinearProgram& lp, const Tolerances& tol = {});

/// Residuals of an optimal LP solution.
struct OptimalityReport {
  double primal_residual = 0.0;  ///< worst row or bound violation
  double dual_residual = 0.0;    ///< worst dual sign violation
  double duality_gap = 0.0;      ///< |primal objective - dual objective|
  double complementarity = 0.0;  ///< worst |dual * slack| product
  double dual_objective = 0.0;
  bool ok = false;
};

/// Checks feasibility, dual feasibility, strong duality and complementary slackness.
/// Residuals are scaled by 1 + magnitude of the objective.
OptimalityReport check_optimality(const LinearProgram& lp, const LpSolution& sol, const Tolerances& tol = {});

/// A linear program with a subset of variables restricted to {0, 1}.
struct MixedBinaryProgram {
  LinearProgram lp;
  std::vector<Index> binaries;

  void check() const;
};

struct MilpOptions {
  double abs_gap = 1e-6;
  double rel_gap = 0.0;
  double integrality = 1e-6;
  Index node_limit = 2'000'000;
  Index restart_interval = 1000;  ///< best-bound restart period, in processed nodes
  Tolerances lp;
};

enum class MilpStatus { Optimal, Infeasible, Unbounded, NodeLimit, Stalled };

std::string to_string(MilpStatus status);

struct MilpSolution {
  MilpStatus status = MilpStatus::Infeasible;
  double objective = 0.0;
  double bound = 0.0;  ///< best proven bound on the optimum
  std::vector<double> values;
  Index nodes = 0;
  /// Objective of every new incumbent, in discovery order.
  std::vector<double> incumbent_history;

  double gap() const { return std::abs(bound - objective); }
};

MilpSolution solve_milp(const MixedBinaryProgram& mbp, const MilpOptions& options = {});

}  // namespace svcloc::lp
