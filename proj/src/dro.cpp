#include "svcloc/dro.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <numeric>
#include <ostream>
#include <stdexcept>

namespace svcloc {

namespace {

double dot(std::span<const double> a, std::span<const double> b) {
  double s = 0.0;
  for (Index k = 0; k < a.size(); ++k) s += a[k] * b[k];
  return s;
}

void check_inputs(std::span<const double> Q, const AmbiguitySet& ambiguity) {
  ambiguity.check(Q.size());
  for (double v : Q)
    if (!std::isfinite(v)) throw std::invalid_argument("scenario values must be finite");
}

double seconds_since(std::chrono::steady_clock::time_point start) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
}

}  // namespace

WorstCaseMeasure worst_case_measure(std::span<const double> Q, const AmbiguitySet& ambiguity) {
  check_inputs(Q, ambiguity);
  WorstCaseMeasure res;
  res.mu = ambiguity.nominal;
  if (Q.empty()) return res;

  const Index target = static_cast<Index>(std::min_element(Q.begin(), Q.end()) - Q.begin());
  const double move = std::min(ambiguity.radius / 2.0, 1.0 - ambiguity.nominal[target]);

  std::vector<Index> donors;
  for (Index w = 0; w < Q.size(); ++w)
    if (w != target) donors.push_back(w);
  std::stable_sort(donors.begin(), donors.end(), [&](Index a, Index b) { return Q[a] > Q[b]; });

  double left = move;
  for (Index w : donors) {
    if (left <= 0.0) break;
    const double take = std::min(left, res.mu[w]);
    res.mu[w] -= take;
    left -= take;
  }
  res.mu[target] += move - std::max(left, 0.0);
  res.value = dot(res.mu, Q);
  return res;
}

WorstCaseMeasure worst_case_measure_lp(std::span<const double> Q, const AmbiguitySet& ambiguity) {
  check_inputs(Q, ambiguity);
  const Index n = Q.size();
  lp::LinearProgram p(lp::Sense::Minimize);
  std::vector<Index> mu(n), dev(n);
  for (Index w = 0; w < n; ++w) mu[w] = p.add_variable(Q[w], 0.0, 1.0);
  for (Index w = 0; w < n; ++w) dev[w] = p.add_variable(0.0);
  std::vector<lp::Term> total, budget;
  for (Index w = 0; w < n; ++w) {
    p.add_row({{mu[w], 1.0}, {dev[w], -1.0}}, lp::RowType::LessEqual, ambiguity.nominal[w]);
    p.add_row({{mu[w], -1.0}, {dev[w], -1.0}}, lp::RowType::LessEqual, -ambiguity.nominal[w]);
    total.emplace_back(mu[w], 1.0);
    budget.emplace_back(dev[w], 1.0);
  }
  p.add_row(std::move(total), lp::RowType::Equal, 1.0);
  p.add_row(std::move(budget), lp::RowType::LessEqual, ambiguity.radius);

  const auto sol = lp::solve_lp(p);
  if (sol.status != lp::Status::Optimal)
    throw SolverError("worst-case measure LP ended with status " + lp::to_string(sol.status));
  WorstCaseMeasure res;
  for (Index w = 0; w < n; ++w) res.mu.push_back(sol.primal[mu[w]]);
  res.value = sol.objective;
  return res;
}

AggregatedCut AggregatedCut::combine(std::vector<double> mu, std::vector<ScenarioCut> cuts, Index candidates) {
  AggregatedCut c;
  c.slope.assign(candidates, 0.0);
  for (Index w = 0; w < cuts.size(); ++w) {
    c.constant += mu[w] * cuts[w].r;
    for (Index j = 0; j < candidates; ++j) c.slope[j] += mu[w] * cuts[w].t[j];
  }
  c.mu = std::move(mu);
  c.scenario_cuts = std::move(cuts);
  return c;
}

double AggregatedCut::evaluate(const LocationDecision& y) const {
  double v = constant;
  for (Index j = 0; j < slope.size(); ++j)
    if (y.is_open(j)) v += slope[j];
  return v;
}

MasterResult solve_master(const MasterState& state, const Instance& instance, const lp::MilpOptions& options) {
  const Index m = instance.num_candidates();
  lp::MixedBinaryProgram mbp;
  mbp.lp = lp::LinearProgram(lp::Sense::Maximize);
  std::vector<lp::Term> budget;
  for (Index j = 0; j < m; ++j) {
    mbp.binaries.push_back(mbp.lp.add_variable(0.0, 0.0, 1.0));
    budget.emplace_back(j, instance.open_cost(j));
  }
  const Index eta = mbp.lp.add_variable(1.0, 0.0, state.eta_cap);
  mbp.lp.add_row(std::move(budget), lp::RowType::LessEqual, instance.budget());
  for (const auto& cut : state.cuts) {
    std::vector<lp::Term> row{{eta, 1.0}};
    for (Index j = 0; j < m; ++j)
      if (cut.slope[j] != 0.0) row.emplace_back(j, -cut.slope[j]);
    mbp.lp.add_row(std::move(row), lp::RowType::LessEqual, cut.constant);
  }

  const auto sol = lp::solve_milp(mbp, options);
  if (sol.status != lp::MilpStatus::Optimal)
    throw SolverError("master problem ended with status " + lp::to_string(sol.status));
  MasterResult res;
  res.y = LocationDecision(m);
  for (Index j = 0; j < m; ++j) res.y.set(j, sol.values[j] > 0.5);
  // Exact master value of the rounded decision; the relaxation may have
  // credited eta with binaries that sit within the integrality tolerance.
  res.eta = std::min(sol.objective, state.eta_cap);
  for (const auto& cut : state.cuts) res.eta = std::min(res.eta, cut.evaluate(res.y));
  res.nodes = sol.nodes;
  return res;
}

std::vector<double> scenario_values(const Instance& instance, const LocationDecision& y,
                                    const ScenarioSet& scenarios, Index threads) {
  std::vector<double> Q(scenarios.size());
  parallel_for(scenarios.size(), threads,
               [&](Index w) { Q[w] = evaluate_recourse(instance, y, scenarios.demand(w)).value; });
  return Q;
}

double certified_value(const Instance& instance, const LocationDecision& y, const ScenarioSet& scenarios,
                       const AmbiguitySet& ambiguity, Index threads) {
  return worst_case_measure(scenario_values(instance, y, scenarios, threads), ambiguity).value;
}

DroSolution solve_dro(const Instance& instance, const ScenarioSet& scenarios, const AmbiguitySet& ambiguity,
                      const DroOptions& options) {
  ambiguity.check(scenarios.size());
  if (scenarios.size() == 0) throw SchemaError("scenario set is empty");
  if (scenarios.num_arcs() != instance.num_arcs()) throw SchemaError("scenario set does not match the instance");

  const auto start = std::chrono::steady_clock::now();
  const Index S = scenarios.size();
  MasterState state;
  state.eta_cap = utility_upper_bound(instance, scenarios);

  DroSolution out;
  double best = -kInfinity;
  std::vector<double> best_measure;
  bool done = false;

  while (!done && state.iteration < options.max_iterations) {
    const auto iter_start = std::chrono::steady_clock::now();
    ++state.iteration;
    const MasterResult master = solve_master(state, instance, options.master);
    out.eta = master.eta;

    IterationRecord rec;
    rec.master_seconds = seconds_since(iter_start);
    rec.n = state.iteration;
    rec.eta = master.eta;
    rec.master_nodes = master.nodes;
    rec.fingerprint = master.y.fingerprint();

    if (state.visited.count(master.y)) {
      out.termination = "repeated";
      done = true;
      rec.certified = kInfinity;
      for (const auto& r : out.log)
        if (r.fingerprint == rec.fingerprint) rec.certified = r.certified;
    } else {
      std::vector<RecourseSolution> sols(S);
      parallel_for(S, options.threads, [&](Index w) {
        sols[w] = evaluate_recourse(instance, master.y, scenarios.demand(w), options.duals);
      });
      std::vector<double> Q(S);
      std::vector<ScenarioCut> cuts(S);
      for (Index w = 0; w < S; ++w) {
        Q[w] = sols[w].value;
        cuts[w] = cut_coefficients(sols[w], instance);
      }
      const WorstCaseMeasure wc = worst_case_measure(Q, ambiguity);
      if (options.certify_measure) {
        const double check = worst_case_measure_lp(Q, ambiguity).value;
        if (std::abs(check - wc.value) > 1e-9 * (1.0 + std::abs(check)))
          throw SolverError("worst-case measure disagrees with its linear program");
      }
      rec.certified = wc.value;
      if (wc.value > best) {
        best = wc.value;
        out.y = master.y;
        best_measure = wc.mu;
      }
      state.cuts.push_back(AggregatedCut::combine(wc.mu, std::move(cuts), instance.num_candidates()));
      if (options.on_cut) options.on_cut(state.cuts.back(), master.y);
      state.visited.insert(master.y);
    }

    rec.best_certified = best;
    rec.gap = master.eta - best;
    rec.solset_size = state.visited.size();
    if (!done && rec.gap <= options.rel_tol * (1.0 + std::abs(master.eta))) {
      out.termination = "gap";
      done = true;
    }
    rec.seconds = seconds_since(iter_start);
    if (options.on_iteration) options.on_iteration(rec);
    out.log.push_back(std::move(rec));
  }

  out.iterations = state.iteration;
  out.converged = done;
  if (!done) out.termination = "iteration_limit";
  out.value = best;
  out.measure = std::move(best_measure);
  out.seconds = seconds_since(start);
  if (out.converged && std::abs(out.eta - out.value) > options.report_tol * (1.0 + std::abs(out.eta)))
    throw SolverError("master bound " + std::to_string(out.eta) + " and certified value " +
                      std::to_string(out.value) + " disagree at termination");
  return out;
}

void write_solve_log(std::ostream& out, const DroSolution& sol, std::uint64_t seed, bool timings) {
  out << "# seed=" << seed << "\n";
  out << "n,eta,certified,gap,seconds,solset_size,master_nodes,opened\n";
  out.precision(12);
  for (const auto& r : sol.log) {
    out << r.n << ',' << r.eta << ',' << r.certified << ',' << r.gap << ',' << (timings ? r.seconds : 0.0) << ','
        << r.solset_size << ',' << r.master_nodes << ",\"" << r.fingerprint << "\"\n";
  }
}

std::vector<SweepRow> sweep_d(const Instance& instance, const ScenarioSet& scenarios, std::span<const double> nominal,
                              std::span<const double> grid, const DroOptions& options) {
  if (grid.empty()) throw SchemaError("radius grid is empty");
  if (!std::is_sorted(grid.begin(), grid.end())) throw SchemaError("radius grid must be sorted");
  std::vector<SweepRow> rows;
  for (double d : grid) {
    SweepRow row;
    row.d = d;
    try {
      AmbiguitySet amb{std::vector<double>(nominal.begin(), nominal.end()), d};
      const auto sol = solve_dro(instance, scenarios, amb, options);
      row.ok = true;
      row.objective = sol.value;
      row.fingerprint = sol.y.fingerprint();
      row.iterations = sol.iterations;
      row.seconds = sol.seconds;
      row.converged = sol.converged;
    } catch (const std::exception& e) {
      row.error = e.what();
    }
    rows.push_back(std::move(row));
  }
  return rows;
}

void write_sweep_csv(std::ostream& out, const std::vector<SweepRow>& rows, std::uint64_t seed, bool timings) {
  out << "# seed=" << seed << "\n";
  out << "d,objective,fingerprint,iterations,seconds,converged,error\n";
  out.precision(12);
  for (const auto& r : rows) {
    std::string err = r.error;
    std::replace(err.begin(), err.end(), '"', '\'');
    out << r.d << ',';
    if (r.ok) out << r.objective;
    out << ",\"" << r.fingerprint << "\"," << r.iterations << ',' << (timings ? r.seconds : 0.0) << ','
        << (r.converged ? 1 : 0) << ",\"" << err << "\"\n";
  }
}

}  // namespace svcloc
