#include "svcloc/static_models.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "svcloc/dro.hpp"

namespace svcloc {

DdslSolution solve_ddsl(const Instance& inst, std::span<const double> demand, const lp::MilpOptions& options) {
  if (demand.size() != inst.num_arcs()) throw SchemaError("demand does not cover the instance support");
  const Index m = inst.num_candidates();
  lp::MixedBinaryProgram mbp;
  mbp.lp = lp::LinearProgram(lp::Sense::Maximize);
  auto& p = mbp.lp;

  std::vector<lp::Term> budget;
  for (Index j = 0; j < m; ++j) {
    mbp.binaries.push_back(p.add_variable(0.0, 0.0, 1.0));
    budget.emplace_back(j, inst.open_cost(j));
  }
  p.add_row(std::move(budget), lp::RowType::LessEqual, inst.budget());

  std::vector<Index> x(inst.num_arcs()), q(inst.num_arcs());
  for (Index a = 0; a < inst.num_arcs(); ++a) {
    x[a] = p.add_variable(inst.utility(a));
    q[a] = p.add_variable(0.0, 0.0, 1.0);
  }
  for (Index j = 0; j < m; ++j) {
    const auto arcs = inst.arcs_of_candidate(j);
    if (arcs.empty()) continue;
    // Capacity beyond the largest demand that can reach j only weakens the relaxation.
    double reach = 0.0;
    for (Index a : arcs) {
      const Index i = inst.arc_site(a);
      double top = 0.0;
      for (Index b = inst.arc_begin(i); b < inst.arc_end(i); ++b) top = std::max(top, demand[b]);
      reach += top;
    }
    std::vector<lp::Term> row{{j, -std::min(inst.capacity(j), reach)}};
    for (Index a : arcs) row.emplace_back(x[a], 1.0);
    p.add_row(std::move(row), lp::RowType::LessEqual, 0.0);
  }
  for (Index i = 0; i < inst.num_sites(); ++i) {
    std::vector<lp::Term> dem, sum;
    for (Index a = inst.arc_begin(i); a < inst.arc_end(i); ++a) {
      dem.emplace_back(x[a], 1.0);
      dem.emplace_back(q[a], -demand[a]);
      sum.emplace_back(q[a], 1.0);
      p.add_row({{q[a], 1.0}, {inst.arc_candidate(a), -1.0}}, lp::RowType::LessEqual, 0.0);
    }
    p.add_row(std::move(dem), lp::RowType::LessEqual, 0.0);
    p.add_row(std::move(sum), lp::RowType::LessEqual, 1.0);
  }

  const auto sol = lp::solve_milp(mbp, options);
  if (sol.status != lp::MilpStatus::Optimal)
    throw SolverError("deterministic model ended with status " + lp::to_string(sol.status));
  DdslSolution out;
  out.y = LocationDecision(m);
  for (Index j = 0; j < m; ++j) out.y.set(j, sol.values[j] > 0.5);
  // Report the exact second stage of the chosen y, with every covered site
  // claiming its largest opened demand.
  const RecourseSolution exact = evaluate_recourse(inst, out.y, demand);
  out.allocation = exact.allocation;
  for (Index i = 0; i < inst.num_sites(); ++i) {
    const auto top = demand_argmax(inst, demand, i, out.y);
    for (Index a = inst.arc_begin(i); a < inst.arc_end(i); ++a) out.allocation.q[a] = top && a == *top ? 1.0 : 0.0;
  }
  out.objective = exact.value;
  out.nodes = sol.nodes;
  return out;
}

ConsistencyCertificate check_consistency(const Instance& inst, const ScenarioSet& scenarios) {
  const Index W = scenarios.size();
  ConsistencyCertificate cert;
  cert.strong = true;
  cert.per_scenario.assign(W, true);

  auto dominates = [&](Index a, Index b) {
    if (inst.utility(a) < inst.utility(b)) return false;
    for (Index w = 0; w < W; ++w)
      if (scenarios.demand(w)[a] < scenarios.demand(w)[b]) return false;
    return true;
  };

  for (Index i = 0; i < inst.num_sites(); ++i)
    for (Index a = inst.arc_begin(i); a < inst.arc_end(i); ++a)
      for (Index b = a + 1; b < inst.arc_end(i); ++b) {
        for (Index w = 0; w < W; ++w) {
          const auto D = scenarios.demand(w);
          const bool ab = inst.utility(a) >= inst.utility(b) && D[a] >= D[b];
          const bool ba = inst.utility(b) >= inst.utility(a) && D[b] >= D[a];
          if (!ab && !ba) cert.per_scenario[w] = false;
        }
        if (dominates(a, b) || dominates(b, a)) continue;
        if (cert.strong) {
          // A scenario whose demand order contradicts a's claim to dominate b.
          Index bad = 0;
          const bool a_ahead = inst.utility(a) >= inst.utility(b);
          const Index lead = a_ahead ? a : b, trail = a_ahead ? b : a;
          for (Index w = 0; w < W; ++w)
            if (scenarios.demand(w)[lead] < scenarios.demand(w)[trail]) {
              bad = w;
              break;
            }
          cert.witness = ConsistencyWitness{i, inst.arc_candidate(a), inst.arc_candidate(b), bad};
        }
        cert.strong = false;
      }

  if (cert.strong) {
    cert.order.resize(inst.num_sites());
    for (Index i = 0; i < inst.num_sites(); ++i) {
      std::vector<Index> arcs(inst.arc_end(i) - inst.arc_begin(i));
      std::iota(arcs.begin(), arcs.end(), inst.arc_begin(i));
      // Dominance is a total preorder here, so any dominance-compatible sort works.
      std::stable_sort(arcs.begin(), arcs.end(), [&](Index a, Index b) { return dominates(a, b) && !dominates(b, a); });
      for (Index a : arcs) cert.order[i].push_back(inst.arc_candidate(a));
    }
  }
  return cert;
}

StaticSolution solve_uncap_reformulation(const Instance& inst, const ScenarioSet& scenarios,
                                         const AmbiguitySet& ambiguity, const lp::MilpOptions& options) {
  ambiguity.check(scenarios.size());
  if (!check_consistency(inst, scenarios).strong)
    throw SchemaError("uncapacitated reformulation requires strongly consistent utilities and demand");

  const Index m = inst.num_candidates(), W = scenarios.size();
  lp::MixedBinaryProgram mbp;
  mbp.lp = lp::LinearProgram(lp::Sense::Maximize);
  auto& p = mbp.lp;

  std::vector<lp::Term> budget;
  for (Index j = 0; j < m; ++j) {
    mbp.binaries.push_back(p.add_variable(0.0, 0.0, 1.0));
    budget.emplace_back(j, inst.open_cost(j));
  }
  p.add_row(std::move(budget), lp::RowType::LessEqual, inst.budget());

  std::vector<Index> s(inst.num_arcs());
  for (Index a = 0; a < inst.num_arcs(); ++a) s[a] = p.add_variable(0.0, 0.0, 1.0);
  const Index lambda = p.add_variable(-ambiguity.radius);
  const Index gamma = p.add_variable(1.0, -kInfinity, kInfinity);
  std::vector<Index> alpha(W), beta(W);
  for (Index w = 0; w < W; ++w) {
    alpha[w] = p.add_variable(-ambiguity.nominal[w]);
    beta[w] = p.add_variable(ambiguity.nominal[w]);
  }

  for (Index w = 0; w < W; ++w) {
    const auto D = scenarios.demand(w);
    std::vector<lp::Term> row;
    for (Index a = 0; a < inst.num_arcs(); ++a)
      if (inst.utility(a) * D[a] != 0.0) row.emplace_back(s[a], inst.utility(a) * D[a]);
    row.emplace_back(alpha[w], 1.0);
    row.emplace_back(beta[w], -1.0);
    row.emplace_back(gamma, -1.0);
    p.add_row(std::move(row), lp::RowType::GreaterEqual, 0.0);
    p.add_row({{lambda, 1.0}, {alpha[w], -1.0}, {beta[w], -1.0}}, lp::RowType::GreaterEqual, 0.0);
  }
  for (Index i = 0; i < inst.num_sites(); ++i) {
    std::vector<lp::Term> sum;
    for (Index a = inst.arc_begin(i); a < inst.arc_end(i); ++a) {
      p.add_row({{s[a], 1.0}, {inst.arc_candidate(a), -1.0}}, lp::RowType::LessEqual, 0.0);
      sum.emplace_back(s[a], 1.0);
    }
    p.add_row(std::move(sum), lp::RowType::LessEqual, 1.0);
  }

  const auto sol = lp::solve_milp(mbp, options);
  if (sol.status != lp::MilpStatus::Optimal)
    throw SolverError("uncapacitated reformulation ended with status " + lp::to_string(sol.status));
  StaticSolution out;
  out.y = LocationDecision(m);
  for (Index j = 0; j < m; ++j) out.y.set(j, sol.values[j] > 0.5);
  out.objective = sol.objective;
  out.nodes = sol.nodes;
  return out;
}

std::vector<LocationDecision> enumerate_feasible(const Instance& inst, Index limit) {
  const Index m = inst.num_candidates();
  std::vector<LocationDecision> out;
  LocationDecision y(m);
  // Depth-first over candidates, closing before opening, pruned by budget.
  auto visit = [&](auto&& self, Index j, double spent) -> void {
    if (j == m) {
      if (out.size() >= limit) throw SchemaError("more than " + std::to_string(limit) + " budget-feasible decisions");
      out.push_back(y);
      return;
    }
    self(self, j + 1, spent);
    if (spent + inst.open_cost(j) <= inst.budget() + 1e-9) {
      y.set(j, true);
      self(self, j + 1, spent + inst.open_cost(j));
      y.set(j, false);
    }
  };
  visit(visit, 0, 0.0);
  return out;
}

StaticSolution brute_force_dro(const Instance& inst, const ScenarioSet& scenarios, const AmbiguitySet& ambiguity,
                               Index threads) {
  ambiguity.check(scenarios.size());
  const auto ys = enumerate_feasible(inst);
  std::vector<double> value(ys.size());
  parallel_for(ys.size(), threads, [&](Index k) { value[k] = certified_value(inst, ys[k], scenarios, ambiguity); });
  StaticSolution out;
  Index best = 0;
  for (Index k = 1; k < ys.size(); ++k)
    if (value[k] > value[best]) best = k;
  out.y = ys[best];
  out.objective = value[best];
  out.nodes = ys.size();
  return out;
}

Instance with_capacity(const Instance& instance, double capacity) {
  auto d = instance.data();
  std::fill(d.capacity.begin(), d.capacity.end(), capacity);
  return Instance::build(d);
}

}  // namespace svcloc
