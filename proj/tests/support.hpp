#pragma once

// Random instance builders shared by the test binaries.

#include <algorithm>
#include <cstdint>
#include <numeric>
#include <random>
#include <vector>

#include "svcloc/model.hpp"

namespace testsupport {

using svcloc::Index;

struct RandomSpec {
  Index sites = 4;
  Index candidates = 4;
  Index max_neighborhood = 3;
  Index scenarios = 3;
  double capacity_lo = 10.0;
  double capacity_hi = 80.0;
  double budget = 2.0;
  bool integer_costs = true;
  /// Make utility and demand comonotone within every neighborhood, jointly over scenarios.
  bool consistent = false;
};

struct RandomCase {
  svcloc::Instance instance;
  svcloc::ScenarioSet scenarios;
};

inline RandomCase random_case(std::mt19937_64& rng, const RandomSpec& spec) {
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  svcloc::InstanceData d;
  d.sites = spec.sites;
  d.candidates = spec.candidates;
  d.budget = spec.budget;
  for (Index j = 0; j < spec.candidates; ++j) {
    d.cost.push_back(spec.integer_costs ? static_cast<double>(1 + rng() % 2) : 0.5 + unit(rng));
    d.capacity.push_back(spec.capacity_lo + (spec.capacity_hi - spec.capacity_lo) * unit(rng));
  }
  std::vector<Index> all(spec.candidates);
  std::iota(all.begin(), all.end(), Index{0});
  d.neighborhood.resize(spec.sites);
  for (Index i = 0; i < spec.sites; ++i) {
    std::shuffle(all.begin(), all.end(), rng);
    const Index k = 1 + rng() % std::min(spec.max_neighborhood, spec.candidates);
    d.neighborhood[i].assign(all.begin(), all.begin() + static_cast<long>(k));
    std::sort(d.neighborhood[i].begin(), d.neighborhood[i].end());
    for (Index j : d.neighborhood[i]) d.utility.push_back({i, j, std::round(1.0 + 4.0 * unit(rng))});
  }
  RandomCase out{svcloc::Instance::build(d), {}};
  const auto& inst = out.instance;

  std::vector<std::vector<double>> table(spec.scenarios, std::vector<double>(inst.num_arcs()));
  for (Index w = 0; w < spec.scenarios; ++w)
    for (Index a = 0; a < inst.num_arcs(); ++a) table[w][a] = std::round(5.0 + 45.0 * unit(rng));
  if (spec.consistent) {
    // Re-sort each scenario's demands within a site to follow utility order.
    for (Index i = 0; i < inst.num_sites(); ++i) {
      std::vector<Index> arcs;
      for (Index a = inst.arc_begin(i); a < inst.arc_end(i); ++a) arcs.push_back(a);
      std::sort(arcs.begin(), arcs.end(), [&](Index a, Index b) { return inst.utility(a) < inst.utility(b); });
      for (Index w = 0; w < spec.scenarios; ++w) {
        std::vector<double> vals;
        for (Index a : arcs) vals.push_back(table[w][a]);
        std::sort(vals.begin(), vals.end());
        for (Index k = 0; k < arcs.size(); ++k) table[w][arcs[k]] = vals[k];
        // Equal utilities must carry equal demand to stay comparable in every scenario.
        for (Index k = 1; k < arcs.size(); ++k)
          if (inst.utility(arcs[k]) == inst.utility(arcs[k - 1])) table[w][arcs[k]] = table[w][arcs[k - 1]];
      }
    }
  }
  out.scenarios = svcloc::ScenarioSet(inst.num_arcs(), std::move(table));
  return out;
}

inline svcloc::LocationDecision random_decision(std::mt19937_64& rng, Index candidates) {
  svcloc::LocationDecision y(candidates);
  for (Index j = 0; j < candidates; ++j) y.set(j, rng() % 2 == 0);
  return y;
}

/// Every decision over `candidates` binaries, in mask order.
inline std::vector<svcloc::LocationDecision> all_decisions(Index candidates) {
  std::vector<svcloc::LocationDecision> out;
  for (std::uint64_t mask = 0; mask < (1ULL << candidates); ++mask) {
    svcloc::LocationDecision y(candidates);
    for (Index j = 0; j < candidates; ++j) y.set(j, (mask >> j) & 1ULL);
    out.push_back(std::move(y));
  }
  return out;
}

/// Two sites: F_0 = {0, 1}, F_1 = {1}; u = (5, 3, 5); D = (40, 20, 30); unit costs, B = 1.
inline svcloc::Instance two_site_instance(double capacity = 1000.0) {
  svcloc::InstanceData d;
  d.sites = 2;
  d.candidates = 2;
  d.budget = 1.0;
  d.cost = {1.0, 1.0};
  d.capacity = {capacity, capacity};
  d.neighborhood = {{0, 1}, {1}};
  d.utility = {{0, 0, 5.0}, {0, 1, 3.0}, {1, 1, 5.0}};
  return svcloc::Instance::build(d);
}

}  // namespace testsupport
