#include "svcloc/model.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <numeric>
#include <sstream>

namespace svcloc {

std::string ValidationReport::to_string() const {
  std::ostringstream out;
  for (const auto& v : violations) {
    out << v.what;
    if (!v.indices.empty()) {
      out << " (";
      for (Index k = 0; k < v.indices.size(); ++k) out << (k ? "," : "") << v.indices[k];
      out << ")";
    }
    out << "\n";
  }
  return out.str();
}

ValidationReport validate_instance(const InstanceData& data) {
  ValidationReport report;
  auto fail = [&](std::string what, std::vector<Index> idx = {}) {
    report.violations.push_back({std::move(what), std::move(idx)});
  };

  if (data.cost.size() != data.candidates) fail("cost length differs from candidate count");
  if (data.capacity.size() != data.candidates) fail("capacity length differs from candidate count");
  if (data.neighborhood.size() != data.sites) fail("neighborhood length differs from site count");
  if (!std::isfinite(data.budget)) fail("budget is not finite");

  for (Index j = 0; j < std::min(data.cost.size(), data.candidates); ++j)
    if (!(data.cost[j] > 0.0) || !std::isfinite(data.cost[j])) fail("open cost must be positive", {j});
  for (Index j = 0; j < std::min(data.capacity.size(), data.candidates); ++j)
    if (!(data.capacity[j] >= 0.0) || std::isnan(data.capacity[j])) fail("capacity must be nonnegative", {j});

  std::vector<std::vector<bool>> member(data.neighborhood.size());
  for (Index i = 0; i < data.neighborhood.size(); ++i) {
    const auto& nb = data.neighborhood[i];
    if (nb.empty()) fail("empty neighborhood at site", {i});
    member[i].assign(data.candidates, false);
    for (Index j : nb) {
      if (j >= data.candidates) {
        fail("neighborhood references unknown candidate", {i, j});
        continue;
      }
      if (member[i][j]) fail("duplicate candidate in neighborhood", {i, j});
      member[i][j] = true;
    }
  }

  std::map<std::pair<Index, Index>, int> seen;
  for (const auto& e : data.utility) {
    if (e.site >= data.sites || e.candidate >= data.candidates) {
      fail("utility entry references unknown site or candidate", {e.site, e.candidate});
      continue;
    }
    if (e.site >= member.size() || !member[e.site][e.candidate]) {
      fail("utility entry outside neighborhood", {e.site, e.candidate});
      continue;
    }
    if (!(e.value >= 0.0) || !std::isfinite(e.value)) fail("utility must be finite and nonnegative", {e.site, e.candidate});
    if (++seen[{e.site, e.candidate}] > 1) fail("duplicate utility entry", {e.site, e.candidate});
  }
  for (Index i = 0; i < data.neighborhood.size(); ++i)
    for (Index j : data.neighborhood[i])
      if (j < data.candidates && !seen.count({i, j})) fail("missing utility for neighborhood pair", {i, j});

  return report;
}

Instance Instance::build(const InstanceData& data) {
  const auto report = validate_instance(data);
  if (!report.ok()) throw SchemaError("invalid instance:\n" + report.to_string());

  Instance inst;
  inst.budget_ = data.budget;
  inst.cost_ = data.cost;
  inst.capacity_ = data.capacity;

  std::map<std::pair<Index, Index>, double> u;
  for (const auto& e : data.utility) u[{e.site, e.candidate}] = e.value;

  inst.arc_begin_.assign(data.sites + 1, 0);
  for (Index i = 0; i < data.sites; ++i) {
    std::vector<Index> nb = data.neighborhood[i];
    std::sort(nb.begin(), nb.end());
    for (Index j : nb) {
      inst.arc_site_.push_back(i);
      inst.arc_candidate_.push_back(j);
      inst.utility_.push_back(u.at({i, j}));
    }
    inst.arc_begin_[i + 1] = inst.arc_candidate_.size();
  }

  inst.reverse_begin_.assign(data.candidates + 1, 0);
  for (Index j : inst.arc_candidate_) ++inst.reverse_begin_[j + 1];
  std::partial_sum(inst.reverse_begin_.begin(), inst.reverse_begin_.end(), inst.reverse_begin_.begin());
  inst.reverse_arcs_.resize(inst.arc_candidate_.size());
  std::vector<Index> fill(inst.reverse_begin_.begin(), inst.reverse_begin_.end() - 1);
  for (Index a = 0; a < inst.arc_candidate_.size(); ++a) inst.reverse_arcs_[fill[inst.arc_candidate_[a]]++] = a;
  return inst;
}

std::optional<Index> Instance::find_arc(Index site, Index candidate) const {
  const auto nb = neighborhood(site);
  const auto it = std::lower_bound(nb.begin(), nb.end(), candidate);
  if (it == nb.end() || *it != candidate) return std::nullopt;
  return arc_begin(site) + static_cast<Index>(it - nb.begin());
}

InstanceData Instance::data() const {
  InstanceData d;
  d.sites = num_sites();
  d.candidates = num_candidates();
  d.budget = budget_;
  d.cost = cost_;
  d.capacity = capacity_;
  d.neighborhood.resize(d.sites);
  for (Index i = 0; i < d.sites; ++i) {
    const auto nb = neighborhood(i);
    d.neighborhood[i].assign(nb.begin(), nb.end());
    for (Index a = arc_begin(i); a < arc_end(i); ++a) d.utility.push_back({i, arc_candidate(a), utility_[a]});
  }
  return d;
}

LocationDecision LocationDecision::from_open_list(Index candidates, std::span<const Index> opened) {
  LocationDecision y(candidates);
  for (Index j : opened) y.set(j, true);
  return y;
}

double LocationDecision::cost(const Instance& instance) const {
  double total = 0.0;
  for (Index j = 0; j < open_.size(); ++j)
    if (open_[j]) total += instance.open_cost(j);
  return total;
}

bool LocationDecision::budget_feasible(const Instance& instance, double tol) const {
  return cost(instance) <= instance.budget() + tol;
}

std::vector<Index> LocationDecision::opened() const {
  std::vector<Index> out;
  for (Index j = 0; j < open_.size(); ++j)
    if (open_[j]) out.push_back(j);
  return out;
}

std::string LocationDecision::fingerprint() const {
  std::string s;
  for (Index j : opened()) {
    if (!s.empty()) s += ' ';
    s += std::to_string(j);
  }
  return s;
}

ScenarioSet::ScenarioSet(Index num_arcs, std::vector<std::vector<double>> demand)
    : num_arcs_(num_arcs), demand_(std::move(demand)) {
  for (Index w = 0; w < demand_.size(); ++w) {
    if (demand_[w].size() != num_arcs_)
      throw SchemaError("scenario " + std::to_string(w) + " does not cover the instance support");
    for (double v : demand_[w])
      if (!(v >= 0.0) || !std::isfinite(v))
        throw SchemaError("scenario " + std::to_string(w) + " has a negative or non-finite demand");
  }
}

AmbiguitySet AmbiguitySet::uniform(Index scenarios, double radius) {
  AmbiguitySet a;
  a.nominal.assign(scenarios, scenarios ? 1.0 / static_cast<double>(scenarios) : 0.0);
  a.radius = radius;
  return a;
}

void AmbiguitySet::check(Index scenarios) const {
  if (nominal.size() != scenarios) throw SchemaError("nominal measure length differs from scenario count");
  if (!(radius >= 0.0) || !std::isfinite(radius)) throw SchemaError("total variation radius must be finite and >= 0");
  double total = 0.0;
  for (double p : nominal) {
    if (!(p >= 0.0)) throw SchemaError("nominal measure has a negative entry");
    total += p;
  }
  if (std::abs(total - 1.0) > 1e-9) throw SchemaError("nominal measure does not sum to one");
}

std::optional<Index> demand_argmax(const Instance& instance, std::span<const double> demand, Index site,
                                   const LocationDecision& y) {
  if (site >= instance.num_sites()) throw std::out_of_range("unknown site " + std::to_string(site));
  std::optional<Index> best;
  for (Index a = instance.arc_begin(site); a < instance.arc_end(site); ++a) {
    if (!y.is_open(instance.arc_candidate(a))) continue;
    if (!best || demand[a] > demand[*best]) best = a;
  }
  return best;
}

double demand_function(const Instance& instance, std::span<const double> demand, Index site,
                       const LocationDecision& y) {
  const auto a = demand_argmax(instance, demand, site, y);
  return a ? demand[*a] : 0.0;
}

double utility_upper_bound(const Instance& instance, const ScenarioSet& scenarios) {
  double total = 0.0;
  for (Index i = 0; i < instance.num_sites(); ++i) {
    double umax = 0.0, dmax = 0.0;
    for (Index a = instance.arc_begin(i); a < instance.arc_end(i); ++a) {
      umax = std::max(umax, instance.utility(a));
      for (Index w = 0; w < scenarios.size(); ++w) dmax = std::max(dmax, scenarios.demand(w)[a]);
    }
    total += umax * dmax;
  }
  return total;
}

}  // namespace svcloc
