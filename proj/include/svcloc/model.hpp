#pragma once

#include <compare>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "svcloc/common.hpp"

namespace svcloc {

/// One utility entry as it appears in external files: (site, candidate, u).
struct UtilityEntry {
  Index site = 0;
  Index candidate = 0;
  double value = 0.0;
};

/**
 * Raw instance data, shaped like the instance JSON file.
 *
 * Nothing is checked here; validate_instance() reports problems and
 * Instance::build() refuses data that does not pass.
 */
struct InstanceData {
  Index sites = 0;
  Index candidates = 0;
  double budget = 0.0;
  std::vector<double> cost;
  std::vector<double> capacity;
  std::vector<std::vector<Index>> neighborhood;
  std::vector<UtilityEntry> utility;
};

struct Violation {
  std::string what;
  std::vector<Index> indices;
};

struct ValidationReport {
  std::vector<Violation> violations;

  bool ok() const { return violations.empty(); }
  std::string to_string() const;
};

ValidationReport validate_instance(const InstanceData& data);

/**
 * Immutable, validated location instance.
 *
 * Every admissible (site, candidate) pair is an "arc" with a dense id. Arcs of
 * site i are contiguous, ordered by candidate index, so demand tables and
 * allocations are plain vectors indexed by arc.
 */
class Instance {
 public:
  Instance() = default;

  /// Throws SchemaError carrying the validation report when data is invalid.
  static Instance build(const InstanceData& data);

  Index num_sites() const { return arc_begin_.empty() ? 0 : arc_begin_.size() - 1; }
  Index num_candidates() const { return cost_.size(); }
  Index num_arcs() const { return arc_candidate_.size(); }

  double budget() const { return budget_; }
  double open_cost(Index j) const { return cost_[j]; }
  double capacity(Index j) const { return capacity_[j]; }
  std::span<const double> open_costs() const { return cost_; }
  std::span<const double> capacities() const { return capacity_; }

  Index arc_begin(Index site) const { return arc_begin_[site]; }
  Index arc_end(Index site) const { return arc_begin_[site + 1]; }
  Index arc_site(Index arc) const { return arc_site_[arc]; }
  Index arc_candidate(Index arc) const { return arc_candidate_[arc]; }
  double utility(Index arc) const { return utility_[arc]; }
  std::span<const double> utilities() const { return utility_; }

  /// Candidates of site i (sorted ascending).
  std::span<const Index> neighborhood(Index site) const {
    return {arc_candidate_.data() + arc_begin_[site], arc_end(site) - arc_begin_[site]};
  }

  /// Arcs whose candidate is j, i.e. the sites i with j in their neighborhood.
  std::span<const Index> arcs_of_candidate(Index j) const {
    return {reverse_arcs_.data() + reverse_begin_[j], reverse_begin_[j + 1] - reverse_begin_[j]};
  }

  std::optional<Index> find_arc(Index site, Index candidate) const;

  /// Round-trips to the external data layout.
  InstanceData data() const;

 private:
  double budget_ = 0.0;
  std::vector<double> cost_;
  std::vector<double> capacity_;
  std::vector<Index> arc_begin_;
  std::vector<Index> arc_site_;
  std::vector<Index> arc_candidate_;
  std::vector<double> utility_;
  std::vector<Index> reverse_begin_;
  std::vector<Index> reverse_arcs_;
};

/// First-stage decision: which candidates are opened.
class LocationDecision {
 public:
  LocationDecision() = default;
  explicit LocationDecision(Index candidates) : open_(candidates, 0) {}
  explicit LocationDecision(std::vector<std::uint8_t> open) : open_(std::move(open)) {}

  static LocationDecision from_open_list(Index candidates, std::span<const Index> opened);

  Index size() const { return open_.size(); }
  bool is_open(Index j) const { return open_[j] != 0; }
  void set(Index j, bool value) { open_[j] = value ? 1 : 0; }
  const std::vector<std::uint8_t>& bits() const { return open_; }

  double cost(const Instance& instance) const;
  bool budget_feasible(const Instance& instance, double tol = 1e-9) const;
  /// Sorted list of opened candidates.
  std::vector<Index> opened() const;
  std::string fingerprint() const;

  auto operator<=>(const LocationDecision&) const = default;

 private:
  std::vector<std::uint8_t> open_;
};

/// Second-stage allocation over arcs: flows x and selection weights q.
struct Allocation {
  std::vector<double> x;
  std::vector<double> q;
};

/// Finite demand support; scenario w is a demand value per arc.
class ScenarioSet {
 public:
  ScenarioSet() = default;
  ScenarioSet(Index num_arcs, std::vector<std::vector<double>> demand);

  Index size() const { return demand_.size(); }
  Index num_arcs() const { return num_arcs_; }
  std::span<const double> demand(Index scenario) const { return demand_[scenario]; }
  const std::vector<std::vector<double>>& table() const { return demand_; }

 private:
  Index num_arcs_ = 0;
  std::vector<std::vector<double>> demand_;
};

/// Total-variation ball around a nominal measure.
struct AmbiguitySet {
  std::vector<double> nominal;
  double radius = 0.0;

  static AmbiguitySet uniform(Index scenarios, double radius);
  /// Throws SchemaError if the nominal measure is not a distribution or d < 0.
  void check(Index scenarios) const;
};

/**
 * Site demand under the maximum attraction rule: the largest D_ij over opened
 * candidates j in the neighborhood, 0 when none is open.
 */
double demand_function(const Instance& instance, std::span<const double> demand, Index site,
                       const LocationDecision& y);

/// Arc achieving demand_function (smallest candidate on ties), if any is open.
std::optional<Index> demand_argmax(const Instance& instance, std::span<const double> demand,
                                   Index site, const LocationDecision& y);

/// Sum over sites of (max utility) * (max demand over scenarios); bounds every Q(y, D).
double utility_upper_bound(const Instance& instance, const ScenarioSet& scenarios);

}  // namespace svcloc
