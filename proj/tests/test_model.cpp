#include <random>

#include "doctest.h"
#include "support.hpp"
#include "svcloc/lp.hpp"
#include "svcloc/model.hpp"

using namespace svcloc;

namespace {

InstanceData one_site_two_candidates() {
  InstanceData d;
  d.sites = 1;
  d.candidates = 2;
  d.budget = 2.0;
  d.cost = {1.0, 1.0};
  d.capacity = {1000.0, 1000.0};
  d.neighborhood = {{0, 1}};
  d.utility = {{0, 0, 5.0}, {0, 1, 3.0}};
  return d;
}

bool mentions(const ValidationReport& rep, const std::string& text, std::vector<Index> idx) {
  for (const auto& v : rep.violations)
    if (v.what.find(text) != std::string::npos && v.indices == idx) return true;
  return false;
}

}  // namespace

TEST_CASE("validate_instance") {
  SUBCASE("well formed") { CHECK(validate_instance(testsupport::two_site_instance().data()).ok()); }
  SUBCASE("empty neighborhood names the site") {
    auto d = testsupport::two_site_instance().data();
    d.neighborhood[1].clear();
    d.utility.pop_back();
    const auto rep = validate_instance(d);
    CHECK_FALSE(rep.ok());
    CHECK(mentions(rep, "empty neighborhood", {1}));
    CHECK_THROWS_AS(Instance::build(d), SchemaError);
  }
  SUBCASE("utility outside the neighborhood names the pair") {
    auto d = testsupport::two_site_instance().data();
    d.utility.push_back({1, 0, 2.0});
    CHECK(mentions(validate_instance(d), "outside neighborhood", {1, 0}));
  }
  SUBCASE("nonpositive cost and missing utility") {
    auto d = one_site_two_candidates();
    d.cost[1] = 0.0;
    d.utility.pop_back();
    const auto rep = validate_instance(d);
    CHECK(mentions(rep, "open cost", {1}));
    CHECK(mentions(rep, "missing utility", {0, 1}));
  }
}

TEST_CASE("instance arcs and reverse neighborhoods") {
  const auto inst = testsupport::two_site_instance();
  REQUIRE(inst.num_arcs() == 3);
  CHECK(inst.arcs_of_candidate(0).size() == 1);
  CHECK(inst.arcs_of_candidate(1).size() == 2);
  CHECK(inst.find_arc(1, 1).value() == 2);
  CHECK_FALSE(inst.find_arc(1, 0).has_value());
  const auto again = Instance::build(inst.data());
  CHECK(again.utilities().size() == 3);
  CHECK(again.utility(1) == 3.0);
}

TEST_CASE("demand_function follows the maximum attraction rule") {
  const auto inst = Instance::build(one_site_two_candidates());
  const std::vector<double> D{10.0, 20.0};
  CHECK(demand_function(inst, D, 0, LocationDecision(std::vector<std::uint8_t>{0, 0})) == 0.0);
  CHECK(demand_function(inst, D, 0, LocationDecision(std::vector<std::uint8_t>{1, 0})) == 10.0);
  CHECK(demand_function(inst, D, 0, LocationDecision(std::vector<std::uint8_t>{1, 1})) == 20.0);
  CHECK_THROWS_AS(demand_function(inst, D, 3, LocationDecision(2)), std::out_of_range);

  const std::vector<double> tie{20.0, 20.0};
  CHECK(demand_argmax(inst, tie, 0, LocationDecision(std::vector<std::uint8_t>{1, 1})).value() == 0);
}

TEST_CASE("demand_function is monotone and equals its linearization") {
  std::mt19937_64 rng(21);
  for (int trial = 0; trial < 200; ++trial) {
    testsupport::RandomSpec spec;
    spec.sites = 3;
    spec.candidates = 5;
    spec.max_neighborhood = 4;
    spec.scenarios = 1;
    const auto rc = testsupport::random_case(rng, spec);
    const auto& inst = rc.instance;
    const auto D = rc.scenarios.demand(0);
    auto y = testsupport::random_decision(rng, inst.num_candidates());
    auto bigger = y;
    for (Index j = 0; j < inst.num_candidates(); ++j)
      if (rng() % 2) bigger.set(j, true);
    for (Index i = 0; i < inst.num_sites(); ++i) {
      const double v = demand_function(inst, D, i, y);
      CHECK(v <= demand_function(inst, D, i, bigger));

      // max sum_j D_ij q_ij  s.t. q_ij <= y_j, sum q <= 1
      lp::LinearProgram p(lp::Sense::Maximize);
      std::vector<lp::Term> row;
      for (Index a = inst.arc_begin(i); a < inst.arc_end(i); ++a)
        row.emplace_back(p.add_variable(D[a], 0.0, y.is_open(inst.arc_candidate(a)) ? 1.0 : 0.0), 1.0);
      p.add_row(row, lp::RowType::LessEqual, 1.0);
      const auto sol = lp::solve_lp(p);
      REQUIRE(sol.status == lp::Status::Optimal);
      CHECK(sol.objective == doctest::Approx(v).epsilon(1e-12));
    }
  }
}

TEST_CASE("utility_upper_bound") {
  auto d = one_site_two_candidates();
  const auto inst = Instance::build(d);
  CHECK(utility_upper_bound(inst, ScenarioSet(2, {{40.0, 20.0}})) == doctest::Approx(200.0));

  for (auto& e : d.utility) e.value = 0.0;
  CHECK(utility_upper_bound(Instance::build(d), ScenarioSet(2, {{40.0, 20.0}})) == 0.0);

  InstanceData two;
  two.sites = 2;
  two.candidates = 1;
  two.budget = 1.0;
  two.cost = {1.0};
  two.capacity = {1.0};
  two.neighborhood = {{0}, {0}};
  two.utility = {{0, 0, 2.0}, {1, 0, 4.0}};
  // Per-site bounds 2 * 50 and 4 * 25.
  CHECK(utility_upper_bound(Instance::build(two), ScenarioSet(2, {{50.0, 25.0}, {10.0, 5.0}})) ==
        doctest::Approx(200.0));
}

TEST_CASE("location decisions") {
  const auto inst = testsupport::two_site_instance();
  const std::vector<Index> open{1};
  const auto y = LocationDecision::from_open_list(2, open);
  CHECK(y.fingerprint() == "1");
  CHECK(y.cost(inst) == 1.0);
  CHECK(y.budget_feasible(inst));
  CHECK_FALSE(LocationDecision(std::vector<std::uint8_t>{1, 1}).budget_feasible(inst));
}

TEST_CASE("scenario and ambiguity checks") {
  CHECK_THROWS_AS(ScenarioSet(3, {{1.0, 2.0}}), SchemaError);
  CHECK_THROWS_AS(ScenarioSet(2, {{1.0, -2.0}}), SchemaError);
  auto amb = AmbiguitySet::uniform(4, 0.2);
  CHECK_NOTHROW(amb.check(4));
  CHECK_THROWS_AS(amb.check(3), SchemaError);
  amb.radius = -0.1;
  CHECK_THROWS_AS(amb.check(4), SchemaError);
}
