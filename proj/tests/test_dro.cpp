#include <array>
#include <random>
#include <sstream>

#include "doctest.h"
#include "support.hpp"
#include "svcloc/dro.hpp"
#include "svcloc/static_models.hpp"

using namespace svcloc;

TEST_CASE("worst-case measure examples") {
  const std::vector<double> Q{10.0, 20.0, 30.0};
  SUBCASE("zero radius keeps the nominal measure") {
    const auto wc = worst_case_measure(Q, AmbiguitySet::uniform(3, 0.0));
    for (double p : wc.mu) CHECK(p == doctest::Approx(1.0 / 3.0));
    CHECK(wc.value == doctest::Approx(20.0));
  }
  SUBCASE("radius 0.2") {
    const auto wc = worst_case_measure(Q, AmbiguitySet::uniform(3, 0.2));
    CHECK(wc.mu[0] == doctest::Approx(1.0 / 3.0 + 0.1));
    CHECK(wc.mu[1] == doctest::Approx(1.0 / 3.0));
    CHECK(wc.mu[2] == doctest::Approx(1.0 / 3.0 - 0.1));
    CHECK(wc.value == doctest::Approx(18.0));
    CHECK(worst_case_measure_lp(Q, AmbiguitySet::uniform(3, 0.2)).value == doctest::Approx(18.0));
  }
  SUBCASE("radius 2 moves everything") {
    const auto wc = worst_case_measure(Q, AmbiguitySet::uniform(3, 2.0));
    CHECK(wc.mu[0] == doctest::Approx(1.0));
    CHECK(wc.value == doctest::Approx(10.0));
    CHECK(worst_case_measure_lp(Q, AmbiguitySet::uniform(3, 2.0)).value == doctest::Approx(10.0));
  }
  SUBCASE("negative radius is rejected") {
    CHECK_THROWS_AS(worst_case_measure(Q, AmbiguitySet::uniform(3, -0.1)), SchemaError);
  }
}

TEST_CASE("greedy worst-case measure equals its linear program") {
  std::mt19937_64 rng(17);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (int trial = 0; trial < 400; ++trial) {
    const Index n = 1 + rng() % 12;
    std::vector<double> Q(n);
    for (auto& v : Q) v = trial % 4 == 0 ? std::round(5.0 * u(rng)) : 100.0 * u(rng);
    AmbiguitySet amb;
    double total = 0.0;
    for (Index w = 0; w < n; ++w) {
      amb.nominal.push_back(trial % 5 == 0 && w % 2 ? 0.0 : u(rng) + 0.01);
      total += amb.nominal.back();
    }
    for (auto& p : amb.nominal) p /= total;
    amb.radius = 2.2 * u(rng);
    const auto g = worst_case_measure(Q, amb);
    const auto l = worst_case_measure_lp(Q, amb);
    CHECK(std::abs(g.value - l.value) <= 1e-9 * (1.0 + std::abs(l.value)));
    double tv = 0.0, mass = 0.0;
    for (Index w = 0; w < n; ++w) {
      CHECK(g.mu[w] >= 0.0);
      tv += std::abs(g.mu[w] - amb.nominal[w]);
      mass += g.mu[w];
    }
    CHECK(mass == doctest::Approx(1.0));
    CHECK(tv <= amb.radius + 1e-9);
  }
}

TEST_CASE("master problem examples") {
  InstanceData d;
  d.sites = 1;
  d.candidates = 1;
  d.budget = 1.0;
  d.cost = {1.0};
  d.capacity = {10.0};
  d.neighborhood = {{0}};
  d.utility = {{0, 0, 1.0}};
  const auto inst = Instance::build(d);

  MasterState state;
  state.eta_cap = 1000.0;
  CHECK(solve_master(state, inst).eta == doctest::Approx(1000.0));

  AggregatedCut cut;
  cut.constant = 5.0;
  cut.slope = {3.0};
  state.cuts.push_back(cut);
  const auto r = solve_master(state, inst);
  CHECK(r.eta == doctest::Approx(8.0));
  CHECK(r.y.is_open(0));

  AggregatedCut zero;
  zero.constant = 0.0;
  zero.slope = {0.0};
  state.cuts.push_back(zero);
  CHECK(solve_master(state, inst).eta == doctest::Approx(0.0));
}

TEST_CASE("cutting-plane method on the two-site instance") {
  const auto inst = testsupport::two_site_instance();
  const ScenarioSet scen(3, {{40.0, 20.0, 30.0}});
  for (double d : {0.0, 0.2, 1.0}) {
    DroOptions opt;
    opt.certify_measure = true;
    const auto sol = solve_dro(inst, scen, AmbiguitySet::uniform(1, d), opt);
    CHECK(sol.converged);
    CHECK(sol.y.fingerprint() == "1");
    CHECK(sol.value == doctest::Approx(210.0));
    CHECK(sol.eta == doctest::Approx(210.0));
  }
}

TEST_CASE("certified value examples") {
  const auto inst = testsupport::two_site_instance();
  const ScenarioSet one(3, {{40.0, 20.0, 30.0}});
  CHECK(certified_value(inst, LocationDecision(2), one, AmbiguitySet::uniform(1, 0.3)) == 0.0);
  const LocationDecision y(std::vector<std::uint8_t>{0, 1});
  CHECK(certified_value(inst, y, one, AmbiguitySet::uniform(1, 0.3)) == doctest::Approx(210.0));
  // Scale demand so Q = (10, 20, 30) at y = {1}: site 0 draws 3*D01, site 1 draws 5*D11.
  const ScenarioSet three(3, {{0.0, 0.0, 2.0}, {0.0, 0.0, 4.0}, {0.0, 0.0, 6.0}});
  CHECK(certified_value(inst, y, three, AmbiguitySet::uniform(3, 0.2)) == doctest::Approx(18.0));
}

TEST_CASE("cutting-plane method matches exhaustive search") {
  std::mt19937_64 rng(2024);
  for (int trial = 0; trial < 40; ++trial) {
    testsupport::RandomSpec spec;
    spec.sites = 3 + rng() % 5;
    spec.candidates = 3 + rng() % 6;
    spec.max_neighborhood = 4;
    spec.scenarios = 1 + rng() % 6;
    spec.budget = static_cast<double>(1 + rng() % 4);
    const auto rc = testsupport::random_case(rng, spec);
    const double d = (trial % 5) * 0.1;
    const auto amb = AmbiguitySet::uniform(spec.scenarios, d);
    DroOptions opt;
    opt.threads = 1;
    opt.duals = std::array{DualSelection::Pareto, DualSelection::Raw, DualSelection::Canonical}[trial % 3];
    const auto sol = solve_dro(rc.instance, rc.scenarios, amb, opt);
    const auto bf = brute_force_dro(rc.instance, rc.scenarios, amb);
    INFO("trial " << trial);
    CHECK(sol.converged);
    CHECK(sol.value == doctest::Approx(bf.objective).epsilon(1e-7));
    CHECK(sol.y.budget_feasible(rc.instance));
    CHECK(sol.iterations <= 30);

    // The master bound never increases and every cut dominates the value it aggregates.
    for (Index k = 1; k < sol.log.size(); ++k) CHECK(sol.log[k].eta <= sol.log[k - 1].eta + 1e-7);
  }
}

TEST_CASE("aggregated cuts are valid against the fixed-measure expectation") {
  std::mt19937_64 rng(8);
  testsupport::RandomSpec spec;
  spec.sites = 5;
  spec.candidates = 6;
  spec.scenarios = 4;
  spec.budget = 3.0;
  const auto rc = testsupport::random_case(rng, spec);
  const auto amb = AmbiguitySet::uniform(4, 0.3);
  const auto y0 = testsupport::random_decision(rng, 6);
  std::vector<ScenarioCut> cuts;
  std::vector<double> Q;
  for (Index w = 0; w < 4; ++w) {
    const auto s = evaluate_recourse(rc.instance, y0, rc.scenarios.demand(w));
    Q.push_back(s.value);
    cuts.push_back(cut_coefficients(s, rc.instance));
  }
  const auto wc = worst_case_measure(Q, amb);
  const auto agg = AggregatedCut::combine(wc.mu, cuts, 6);
  CHECK(agg.evaluate(y0) == doctest::Approx(wc.value));
  for (const auto& y : testsupport::all_decisions(6)) {
    const auto q = scenario_values(rc.instance, y, rc.scenarios);
    double fixed = 0.0;
    for (Index w = 0; w < 4; ++w) fixed += wc.mu[w] * q[w];
    CHECK(agg.evaluate(y) >= fixed - 1e-6);
  }
}

TEST_CASE("special cases of the cutting-plane method") {
  std::mt19937_64 rng(31);
  for (int trial = 0; trial < 15; ++trial) {
    testsupport::RandomSpec spec;
    spec.sites = 5;
    spec.candidates = 6;
    spec.scenarios = 1;
    spec.budget = 3.0;
    const auto single = testsupport::random_case(rng, spec);
    // One scenario: the deterministic model, whatever the radius.
    const auto dro1 = solve_dro(single.instance, single.scenarios, AmbiguitySet::uniform(1, 0.7));
    const auto ddsl = solve_ddsl(single.instance, single.scenarios.demand(0));
    CHECK(dro1.value == doctest::Approx(ddsl.objective).epsilon(1e-7));

    // Zero radius: the sample average over all decisions.
    spec.scenarios = 4;
    const auto multi = testsupport::random_case(rng, spec);
    double best = 0.0;
    for (const auto& y : enumerate_feasible(multi.instance)) {
      const auto q = scenario_values(multi.instance, y, multi.scenarios);
      best = std::max(best, (q[0] + q[1] + q[2] + q[3]) / 4.0);
    }
    const auto dro0 = solve_dro(multi.instance, multi.scenarios, AmbiguitySet::uniform(4, 0.0));
    CHECK(dro0.value == doctest::Approx(best).epsilon(1e-7));
  }
}

TEST_CASE("solve log format") {
  const auto inst = testsupport::two_site_instance();
  const ScenarioSet scen(3, {{40.0, 20.0, 30.0}});
  const auto sol = solve_dro(inst, scen, AmbiguitySet::uniform(1, 0.2));
  std::ostringstream a, b;
  write_solve_log(a, sol, 7, false);
  write_solve_log(b, solve_dro(inst, scen, AmbiguitySet::uniform(1, 0.2)), 7, false);
  CHECK(a.str() == b.str());
  CHECK(a.str().rfind("# seed=7\nn,eta,certified,gap,seconds,solset_size", 0) == 0);
}

TEST_CASE("radius sweep is monotone and matches exhaustive search") {
  std::mt19937_64 rng(77);
  std::vector<double> grid;
  for (int k = 0; k <= 8; ++k) grid.push_back(0.05 * k);
  for (int trial = 0; trial < 10; ++trial) {
    testsupport::RandomSpec spec;
    spec.sites = 5;
    spec.candidates = 5;
    spec.scenarios = 6;
    const auto rc = testsupport::random_case(rng, spec);
    const auto nominal = AmbiguitySet::uniform(spec.scenarios, 0.0).nominal;
    DroOptions opt;
    opt.threads = 1;
    const auto rows = sweep_d(rc.instance, rc.scenarios, nominal, grid, opt);
    REQUIRE(rows.size() == grid.size());
    INFO("trial " << trial);
    for (Index k = 0; k < rows.size(); ++k) {
      CHECK(rows[k].ok);
      CHECK(rows[k].converged);
      CHECK(rows[k].d == grid[k]);
      const auto bf = brute_force_dro(rc.instance, rc.scenarios, AmbiguitySet{nominal, grid[k]});
      CHECK(rows[k].objective == doctest::Approx(bf.objective).epsilon(1e-7));
      if (k > 0) CHECK(rows[k].objective <= rows[k - 1].objective + 1e-7 * (1.0 + rows[k - 1].objective));
    }
  }
}

TEST_CASE("radius sweep input checks and CSV") {
  std::mt19937_64 rng(5);
  const auto rc = testsupport::random_case(rng, testsupport::RandomSpec{});
  const auto nominal = AmbiguitySet::uniform(rc.scenarios.size(), 0.0).nominal;
  CHECK_THROWS_AS(sweep_d(rc.instance, rc.scenarios, nominal, std::vector<double>{}), SchemaError);
  CHECK_THROWS_AS(sweep_d(rc.instance, rc.scenarios, nominal, std::vector<double>{0.2, 0.1}), SchemaError);

  // An invalid radius fails its own row and the sweep carries on.
  const auto rows = sweep_d(rc.instance, rc.scenarios, nominal, std::vector<double>{-0.1, 0.1});
  REQUIRE(rows.size() == 2);
  CHECK_FALSE(rows[0].ok);
  CHECK_FALSE(rows[0].error.empty());
  CHECK(rows[1].ok);

  std::ostringstream out;
  write_sweep_csv(out, rows, 42, false);
  std::istringstream in(out.str());
  std::string line;
  std::getline(in, line);
  CHECK(line == "# seed=42");
  std::getline(in, line);
  CHECK(line == "d,objective,fingerprint,iterations,seconds,converged,error");
  Index count = 0;
  while (std::getline(in, line)) ++count;
  CHECK(count == 2);
}
