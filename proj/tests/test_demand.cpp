#include <algorithm>
#include <map>
#include <random>

#include "doctest.h"
#include "svcloc/demand.hpp"
#include "svcloc/synth.hpp"

using namespace svcloc;
using aicm::Scores;

namespace {

using Pool = std::vector<std::vector<double>>;

aicm::AicmParameters point_mass(Index g, int q, Index pattern) {
  aicm::AicmParameters a;
  a.g = g;
  a.q = q;
  a.p.assign(g + 1, 0.0);
  a.p[pattern] = 1.0;
  a.pi.assign(aicm::AicmParameters::num_rows(g), std::vector<double>(q, 1.0 / q));
  a.m.assign(g, 1.0 / static_cast<double>(g));
  a.rank = aicm::RankPermutation::identity(g);
  return a;
}

// Two sites sharing candidate 1: neighborhoods {0,1} and {1}.
Instance two_sites() {
  InstanceData d;
  d.sites = 2;
  d.candidates = 2;
  d.budget = 1;
  d.cost = {1, 1};
  d.capacity = {100, 100};
  d.neighborhood = {{0, 1}, {1}};
  d.utility = {{0, 0, 3}, {0, 1, 2}, {1, 1, 4}};
  return Instance::build(d);
}

}  // namespace

TEST_CASE("willing counts per location") {
  const std::vector<Scores> v{{0, 2}, {1, 0}, {3, 4}};
  CHECK(count_willing(v, 2) == std::vector<double>{2, 2});
  CHECK_THROWS_AS(count_willing(v, 3), SchemaError);
}

TEST_CASE("all-zero pattern gives zero demand") {
  SiteSampler s;
  s.params = point_mass(3, 4, 3);
  s.draws = 50;
  s.scale = 7.0;
  CHECK(sample_site_demand(s, 1) == std::vector<double>{0, 0, 0});
  s.params = point_mass(3, 4, 0);
  CHECK(sample_site_demand(s, 1) == std::vector<double>{350, 350, 350});
  s.params = point_mass(3, 4, 2);
  CHECK(sample_site_demand(s, 1) == std::vector<double>{0, 0, 350});
}

TEST_CASE("sampler pools split the survey") {
  aicm::SurveyBatch b{3, 3, {{0, 1, 2}, {1, 0, 2}, {0, 0, 1}, {2, 2, 2}, {0, 3, 0}}};
  auto params = point_mass(3, 3, 0);
  const auto s = SiteSampler::from_survey(b, params, 2.0);
  CHECK(s.qualified.size() == 3);
  CHECK(s.defective == std::vector<Scores>{{1, 0, 2}, {0, 3, 0}});
  CHECK(s.rho == doctest::Approx(0.6));
  CHECK(s.draws == 5);
  CHECK(s.scale == 2.0);

  // Under a different rank the same answers split differently.
  params.rank.order = {1, 0, 2};
  const auto t = SiteSampler::from_survey(b, params);
  CHECK(t.defective == std::vector<Scores>{{0, 1, 2}, {0, 3, 0}});
}

TEST_CASE("defective draws come from the pool") {
  SiteSampler s;
  s.params = point_mass(2, 3, 2);  // the model only ever answers zero
  s.defective = {{0, 4}};
  s.rho = 0.0;
  s.draws = 10;
  CHECK(sample_site_demand(s, 3) == std::vector<double>{0, 10});

  s.rho = 0.5;
  const auto d = sample_site_demand(s, 3);
  CHECK(d[0] == 0.0);
  CHECK(d[1] > 0.0);
  CHECK(d[1] < 10.0);
}

TEST_CASE("empty defective pool falls back to the model") {
  SiteSampler s;
  s.params = point_mass(2, 3, 0);
  s.rho = 0.3;
  s.draws = 4;
  std::vector<std::string> warnings;
  CHECK(sample_site_demand(s, 5, &warnings) == std::vector<double>{4, 4});
  CHECK(warnings.size() == 1);
}

TEST_CASE("model-only samples are ordered by rank") {
  std::mt19937_64 rng(2);
  for (int trial = 0; trial < 50; ++trial) {
    SurveySimConfig cfg;
    cfg.seed = rng();
    cfg.samples = 80;
    const auto batch = simulate_survey(cfg);
    aicm::FitConfig fc;
    fc.starts = 1;
    fc.max_iterations = 50;
    const auto fit = aicm::fit(batch, fc);
    auto s = SiteSampler::from_survey(batch, fit.params);
    s.rho = 1.0;
    const auto d = sample_site_demand(s, rng());
    for (Index k = 0; k + 1 < d.size(); ++k) CHECK(d[fit.params.rank.order[k]] <= d[fit.params.rank.order[k + 1]]);
  }
}

TEST_CASE("site pools are seeded per draw") {
  SiteSampler s;
  auto p = point_mass(2, 2, 0);
  p.p = {0.5, 0.25, 0.25};
  s.params = p;
  s.draws = 20;
  const auto a = sample_site_pool(s, 6, 11, 0), b = sample_site_pool(s, 6, 11, 0);
  CHECK(a == b);
  CHECK(a != sample_site_pool(s, 6, 11, 1));
  CHECK(sample_site_pool(s, 3, 11, 0) == std::vector(a.begin(), a.begin() + 3));
}

TEST_CASE("catenation of a single site reuses its pool") {
  InstanceData d;
  d.sites = 1;
  d.candidates = 2;
  d.budget = 1;
  d.cost = {1, 1};
  d.capacity = {10, 10};
  d.neighborhood = {{0, 1}};
  d.utility = {{0, 0, 1}, {0, 1, 2}};
  const auto inst = Instance::build(d);
  const std::vector<Pool> pools{Pool{{1, 2}, {3, 4}, {5, 6}}};
  for (auto mode : {CatenationMode::Independent, CatenationMode::Banded}) {
    CatenationSpec spec;
    spec.mode = mode;
    spec.joint = 60;
    const auto set = catenate(inst, pools, spec, 4);
    std::map<std::vector<double>, int> seen;
    for (const auto& row : set.table()) {
      CHECK(std::find(pools[0].begin(), pools[0].end(), row) != pools[0].end());
      ++seen[row];
    }
    CHECK(seen.size() == 3);
  }
}

TEST_CASE("independent catenation replays with its seed") {
  const auto inst = two_sites();
  const std::vector<Pool> pools{Pool{{1, 2}, {3, 4}}, Pool{{5}, {6}}};
  CatenationSpec spec;
  spec.joint = 4;
  const auto a = catenate(inst, pools, spec, 9);
  CHECK(a.table() == catenate(inst, pools, spec, 9).table());
  spec.joint = 400;
  std::map<std::vector<double>, int> combos;
  const auto many = catenate(inst, pools, spec, 9);
  for (const auto& row : many.table()) {
    CHECK(row.size() == 3);
    ++combos[row];
  }
  CHECK(combos.size() == 4);
}

TEST_CASE("banded catenation keeps sites in the same band") {
  const auto inst = two_sites();
  // Pools sorted the same way by total demand; one member per band.
  std::vector<Pool> pools(2);
  for (int k = 4; k >= 0; --k) {
    pools[0].push_back({static_cast<double>(k), static_cast<double>(k)});
    pools[1].push_back({10.0 * k});
  }
  CatenationSpec spec;
  spec.mode = CatenationMode::Banded;
  spec.joint = 200;
  const auto set = catenate(inst, pools, spec, 1);
  std::map<double, int> bands;
  for (const auto& row : set.table()) {
    CHECK(row[2] == 10.0 * row[0]);
    ++bands[row[0]];
  }
  CHECK(bands.size() == 5);
}

TEST_CASE("empty bands are merged") {
  const auto inst = two_sites();
  const std::vector<Pool> pools{Pool{{1, 1}, {2, 2}}, Pool{{1}, {2}, {3}, {4}, {5}}};
  CatenationSpec spec;
  spec.mode = CatenationMode::Banded;
  spec.joint = 100;
  std::vector<std::string> warnings;
  const auto set = catenate(inst, pools, spec, 2, &warnings);
  CHECK(warnings.size() == 3);
  for (const auto& row : set.table()) {
    // Site 0 only fills bands 1 and 3; after merging, the low band pairs with low site-1 draws.
    if (row[0] == 1.0) CHECK(row[2] <= 2.0);
    if (row[0] == 2.0) CHECK(row[2] >= 3.0);
  }
}

TEST_CASE("catenation rejects bad pools") {
  const auto inst = two_sites();
  CatenationSpec spec;
  CHECK_THROWS_AS(catenate(inst, {Pool{{1, 1}}, Pool{}}, spec, 0), SchemaError);
  CHECK_THROWS_AS(catenate(inst, {Pool{{1, 1}}, Pool{{1, 2}}}, spec, 0), SchemaError);
  CHECK_NOTHROW(catenate(inst, {Pool{{1, 1}}, Pool{{1}}}, spec, 0));
  spec.edges = {0.0, 0.5, 0.5, 1.0};
  CHECK_THROWS_AS(catenate(inst, {Pool{{1, 1}}, Pool{{1}}}, spec, 0), SchemaError);
}
