#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>

#include "doctest.h"
#include "svcloc/aicm.hpp"
#include "svcloc/synth.hpp"

using namespace svcloc;
using namespace svcloc::aicm;

namespace {

std::vector<double> dirichlet(Index n, std::mt19937_64& rng) {
  std::exponential_distribution<double> expo(1.0);
  std::vector<double> v(n);
  double total = 0.0;
  for (double& x : v) total += (x = expo(rng));
  for (double& x : v) x /= total;
  return v;
}

AicmParameters random_params(Index g, int q, std::mt19937_64& rng) {
  AicmParameters a;
  a.g = g;
  a.q = q;
  a.p = dirichlet(g + 1, rng);
  for (Index r = 0; r < AicmParameters::num_rows(g); ++r) a.pi.push_back(dirichlet(q, rng));
  a.m = dirichlet(g, rng);
  a.rank = RankPermutation::identity(g);
  return a;
}

Scores random_vector(Index g, int q, std::mt19937_64& rng) {
  std::uniform_int_distribution<int> s(0, q);
  Scores v(g);
  for (int& x : v) x = s(rng);
  return v;
}

// Distance to the closest member of pattern class k, coordinate by coordinate.
Index projection_distance(const Scores& v, Index k, int q) {
  Index d = 0;
  for (Index j = 0; j < v.size(); ++j) {
    int best = q + 1;
    if (j < k) {
      best = std::abs(v[j]);
    } else {
      for (int x = 1; x <= q; ++x) best = std::min(best, std::abs(v[j] - x));
    }
    d += static_cast<Index>(best);
  }
  return d;
}

Index projection_oracle(const Scores& v, int q) {
  Index best = v.size() * static_cast<Index>(q + 1);
  for (Index k = 0; k <= v.size(); ++k) best = std::min(best, projection_distance(v, k, q));
  return best;
}

// Minimum L1 distance to any qualified vector, by listing all of them.
Index exhaustive_oracle(const Scores& v, int q) {
  const Index g = v.size();
  Index total = 1;
  for (Index j = 0; j < g; ++j) total *= static_cast<Index>(q + 1);
  Index best = total;
  Scores w(g);
  for (Index code = 0; code < total; ++code) {
    Index c = code;
    for (Index j = 0; j < g; ++j) {
      w[j] = static_cast<int>(c % static_cast<Index>(q + 1));
      c /= static_cast<Index>(q + 1);
    }
    if (!pattern_index(w)) continue;
    Index d = 0;
    for (Index j = 0; j < g; ++j) d += static_cast<Index>(std::abs(w[j] - v[j]));
    best = std::min(best, d);
  }
  return best;
}

SurveyBatch batch_of(Index g, int q, std::vector<Scores> scores) {
  SurveyBatch b;
  b.g = g;
  b.q = q;
  b.scores = std::move(scores);
  return b;
}

}  // namespace

TEST_CASE("pattern index examples") {
  CHECK(pattern_index(Scores{0, 0, 3, 4}) == Index{2});
  CHECK(pattern_index(Scores{0, 0, 0, 0}) == Index{4});
  CHECK(pattern_index(Scores{1, 2, 3, 4}) == Index{0});
  CHECK_FALSE(pattern_index(Scores{0, 2, 0, 4}).has_value());
  CHECK_FALSE(pattern_index(Scores{3, 0}).has_value());
}

TEST_CASE("defective score quantity examples") {
  const auto worked = defective_score_quantity(Scores{0, 0, 5, 7, 0, 0, 7, 6, 9});
  CHECK(worked.quantity == 2);
  CHECK(worked.pattern == 2);
  CHECK(worked.qualified == Scores{0, 0, 5, 7, 1, 1, 7, 6, 9});

  const auto r = defective_score_quantity(Scores{5, 0, 3, 4});
  CHECK(r.quantity == 1);
  CHECK(r.qualified == Scores{5, 1, 3, 4});

  for (const Scores& v : {Scores{0, 0, 0}, Scores{0, 2, 3}, Scores{4, 4, 4}}) {
    const auto z = defective_score_quantity(v);
    CHECK(z.quantity == 0);
    CHECK(z.qualified == v);
  }
}

TEST_CASE("defective score quantity matches projection and exhaustive oracles") {
  std::mt19937_64 rng(11);
  for (int trial = 0; trial < 10000; ++trial) {
    const Index g = 1 + rng() % 8;
    const int q = 1 + static_cast<int>(rng() % 5);
    const Scores v = random_vector(g, q, rng);
    const auto r = defective_score_quantity(v);
    CHECK(r.quantity == projection_oracle(v, q));
    CHECK(r.quantity <= g - 1);
    CHECK((r.quantity == 0) == pattern_index(v).has_value());
    REQUIRE(pattern_index(r.qualified) == r.pattern);
    Index moved = 0;
    for (Index j = 0; j < g; ++j) moved += static_cast<Index>(std::abs(r.qualified[j] - v[j]));
    CHECK(moved == r.quantity);
    // No smaller pattern reaches the same distance.
    for (Index k = 0; k < r.pattern; ++k) CHECK(projection_distance(v, k, q) > r.quantity);
  }
  for (int trial = 0; trial < 500; ++trial) {
    const Index g = 1 + rng() % 4;
    const int q = 1 + static_cast<int>(rng() % 3);
    const Scores v = random_vector(g, q, rng);
    CHECK(defective_score_quantity(v).quantity == exhaustive_oracle(v, q));
  }
}

TEST_CASE("identify_rank sorts willing counts with index tie break") {
  std::vector<Scores> scores;
  for (int k = 0; k < 40; ++k) scores.push_back({k < 10 ? 1 : 0, 1, k < 25 ? 1 : 0});
  const auto rank = identify_rank(batch_of(3, 5, scores));
  CHECK(rank.order == std::vector<Index>{0, 2, 1});
  CHECK_FALSE(rank.ties);

  const auto one = identify_rank(batch_of(1, 5, {{3}, {0}}));
  CHECK(one.order == std::vector<Index>{0});

  const auto tied = identify_rank(batch_of(3, 5, {{1, 1, 0}, {1, 1, 0}}));
  CHECK(tied.order == std::vector<Index>{2, 0, 1});
  CHECK(tied.ties);

  const auto rp = RankPermutation{{2, 0, 1}, false};
  const Scores original{7, 8, 9};
  CHECK(rp.to_ranked(original) == Scores{9, 7, 8});
  CHECK(rp.to_original(rp.to_ranked(original)) == original);
}

TEST_CASE("rank success bound") {
  CHECK(rank_success_bound(1000, 4, 0.8, 0.3) == doctest::Approx(1.0 - 3.0 * std::exp(-0.8)).epsilon(1e-12));
  CHECK(rank_success_bound(1000, 4, 0.8, 0.3) == doctest::Approx(-0.348).epsilon(1e-3));
  CHECK(rank_success_bound(10000, 4, 0.8, 0.3) == doctest::Approx(0.99899).epsilon(1e-5));
  CHECK(rank_success_bound(500, 5, 0.8, 0.25) == doctest::Approx(2.0 - 5.0).epsilon(1e-12));
  CHECK(rank_bound_premise(0.8, 0.3));
  CHECK_FALSE(rank_bound_premise(0.8, 0.25));
  CHECK_FALSE(rank_bound_premise(0.5, 0.9));
}

TEST_CASE("sample probability") {
  AicmParameters a;
  a.g = 3;
  a.q = 5;
  a.p = {0.2, 0.5, 0.2, 0.1};
  a.pi.assign(AicmParameters::num_rows(3), std::vector<double>(5, 0.2));
  a.pi[AicmParameters::row(3, 1, 1)] = {0.1, 0.1, 0.4, 0.2, 0.2};
  a.pi[AicmParameters::row(3, 1, 2)] = {0.25, 0.25, 0.25, 0.25, 0.0};
  a.m = {1.0, 0.0, 0.0};
  a.rank = RankPermutation::identity(3);
  a.check();

  CHECK(sample_probability(Scores{0, 3, 2}, a) == doctest::Approx(0.05).epsilon(1e-12));
  CHECK(sample_probability(Scores{0, 0, 0}, a) == doctest::Approx(0.1).epsilon(1e-12));
  CHECK(sample_probability(Scores{0, 3, 5}, a) == 0.0);
  CHECK_THROWS_AS(sample_probability(Scores{0, 3, 0}, a), std::invalid_argument);

  // Probabilities over all qualified vectors sum to one.
  std::mt19937_64 rng(5);
  const auto b = random_params(3, 2, rng);
  double total = 0.0;
  for (int x = 0; x < 27; ++x) {
    const Scores v{x % 3, (x / 3) % 3, x / 9};
    if (pattern_index(v)) total += sample_probability(v, b);
  }
  CHECK(total == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("variance penalty values") {
  AicmParameters a;
  a.g = 2;
  a.q = 5;
  a.p = {0.5, 0.3, 0.2};
  a.pi.assign(3, std::vector<double>(5, 0.2));
  a.m = {1.0, 0.0};
  a.rank = RankPermutation::identity(2);
  CHECK(variance_penalty(a) == doctest::Approx(3 * 2.0).epsilon(1e-12));
  for (auto& row : a.pi) row = {0.0, 0.0, 1.0, 0.0, 0.0};
  CHECK(variance_penalty(a) == doctest::Approx(0.0));
  CHECK(difference_penalty(a) == doctest::Approx(0.0));
}

TEST_CASE("frequency estimate counts patterns and scores") {
  // Rank coordinates equal original labels here: counts rise left to right.
  const auto batch = batch_of(3, 3, {{1, 2, 3}, {0, 1, 1}, {0, 2, 3}, {0, 0, 2}, {1, 3, 3}, {0, 2, 1}});
  const auto conv = convert(batch, identify_rank(batch));
  REQUIRE(conv.rank.order == std::vector<Index>{0, 1, 2});
  const auto f = frequency_estimate(conv);
  f.check();
  CHECK(f.p[0] == doctest::Approx(2.0 / 6.0));
  CHECK(f.p[1] == doctest::Approx(3.0 / 6.0));
  CHECK(f.p[2] == doctest::Approx(1.0 / 6.0));
  CHECK(f.p[3] == doctest::Approx(0.0));
  CHECK(f.pi_row(1, 1) == std::vector<double>{1.0 / 3.0, 2.0 / 3.0, 0.0});
  CHECK(f.pi_row(0, 2) == std::vector<double>{0.0, 0.0, 1.0});
  CHECK(f.pi_row(2, 2) == std::vector<double>{0.0, 1.0, 0.0});
  CHECK(f.m[0] == doctest::Approx(1.0));
}

TEST_CASE("fit at zero regularization recovers frequency estimates") {
  std::mt19937_64 rng(21);
  for (int trial = 0; trial < 5; ++trial) {
    const Index g = 2 + rng() % 3;
    const int q = 3 + static_cast<int>(rng() % 3);
    const auto truth = random_params(g, q, rng);
    std::vector<Scores> scores;
    for (int k = 0; k < 300; ++k) scores.push_back(rng() % 10 == 0 ? sample_defective(g, q, rng) : sample_icm(truth, rng));
    const auto batch = batch_of(g, q, scores);
    const auto conv = convert(batch, identify_rank(batch));
    const auto freq = frequency_estimate(conv);
    FitConfig cfg;
    cfg.seed = trial;
    const auto r = fit_converted(conv, cfg);
    r.params.check(1e-9);
    CHECK(r.params.simplex_violation() <= 1e-9);
    for (Index i = 0; i <= g; ++i) CHECK(std::abs(r.params.p[i] - freq.p[i]) <= 1e-3);
    // Rows of patterns without samples do not enter the likelihood.
    for (Index i = 0; i < g; ++i) {
      if (freq.p[i] == 0.0) continue;
      for (Index j = i; j < g; ++j)
        for (Index s = 0; s < static_cast<Index>(q); ++s)
          CHECK(std::abs(r.params.pi_row(i, j)[s] - freq.pi_row(i, j)[s]) <= 1e-3);
    }
    CHECK(r.loss <= loss(freq, conv, 0.0, 0.0) + 1e-9);
  }
}

TEST_CASE("single all-ones answer") {
  const auto batch = batch_of(3, 5, {{1, 1, 1}});
  const auto r = fit(batch, FitConfig{});
  CHECK(r.params.p[0] == doctest::Approx(1.0).epsilon(1e-9));
  for (Index j = 0; j < 3; ++j) CHECK(r.params.pi_row(0, j)[0] == doctest::Approx(1.0).epsilon(1e-9));
}

TEST_CASE("regularized fits stay on the simplices and lower the loss") {
  const auto batch = simulate_survey(SurveySimConfig{});
  const auto conv = convert(batch, identify_rank(batch));
  for (double lambda : {0.1, 1.0, 5.0}) {
    FitConfig cfg;
    cfg.lambda1 = cfg.lambda2 = lambda;
    const auto r = fit_converted(conv, cfg);
    CHECK(r.params.simplex_violation() <= 1e-9);
    CHECK(r.loss <= loss(frequency_estimate(conv), conv, lambda, lambda) + 1e-9);
    CHECK(r.loss == doctest::Approx(loss(r.params, conv, lambda, lambda)).epsilon(1e-12));
  }
}

TEST_CASE("estimate utilities") {
  AicmParameters a;
  a.g = 1;
  a.q = 5;
  a.p = {0.6, 0.4};
  a.pi = {{0.0, 0.0, 0.0, 1.0, 0.0}};
  a.m = {1.0};
  a.rank = RankPermutation::identity(1);
  CHECK(estimate_utilities(a)[0] == doctest::Approx(2.4));

  std::mt19937_64 rng(3);
  auto b = random_params(4, 5, rng);
  std::fill(b.p.begin(), b.p.end(), 0.0);
  b.p[4] = 1.0;
  for (double u : estimate_utilities(b)) CHECK(u == 0.0);

  // Matches the sample mean of a large draw, in original labels.
  auto c = random_params(3, 4, rng);
  c.rank = RankPermutation{{1, 2, 0}, false};
  const auto u = estimate_utilities(c);
  std::vector<double> mean(3, 0.0);
  const int draws = 200000;
  for (int k = 0; k < draws; ++k) {
    const Scores v = sample_icm(c, rng);
    for (Index j = 0; j < 3; ++j) mean[j] += v[j];
  }
  for (Index j = 0; j < 3; ++j) CHECK(mean[j] / draws == doctest::Approx(u[j]).epsilon(0.02));
}

TEST_CASE("chain samples are nested") {
  std::mt19937_64 rng(8);
  for (int trial = 0; trial < 50; ++trial) {
    const Index g = 1 + rng() % 6;
    auto a = random_params(g, 5, rng);
    std::vector<Index> order(g);
    std::iota(order.begin(), order.end(), 0);
    std::shuffle(order.begin(), order.end(), rng);
    a.rank = RankPermutation{order, false};
    std::vector<Scores> batch;
    for (int k = 0; k < 200; ++k) batch.push_back(sample_icm(a, rng));
    // Willing sets along the rank order are nested.
    for (const Scores& v : batch) {
      const Scores ranked = a.rank.to_ranked(v);
      REQUIRE(pattern_index(ranked).has_value());
      for (Index k = 1; k < g; ++k) CHECK((ranked[k - 1] == 0 || ranked[k] > 0));
    }
  }
  for (int trial = 0; trial < 100; ++trial) {
    const Index g = 2 + rng() % 6;
    const Scores v = sample_defective(g, 3, rng);
    CHECK_FALSE(pattern_index(v).has_value());
  }
  CHECK_THROWS(sample_defective(1, 3, rng));
}

TEST_CASE("cross validation") {
  SUBCASE("identical answers tie at every lambda") {
    std::vector<Scores> scores(12, Scores{1, 1, 1});
    FitConfig cfg;
    cfg.starts = 2;
    const auto cv = cross_validate_lambda(batch_of(3, 5, scores), cfg);
    CHECK(cv.round1.size() == 51);
    CHECK(cv.lambda == 0.0);
    CHECK(cv.round2.size() == 11);
  }
  SUBCASE("second round grid centers on the first round winner") {
    const auto batch = simulate_survey(SurveySimConfig{.samples = 40});
    FitConfig cfg;
    cfg.starts = 1;
    const auto cv = cross_validate_lambda(batch, cfg);
    double first = cv.round1[0].lambda, best = cv.round1[0].score;
    for (const auto& s : cv.round1)
      if (s.score > best) {
        best = s.score;
        first = s.lambda;
      }
    for (const auto& s : cv.round2) CHECK(std::abs(s.lambda - first) <= 0.1 + 1e-12);
    CHECK(std::abs(cv.lambda - first) <= 0.1 + 1e-12);
  }
}
