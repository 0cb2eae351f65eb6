#include "svcloc/demand.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>

namespace svcloc {

SiteSampler SiteSampler::from_survey(const aicm::SurveyBatch& survey, const aicm::AicmParameters& params,
                                     double scale) {
  survey.check();
  params.check(1e-6);
  if (survey.g != params.g || survey.q != params.q) throw SchemaError("survey and fitted model dimensions differ");
  SiteSampler s;
  s.params = params;
  for (const auto& v : survey.scores)
    (aicm::pattern_index(params.rank.to_ranked(v)) ? s.qualified : s.defective).push_back(v);
  s.draws = survey.scores.size();
  s.rho = s.draws == 0 ? 1.0 : static_cast<double>(s.qualified.size()) / static_cast<double>(s.draws);
  s.scale = scale;
  return s;
}

void SiteSampler::check() const {
  params.check(1e-6);
  if (!(rho >= 0.0 && rho <= 1.0)) throw SchemaError("mixing weight must lie in [0,1]");
  if (!(scale >= 0.0) || !std::isfinite(scale)) throw SchemaError("scaling factor must be finite and >= 0");
  for (const auto* pool : {&qualified, &defective})
    for (const auto& v : *pool)
      if (v.size() != params.g) throw SchemaError("pooled answer has the wrong length");
}

std::vector<double> count_willing(std::span<const aicm::Scores> vectors, Index g) {
  std::vector<double> d(g, 0.0);
  for (const auto& v : vectors) {
    if (v.size() != g) throw SchemaError("score vector has the wrong length");
    for (Index j = 0; j < g; ++j)
      if (v[j] >= 1) d[j] += 1.0;
  }
  return d;
}

std::vector<double> sample_site_demand(const SiteSampler& sampler, std::uint64_t seed,
                                       std::vector<std::string>* warnings) {
  sampler.check();
  double rho = sampler.rho;
  if (rho < 1.0 && sampler.defective.empty()) {
    if (warnings) warnings->push_back("empty defective pool; sampling from the fitted model only");
    rho = 1.0;
  }
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  std::vector<aicm::Scores> drawn;
  drawn.reserve(sampler.draws);
  for (Index k = 0; k < sampler.draws; ++k) {
    if (rho >= 1.0 || unit(rng) < rho) {
      drawn.push_back(aicm::sample_icm(sampler.params, rng));
    } else {
      std::uniform_int_distribution<Index> pick(0, sampler.defective.size() - 1);
      drawn.push_back(sampler.defective[pick(rng)]);
    }
  }
  auto d = count_willing(drawn, sampler.params.g);
  for (double& x : d) x *= sampler.scale;
  return d;
}

std::vector<std::vector<double>> sample_site_pool(const SiteSampler& sampler, Index count, std::uint64_t seed,
                                                  Index site, std::vector<std::string>* warnings) {
  std::vector<std::vector<double>> pool;
  pool.reserve(count);
  for (Index k = 0; k < count; ++k) {
    // Only the first draw can report the fallback; later ones would repeat it.
    pool.push_back(sample_site_demand(sampler, child_seed(seed, site, k), k == 0 ? warnings : nullptr));
  }
  return pool;
}

void CatenationSpec::check() const {
  if (edges.size() < 2 || edges.front() != 0.0 || edges.back() != 1.0)
    throw SchemaError("band edges must start at 0 and end at 1");
  for (Index b = 0; b + 1 < edges.size(); ++b)
    if (!(edges[b] < edges[b + 1])) throw SchemaError("band edges must be strictly increasing");
  if (joint == 0) throw SchemaError("joint scenario count must be positive");
}

namespace {

// Band of sorted position k out of n, by the midpoint of its quantile cell.
Index band_of(Index k, Index n, const std::vector<double>& edges) {
  const double at = (static_cast<double>(k) + 0.5) / static_cast<double>(n);
  const auto it = std::upper_bound(edges.begin() + 1, edges.end() - 1, at);
  return static_cast<Index>(it - edges.begin()) - 1;
}

}  // namespace

ScenarioSet catenate(const Instance& instance, const std::vector<std::vector<std::vector<double>>>& pools,
                     const CatenationSpec& spec, std::uint64_t seed, std::vector<std::string>* warnings) {
  spec.check();
  const Index n = instance.num_sites();
  if (pools.size() != n) throw SchemaError("need one sample pool per site");
  for (Index i = 0; i < n; ++i) {
    if (pools[i].empty()) throw SchemaError("sample pool of site " + std::to_string(i) + " is empty");
    for (const auto& s : pools[i])
      if (s.size() != instance.neighborhood(i).size())
        throw SchemaError("sample of site " + std::to_string(i) + " does not match its neighborhood");
  }

  // members[b][i]: pool indices of site i inside band b (a single band in independent mode).
  std::vector<std::vector<std::vector<Index>>> members;
  if (spec.mode == CatenationMode::Independent) {
    members.assign(1, std::vector<std::vector<Index>>(n));
    for (Index i = 0; i < n; ++i) {
      members[0][i].resize(pools[i].size());
      std::iota(members[0][i].begin(), members[0][i].end(), Index{0});
    }
  } else {
    const Index bands = spec.edges.size() - 1;
    members.assign(bands, std::vector<std::vector<Index>>(n));
    for (Index i = 0; i < n; ++i) {
      std::vector<double> total(pools[i].size());
      for (Index k = 0; k < total.size(); ++k) total[k] = std::accumulate(pools[i][k].begin(), pools[i][k].end(), 0.0);
      std::vector<Index> order(total.size());
      std::iota(order.begin(), order.end(), Index{0});
      std::stable_sort(order.begin(), order.end(), [&](Index a, Index b) { return total[a] < total[b]; });
      for (Index k = 0; k < order.size(); ++k) members[band_of(k, order.size(), spec.edges)][i].push_back(order[k]);
    }
    for (Index b = 0; b < members.size();) {
      const bool empty = std::any_of(members[b].begin(), members[b].end(), [](const auto& m) { return m.empty(); });
      if (!empty || members.size() == 1) {
        ++b;
        continue;
      }
      const Index into = b + 1 < members.size() ? b + 1 : b - 1;
      if (warnings) warnings->push_back("band " + std::to_string(b) + " is empty for some site; merged");
      for (Index i = 0; i < n; ++i) {
        auto& dst = members[into][i];
        dst.insert(into > b ? dst.begin() : dst.end(), members[b][i].begin(), members[b][i].end());
      }
      members.erase(members.begin() + static_cast<long>(b));
      if (into < b) --b;
    }
  }

  std::vector<std::vector<double>> table(spec.joint, std::vector<double>(instance.num_arcs()));
  for (Index w = 0; w < spec.joint; ++w) {
    std::mt19937_64 rng(child_seed(seed, w));
    const Index b = std::uniform_int_distribution<Index>(0, members.size() - 1)(rng);
    for (Index i = 0; i < n; ++i) {
      const auto& band = members[b][i];
      const Index k = band[std::uniform_int_distribution<Index>(0, band.size() - 1)(rng)];
      std::copy(pools[i][k].begin(), pools[i][k].end(),
                table[w].begin() + static_cast<long>(instance.arc_begin(i)));
    }
  }
  return ScenarioSet(instance.num_arcs(), std::move(table));
}

}  // namespace svcloc
