#include "svcloc/synth.hpp"

#include <algorithm>
#include <cmath>
#include <random>

namespace svcloc {

void InstanceGenConfig::check() const {
  if (sites == 0) throw SchemaError("site count must be positive");
  if (!(quantile > 0.0 && quantile < 1.0)) throw SchemaError("neighborhood quantile must lie in (0,1)");
  if (!(utility_near > 0.0 && utility_far > 0.0)) throw SchemaError("utility endpoints must be positive");
  if (!(side > 0.0)) throw SchemaError("map side must be positive");
  if (!(open_cost > 0.0) || capacity < 0.0 || sd_factor < 0.0) throw SchemaError("invalid cost, capacity or deviation");
  if (scenarios == 0) throw SchemaError("scenario count must be positive");
  if (!(radius >= 0.0)) throw SchemaError("total variation radius must be >= 0");
}

double nearest_rank_quantile(std::vector<double> values, double q) {
  if (values.empty()) return 0.0;
  std::sort(values.begin(), values.end());
  const auto k = static_cast<Index>(std::ceil(q * static_cast<double>(values.size())));
  return values[std::clamp<Index>(k, 1, values.size()) - 1];
}

GeneratedInstance generate_instance(const InstanceGenConfig& cfg) {
  cfg.check();
  std::mt19937_64 rng(cfg.seed);
  std::uniform_real_distribution<double> coord(0.0, cfg.side);
  GeneratedInstance out;
  const Index n = cfg.sites;
  for (Index i = 0; i < n; ++i) {
    const double x = coord(rng);
    const double y = coord(rng);
    out.coordinates.emplace_back(x, y);
  }
  auto dist = [&](Index i, Index j) {
    return std::hypot(out.coordinates[i].first - out.coordinates[j].first,
                      out.coordinates[i].second - out.coordinates[j].second);
  };
  std::vector<double> pairs;
  for (Index i = 0; i < n; ++i)
    for (Index j = i + 1; j < n; ++j) pairs.push_back(dist(i, j));
  out.cutoff = nearest_rank_quantile(pairs, cfg.quantile);
  const double dmin = pairs.empty() ? 0.0 : *std::min_element(pairs.begin(), pairs.end());
  const double dmax = pairs.empty() ? 0.0 : *std::max_element(pairs.begin(), pairs.end());

  InstanceData d;
  d.sites = n;
  d.candidates = n;
  d.budget = cfg.budget;
  d.cost.assign(n, cfg.open_cost);
  d.capacity.assign(n, cfg.capacity);
  d.neighborhood.resize(n);
  for (Index i = 0; i < n; ++i)
    for (Index j = 0; j < n; ++j) {
      if (i != j && dist(i, j) > out.cutoff) continue;
      d.neighborhood[i].push_back(j);
      double u = cfg.utility_near;
      if (i != j && dmax > dmin)
        u = cfg.utility_near + (dist(i, j) - dmin) / (dmax - dmin) * (cfg.utility_far - cfg.utility_near);
      d.utility.push_back({i, j, u});
    }
  out.instance = Instance::build(d);

  const auto& inst = out.instance;
  std::normal_distribution<double> normal(0.0, 1.0);
  std::vector<std::vector<double>> table(cfg.scenarios, std::vector<double>(inst.num_arcs()));
  for (Index w = 0; w < cfg.scenarios; ++w)
    for (Index a = 0; a < inst.num_arcs(); ++a) {
      const double u = inst.utility(a);
      const double v = cfg.mean_factor * u + cfg.sd_factor * u * normal(rng);
      if (v < 0.0) ++out.truncations;
      table[w][a] = std::max(0.0, v);
    }
  out.scenarios = ScenarioSet(inst.num_arcs(), std::move(table));
  out.ambiguity = AmbiguitySet::uniform(cfg.scenarios, cfg.radius);
  return out;
}

void SurveySimConfig::check() const {
  if (mean.empty() || mean.size() != sd.size()) throw SchemaError("mean and deviation vectors must match");
  for (double s : sd)
    if (!(s > 0.0)) throw SchemaError("deviations must be positive");
  if (q < 1) throw SchemaError("maximum score must be at least 1");
  if (!(defect >= 0.0 && defect <= 1.0)) throw SchemaError("defect probability must lie in [0,1]");
}

aicm::SurveyBatch simulate_survey(const SurveySimConfig& cfg) {
  cfg.check();
  std::mt19937_64 rng(cfg.seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  const Index g = cfg.mean.size();
  std::uniform_int_distribution<Index> pick(0, g - 1);
  aicm::SurveyBatch batch{g, cfg.q, {}};
  for (Index k = 0; k < cfg.samples; ++k) {
    aicm::Scores v(g);
    for (Index j = 0; j < g; ++j) {
      const double raw = std::round(cfg.mean[j] + cfg.sd[j] * normal(rng));
      v[j] = static_cast<int>(std::clamp(raw, 0.0, static_cast<double>(cfg.q)));
    }
    if (unit(rng) < cfg.defect) v[pick(rng)] = 0;
    batch.scores.push_back(std::move(v));
  }
  return batch;
}

}  // namespace svcloc
