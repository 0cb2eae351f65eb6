#pragma once

#include <cstdint>
#include <vector>

#include "svcloc/aicm.hpp"
#include "svcloc/model.hpp"

namespace svcloc {

struct InstanceGenConfig {
  Index sites = 20;
  double budget = 5.0;
  double side = 100.0;
  double quantile = 0.05;       ///< neighborhood radius as a quantile of pairwise distances
  double utility_near = 5.0;
  double utility_far = 0.5;
  double mean_factor = 120.0;   ///< demand mean per unit of utility
  double sd_factor = 12.0;      ///< demand standard deviation per unit of utility
  double capacity = 1000.0;
  double open_cost = 1.0;
  Index scenarios = 100;
  double radius = 0.2;
  std::uint64_t seed = 1;

  void check() const;
};

struct GeneratedInstance {
  Instance instance;
  ScenarioSet scenarios;
  AmbiguitySet ambiguity;
  std::vector<std::pair<double, double>> coordinates;
  double cutoff = 0.0;          ///< neighborhood distance d_c
  Index truncations = 0;        ///< negative demand draws set to zero
};

/// Nearest-rank quantile: the ceil(q K)-th smallest of K values (q in (0,1)).
double nearest_rank_quantile(std::vector<double> values, double q);

/**
 * Random square-map instance: every site is also a candidate; neighborhoods
 * contain the sites within the distance quantile; utilities fall linearly
 * with distance; demand is normal with mean and deviation proportional to
 * utility, truncated at zero.
 */
GeneratedInstance generate_instance(const InstanceGenConfig& config);

struct SurveySimConfig {
  std::vector<double> mean{1.0, 3.0, 4.5, 2.0};
  std::vector<double> sd{0.8, 1.5, 1.0, 1.5};
  int q = 5;
  double defect = 0.2;
  Index samples = 200;
  std::uint64_t seed = 1;

  void check() const;
};

/// Gaussian scores rounded half away from zero, clamped to {0..q}; with probability `defect` one random entry is zeroed.
aicm::SurveyBatch simulate_survey(const SurveySimConfig& config);

}  // namespace svcloc
