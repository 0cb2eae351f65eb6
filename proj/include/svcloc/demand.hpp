#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "svcloc/aicm.hpp"
#include "svcloc/model.hpp"

namespace svcloc {

/**
 * Demand sampler of one site. Survey locations are the site's neighborhood
 * candidates in ascending candidate order; scores use original labels.
 */
struct SiteSampler {
  aicm::AicmParameters params;
  std::vector<aicm::Scores> qualified;  ///< answers matching some pattern under params.rank
  std::vector<aicm::Scores> defective;  ///< the remaining answers
  double rho = 1.0;                     ///< probability of drawing from the fitted model
  Index draws = 0;                      ///< score vectors per demand sample (survey size N)
  double scale = 1.0;                   ///< multiplies the counts, typically A / N

  /// Splits the survey into pools under the fitted rank; rho = qualified share.
  static SiteSampler from_survey(const aicm::SurveyBatch& survey, const aicm::AicmParameters& params,
                                 double scale = 1.0);
  void check() const;
};

/// Per location, how many vectors give it a score of at least 1.
std::vector<double> count_willing(std::span<const aicm::Scores> vectors, Index g);

/**
 * One demand sample over the site's locations: `draws` score vectors, each
 * from the fitted model with probability rho and otherwise uniformly from the
 * defective pool, counted per location and scaled. An empty defective pool
 * with rho < 1 falls back to rho = 1 and appends a warning.
 */
std::vector<double> sample_site_demand(const SiteSampler& sampler, std::uint64_t seed,
                                       std::vector<std::string>* warnings = nullptr);

/// `count` samples; sample k uses child_seed(seed, site, k).
std::vector<std::vector<double>> sample_site_pool(const SiteSampler& sampler, Index count, std::uint64_t seed,
                                                  Index site, std::vector<std::string>* warnings = nullptr);

enum class CatenationMode { Independent, Banded };

struct CatenationSpec {
  CatenationMode mode = CatenationMode::Independent;
  std::vector<double> edges{0.0, 0.2, 0.4, 0.6, 0.8, 1.0};  ///< band edges on the sorted-pool quantile
  Index joint = 100;                                         ///< joint scenarios to draw, with replacement

  void check() const;
};

/**
 * Joint scenarios from per-site pools. pools[i][k] is a demand vector over
 * the neighborhood of site i. Independent mode picks one member per site
 * uniformly. Banded mode sorts every pool by total demand, splits it at the
 * quantile edges, draws one band uniformly and then one member per site from
 * that band. Bands empty for some site are merged into a neighbor (warning).
 */
ScenarioSet catenate(const Instance& instance, const std::vector<std::vector<std::vector<double>>>& pools,
                     const CatenationSpec& spec, std::uint64_t seed, std::vector<std::string>* warnings = nullptr);

}  // namespace svcloc
