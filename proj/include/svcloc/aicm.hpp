#pragma once

#include <cstdint>
#include <optional>
#include <random>
#include <span>
#include <utility>
#include <vector>

#include "svcloc/common.hpp"

namespace svcloc::aicm {

using Scores = std::vector<int>;

/// N survey answers, each a score in {0..q} for every one of g locations.
struct SurveyBatch {
  Index g = 0;
  int q = 0;
  std::vector<Scores> scores;

  /// Throws SchemaError on wrong lengths or out-of-range scores.
  void check() const;
  /// |V'_j|: how many answers give location j a score of at least 1.
  std::vector<Index> willing_counts() const;
};

/**
 * Locations in ascending attractability: order[k] is the original label of
 * rank position k. Vectors "in rank coordinates" list scores in this order.
 */
struct RankPermutation {
  std::vector<Index> order;
  bool ties = false;  ///< some willing counts were equal and index order decided

  static RankPermutation identity(Index g);
  Scores to_ranked(std::span<const int> original) const;
  Scores to_original(std::span<const int> ranked) const;
};

/// Sorts willing counts ascending; equal counts keep location index order.
RankPermutation identify_rank(const SurveyBatch& batch);

/**
 * Pattern of a vector in rank coordinates: k when its first k entries are zero
 * and the rest are nonzero (k = g for the all-zero vector); nullopt when it
 * matches no pattern.
 */
std::optional<Index> pattern_index(std::span<const int> ranked);

struct DefectResult {
  Index quantity = 0;
  Index pattern = 0;
  Scores qualified;  ///< rank coordinates
};

/**
 * Smallest L1 change that turns a ranked vector into a qualified one. Moving
 * to pattern k costs the scores at the first k positions plus one per zero at
 * later positions; ties go to the smallest k. Filled entries become 1.
 */
DefectResult defective_score_quantity(std::span<const int> ranked);

/// Lower bound 1 - (g-1) exp(-N (m0 (1 + p*) - 1)^2 / 2) on the rank identification probability.
double rank_success_bound(Index N, Index g, double m0, double pstar);

/// Whether m0 (1 + p*) > 1, the premise under which the bound is informative.
bool rank_bound_premise(double m0, double pstar);

/**
 * Parameters in rank coordinates.
 *
 * p[k], k = 0..g: probability of pattern k (k = g is all-zero).
 * pi rows: for pattern i < g and location j >= i, a distribution over scores
 * 1..q stored at pi[row(g, i, j)][r - 1].
 * m[s], s = 0..g-1: probability of defective score quantity s.
 */
struct AicmParameters {
  Index g = 0;
  int q = 0;
  std::vector<double> p;
  std::vector<std::vector<double>> pi;
  std::vector<double> m;
  RankPermutation rank;

  static Index num_rows(Index g) { return g * (g + 1) / 2; }
  static Index row(Index g, Index i, Index j) { return i * g - i * (i - 1) / 2 + (j - i); }
  const std::vector<double>& pi_row(Index i, Index j) const { return pi[row(g, i, j)]; }

  /// Largest violation of nonnegativity and unit-sum constraints.
  double simplex_violation() const;
  /// Throws SchemaError when dimensions are wrong or simplex_violation() exceeds tol.
  void check(double tol = 1e-9) const;
};

/// p_k * prod_{j >= k} pi^(k)_{j, xi_j}; throws std::invalid_argument for a defective vector.
double sample_probability(std::span<const int> ranked_qualified, const AicmParameters& params);

/// A batch after rank ordering and conversion of defective answers.
struct ConvertedBatch {
  Index g = 0;
  int q = 0;
  RankPermutation rank;
  std::vector<Scores> qualified;   ///< rank coordinates
  std::vector<Index> pattern;
  std::vector<Index> defect;       ///< defective score quantity of each original answer
};

ConvertedBatch convert(const SurveyBatch& batch, const RankPermutation& rank);

/// sum_{i<=j} Var of row (i, j).
double variance_penalty(const AicmParameters& params);
/// sum_j over adjacent location pairs of the spread of mean differences across patterns.
double difference_penalty(const AicmParameters& params);

/**
 * (2 l1 / (g (g+1))) sum R1 + (l2 / (g-1)) sum R2 - mean log P, with each
 * probability floored at 1e-12 inside the log.
 */
double loss(const AicmParameters& params, const ConvertedBatch& batch, double lambda1, double lambda2);

/// Average log-likelihood of the batch (probabilities floored at 1e-12).
double mean_log_likelihood(const AicmParameters& params, const ConvertedBatch& batch);

/// Closed-form frequency estimate over the converted answers; empty rows are uniform.
AicmParameters frequency_estimate(const ConvertedBatch& batch);

struct FitConfig {
  double lambda1 = 0.0;
  double lambda2 = 0.0;
  Index starts = 8;
  double tolerance = 1e-6;       ///< on the projected-gradient step norm
  Index max_iterations = 5000;
  Index folds = 4;
  std::uint64_t seed = 0;
  Index threads = 1;
};

struct FitResult {
  AicmParameters params;
  double loss = 0.0;
  Index iterations = 0;   ///< of the winning start
  Index best_start = 0;
  bool converged = false;
};

/// Multistart projected-gradient minimization of the loss on an already converted batch.
FitResult fit_converted(const ConvertedBatch& batch, const FitConfig& config);

/// Identifies the rank, converts defective answers and fits.
FitResult fit(const SurveyBatch& batch, const FitConfig& config);

struct LambdaScore {
  double lambda = 0.0;
  double score = 0.0;  ///< held-out mean log-likelihood
};

struct CrossValidation {
  double lambda = 0.0;
  std::vector<LambdaScore> round1;
  std::vector<LambdaScore> round2;
};

/// Held-out mean log-likelihood of one lambda (lambda1 = lambda2) under k-fold splitting.
double cross_validation_score(const SurveyBatch& batch, double lambda, const FitConfig& config);

/**
 * Two-round grid search: {0, 0.1, ..., 5}, then lambda1* +- 0.01 k for k = 0..10
 * (negative values dropped). Ties keep the smaller lambda.
 */
CrossValidation cross_validate_lambda(const SurveyBatch& batch, const FitConfig& config);

/// Expected score of every location, in original labels.
std::vector<double> estimate_utilities(const AicmParameters& params);

/// Draws one answer from the chain model, in original labels.
Scores sample_icm(const AicmParameters& params, std::mt19937_64& rng);

/// Uniformly random defective vector (rejection sampling); throws when none exists (g < 2).
Scores sample_defective(Index g, int q, std::mt19937_64& rng);

}  // namespace svcloc::aicm
