#pragma once

#include <cstdint>
#include <functional>
#include <span>
#include <string>
#include <vector>

#include "svcloc/common.hpp"

namespace svcloc::verify {

/// Outcome of one acceptance check.
struct CheckResult {
  int id = 0;
  std::string name;
  bool passed = false;
  std::string detail;
  double seconds = 0.0;
};

struct VerifyOptions {
  std::uint64_t seed = 20240601;
  Index threads = 1;
  /// Free-form progress messages from the long checks.
  std::function<void(const std::string&)> progress;
};

/// Check ids 1..12 in order, with a short name each.
std::vector<std::pair<int, std::string>> catalog();

/// Ids whose runtime is minutes rather than seconds.
bool is_long(int id);

/// Runs one check; exceptions inside a check turn into a failed result.
CheckResult run_check(int id, const VerifyOptions& options = {});

/// P(X <= successes) for X ~ Binomial(trials, p).
double binomial_cdf(Index successes, Index trials, double p);

}  // namespace svcloc::verify
