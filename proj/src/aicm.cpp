#include "svcloc/aicm.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

namespace svcloc::aicm {

namespace {

constexpr double kLogFloor = 1e-12;

double draw_unit(std::mt19937_64& rng) { return std::uniform_real_distribution<double>(0.0, 1.0)(rng); }

Index draw_index(std::span<const double> weights, std::mt19937_64& rng) {
  const double total = std::accumulate(weights.begin(), weights.end(), 0.0);
  double u = draw_unit(rng) * total;
  for (Index k = 0; k < weights.size(); ++k) {
    if (u < weights[k]) return k;
    u -= weights[k];
  }
  // Rounding left u past the last bucket: return the last positive weight.
  for (Index k = weights.size(); k-- > 0;)
    if (weights[k] > 0.0) return k;
  return weights.size() - 1;
}

void project_simplex(std::span<double> v) {
  thread_local std::vector<double> s;
  s.assign(v.begin(), v.end());
  std::sort(s.begin(), s.end(), std::greater<>());
  double cum = 0.0, theta = 0.0;
  for (Index k = 0; k < s.size(); ++k) {
    cum += s[k];
    const double t = (cum - 1.0) / static_cast<double>(k + 1);
    if (s[k] - t > 0.0) theta = t;
  }
  for (double& x : v) x = std::max(0.0, x - theta);
}

// Sufficient statistics of a converted batch.
struct Counts {
  Index g = 0;
  int q = 0;
  double n = 0.0;
  std::vector<double> pattern;  // g + 1
  std::vector<double> cell;     // rows * q
};

Counts count(const ConvertedBatch& b) {
  Counts c;
  c.g = b.g;
  c.q = b.q;
  c.n = static_cast<double>(b.qualified.size());
  c.pattern.assign(b.g + 1, 0.0);
  c.cell.assign(AicmParameters::num_rows(b.g) * static_cast<Index>(b.q), 0.0);
  for (Index k = 0; k < b.qualified.size(); ++k) {
    const Index i = b.pattern[k];
    c.pattern[i] += 1.0;
    for (Index j = i; j < b.g; ++j)
      c.cell[AicmParameters::row(b.g, i, j) * static_cast<Index>(b.q) + static_cast<Index>(b.qualified[k][j] - 1)] += 1.0;
  }
  return c;
}

// Flat parameter vector: p (g+1 entries) followed by the pi rows.
struct Layout {
  Index g = 0;
  Index q = 0;
  Index rows = 0;
  Index size() const { return g + 1 + rows * q; }
  Index cell(Index row, Index r0) const { return g + 1 + row * q + r0; }
};

std::vector<double> flatten(const AicmParameters& a) {
  std::vector<double> x(a.p);
  for (const auto& row : a.pi) x.insert(x.end(), row.begin(), row.end());
  return x;
}

void unflatten(const Layout& L, std::span<const double> x, AicmParameters& a) {
  a.p.assign(x.begin(), x.begin() + static_cast<long>(L.g + 1));
  a.pi.assign(L.rows, std::vector<double>(L.q));
  for (Index r = 0; r < L.rows; ++r)
    for (Index s = 0; s < L.q; ++s) a.pi[r][s] = x[L.cell(r, s)];
}

void project(const Layout& L, std::span<double> x) {
  project_simplex(x.subspan(0, L.g + 1));
  for (Index r = 0; r < L.rows; ++r) project_simplex(x.subspan(L.cell(r, 0), L.q));
}

// Training objective: exact log-likelihood from counts plus both penalties.
class Objective {
 public:
  Objective(Counts counts, double lambda1, double lambda2) : c_(std::move(counts)) {
    L_.g = c_.g;
    L_.q = static_cast<Index>(c_.q);
    L_.rows = AicmParameters::num_rows(c_.g);
    const double g = static_cast<double>(c_.g);
    w1_ = 2.0 * lambda1 / (g * (g + 1.0));
    w2_ = c_.g > 1 ? lambda2 / (g - 1.0) : 0.0;
  }

  const Layout& layout() const { return L_; }

  double value(std::span<const double> x, std::vector<double>* grad) const {
    if (grad) grad->assign(x.size(), 0.0);
    double f = 0.0;
    const double inv_n = c_.n > 0.0 ? 1.0 / c_.n : 0.0;
    auto nll_term = [&](double cnt, Index at) {
      if (cnt == 0.0) return;
      if (x[at] <= 0.0) {
        f = kInfinity;
        return;
      }
      f -= inv_n * cnt * std::log(x[at]);
      if (grad) (*grad)[at] -= inv_n * cnt / x[at];
    };
    for (Index i = 0; i <= L_.g; ++i) nll_term(c_.pattern[i], i);
    for (Index r = 0; r < L_.rows; ++r)
      for (Index s = 0; s < L_.q; ++s) nll_term(c_.cell[r * L_.q + s], L_.cell(r, s));
    if (!std::isfinite(f)) return f;

    thread_local std::vector<double> mean, w;
    mean.assign(L_.rows, 0.0);
    for (Index r = 0; r < L_.rows; ++r) {
      double m1 = 0.0, m2 = 0.0;
      for (Index s = 0; s < L_.q; ++s) {
        const double score = static_cast<double>(s + 1);
        m1 += score * x[L_.cell(r, s)];
        m2 += score * score * x[L_.cell(r, s)];
      }
      mean[r] = m1;
      if (w1_ != 0.0) {
        f += w1_ * (m2 - m1 * m1);
        if (grad)
          for (Index s = 0; s < L_.q; ++s) {
            const double score = static_cast<double>(s + 1);
            (*grad)[L_.cell(r, s)] += w1_ * (score * score - 2.0 * score * m1);
          }
      }
    }
    if (w2_ != 0.0) {
      for (Index j = 0; j + 1 < L_.g; ++j) {
        const double n = static_cast<double>(j + 1);
        w.assign(j + 1, 0.0);
        double sw = 0.0, sw2 = 0.0;
        for (Index i = 0; i <= j; ++i) {
          w[i] = mean[AicmParameters::row(L_.g, i, j + 1)] - mean[AicmParameters::row(L_.g, i, j)];
          sw += w[i];
          sw2 += w[i] * w[i];
        }
        f += w2_ * (sw2 / n - sw * sw / (n * n));
        if (!grad) continue;
        for (Index i = 0; i <= j; ++i) {
          const double dw = w2_ * (2.0 * w[i] / n - 2.0 * sw / (n * n));
          const Index hi = AicmParameters::row(L_.g, i, j + 1), lo = AicmParameters::row(L_.g, i, j);
          for (Index s = 0; s < L_.q; ++s) {
            const double score = static_cast<double>(s + 1);
            (*grad)[L_.cell(hi, s)] += dw * score;
            (*grad)[L_.cell(lo, s)] -= dw * score;
          }
        }
      }
    }
    return f;
  }

 private:
  Counts c_;
  Layout L_;
  double w1_ = 0.0, w2_ = 0.0;
};

struct LocalResult {
  std::vector<double> x;
  double f = kInfinity;
  Index iterations = 0;
  bool converged = false;
};

// Spectral projected gradient: direction P(x - alpha g) - x, nonmonotone
// Armijo backtracking against the largest of the last kMemory values.
LocalResult minimize(const Objective& obj, std::vector<double> x, double tol, Index max_iter) {
  constexpr Index kMemory = 10;
  const Layout& L = obj.layout();
  project(L, x);
  LocalResult res;
  std::vector<double> g, gn, xn(x.size()), d(x.size()), z(x.size());
  double f = obj.value(x, &g);
  if (!std::isfinite(f)) return res;
  std::vector<double> recent{f};
  double alpha = 1.0;
  Index it = 0;
  for (; it < max_iter; ++it) {
    for (Index k = 0; k < x.size(); ++k) z[k] = x[k] - g[k];
    project(L, z);
    double crit = 0.0;
    for (Index k = 0; k < x.size(); ++k) crit += (z[k] - x[k]) * (z[k] - x[k]);
    if (std::sqrt(crit) <= tol) {
      res.converged = true;
      break;
    }
    for (Index k = 0; k < x.size(); ++k) d[k] = x[k] - alpha * g[k];
    project(L, d);
    double gd = 0.0;
    for (Index k = 0; k < x.size(); ++k) {
      d[k] -= x[k];
      gd += g[k] * d[k];
    }
    const double ref = *std::max_element(recent.begin(), recent.end());
    double step = 1.0, fn = kInfinity;
    for (;;) {
      for (Index k = 0; k < x.size(); ++k) xn[k] = x[k] + step * d[k];
      fn = obj.value(xn, &gn);
      if (std::isfinite(fn) && fn <= ref + 1e-4 * step * gd) break;
      step *= 0.5;
      if (step < 1e-30) break;
    }
    if (step < 1e-30) break;  // no descent possible at working precision
    double ss = 0.0, sy = 0.0;
    for (Index k = 0; k < x.size(); ++k) {
      const double s = xn[k] - x[k], y = gn[k] - g[k];
      ss += s * s;
      sy += s * y;
    }
    alpha = sy > 0.0 ? std::clamp(ss / sy, 1e-12, 1e12) : 1e12;
    x.swap(xn);
    g.swap(gn);
    f = fn;
    recent.push_back(f);
    if (recent.size() > kMemory) recent.erase(recent.begin());
  }
  res.x = std::move(x);
  res.f = f;
  res.iterations = it;
  return res;
}

double floored_log_probability(std::span<const int> ranked, Index pattern, const AicmParameters& a) {
  double pr = a.p[pattern];
  for (Index j = pattern; j < a.g; ++j) pr *= a.pi_row(pattern, j)[static_cast<Index>(ranked[j] - 1)];
  return std::log(std::max(pr, kLogFloor));
}

SurveyBatch subset(const SurveyBatch& batch, Index folds, Index fold, bool held_out) {
  SurveyBatch out{batch.g, batch.q, {}};
  for (Index k = 0; k < batch.scores.size(); ++k)
    if ((k % folds == fold) == held_out) out.scores.push_back(batch.scores[k]);
  return out;
}

}  // namespace

void SurveyBatch::check() const {
  if (g == 0) throw SchemaError("survey must cover at least one location");
  if (q < 1) throw SchemaError("maximum score must be at least 1");
  for (Index k = 0; k < scores.size(); ++k) {
    if (scores[k].size() != g) throw SchemaError("answer " + std::to_string(k) + " has the wrong length");
    for (int s : scores[k])
      if (s < 0 || s > q) throw SchemaError("answer " + std::to_string(k) + " has a score out of range");
  }
}

std::vector<Index> SurveyBatch::willing_counts() const {
  std::vector<Index> c(g, 0);
  for (const auto& v : scores)
    for (Index j = 0; j < g; ++j)
      if (v[j] >= 1) ++c[j];
  return c;
}

RankPermutation RankPermutation::identity(Index g) {
  RankPermutation r;
  r.order.resize(g);
  std::iota(r.order.begin(), r.order.end(), Index{0});
  return r;
}

Scores RankPermutation::to_ranked(std::span<const int> original) const {
  Scores out(order.size());
  for (Index k = 0; k < order.size(); ++k) out[k] = original[order[k]];
  return out;
}

Scores RankPermutation::to_original(std::span<const int> ranked) const {
  Scores out(order.size());
  for (Index k = 0; k < order.size(); ++k) out[order[k]] = ranked[k];
  return out;
}

RankPermutation identify_rank(const SurveyBatch& batch) {
  const auto counts = batch.willing_counts();
  RankPermutation r = RankPermutation::identity(batch.g);
  std::stable_sort(r.order.begin(), r.order.end(), [&](Index a, Index b) { return counts[a] < counts[b]; });
  for (Index k = 1; k < r.order.size(); ++k)
    if (counts[r.order[k]] == counts[r.order[k - 1]]) r.ties = true;
  return r;
}

std::optional<Index> pattern_index(std::span<const int> v) {
  Index k = 0;
  while (k < v.size() && v[k] == 0) ++k;
  for (Index j = k; j < v.size(); ++j)
    if (v[j] == 0) return std::nullopt;
  return k;
}

DefectResult defective_score_quantity(std::span<const int> v) {
  const Index g = v.size();
  // cost(k) = sum_{j<k} v_j + #{j >= k : v_j = 0}
  Index zeros_after = 0;
  for (int s : v)
    if (s == 0) ++zeros_after;
  Index prefix = 0;
  DefectResult best;
  best.quantity = zeros_after;
  best.pattern = 0;
  for (Index k = 1; k <= g; ++k) {
    prefix += static_cast<Index>(v[k - 1]);
    if (v[k - 1] == 0) --zeros_after;
    const Index cost = prefix + zeros_after;
    if (cost < best.quantity) {
      best.quantity = cost;
      best.pattern = k;
    }
  }
  best.qualified.assign(v.begin(), v.end());
  for (Index j = 0; j < g; ++j) {
    if (j < best.pattern) best.qualified[j] = 0;
    else if (best.qualified[j] == 0) best.qualified[j] = 1;
  }
  return best;
}

double rank_success_bound(Index N, Index g, double m0, double pstar) {
  const double e = m0 * (1.0 + pstar) - 1.0;
  return 1.0 - static_cast<double>(g - 1) * std::exp(-0.5 * static_cast<double>(N) * e * e);
}

bool rank_bound_premise(double m0, double pstar) { return m0 * (1.0 + pstar) > 1.0; }

double AicmParameters::simplex_violation() const {
  double worst = 0.0;
  auto block = [&](const std::vector<double>& v) {
    double s = 0.0;
    for (double x : v) {
      worst = std::max(worst, -x);
      s += x;
    }
    worst = std::max(worst, std::abs(s - 1.0));
  };
  block(p);
  for (const auto& row : pi) block(row);
  if (!m.empty()) block(m);
  return worst;
}

void AicmParameters::check(double tol) const {
  if (p.size() != g + 1) throw SchemaError("pattern probabilities must have g + 1 entries");
  if (pi.size() != num_rows(g)) throw SchemaError("score distributions must have g (g + 1) / 2 rows");
  for (const auto& row : pi)
    if (row.size() != static_cast<Index>(q)) throw SchemaError("score distribution rows must have q entries");
  if (!m.empty() && m.size() != g) throw SchemaError("defect probabilities must have g entries");
  if (rank.order.size() != g) throw SchemaError("rank must list every location");
  if (simplex_violation() > tol) throw SchemaError("parameters are not probability distributions");
}

double sample_probability(std::span<const int> ranked, const AicmParameters& a) {
  const auto k = pattern_index(ranked);
  if (!k) throw std::invalid_argument("sample_probability needs a qualified vector");
  double pr = a.p[*k];
  for (Index j = *k; j < a.g; ++j) {
    const int s = ranked[j];
    if (s < 1 || s > a.q) throw std::invalid_argument("score out of range");
    pr *= a.pi_row(*k, j)[static_cast<Index>(s - 1)];
  }
  return pr;
}

ConvertedBatch convert(const SurveyBatch& batch, const RankPermutation& rank) {
  ConvertedBatch c;
  c.g = batch.g;
  c.q = batch.q;
  c.rank = rank;
  for (const auto& v : batch.scores) {
    auto d = defective_score_quantity(rank.to_ranked(v));
    c.pattern.push_back(d.pattern);
    c.defect.push_back(d.quantity);
    c.qualified.push_back(std::move(d.qualified));
  }
  return c;
}

double variance_penalty(const AicmParameters& a) {
  double total = 0.0;
  for (const auto& row : a.pi) {
    double m1 = 0.0, m2 = 0.0;
    for (Index s = 0; s < row.size(); ++s) {
      const double r = static_cast<double>(s + 1);
      m1 += r * row[s];
      m2 += r * r * row[s];
    }
    total += m2 - m1 * m1;
  }
  return total;
}

double difference_penalty(const AicmParameters& a) {
  auto mean = [&](Index i, Index j) {
    double m = 0.0;
    const auto& row = a.pi_row(i, j);
    for (Index s = 0; s < row.size(); ++s) m += static_cast<double>(s + 1) * row[s];
    return m;
  };
  double total = 0.0;
  for (Index j = 0; j + 1 < a.g; ++j) {
    const double n = static_cast<double>(j + 1);
    double sw = 0.0, sw2 = 0.0;
    for (Index i = 0; i <= j; ++i) {
      const double w = mean(i, j + 1) - mean(i, j);
      sw += w;
      sw2 += w * w;
    }
    total += sw2 / n - sw * sw / (n * n);
  }
  return total;
}

double mean_log_likelihood(const AicmParameters& a, const ConvertedBatch& b) {
  if (b.qualified.empty()) return 0.0;
  double total = 0.0;
  for (Index k = 0; k < b.qualified.size(); ++k) total += floored_log_probability(b.qualified[k], b.pattern[k], a);
  return total / static_cast<double>(b.qualified.size());
}

double loss(const AicmParameters& a, const ConvertedBatch& b, double lambda1, double lambda2) {
  const double g = static_cast<double>(a.g);
  double f = -mean_log_likelihood(a, b);
  f += 2.0 * lambda1 / (g * (g + 1.0)) * variance_penalty(a);
  if (a.g > 1) f += lambda2 / (g - 1.0) * difference_penalty(a);
  return f;
}

AicmParameters frequency_estimate(const ConvertedBatch& b) {
  const Counts c = count(b);
  AicmParameters a;
  a.g = b.g;
  a.q = b.q;
  a.rank = b.rank;
  a.p.assign(b.g + 1, 0.0);
  if (c.n > 0.0)
    for (Index i = 0; i <= b.g; ++i) a.p[i] = c.pattern[i] / c.n;
  else
    a.p[b.g] = 1.0;
  const Index q = static_cast<Index>(b.q);
  a.pi.assign(AicmParameters::num_rows(b.g), std::vector<double>(q, 1.0 / static_cast<double>(q)));
  for (Index r = 0; r < a.pi.size(); ++r) {
    double total = 0.0;
    for (Index s = 0; s < q; ++s) total += c.cell[r * q + s];
    if (total > 0.0)
      for (Index s = 0; s < q; ++s) a.pi[r][s] = c.cell[r * q + s] / total;
  }
  a.m.assign(b.g, 0.0);
  if (!b.defect.empty()) {
    for (Index s : b.defect) a.m[s] += 1.0;
    for (double& v : a.m) v /= static_cast<double>(b.defect.size());
  } else {
    a.m[0] = 1.0;
  }
  return a;
}

FitResult fit_converted(const ConvertedBatch& batch, const FitConfig& config) {
  if (config.lambda1 < 0.0 || config.lambda2 < 0.0) throw std::invalid_argument("regularization weights must be >= 0");
  const AicmParameters freq = frequency_estimate(batch);
  const Objective obj(count(batch), config.lambda1, config.lambda2);
  const Layout& L = obj.layout();
  const std::vector<double> x0 = flatten(freq);
  const Index starts = std::max<Index>(1, config.starts);

  std::vector<LocalResult> runs(starts);
  parallel_for(starts, config.threads, [&](Index s) {
    std::vector<double> x = x0;
    if (s > 0) {
      std::mt19937_64 rng(child_seed(config.seed, 0xA1C3, s));
      std::exponential_distribution<double> expo(1.0);
      auto perturb = [&](Index begin, Index len) {
        std::vector<double> d(len);
        double total = 0.0;
        for (double& v : d) total += (v = expo(rng));
        for (Index k = 0; k < len; ++k) x[begin + k] = 0.5 * x[begin + k] + 0.5 * d[k] / total;
      };
      perturb(0, L.g + 1);
      for (Index r = 0; r < L.rows; ++r) perturb(L.cell(r, 0), L.q);
    }
    runs[s] = minimize(obj, std::move(x), config.tolerance, config.max_iterations);
  });

  Index best = 0;
  for (Index s = 1; s < starts; ++s)
    if (runs[s].f < runs[best].f) best = s;
  if (!std::isfinite(runs[best].f)) throw SolverError("no start reached a finite loss");

  FitResult res;
  res.params = freq;
  unflatten(L, runs[best].x, res.params);
  res.loss = loss(res.params, batch, config.lambda1, config.lambda2);
  res.iterations = runs[best].iterations;
  res.best_start = best;
  res.converged = runs[best].converged;
  return res;
}

FitResult fit(const SurveyBatch& batch, const FitConfig& config) {
  batch.check();
  return fit_converted(convert(batch, identify_rank(batch)), config);
}

double cross_validation_score(const SurveyBatch& batch, double lambda, const FitConfig& config) {
  const Index folds = config.folds;
  if (folds < 2) throw std::invalid_argument("cross validation needs at least two folds");
  if (batch.scores.size() < folds) throw std::invalid_argument("fewer answers than folds");
  FitConfig cfg = config;
  cfg.lambda1 = cfg.lambda2 = lambda;
  double total = 0.0;
  for (Index f = 0; f < folds; ++f) {
    const SurveyBatch train = subset(batch, folds, f, false);
    const SurveyBatch held = subset(batch, folds, f, true);
    cfg.seed = child_seed(config.seed, 0xC5, f);
    const FitResult r = fit(train, cfg);
    const ConvertedBatch h = convert(held, r.params.rank);
    total += mean_log_likelihood(r.params, h) * static_cast<double>(h.qualified.size());
  }
  return total / static_cast<double>(batch.scores.size());
}

CrossValidation cross_validate_lambda(const SurveyBatch& batch, const FitConfig& config) {
  batch.check();
  CrossValidation cv;
  auto scan = [&](const std::vector<double>& grid, std::vector<LambdaScore>& out) {
    out.resize(grid.size());
    for (Index k = 0; k < grid.size(); ++k) out[k] = {grid[k], cross_validation_score(batch, grid[k], config)};
    Index best = 0;
    for (Index k = 1; k < out.size(); ++k)
      if (out[k].score > out[best].score) best = k;
    return out[best].lambda;
  };
  std::vector<double> round1;
  for (int k = 0; k <= 50; ++k) round1.push_back(k / 10.0);
  const double first = scan(round1, cv.round1);

  std::vector<double> round2;
  for (int k = -10; k <= 10; ++k) {
    const double v = std::round((first + 0.01 * k) * 100.0) / 100.0;
    if (v >= 0.0) round2.push_back(v);
  }
  cv.lambda = scan(round2, cv.round2);
  return cv;
}

std::vector<double> estimate_utilities(const AicmParameters& a) {
  std::vector<double> ranked(a.g, 0.0);
  for (Index j = 0; j < a.g; ++j)
    for (Index i = 0; i <= j; ++i) {
      double mean = 0.0;
      const auto& row = a.pi_row(i, j);
      for (Index s = 0; s < row.size(); ++s) mean += static_cast<double>(s + 1) * row[s];
      ranked[j] += a.p[i] * mean;
    }
  std::vector<double> out(a.g);
  for (Index k = 0; k < a.g; ++k) out[a.rank.order[k]] = ranked[k];
  return out;
}

Scores sample_icm(const AicmParameters& a, std::mt19937_64& rng) {
  const Index i = draw_index(a.p, rng);
  Scores ranked(a.g, 0);
  for (Index j = i; j < a.g; ++j) ranked[j] = static_cast<int>(draw_index(a.pi_row(i, j), rng)) + 1;
  return a.rank.to_original(ranked);
}

Scores sample_defective(Index g, int q, std::mt19937_64& rng) {
  if (g < 2) throw std::invalid_argument("no defective vector exists for fewer than two locations");
  std::uniform_int_distribution<int> score(0, q);
  for (;;) {
    Scores v(g);
    for (int& s : v) s = score(rng);
    if (!pattern_index(v)) return v;
  }
}

}  // namespace svcloc::aicm
