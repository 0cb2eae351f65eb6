#include "svcloc/verify.hpp"

#include <algorithm>
#include <array>
#include <chrono>
#include <cmath>
#include <limits>
#include <numeric>
#include <random>
#include <sstream>

#include "svcloc/aicm.hpp"
#include "svcloc/dro.hpp"
#include "svcloc/static_models.hpp"
#include "svcloc/synth.hpp"

namespace svcloc::verify {

namespace {

using aicm::Scores;

double rel_err(double a, double b) { return std::abs(a - b) / (1.0 + std::abs(b)); }

std::string fmt(double v) {
  std::ostringstream s;
  s.precision(6);
  s << v;
  return s.str();
}

std::vector<double> random_simplex(Index n, std::mt19937_64& rng, double zero_chance = 0.0) {
  std::exponential_distribution<double> expo(1.0);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  std::vector<double> v(n);
  double total = 0.0;
  for (double& x : v) total += (x = unit(rng) < zero_chance ? 0.0 : expo(rng));
  if (total == 0.0) {
    v[rng() % n] = 1.0;
    return v;
  }
  for (double& x : v) x /= total;
  return v;
}

struct SmallCase {
  Instance instance;
  ScenarioSet scenarios;
  AmbiguitySet ambiguity;
};

// Random small instance. With `consistent`, demand is an increasing function of
// utility inside every neighborhood, shared by all scenarios, and capacities are 1e9.
SmallCase small_case(std::mt19937_64& rng, bool consistent) {
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  const Index n = 2 + rng() % 7, m = 2 + rng() % 5, W = 1 + rng() % 10;
  InstanceData d;
  d.sites = n;
  d.candidates = m;
  d.budget = static_cast<double>(1 + rng() % 3);
  for (Index j = 0; j < m; ++j) {
    d.cost.push_back(static_cast<double>(1 + rng() % 2));
    d.capacity.push_back(consistent ? 1e9 : std::round(10.0 + 70.0 * unit(rng)));
  }
  std::vector<Index> all(m);
  std::iota(all.begin(), all.end(), Index{0});
  d.neighborhood.resize(n);
  for (Index i = 0; i < n; ++i) {
    std::shuffle(all.begin(), all.end(), rng);
    const Index k = 1 + rng() % std::min<Index>(4, m);
    d.neighborhood[i].assign(all.begin(), all.begin() + static_cast<long>(k));
    std::sort(d.neighborhood[i].begin(), d.neighborhood[i].end());
    for (Index j : d.neighborhood[i]) d.utility.push_back({i, j, 1.0 + std::round(40.0 * unit(rng)) / 10.0});
  }
  SmallCase out{Instance::build(d), {}, {}};
  const auto& inst = out.instance;
  std::vector<double> power(n);
  for (double& e : power) e = 0.5 + 1.5 * unit(rng);
  std::vector<std::vector<double>> table(W, std::vector<double>(inst.num_arcs()));
  for (Index w = 0; w < W; ++w)
    for (Index i = 0; i < n; ++i) {
      const double base = 5.0 + 15.0 * unit(rng);
      for (Index a = inst.arc_begin(i); a < inst.arc_end(i); ++a)
        table[w][a] = consistent ? std::round(base * std::pow(inst.utility(a), power[i]))
                                 : std::round(5.0 + 45.0 * unit(rng));
    }
  out.scenarios = ScenarioSet(inst.num_arcs(), std::move(table));
  out.ambiguity.nominal = random_simplex(W, rng, 0.1);
  out.ambiguity.radius = 0.6 * unit(rng);
  return out;
}

LocationDecision random_decision(const Instance& inst, std::mt19937_64& rng) {
  LocationDecision y(inst.num_candidates());
  for (Index j = 0; j < inst.num_candidates(); ++j) y.set(j, rng() % 2 == 0);
  return y;
}

// ---------------------------------------------------------------- 1

CheckResult solver_equivalence(const VerifyOptions& opt) {
  std::mt19937_64 rng(child_seed(opt.seed, 1));
  const int cases = 60;
  double worst = 0.0;
  int bad = 0;
  for (int c = 0; c < cases; ++c) {
    const auto sc = small_case(rng, true);
    if (!check_consistency(sc.instance, sc.scenarios).strong) return {1, "", false, "generator produced inconsistent demand", 0};
    DroOptions dro;
    dro.threads = opt.threads;
    dro.duals = std::array{DualSelection::Pareto, DualSelection::Canonical, DualSelection::Raw}[c % 3];
    const double a = solve_dro(sc.instance, sc.scenarios, sc.ambiguity, dro).value;
    const double b = solve_uncap_reformulation(sc.instance, sc.scenarios, sc.ambiguity).objective;
    const double e = brute_force_dro(sc.instance, sc.scenarios, sc.ambiguity, opt.threads).objective;
    const double err = std::max(rel_err(a, e), rel_err(b, e));
    worst = std::max(worst, err);
    bad += err > 1e-5;
  }
  return {1, "", bad == 0, std::to_string(cases) + " instances, worst relative gap " + fmt(worst), 0};
}

// ---------------------------------------------------------------- 2

CheckResult inner_duality(const VerifyOptions& opt) {
  std::mt19937_64 rng(child_seed(opt.seed, 2));
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  double worst = 0.0, ball = 0.0;
  for (int t = 0; t < 1000; ++t) {
    const Index W = 1 + rng() % 30;
    std::vector<double> Q(W);
    // Coarse values produce ties on purpose.
    for (double& q : Q) q = t % 2 ? std::round(10.0 * unit(rng)) : 1000.0 * unit(rng);
    AmbiguitySet amb{random_simplex(W, rng, 0.2), 2.0 * unit(rng)};
    const auto g = worst_case_measure(Q, amb);
    const auto l = worst_case_measure_lp(Q, amb);
    worst = std::max(worst, std::abs(g.value - l.value) / (1.0 + std::abs(l.value)));
    double tv = 0.0, mass = 0.0;
    for (Index w = 0; w < W; ++w) {
      tv += std::abs(g.mu[w] - amb.nominal[w]);
      mass += g.mu[w];
      if (g.mu[w] < 0.0) ball = std::max(ball, -g.mu[w]);
    }
    ball = std::max({ball, tv - amb.radius, std::abs(mass - 1.0)});
  }
  const bool ok = worst <= 1e-9 && ball <= 1e-12;
  return {2, "", ok, "1000 triples, worst gap " + fmt(worst) + ", worst ball violation " + fmt(ball), 0};
}

// ---------------------------------------------------------------- 3

CheckResult cut_validity(const VerifyOptions& opt) {
  std::mt19937_64 rng(child_seed(opt.seed, 3));
  Index cuts = 0;
  double tight = 0.0, violation = 0.0;
  for (int c = 0; c < 30; ++c) {
    const auto sc = small_case(rng, c % 2 == 0);
    const auto& inst = sc.instance;
    const auto feasible = enumerate_feasible(inst);
    std::vector<std::vector<double>> values(feasible.size());
    for (Index k = 0; k < feasible.size(); ++k)
      for (Index w = 0; w < sc.scenarios.size(); ++w)
        values[k].push_back(evaluate_recourse(inst, feasible[k], sc.scenarios.demand(w), DualSelection::Raw).value);

    DroOptions dro;
    dro.threads = opt.threads;
    dro.duals = std::array{DualSelection::Pareto, DualSelection::Canonical, DualSelection::Raw}[c % 3];
    dro.on_cut = [&](const AggregatedCut& cut, const LocationDecision& y) {
      ++cuts;
      const double v = certified_value(inst, y, sc.scenarios, sc.ambiguity);
      tight = std::max(tight, std::abs(cut.evaluate(y) - v) / (1.0 + std::abs(v)));
      for (int t = 0; t < 100; ++t) {
        const Index k = rng() % feasible.size();
        double expect = 0.0;
        for (Index w = 0; w < sc.scenarios.size(); ++w) {
          expect += cut.mu[w] * values[k][w];
          const double q = values[k][w];
          violation = std::max(violation, (q - cut.scenario_cuts[w].evaluate(feasible[k])) / (1.0 + q));
        }
        violation = std::max(violation, (expect - cut.evaluate(feasible[k])) / (1.0 + expect));
      }
    };
    solve_dro(inst, sc.scenarios, sc.ambiguity, dro);
  }
  const bool ok = tight <= 1e-6 && violation <= 1e-6;
  return {3, "", ok,
          std::to_string(cuts) + " cuts, worst gap at generating y " + fmt(tight) + ", worst domination violation " +
              fmt(std::max(violation, 0.0)),
          0};
}

// ---------------------------------------------------------------- 4

CheckResult uncap_closed_form(const VerifyOptions& opt) {
  std::mt19937_64 rng(child_seed(opt.seed, 4));
  double worst = 0.0;
  for (int c = 0; c < 200; ++c) {
    const auto sc = small_case(rng, true);
    const auto& inst = sc.instance;
    const auto y = random_decision(inst, rng);
    const auto D = sc.scenarios.demand(rng() % sc.scenarios.size());
    double expect = 0.0;
    for (Index i = 0; i < inst.num_sites(); ++i) {
      double best = 0.0;
      for (Index a = inst.arc_begin(i); a < inst.arc_end(i); ++a)
        if (y.is_open(inst.arc_candidate(a))) best = std::max(best, inst.utility(a) * D[a]);
      expect += best;
    }
    worst = std::max(worst, rel_err(evaluate_recourse(inst, y, D).value, expect));
  }
  return {4, "", worst <= 1e-8, "200 cases, worst relative gap " + fmt(worst), 0};
}

// ---------------------------------------------------------------- 5

constexpr Index kIterationLimit = 30;

CheckResult termination(const VerifyOptions& opt) {
  bool ok = true;
  std::ostringstream detail;
  for (auto [sites, budget] : {std::pair<Index, double>{20, 5}, {40, 10}, {60, 20}}) {
    InstanceGenConfig cfg;
    cfg.sites = sites;
    cfg.budget = budget;
    cfg.seed = opt.seed;
    const auto g = generate_instance(cfg);
    DroOptions dro;
    dro.threads = 1;
    dro.max_iterations = kIterationLimit;
    if (opt.progress)
      dro.on_iteration = [&](const IterationRecord& r) {
        opt.progress("(" + std::to_string(sites) + "," + fmt(budget) + ") iteration " + std::to_string(r.n) +
                     " eta " + fmt(r.eta) + " best " + fmt(r.best_certified));
      };
    const auto sol = solve_dro(g.instance, g.scenarios, g.ambiguity, dro);
    const bool fast = sites != 60 || sol.seconds < 600.0;
    ok = ok && sol.converged && fast;
    detail << "(" << sites << "," << budget << "): " << (sol.converged ? "converged" : "not converged") << " after "
           << sol.iterations << " iterations, " << fmt(sol.seconds) << " s, gap " << fmt(sol.gap() / sol.eta)
           << "; ";
  }
  return {5, "", ok, detail.str(), 0};
}

// ---------------------------------------------------------------- 6

CheckResult d_monotonicity(const VerifyOptions& opt) {
  InstanceGenConfig cfg;
  cfg.sites = 60;
  cfg.budget = 20;
  cfg.seed = opt.seed;
  const auto g = generate_instance(cfg);
  std::vector<double> grid;
  for (int k = 0; k <= 8; ++k) grid.push_back(0.05 * k);
  DroOptions dro;
  dro.threads = opt.threads;
  dro.max_iterations = kIterationLimit;
  std::vector<SweepRow> rows;
  for (double d : grid) {
    const double one[] = {d};
    rows.push_back(sweep_d(g.instance, g.scenarios, g.ambiguity.nominal, one, dro).front());
    if (opt.progress) opt.progress("d=" + fmt(d) + " objective " + fmt(rows.back().objective));
  }
  bool solved = true, monotone = true;
  std::ostringstream detail;
  detail << "objectives";
  for (Index k = 0; k < rows.size(); ++k) {
    solved = solved && rows[k].ok && rows[k].converged;
    if (k > 0 && rows[k].objective > rows[k - 1].objective * (1.0 + 1e-9)) monotone = false;
    detail << ' ' << fmt(rows[k].objective) << (rows[k].converged ? "" : "*");
  }
  const double drop = (rows.front().objective - rows.back().objective) / rows.front().objective;
  const bool ok = solved && monotone && drop >= 0.001 && drop <= 0.1;
  detail << " (* = not converged within " << kIterationLimit << " iterations); decrement " << fmt(100.0 * drop)
         << "%";
  if (!monotone) detail << "; not monotone";
  return {6, "", ok, detail.str(), 0};
}

// ---------------------------------------------------------------- 7

CheckResult aicm_recovery(const VerifyOptions& opt) {
  const std::vector<double> table{0.87, 2.88, 3.94, 1.78};
  const std::vector<Index> truth{0, 3, 1, 2};
  std::vector<double> mean(4, 0.0);
  Index hits = 0;
  double lambda_sum = 0.0;
  for (std::uint64_t seed = 1; seed <= 100; ++seed) {
    SurveySimConfig sim;
    sim.seed = seed;
    const auto batch = simulate_survey(sim);
    hits += aicm::identify_rank(batch).order == truth;
    aicm::FitConfig fc;
    fc.seed = seed;
    fc.threads = opt.threads;
    const double lambda = aicm::cross_validate_lambda(batch, fc).lambda;
    fc.lambda1 = fc.lambda2 = lambda;
    lambda_sum += lambda;
    const auto u = aicm::estimate_utilities(aicm::fit(batch, fc).params);
    for (Index j = 0; j < 4; ++j) mean[j] += u[j] / 100.0;
    if (opt.progress) opt.progress("seed " + std::to_string(seed) + " lambda " + fmt(lambda));
  }
  bool close = true;
  std::ostringstream detail;
  detail << "rank hits " << hits << "/100; mean scores";
  for (Index j = 0; j < 4; ++j) {
    close = close && std::abs(mean[j] - table[j]) <= 0.3;
    detail << ' ' << fmt(mean[j]);
  }
  detail << " vs 0.87 2.88 3.94 1.78; mean lambda " << fmt(lambda_sum / 100.0);
  return {7, "", hits >= 95 && close, detail.str(), 0};
}

// ---------------------------------------------------------------- 8

CheckResult frequency_limit(const VerifyOptions& opt) {
  double worst = 0.0;
  for (std::uint64_t seed = 1; seed <= 10; ++seed) {
    SurveySimConfig sim;
    sim.seed = child_seed(opt.seed, 8, seed);
    const auto batch = simulate_survey(sim);
    const auto conv = aicm::convert(batch, aicm::identify_rank(batch));
    aicm::FitConfig fc;
    fc.seed = seed;
    fc.threads = opt.threads;
    const auto fit = aicm::fit_converted(conv, fc).params;

    // Closed form: pattern shares and score shares per (pattern, location).
    const Index g = conv.g;
    const auto q = static_cast<Index>(conv.q);
    std::vector<double> count(g + 1, 0.0);
    std::vector<std::vector<double>> scores(aicm::AicmParameters::num_rows(g), std::vector<double>(q, 0.0));
    for (Index k = 0; k < conv.qualified.size(); ++k) {
      const Index i = conv.pattern[k];
      count[i] += 1.0;
      for (Index j = i; j < g; ++j) scores[aicm::AicmParameters::row(g, i, j)][conv.qualified[k][j] - 1] += 1.0;
    }
    for (Index i = 0; i <= g; ++i) {
      worst = std::max(worst, std::abs(fit.p[i] - count[i] / static_cast<double>(conv.qualified.size())));
      if (i == g || count[i] == 0.0) continue;
      for (Index j = i; j < g; ++j)
        for (Index r = 0; r < q; ++r)
          worst = std::max(worst, std::abs(fit.pi_row(i, j)[r] - scores[aicm::AicmParameters::row(g, i, j)][r] / count[i]));
    }
  }
  return {8, "", worst <= 1e-3, "10 batches, worst deviation " + fmt(worst), 0};
}

// ---------------------------------------------------------------- 9

// Closest member of each pattern class, coordinate by coordinate.
Index projection_enumeration(const Scores& v, int q) {
  Index best = std::numeric_limits<Index>::max();
  for (Index k = 0; k <= v.size(); ++k) {
    Index d = 0;
    for (Index j = 0; j < v.size(); ++j) {
      int c = std::abs(v[j]);
      if (j >= k) {
        c = q + 1;
        for (int s = 1; s <= q; ++s) c = std::min(c, std::abs(v[j] - s));
      }
      d += static_cast<Index>(c);
    }
    best = std::min(best, d);
  }
  return best;
}

CheckResult defect_logic(const VerifyOptions& opt) {
  std::mt19937_64 rng(child_seed(opt.seed, 9));
  Index mismatches = 0, over = 0, bad_witness = 0;
  for (int t = 0; t < 10000; ++t) {
    const Index g = 1 + rng() % 8;
    const int q = 1 + static_cast<int>(rng() % 5);
    Scores v(g);
    for (int& x : v) x = static_cast<int>(rng() % static_cast<unsigned>(q + 1));
    const auto r = aicm::defective_score_quantity(v);
    mismatches += r.quantity != projection_enumeration(v, q);
    over += r.quantity > g - 1;
    Index dist = 0;
    for (Index j = 0; j < g; ++j) dist += static_cast<Index>(std::abs(r.qualified[j] - v[j]));
    bad_witness += dist != r.quantity || !aicm::pattern_index(r.qualified);
  }
  const Index worked = aicm::defective_score_quantity(Scores{0, 0, 5, 7, 0, 0, 7, 6, 9}).quantity;
  const bool ok = mismatches == 0 && over == 0 && bad_witness == 0 && worked == 2;
  return {9, "", ok,
          "10000 vectors: " + std::to_string(mismatches) + " mismatches, " + std::to_string(over) +
              " above g-1, " + std::to_string(bad_witness) + " bad witnesses; worked example " + std::to_string(worked),
          0};
}

// ---------------------------------------------------------------- 10

CheckResult rank_bound(const VerifyOptions& opt) {
  struct Setting {
    Index g;
    Index N;
    double m0;
    std::vector<double> p;
  };
  const std::vector<Setting> settings{
      {4, 400, 0.95, {0.22, 0.22, 0.22, 0.22, 0.12}},
      {3, 300, 0.90, {0.3, 0.3, 0.3, 0.1}},
      {5, 300, 1.00, {0.15, 0.15, 0.15, 0.15, 0.15, 0.25}},
      {4, 1000, 0.90, {0.25, 0.25, 0.2, 0.28, 0.02}},
  };
  std::mt19937_64 rng(child_seed(opt.seed, 10));
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  bool ok = true;
  std::ostringstream detail;
  for (const auto& s : settings) {
    aicm::AicmParameters a;
    a.g = s.g;
    a.q = 5;
    a.p = s.p;
    for (Index r = 0; r < aicm::AicmParameters::num_rows(s.g); ++r) a.pi.push_back(random_simplex(5, rng));
    a.m.assign(s.g, 1.0 / static_cast<double>(s.g));
    a.rank.order.resize(s.g);
    std::iota(a.rank.order.begin(), a.rank.order.end(), Index{0});
    std::shuffle(a.rank.order.begin(), a.rank.order.end(), rng);
    const double pstar = *std::min_element(s.p.begin(), s.p.end() - 1);
    const double bound = aicm::rank_success_bound(s.N, s.g, s.m0, pstar);
    Index wins = 0;
    for (int t = 0; t < 500; ++t) {
      aicm::SurveyBatch batch{s.g, 5, {}};
      for (Index k = 0; k < s.N; ++k)
        batch.scores.push_back(unit(rng) < s.m0 ? aicm::sample_icm(a, rng)
                                                : a.rank.to_original(aicm::sample_defective(s.g, 5, rng)));
      const auto rank = aicm::identify_rank(batch);
      wins += !rank.ties && rank.order == a.rank.order;
    }
    const double tail = binomial_cdf(wins, 500, bound);
    ok = ok && bound > 0.0 && tail >= 0.01;
    detail << "g=" << s.g << " N=" << s.N << " bound " << fmt(bound) << " success " << wins << "/500; ";
  }
  return {10, "", ok, detail.str(), 0};
}

// ---------------------------------------------------------------- 11

CheckResult nestedness(const VerifyOptions& opt) {
  Index broken = 0, vectors = 0;
  for (std::uint64_t seed = 1; seed <= 20; ++seed) {
    SurveySimConfig sim;
    sim.seed = child_seed(opt.seed, 11, seed);
    sim.samples = 50 + 10 * seed;
    aicm::FitConfig fc;
    fc.lambda1 = fc.lambda2 = 0.1 * static_cast<double>(seed % 5);
    fc.starts = 2;
    fc.threads = opt.threads;
    const auto params = aicm::fit(simulate_survey(sim), fc).params;
    std::mt19937_64 rng(sim.seed);
    const Index g = params.g;
    // V_j as membership flags; nested along the fitted rank order.
    std::vector<std::vector<bool>> willing(g);
    for (int k = 0; k < 2000; ++k) {
      const Scores v = aicm::sample_icm(params, rng);
      for (Index j = 0; j < g; ++j) willing[j].push_back(v[j] >= 1);
      ++vectors;
    }
    for (Index k = 0; k + 1 < g; ++k) {
      const auto& low = willing[params.rank.order[k]];
      const auto& high = willing[params.rank.order[k + 1]];
      for (Index s = 0; s < low.size(); ++s) broken += low[s] && !high[s];
    }
  }
  return {11, "", broken == 0, std::to_string(vectors) + " sampled vectors, " + std::to_string(broken) + " violations",
          0};
}

// ---------------------------------------------------------------- 12

// Independent optimality certificate of an LP solution; returns the worst scaled residual.
double certificate_residual(const lp::LinearProgram& p, const lp::LpSolution& s) {
  const double sense = p.sense() == lp::Sense::Maximize ? 1.0 : -1.0;
  const double scale = 1.0 + std::abs(s.objective);
  double worst = 0.0;
  std::vector<double> rc(p.num_variables());
  for (Index v = 0; v < p.num_variables(); ++v) {
    rc[v] = p.objective(v);
    worst = std::max({worst, p.lower(v) - s.primal[v], s.primal[v] - p.upper(v)});
  }
  double dual_obj = 0.0, primal_obj = 0.0;
  for (Index r = 0; r < p.num_rows(); ++r) {
    const auto& row = p.row(r);
    double lhs = 0.0;
    for (auto [v, c] : row.terms) {
      lhs += c * s.primal[v];
      rc[v] -= s.dual[r] * c;
    }
    const double slack = row.rhs - lhs;
    const double y = sense * s.dual[r];
    if (row.type == lp::RowType::LessEqual) worst = std::max({worst, -slack, -y});
    if (row.type == lp::RowType::GreaterEqual) worst = std::max({worst, slack, y});
    if (row.type == lp::RowType::Equal) worst = std::max(worst, std::abs(slack));
    worst = std::max(worst, std::abs(s.dual[r] * slack) / scale);
    dual_obj += s.dual[r] * row.rhs;
  }
  for (Index v = 0; v < p.num_variables(); ++v) {
    primal_obj += p.objective(v) * s.primal[v];
    worst = std::max(worst, std::abs(rc[v] - s.reduced_cost[v]) / scale);
    const double d = sense * rc[v];
    // Positive d pushes the variable up, so it must sit at its upper bound.
    if (d > 0.0) {
      if (!std::isfinite(p.upper(v))) return kInfinity;
      worst = std::max(worst, d * (p.upper(v) - s.primal[v]) / scale);
      dual_obj += rc[v] * p.upper(v);
    } else if (d < 0.0) {
      if (!std::isfinite(p.lower(v))) return kInfinity;
      worst = std::max(worst, -d * (s.primal[v] - p.lower(v)) / scale);
      dual_obj += rc[v] * p.lower(v);
    }
  }
  worst = std::max({worst, std::abs(primal_obj - s.objective) / scale, std::abs(dual_obj - s.objective) / scale});
  return worst;
}

CheckResult kernel_soundness(const VerifyOptions& opt) {
  std::mt19937_64 rng(child_seed(opt.seed, 12));
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  int mismatches = 0;
  Index lps = 0;
  double worst_certificate = 0.0;
  auto certify = [&](const lp::LinearProgram& p, const lp::LpSolution& s) {
    ++lps;
    if (s.status == lp::Status::Optimal) worst_certificate = std::max(worst_certificate, certificate_residual(p, s));
  };
  for (int t = 0; t < 100; ++t) {
    const Index k = 1 + rng() % 10, cont = t % 2 ? rng() % 4 : 0, rows = 1 + rng() % 6;
    lp::MixedBinaryProgram mbp;
    mbp.lp = lp::LinearProgram(t % 3 ? lp::Sense::Maximize : lp::Sense::Minimize);
    for (Index b = 0; b < k; ++b)
      mbp.binaries.push_back(mbp.lp.add_variable(std::round(20.0 * unit(rng) - 8.0), 0.0, 1.0));
    for (Index c = 0; c < cont; ++c) mbp.lp.add_variable(std::round(10.0 * unit(rng) - 4.0), 0.0, 1.0 + 4.0 * unit(rng));
    const Index nvar = k + cont;
    for (Index r = 0; r < rows; ++r) {
      std::vector<lp::Term> terms;
      for (Index v = 0; v < nvar; ++v)
        if (unit(rng) < 0.7) terms.emplace_back(v, std::round(15.0 * unit(rng) - 5.0));
      const auto type = r % 4 == 3 ? lp::RowType::GreaterEqual : lp::RowType::LessEqual;
      mbp.lp.add_row(std::move(terms), type, std::round(type == lp::RowType::LessEqual ? 2.0 + 10.0 * unit(rng)
                                                                                         : -3.0 + 6.0 * unit(rng)));
    }
    certify(mbp.lp, lp::solve_lp(mbp.lp));
    lp::MilpOptions mo;
    mo.abs_gap = 1e-9;
    const auto milp = lp::solve_milp(mbp, mo);

    // Enumerate every binary assignment; leftover continuous variables get an LP.
    bool any = false;
    double best = 0.0;
    const double sense = mbp.lp.sense() == lp::Sense::Maximize ? 1.0 : -1.0;
    for (Index code = 0; code < (Index{1} << k); ++code) {
      lp::LinearProgram fixed = mbp.lp;
      for (Index b = 0; b < k; ++b) {
        const double v = static_cast<double>((code >> b) & 1);
        fixed.set_bounds(b, v, v);
      }
      const auto s = lp::solve_lp(fixed);
      certify(fixed, s);
      if (s.status != lp::Status::Optimal) continue;
      if (!any || sense * s.objective > sense * best) best = s.objective;
      any = true;
    }
    if (any != (milp.status == lp::MilpStatus::Optimal)) {
      ++mismatches;
    } else if (any && std::abs(milp.objective - best) > 1e-6 * (1.0 + std::abs(best))) {
      ++mismatches;
    }
  }
  const bool ok = mismatches == 0 && worst_certificate <= 1e-7;
  return {12, "", ok,
          "100 programs, " + std::to_string(mismatches) + " mismatches; " + std::to_string(lps) +
              " LP certificates, worst residual " + fmt(worst_certificate),
          0};
}

}  // namespace

std::vector<std::pair<int, std::string>> catalog() {
  return {{1, "triple-solver equivalence"},   {2, "inner-problem strong duality"},
          {3, "cut validity and tightness"},  {4, "uncapacitated closed form"},
          {5, "termination behavior"},        {6, "d-monotonicity"},
          {7, "AICM recovery"},               {8, "frequency-limit fit"},
          {9, "defect logic"},                {10, "rank identification bound"},
          {11, "nestedness"},                 {12, "kernel soundness"}};
}

bool is_long(int id) { return id == 5 || id == 6 || id == 7; }

double binomial_cdf(Index successes, Index trials, double p) {
  if (p <= 0.0) return 1.0;
  if (p >= 1.0) return successes >= trials ? 1.0 : 0.0;
  double total = 0.0;
  for (Index x = 0; x <= std::min(successes, trials); ++x) {
    const double n = static_cast<double>(trials), k = static_cast<double>(x);
    total += std::exp(std::lgamma(n + 1) - std::lgamma(k + 1) - std::lgamma(n - k + 1) + k * std::log(p) +
                      (n - k) * std::log1p(-p));
  }
  return std::min(total, 1.0);
}

CheckResult run_check(int id, const VerifyOptions& options) {
  using Fn = CheckResult (*)(const VerifyOptions&);
  static const Fn table[] = {solver_equivalence, inner_duality,  cut_validity,    uncap_closed_form,
                             termination,        d_monotonicity, aicm_recovery,   frequency_limit,
                             defect_logic,       rank_bound,     nestedness,      kernel_soundness};
  if (id < 1 || id > 12) throw std::out_of_range("unknown check " + std::to_string(id));
  const auto start = std::chrono::steady_clock::now();
  CheckResult r;
  try {
    r = table[id - 1](options);
  } catch (const std::exception& e) {
    r.passed = false;
    r.detail = std::string("threw: ") + e.what();
  }
  r.id = id;
  r.name = catalog()[static_cast<Index>(id - 1)].second;
  r.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return r;
}

}  // namespace svcloc::verify
