// svcloc: command-line driver for instance generation, survey fitting,
// demand sampling and the location models.
//
// Exit codes: 0 success, 1 unexpected error, 2 bad flags, 3 invalid input
// data, 4 solver failure, 5 a verify check failed.

#include <chrono>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <numeric>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "svcloc/demand.hpp"
#include "svcloc/dro.hpp"
#include "svcloc/io.hpp"
#include "svcloc/static_models.hpp"
#include "svcloc/synth.hpp"
#include "svcloc/verify.hpp"

namespace fs = std::filesystem;
using namespace svcloc;
using io::json;

namespace {

constexpr const char* kVersion = "0.1.0";

enum Exit { kOk = 0, kOther = 1, kUsage = 2, kSchema = 3, kSolver = 4, kCheckFailed = 5 };

struct Common {
  std::string out_dir = "out";
  std::uint64_t seed = 1;
  Index threads = 0;
  bool no_timings = false;
};

// Filled by the command; written once at the end whatever happens.
struct Run {
  std::string command;
  CLI::App* sub = nullptr;
  json inputs = json::object();
  json outputs = json::object();
  json result = json::object();
  json warnings = json::array();
  int exit = kOk;
};

json versions() {
  std::ostringstream js;
  js << NLOHMANN_JSON_VERSION_MAJOR << '.' << NLOHMANN_JSON_VERSION_MINOR << '.' << NLOHMANN_JSON_VERSION_PATCH;
  return {{"svcloc", kVersion}, {"nlohmann_json", js.str()}, {"cli11", CLI11_VERSION}, {"compiler", __VERSION__}};
}

json echo_config(const CLI::App& sub) {
  json config = json::object();
  for (const CLI::Option* opt : sub.get_options()) {
    const std::string name = opt->get_single_name();
    if (name.empty() || name == "help") continue;
    const auto& results = opt->results();
    if (results.empty()) {
      const std::string def = opt->get_default_str();
      config[name] = def.empty() ? json(nullptr) : json(def);
    } else {
      config[name] = results.size() == 1 ? json(results.front()) : json(results);
    }
  }
  return config;
}

fs::path output(Run& run, const Common& c, const std::string& key, const std::string& file) {
  fs::create_directories(c.out_dir);
  const fs::path p = fs::path(c.out_dir) / file;
  run.outputs[key] = p.string();
  return p;
}

std::ofstream open_text(const fs::path& p) {
  std::ofstream out(p);
  if (!out) throw std::runtime_error("cannot write " + p.string());
  out.precision(17);
  return out;
}

Instance load_instance(Run& run, const std::string& path) {
  run.inputs["instance"] = path;
  return io::instance_from_json(io::read_json(path));
}

io::ScenarioFile load_scenarios(Run& run, const Instance& inst, const std::string& path,
                                std::optional<double> radius) {
  run.inputs["scenarios"] = path;
  auto file = io::scenarios_from_json(inst, io::read_json(path));
  if (radius) file.ambiguity.radius = *radius;
  file.ambiguity.check(file.scenarios.size());
  return file;
}

json decision_json(const LocationDecision& y) { return y.opened(); }

/// "a:b:s" for an inclusive arithmetic grid, otherwise a comma-separated list.
std::vector<double> parse_grid(const std::string& text) {
  auto number = [&](const std::string& s) {
    std::size_t used = 0;
    double v = 0.0;
    try {
      v = std::stod(s, &used);
    } catch (const std::exception&) {
      used = 0;
    }
    if (used == 0 || used != s.size()) throw CLI::ValidationError("--grid", "not a number: '" + s + "'");
    return v;
  };
  std::vector<std::string> parts;
  const char sep = text.find(':') != std::string::npos ? ':' : ',';
  std::stringstream ss(text);
  for (std::string part; std::getline(ss, part, sep);) parts.push_back(part);
  std::vector<double> grid;
  if (sep == ':') {
    if (parts.size() != 3) throw CLI::ValidationError("--grid", "expected start:stop:step");
    const double a = number(parts[0]), b = number(parts[1]), s = number(parts[2]);
    if (!(s > 0.0) || b < a) throw CLI::ValidationError("--grid", "need step > 0 and stop >= start");
    const auto n = static_cast<Index>(std::floor((b - a) / s + 1e-9));
    for (Index k = 0; k <= n; ++k) grid.push_back(std::round((a + s * static_cast<double>(k)) * 1e12) / 1e12);
  } else {
    for (const auto& p : parts) grid.push_back(number(p));
  }
  if (grid.empty()) throw CLI::ValidationError("--grid", "empty grid");
  return grid;
}

DualSelection parse_duals(const std::string& s) {
  if (s == "pareto") return DualSelection::Pareto;
  if (s == "canonical") return DualSelection::Canonical;
  return DualSelection::Raw;
}

// ---- commands -------------------------------------------------------------

struct GenInstanceArgs {
  InstanceGenConfig cfg;
};

void gen_instance(Run& run, const Common& c, GenInstanceArgs a) {
  a.cfg.seed = c.seed;
  const auto g = generate_instance(a.cfg);
  io::write_json(output(run, c, "instance", "instance.json"), io::to_json(g.instance.data()));
  json scen = io::to_json(g.instance, g.scenarios, g.ambiguity);
  json coords = json::array();
  for (const auto& [x, y] : g.coordinates) coords.push_back({x, y});
  scen["metadata"] = {{"generator", "synthetic map"},
                      {"seed", c.seed},
                      {"sites", a.cfg.sites},
                      {"budget", a.cfg.budget},
                      {"quantile", a.cfg.quantile},
                      {"capacity", a.cfg.capacity},
                      {"cutoff", g.cutoff},
                      {"truncations", g.truncations},
                      {"nominal", "uniform"},
                      {"coordinates", coords}};
  io::write_json(output(run, c, "scenarios", "scenarios.json"), scen);
  run.result = {{"sites", g.instance.num_sites()},
                {"arcs", g.instance.num_arcs()},
                {"scenarios", g.scenarios.size()},
                {"cutoff", g.cutoff},
                {"truncations", g.truncations}};
}

void sim_survey(Run& run, const Common& c, SurveySimConfig cfg) {
  cfg.seed = c.seed;
  const auto batch = simulate_survey(cfg);
  json j = io::to_json(batch);
  j["metadata"] = {{"seed", c.seed}, {"mean", cfg.mean}, {"sd", cfg.sd}, {"defect", cfg.defect}};
  io::write_json(output(run, c, "survey", "survey.json"), j);
  const auto rank = aicm::identify_rank(batch);
  run.result = {{"samples", batch.scores.size()}, {"rank", rank.order}, {"rank_ties", rank.ties}};
}

struct FitArgs {
  std::string survey;
  double lambda = 0.0;
  bool cv = false;
  Index starts = 8;
  Index folds = 4;
};

void fit_aicm(Run& run, const Common& c, const FitArgs& a) {
  run.inputs["survey"] = a.survey;
  const auto batch = io::survey_from_json(io::read_json(a.survey));
  aicm::FitConfig cfg;
  cfg.starts = a.starts;
  cfg.folds = a.folds;
  cfg.seed = c.seed;
  cfg.threads = c.threads;
  double lambda = a.lambda;
  if (a.cv) {
    const auto cv = aicm::cross_validate_lambda(batch, cfg);
    lambda = cv.lambda;
    auto out = open_text(output(run, c, "cv", "cv.csv"));
    out << "# seed=" << c.seed << "\nround,lambda,score\n";
    for (const auto& s : cv.round1) out << "1," << s.lambda << ',' << s.score << '\n';
    for (const auto& s : cv.round2) out << "2," << s.lambda << ',' << s.score << '\n';
  }
  cfg.lambda1 = cfg.lambda2 = lambda;
  const auto fit = aicm::fit(batch, cfg);
  json model = io::to_json(fit.params);
  model["metadata"] = {{"seed", c.seed}, {"lambda", lambda}, {"loss", fit.loss}, {"converged", fit.converged}};
  io::write_json(output(run, c, "model", "model.json"), model);
  run.result = {{"lambda", lambda},
                {"loss", fit.loss},
                {"iterations", fit.iterations},
                {"converged", fit.converged},
                {"rank", fit.params.rank.order},
                {"utilities", aicm::estimate_utilities(fit.params)}};
  if (!fit.converged) run.warnings.push_back("best start stopped at the iteration limit");
}

struct DemandArgs {
  std::string instance, survey;
  double lambda = 0.0;
  Index pool = 100;
  Index joint = 100;
  std::string mode = "independent";
  double scale = 1.0;
  std::optional<double> total;
  double d = 0.2;
  Index starts = 8;
};

void gen_demand(Run& run, const Common& c, const DemandArgs& a) {
  const auto inst = load_instance(run, a.instance);
  run.inputs["survey"] = a.survey;
  const json sj = io::read_json(a.survey);
  std::vector<aicm::SurveyBatch> surveys;
  if (sj.is_object() && sj.contains("sites")) {
    if (!sj["sites"].is_array() || sj["sites"].size() != inst.num_sites())
      throw SchemaError("survey file: 'sites' must list one survey per site");
    for (const auto& s : sj["sites"]) surveys.push_back(io::survey_from_json(s));
  } else {
    surveys.assign(inst.num_sites(), io::survey_from_json(sj));
  }
  for (Index i = 0; i < inst.num_sites(); ++i)
    if (surveys[i].g != inst.neighborhood(i).size())
      throw SchemaError("survey of site " + std::to_string(i) + " covers " + std::to_string(surveys[i].g) +
                        " locations, its neighborhood has " + std::to_string(inst.neighborhood(i).size()));

  // Identical surveys share one fit.
  std::vector<Index> fit_of(inst.num_sites());
  std::vector<Index> distinct;
  for (Index i = 0; i < inst.num_sites(); ++i) {
    Index k = 0;
    while (k < distinct.size() && !(surveys[distinct[k]].scores == surveys[i].scores && surveys[distinct[k]].q == surveys[i].q)) ++k;
    if (k == distinct.size()) distinct.push_back(i);
    fit_of[i] = k;
  }
  std::vector<aicm::AicmParameters> params(distinct.size());
  parallel_for(distinct.size(), c.threads, [&](Index k) {
    aicm::FitConfig cfg;
    cfg.lambda1 = cfg.lambda2 = a.lambda;
    cfg.starts = a.starts;
    cfg.seed = child_seed(c.seed, 0xF17, k);
    params[k] = aicm::fit(surveys[distinct[k]], cfg).params;
  });

  std::vector<SiteSampler> samplers(inst.num_sites());
  std::vector<std::vector<std::vector<double>>> pools(inst.num_sites());
  std::vector<std::vector<std::string>> site_warnings(inst.num_sites());
  parallel_for(inst.num_sites(), c.threads, [&](Index i) {
    const double scale = a.total ? *a.total / static_cast<double>(surveys[i].scores.size()) : a.scale;
    samplers[i] = SiteSampler::from_survey(surveys[i], params[fit_of[i]], scale);
    pools[i] = sample_site_pool(samplers[i], a.pool, c.seed, i, &site_warnings[i]);
  });
  std::vector<std::string> warnings;
  for (auto& w : site_warnings)
    for (auto& m : w) warnings.push_back(std::move(m));

  CatenationSpec spec;
  spec.mode = a.mode == "banded" ? CatenationMode::Banded : CatenationMode::Independent;
  spec.joint = a.joint;
  const auto scenarios = catenate(inst, pools, spec, c.seed, &warnings);
  const auto ambiguity = AmbiguitySet::uniform(scenarios.size(), a.d);

  json rho = json::array(), scale = json::array();
  for (const auto& s : samplers) {
    rho.push_back(s.rho);
    scale.push_back(s.scale);
  }
  json j = io::to_json(inst, scenarios, ambiguity);
  j["metadata"] = {{"mode", a.mode}, {"seed", c.seed},     {"lambda", a.lambda}, {"pool", a.pool},
                   {"joint", a.joint}, {"rho", rho},       {"scale", scale},     {"nominal", "uniform"},
                   {"fits", distinct.size()}, {"warnings", warnings}};
  io::write_json(output(run, c, "scenarios", "scenarios.json"), j);
  for (const auto& w : warnings) run.warnings.push_back(w);
  run.result = {{"scenarios", scenarios.size()}, {"fits", distinct.size()}, {"rho", rho}};
}

struct SolveArgs {
  std::string instance, scenarios;
  std::optional<double> d;
  std::optional<Index> scenario;
  std::string duals = "pareto";
  Index max_iterations = 500;
  std::string grid;
};

DroOptions dro_options(const Common& c, const SolveArgs& a) {
  DroOptions o;
  o.threads = c.threads;
  o.duals = parse_duals(a.duals);
  o.max_iterations = a.max_iterations;
  return o;
}

void solve_determ(Run& run, const Common& c, const SolveArgs& a) {
  const auto inst = load_instance(run, a.instance);
  const auto file = load_scenarios(run, inst, a.scenarios, std::nullopt);
  std::vector<double> demand(inst.num_arcs(), 0.0);
  std::string source;
  if (a.scenario) {
    if (*a.scenario >= file.scenarios.size())
      throw SchemaError("scenario " + std::to_string(*a.scenario) + " does not exist");
    const auto row = file.scenarios.demand(*a.scenario);
    demand.assign(row.begin(), row.end());
    source = "scenario " + std::to_string(*a.scenario);
  } else {
    for (Index w = 0; w < file.scenarios.size(); ++w) {
      const auto row = file.scenarios.demand(w);
      for (Index k = 0; k < demand.size(); ++k) demand[k] += file.ambiguity.nominal[w] * row[k];
    }
    source = "nominal mean";
  }
  const auto sol = solve_ddsl(inst, demand);
  json j = {{"model", "deterministic"}, {"demand", source}, {"objective", sol.objective},
            {"opened", decision_json(sol.y)}, {"fingerprint", sol.y.fingerprint()}, {"nodes", sol.nodes}};
  j["flow"] = sol.allocation.x;
  io::write_json(output(run, c, "solution", "solution.json"), j);
  run.result = {{"objective", sol.objective}, {"opened", decision_json(sol.y)}, {"demand", source}};
}

void solve_dro_cmd(Run& run, const Common& c, const SolveArgs& a) {
  const auto inst = load_instance(run, a.instance);
  const auto file = load_scenarios(run, inst, a.scenarios, a.d);
  const auto sol = solve_dro(inst, file.scenarios, file.ambiguity, dro_options(c, a));
  json j = {{"model", "distributionally robust"}, {"d", file.ambiguity.radius}, {"objective", sol.value},
            {"bound", sol.eta}, {"opened", decision_json(sol.y)}, {"fingerprint", sol.y.fingerprint()},
            {"iterations", sol.iterations}, {"converged", sol.converged}, {"termination", sol.termination},
            {"measure", sol.measure}};
  io::write_json(output(run, c, "solution", "solution.json"), j);
  auto log = open_text(output(run, c, "log", "iterations.csv"));
  write_solve_log(log, sol, c.seed, !c.no_timings);
  run.result = {{"objective", sol.value}, {"bound", sol.eta}, {"opened", decision_json(sol.y)},
                {"iterations", sol.iterations}, {"converged", sol.converged}, {"termination", sol.termination}};
  if (!sol.converged) {
    run.exit = kSolver;
    run.result["error"] = "iteration limit reached before the bound met the certified value";
  }
}

void solve_uncap(Run& run, const Common& c, const SolveArgs& a) {
  const auto inst = load_instance(run, a.instance);
  const auto file = load_scenarios(run, inst, a.scenarios, a.d);
  const auto sol = solve_uncap_reformulation(inst, file.scenarios, file.ambiguity);
  json j = {{"model", "uncapacitated reformulation"}, {"d", file.ambiguity.radius}, {"objective", sol.objective},
            {"opened", decision_json(sol.y)}, {"fingerprint", sol.y.fingerprint()}, {"nodes", sol.nodes}};
  io::write_json(output(run, c, "solution", "solution.json"), j);
  run.result = {{"objective", sol.objective}, {"opened", decision_json(sol.y)}};
}

void sweep_cmd(Run& run, const Common& c, const SolveArgs& a) {
  const auto grid = parse_grid(a.grid);
  const auto inst = load_instance(run, a.instance);
  const auto file = load_scenarios(run, inst, a.scenarios, std::nullopt);
  const auto rows = sweep_d(inst, file.scenarios, file.ambiguity.nominal, grid, dro_options(c, a));
  auto out = open_text(output(run, c, "sweep", "sweep.csv"));
  write_sweep_csv(out, rows, c.seed, !c.no_timings);
  json summary = json::array();
  Index failed = 0;
  for (const auto& r : rows) {
    summary.push_back({{"d", r.d}, {"objective", r.objective}, {"converged", r.converged}, {"ok", r.ok}});
    if (!r.ok || !r.converged) ++failed;
  }
  run.result = {{"points", rows.size()}, {"failed", failed}, {"rows", summary}};
  if (failed > 0) run.exit = kSolver;
}

struct VerifyArgs {
  bool full = false;
  std::vector<int> only;
};

void verify_cmd(Run& run, const Common& c, const VerifyArgs& a) {
  verify::VerifyOptions opts;
  opts.seed = c.seed;
  opts.threads = c.threads == 0 ? default_thread_count() : c.threads;
  opts.progress = [](const std::string& m) { std::cerr << "  " << m << '\n'; };
  auto out = open_text(output(run, c, "checks", "checks.csv"));
  out << "# seed=" << c.seed << "\nid,name,passed,seconds,detail\n";
  json checks = json::array();
  bool all = true;
  for (const auto& [id, name] : verify::catalog()) {
    const bool chosen = a.only.empty() ? (a.full || !verify::is_long(id))
                                       : std::find(a.only.begin(), a.only.end(), id) != a.only.end();
    if (!chosen) continue;
    const auto r = verify::run_check(id, opts);
    all = all && r.passed;
    std::cout << "check " << id << " [" << r.name << "]: " << (r.passed ? "PASS" : "FAIL") << " (" << r.detail
              << ")" << std::endl;
    std::string detail = r.detail;
    std::replace(detail.begin(), detail.end(), '"', '\'');
    out << id << ',' << r.name << ',' << (r.passed ? 1 : 0) << ',' << (c.no_timings ? 0.0 : r.seconds) << ",\""
        << detail << "\"\n";
    checks.push_back({{"id", id}, {"name", r.name}, {"passed", r.passed}, {"detail", r.detail}});
  }
  run.result = {{"checks", checks}, {"all_passed", all}};
  if (!all) run.exit = kCheckFailed;
}

json error_object(const std::string& kind, const std::string& message, int code) {
  return {{"error", {{"kind", kind}, {"message", message}, {"exit_code", code}}}};
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Service location under demand ambiguity: generators, estimators and solvers"};
  app.require_subcommand(1);
  Common common;
  std::optional<std::uint64_t> seed_flag;
  Run run;

  auto add_common = [&](CLI::App* sub) {
    sub->add_option("--out-dir", common.out_dir, "directory for result files and manifest.json")->capture_default_str();
    sub->add_option("--seed", seed_flag, "master seed (default 1, verify 20240601)");
    sub->add_option("--threads", common.threads, "worker threads, 0 = all cores")->capture_default_str();
    sub->add_flag("--no-timings", common.no_timings, "write zero seconds into result CSVs");
  };

  GenInstanceArgs gi;
  auto* gen = app.add_subcommand("gen-instance", "random square-map instance and demand scenarios");
  gen->add_option("--sites", gi.cfg.sites, "number of sites (= candidates)")->capture_default_str();
  gen->add_option("--budget", gi.cfg.budget, "opening budget")->capture_default_str();
  gen->add_option("--count", gi.cfg.scenarios, "number of scenarios")->capture_default_str();
  gen->add_option("--d", gi.cfg.radius, "total variation radius")->capture_default_str();
  gen->add_option("--capacity", gi.cfg.capacity, "capacity of every candidate")->capture_default_str();
  gen->add_option("--quantile", gi.cfg.quantile, "neighborhood distance quantile")->capture_default_str();
  add_common(gen);

  SurveySimConfig ss;
  auto* sim = app.add_subcommand("sim-survey", "simulated survey scores");
  sim->add_option("--mean", ss.mean, "mean score per location")->capture_default_str();
  sim->add_option("--sd", ss.sd, "score standard deviation per location")->capture_default_str();
  sim->add_option("--q", ss.q, "highest score")->capture_default_str();
  sim->add_option("--defect", ss.defect, "probability of zeroing one entry")->capture_default_str();
  sim->add_option("--samples", ss.samples, "number of answers")->capture_default_str();
  add_common(sim);

  FitArgs fa;
  auto* fit = app.add_subcommand("fit-aicm", "fit the choice model to a survey");
  fit->add_option("--survey", fa.survey, "survey JSON")->required()->check(CLI::ExistingFile);
  auto* lam = fit->add_option("--lambda", fa.lambda, "penalty weight for both penalties")->capture_default_str();
  fit->add_flag("--cv", fa.cv, "choose lambda by cross validation")->excludes(lam);
  fit->add_option("--starts", fa.starts, "multistart count")->capture_default_str()->check(CLI::PositiveNumber);
  fit->add_option("--folds", fa.folds, "cross validation folds")->capture_default_str()->check(CLI::Range(2, 100));
  add_common(fit);

  DemandArgs da;
  auto* dem = app.add_subcommand("gen-demand", "joint demand scenarios from site surveys");
  dem->add_option("--instance", da.instance, "instance JSON")->required()->check(CLI::ExistingFile);
  dem->add_option("--survey", da.survey, "one survey for all sites, or {\"sites\": [...]}")
      ->required()
      ->check(CLI::ExistingFile);
  dem->add_option("--lambda", da.lambda, "penalty weight of the per-site fits")->capture_default_str();
  dem->add_option("--count", da.pool, "demand samples per site")->capture_default_str()->check(CLI::PositiveNumber);
  dem->add_option("--joint", da.joint, "joint scenarios")->capture_default_str()->check(CLI::PositiveNumber);
  dem->add_option("--mode", da.mode, "catenation mode")
      ->capture_default_str()
      ->check(CLI::IsMember({"independent", "banded"}));
  auto* sc = dem->add_option("--scale", da.scale, "factor applied to the counts")->capture_default_str();
  dem->add_option("--total", da.total, "total demand A; the factor becomes A / survey size")->excludes(sc);
  dem->add_option("--d", da.d, "total variation radius written to the file")->capture_default_str();
  dem->add_option("--starts", da.starts, "multistart count per fit")->capture_default_str();
  add_common(dem);

  SolveArgs sa;
  auto add_problem = [&](CLI::App* sub, bool radius) {
    sub->add_option("--instance", sa.instance, "instance JSON")->required()->check(CLI::ExistingFile);
    sub->add_option("--scenarios", sa.scenarios, "scenario JSON")->required()->check(CLI::ExistingFile);
    if (radius) sub->add_option("--d", sa.d, "override the file's total variation radius")->check(CLI::NonNegativeNumber);
    add_common(sub);
  };
  auto add_dro = [&](CLI::App* sub) {
    sub->add_option("--duals", sa.duals, "dual choice for the cuts")
        ->capture_default_str()
        ->check(CLI::IsMember({"pareto", "canonical", "raw"}));
    sub->add_option("--max-iterations", sa.max_iterations, "master iteration limit")
        ->capture_default_str()
        ->check(CLI::PositiveNumber);
  };
  auto* det = app.add_subcommand("solve-determ", "deterministic model on one demand table");
  add_problem(det, false);
  det->add_option("--scenario", sa.scenario, "use this scenario instead of the nominal mean");
  auto* dro = app.add_subcommand("solve-dro", "distributionally robust model by cutting planes");
  add_problem(dro, true);
  add_dro(dro);
  auto* unc = app.add_subcommand("solve-uncap", "single MILP for the uncapacitated consistent case");
  add_problem(unc, true);
  auto* swp = app.add_subcommand("sweep-d", "robust solves over a grid of radii");
  add_problem(swp, false);
  add_dro(swp);
  swp->add_option("--grid", sa.grid, "start:stop:step or a comma list")->required();

  VerifyArgs va;
  auto* ver = app.add_subcommand("verify", "oracle equivalence and property checks");
  ver->add_flag("--full", va.full, "include the long checks");
  ver->add_option("--only", va.only, "run these check ids")->check(CLI::Range(1, 12));
  add_common(ver);

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    std::cerr << error_object("usage", e.what(), kUsage).dump() << std::endl;
    return kUsage;
  }

  for (auto* s : app.get_subcommands()) {
    run.command = s->get_name();
    run.sub = s;
  }
  common.seed = seed_flag.value_or(run.command == "verify" ? 20240601 : 1);
  const auto start = std::chrono::steady_clock::now();
  json error;
  try {
    if (run.command == "gen-instance") gen_instance(run, common, gi);
    else if (run.command == "sim-survey") sim_survey(run, common, ss);
    else if (run.command == "fit-aicm") fit_aicm(run, common, fa);
    else if (run.command == "gen-demand") gen_demand(run, common, da);
    else if (run.command == "solve-determ") solve_determ(run, common, sa);
    else if (run.command == "solve-dro") solve_dro_cmd(run, common, sa);
    else if (run.command == "solve-uncap") solve_uncap(run, common, sa);
    else if (run.command == "sweep-d") sweep_cmd(run, common, sa);
    else verify_cmd(run, common, va);
  } catch (const CLI::ValidationError& e) {
    run.exit = kUsage;
    error = error_object("usage", e.what(), kUsage);
  } catch (const SchemaError& e) {
    run.exit = kSchema;
    error = error_object("schema", e.what(), kSchema);
  } catch (const std::invalid_argument& e) {
    run.exit = kSchema;
    error = error_object("schema", e.what(), kSchema);
  } catch (const SolverError& e) {
    run.exit = kSolver;
    error = error_object("solver", e.what(), kSolver);
  } catch (const std::exception& e) {
    run.exit = kOther;
    error = error_object("internal", e.what(), kOther);
  }
  const double wall = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();

  json manifest = {{"command", run.command},
                   {"config", echo_config(*run.sub)},
                   {"seed", common.seed},
                   {"inputs", run.inputs},
                   {"outputs", run.outputs},
                   {"versions", versions()},
                   {"wall_seconds", wall},
                   {"status", run.exit == kOk ? "ok" : "failed"},
                   {"exit_code", run.exit},
                   {"warnings", run.warnings},
                   {"result", run.result}};
  if (!error.is_null()) manifest["error"] = error["error"];
  try {
    fs::create_directories(common.out_dir);
    io::write_json(fs::path(common.out_dir) / "manifest.json", manifest);
  } catch (const std::exception& e) {
    std::cerr << error_object("internal", std::string("manifest not written: ") + e.what(), kOther).dump() << std::endl;
    if (run.exit == kOk) run.exit = kOther;
  }
  if (!error.is_null()) std::cerr << error.dump() << std::endl;
  else if (run.exit != kOk) std::cerr << error_object(run.exit == kSolver ? "solver" : "check", run.result.value("error", "see manifest"), run.exit).dump() << std::endl;
  else std::cout << manifest["result"].dump() << std::endl;
  return run.exit;
}
