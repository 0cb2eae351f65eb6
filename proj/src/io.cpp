#include "svcloc/io.hpp"

#include <fstream>
#include <set>
#include <utility>

namespace svcloc::io {

namespace {

const json& field(const json& j, const char* key) {
  if (!j.is_object()) throw SchemaError("expected a JSON object");
  const auto it = j.find(key);
  if (it == j.end()) throw SchemaError(std::string("missing field \"") + key + "\"");
  return *it;
}

template <typename T>
T get(const json& j, const char* what) {
  try {
    return j.get<T>();
  } catch (const json::exception&) {
    throw SchemaError(std::string("field \"") + what + "\" has the wrong type");
  }
}

Index get_index(const json& j, const char* what) {
  if (!j.is_number_integer() || j.get<long long>() < 0)
    throw SchemaError(std::string("field \"") + what + "\" must be a nonnegative integer");
  return j.get<Index>();
}

}  // namespace

json read_json(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw SchemaError("cannot open " + path.string());
  try {
    return json::parse(in);
  } catch (const json::parse_error& e) {
    throw SchemaError(path.string() + ": " + e.what());
  }
}

void write_json(const std::filesystem::path& path, const json& value) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  out << value.dump(2) << '\n';
}

json to_json(const InstanceData& d) {
  json util = json::array();
  for (const auto& e : d.utility) util.push_back({e.site, e.candidate, e.value});
  return {{"sites", d.sites},     {"candidates", d.candidates},     {"budget", d.budget},
          {"cost", d.cost},       {"capacity", d.capacity},         {"neighborhood", d.neighborhood},
          {"utility", util}};
}

InstanceData instance_data_from_json(const json& j) {
  InstanceData d;
  d.sites = get_index(field(j, "sites"), "sites");
  d.candidates = get_index(field(j, "candidates"), "candidates");
  d.budget = get<double>(field(j, "budget"), "budget");
  d.cost = get<std::vector<double>>(field(j, "cost"), "cost");
  d.capacity = get<std::vector<double>>(field(j, "capacity"), "capacity");
  d.neighborhood = get<std::vector<std::vector<Index>>>(field(j, "neighborhood"), "neighborhood");
  const auto& util = field(j, "utility");
  if (!util.is_array()) throw SchemaError("field \"utility\" must be an array");
  for (const auto& e : util) {
    if (!e.is_array() || e.size() != 3) throw SchemaError("utility entries must be [i, j, u]");
    d.utility.push_back({get_index(e[0], "utility"), get_index(e[1], "utility"), get<double>(e[2], "utility")});
  }
  return d;
}

Instance instance_from_json(const json& j) { return Instance::build(instance_data_from_json(j)); }

json to_json(const Instance& inst, const ScenarioSet& scenarios, const AmbiguitySet& ambiguity) {
  json demand = json::array();
  for (Index w = 0; w < scenarios.size(); ++w) {
    json row = json::array();
    const auto D = scenarios.demand(w);
    for (Index a = 0; a < inst.num_arcs(); ++a)
      if (D[a] != 0.0) row.push_back({inst.arc_site(a), inst.arc_candidate(a), D[a]});
    demand.push_back(std::move(row));
  }
  return {{"tv_radius", ambiguity.radius}, {"nominal", ambiguity.nominal}, {"demand", std::move(demand)}};
}

ScenarioFile scenarios_from_json(const Instance& inst, const json& j) {
  ScenarioFile out;
  out.ambiguity.radius = get<double>(field(j, "tv_radius"), "tv_radius");
  out.ambiguity.nominal = get<std::vector<double>>(field(j, "nominal"), "nominal");
  const auto& demand = field(j, "demand");
  if (!demand.is_array()) throw SchemaError("field \"demand\" must be an array");
  std::vector<std::vector<double>> table;
  for (const auto& scenario : demand) {
    if (!scenario.is_array()) throw SchemaError("every scenario must be a list of [i, j, D]");
    std::vector<double> row(inst.num_arcs(), 0.0);
    std::set<Index> seen;
    for (const auto& e : scenario) {
      if (!e.is_array() || e.size() != 3) throw SchemaError("demand entries must be [i, j, D]");
      const Index i = get_index(e[0], "demand"), c = get_index(e[1], "demand");
      const auto arc = i < inst.num_sites() ? inst.find_arc(i, c) : std::nullopt;
      if (!arc)
        throw SchemaError("demand for (" + std::to_string(i) + ", " + std::to_string(c) + ") outside the support");
      if (!seen.insert(*arc).second)
        throw SchemaError("duplicate demand for (" + std::to_string(i) + ", " + std::to_string(c) + ")");
      row[*arc] = get<double>(e[2], "demand");
    }
    table.push_back(std::move(row));
  }
  out.scenarios = ScenarioSet(inst.num_arcs(), std::move(table));
  out.ambiguity.check(out.scenarios.size());
  return out;
}

json to_json(const aicm::SurveyBatch& batch) {
  return {{"g", batch.g}, {"q", batch.q}, {"scores", batch.scores}};
}

aicm::SurveyBatch survey_from_json(const json& j) {
  aicm::SurveyBatch b;
  b.g = get_index(field(j, "g"), "g");
  b.q = get<int>(field(j, "q"), "q");
  b.scores = get<std::vector<aicm::Scores>>(field(j, "scores"), "scores");
  b.check();
  return b;
}

json to_json(const aicm::AicmParameters& a) {
  return {{"g", a.g}, {"q", a.q}, {"p", a.p}, {"pi", a.pi}, {"m", a.m}, {"rank", a.rank.order}, {"rank_ties", a.rank.ties}};
}

aicm::AicmParameters parameters_from_json(const json& j) {
  aicm::AicmParameters a;
  a.g = get_index(field(j, "g"), "g");
  a.q = get<int>(field(j, "q"), "q");
  a.p = get<std::vector<double>>(field(j, "p"), "p");
  a.pi = get<std::vector<std::vector<double>>>(field(j, "pi"), "pi");
  a.m = get<std::vector<double>>(field(j, "m"), "m");
  a.rank.order = get<std::vector<Index>>(field(j, "rank"), "rank");
  if (j.contains("rank_ties")) a.rank.ties = get<bool>(j["rank_ties"], "rank_ties");
  std::set<Index> labels(a.rank.order.begin(), a.rank.order.end());
  if (a.rank.order.size() != a.g || labels.size() != a.g || (a.g > 0 && *labels.rbegin() != a.g - 1))
    throw SchemaError("rank must be a permutation of the locations");
  a.check(1e-6);
  return a;
}

}  // namespace svcloc::io
