#pragma once

#include <filesystem>
#include <string>

#include <json.hpp>

#include "svcloc/aicm.hpp"
#include "svcloc/model.hpp"

namespace svcloc::io {

using nlohmann::json;

/// Parses a file as JSON; throws SchemaError on I/O or syntax problems.
json read_json(const std::filesystem::path& path);
/// Writes with two-space indentation and a trailing newline.
void write_json(const std::filesystem::path& path, const json& value);

json to_json(const InstanceData& data);
/// Shape and type checks only; semantic checks happen in Instance::build.
InstanceData instance_data_from_json(const json& j);
Instance instance_from_json(const json& j);

struct ScenarioFile {
  ScenarioSet scenarios;
  AmbiguitySet ambiguity;
};

/// Scenario file: tv_radius, nominal, and per scenario a list of [i, j, D]; zero entries are omitted.
json to_json(const Instance& instance, const ScenarioSet& scenarios, const AmbiguitySet& ambiguity);
/// Unlisted arcs get demand 0; an entry for a pair outside the support is a schema error.
ScenarioFile scenarios_from_json(const Instance& instance, const json& j);

json to_json(const aicm::SurveyBatch& batch);
aicm::SurveyBatch survey_from_json(const json& j);

json to_json(const aicm::AicmParameters& params);
aicm::AicmParameters parameters_from_json(const json& j);

}  // namespace svcloc::io
