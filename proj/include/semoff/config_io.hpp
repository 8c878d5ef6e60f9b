#pragma once

#include <string>

#include <json.hpp>

#include "semoff/scenario.hpp"

namespace semoff {

// Top-level keys: system, channel, semantic, training, scenario. Every key is
// optional and defaults to the built-in value; unknown keys throw
// std::invalid_argument naming the offending path.
RunConfig run_config_from_json(const nlohmann::json& j);
nlohmann::json to_json(const RunConfig& run);

// Throws std::runtime_error naming the path when the file cannot be read.
RunConfig load_run_config(const std::string& path);
void save_run_config(const RunConfig& run, const std::string& path);

}  // namespace semoff
