#pragma once

// JSON experiment configuration, mirroring ExperimentConfig field names.

#include <string>

#include "shiftbai/harness.hpp"

namespace shiftbai {

ExperimentConfig parse_experiment_config(const std::string& json_text);
ExperimentConfig load_experiment_config(const std::string& path);
std::string experiment_config_to_json(const ExperimentConfig& config);

}  // namespace shiftbai
