#pragma once

#include <string>
#include <vector>

#include "config.hpp"

namespace eqradar::cli {

const std::vector<std::string>& preset_names();

// Scenario document for a named figure or diagnostic. Throws ConfigError
// for unknown names.
json preset(const std::string& name);

}  // namespace eqradar::cli
