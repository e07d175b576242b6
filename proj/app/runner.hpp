#pragma once

#include <filesystem>

#include "config.hpp"
#include "output.hpp"

namespace eqradar::cli {

struct RunOptions {
    unsigned jobs = 1;
};

std::vector<std::string> columns_for(Kind k);

// Evaluates every series of the scenario. Rows follow the sweep grid.
Dataset run_scenario(const Scenario& sc, const RunOptions& opt);

struct Artifacts {
    std::filesystem::path csv, svg, manifest;
};

// Writes <out>/<name>.csv, optionally <name>.svg, and <name>.manifest.json.
Artifacts write_artifacts(const Scenario& sc, const Dataset& d, const std::filesystem::path& out, bool plot,
                          double seconds);

}  // namespace eqradar::cli
