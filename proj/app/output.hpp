#pragma once

#include <iosfwd>
#include <string>
#include <vector>

#include "config.hpp"

namespace eqradar::cli {

struct Curve {
    std::string label;
    std::vector<std::vector<double>> rows;
    json diagnostics = json::object();
};

struct Dataset {
    std::string header;  // fixed parameters, one line
    std::vector<std::string> columns;
    std::vector<Curve> curves;

    std::size_t column(const std::string& name) const;  // throws ConfigError if absent
};

// '#' header line, column names, then one '# series <label>' block per
// curve. 17 significant digits, LF line endings.
void write_csv(const Dataset& d, std::ostream& out);
// Throws IoError on malformed input.
Dataset read_csv(std::istream& in);

// Self-contained SVG: axes, ticks, labels, legend, one polyline per curve
// plus one dashed polyline per curve when style.dashed is set.
void write_svg(const Dataset& d, const PlotStyle& style, std::ostream& out);

// Column values for a plot expression: "name" or "1-name".
std::vector<double> column_values(const Dataset& d, const Curve& c, const std::string& expr);

}  // namespace eqradar::cli
