#pragma once

#include <filesystem>
#include <optional>
#include <stdexcept>
#include <string>
#include <variant>
#include <vector>

#include "json.hpp"

#include "eqradar/coupler.hpp"
#include "eqradar/decoherence.hpp"
#include "eqradar/radar.hpp"
#include "eqradar/radiation.hpp"

namespace eqradar::cli {

using json = nlohmann::ordered_json;

// Schema violation in a scenario file.
class ConfigError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

enum class Kind { contrast, coupler, squeezing, heat };

enum class Dim { time, length, velocity, angular_frequency, frequency, voltage };

// SI factor per configured unit, for each dimension the config declares.
struct Units {
    std::optional<std::pair<std::string, double>> entry[6];

    double factor(Dim d, const std::string& where) const;
    const std::string& name(Dim d) const;
};

struct CouplerSpec {
    std::string model;
    double alpha = 0.0;
    std::filesystem::path file;
};

struct SolverSpec {
    std::optional<double> omega_max;  // reduced
    double step = 0.01;               // reduced
    decoherence::Kernel kernel = decoherence::Kernel::convolution;
};

struct ProbeSpec {
    double tau_e = 0.1;
    double t_e = 0.0;
    std::optional<double> tau2;  // empty: argmax of the vacuum baseline
    radar::Filter filter = radar::Filter::exact;
};

struct VacuumSpec {};

struct ClassicalSpec {
    radiation::ClassicalDrive drive;
    std::filesystem::path series_file;
};

struct SqueezedSpec {
    double omega0 = 0.0;
    double q0 = 0.0;
    double z = 0.0;  // |z|
    double z_arg = 0.0;
    std::optional<double> phi0;
    std::optional<cplx> s_ba;
};

struct FockSpec {
    unsigned n = 1;
    double omega0 = 0.0;
    double gamma0 = 0.0;
};

struct MixtureSpec {
    std::vector<double> p;
    double omega0 = 0.0;
    double gamma0 = 0.0;
};

using RadiationSpec = std::variant<VacuumSpec, ClassicalSpec, SqueezedSpec, FockSpec, MixtureSpec>;

enum class Variable { t_e, tau_e, tau_2, z, omega0, frequency, db, t };

struct SweepSpec {
    Variable variable = Variable::t_e;
    std::vector<double> shown;    // in configured units
    std::vector<double> reduced;  // what the models see
};

struct OptimizeSpec {
    bool maximize = true;
    std::optional<double> from, to;  // reduced t_e; default one drive period
    int points = 64;
};

struct Series {
    std::string label;
    CouplerSpec coupler;
    SolverSpec solver;
    ProbeSpec probe;
    RadiationSpec radiation;
    SweepSpec sweep;
    std::optional<OptimizeSpec> optimize;
};

struct PlotStyle {
    std::string y;       // column, optionally "1-<column>"
    std::string dashed;  // optional second column drawn dashed
    std::string x_label;
    std::string y_label;
    std::string title;
};

struct Scenario {
    std::string name;
    Kind kind = Kind::contrast;
    Scales scales;
    Units units;
    std::vector<Series> series;
    PlotStyle plot;
    json source;  // the validated document, echoed in outputs
};

std::string to_string(Kind k);
std::string to_string(Variable v);

// Reduced voltage e V (l/v_F) / hbar.
double reduced_voltage(const Scales& s, double volts);

// Validates and resolves a scenario. Relative file paths are taken from base_dir.
Scenario parse_scenario(const json& doc, const std::filesystem::path& base_dir = {});
json read_json(const std::filesystem::path& path);

coupler::Model build_model(const CouplerSpec& c, const Scales& scales);

}  // namespace eqradar::cli
