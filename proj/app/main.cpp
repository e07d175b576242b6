#include <chrono>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <optional>
#include <thread>

#include <CLI11.hpp>
#include <spdlog/sinks/stdout_color_sinks.h>
#include <spdlog/spdlog.h>

#include "config.hpp"
#include "output.hpp"
#include "presets.hpp"
#include "runner.hpp"

namespace cli = eqradar::cli;

namespace {

enum Exit { ok = 0, schema = 2, solver = 3, io = 4 };

void setup_logging()
{
    auto logger = spdlog::stderr_color_mt("eqradar");
    logger->set_pattern("[%H:%M:%S.%e] [%^%l%$] %v");
    spdlog::set_default_logger(logger);
    spdlog::set_level(spdlog::level::info);
    const char* env = std::getenv("EQRADAR_LOG");
    if (!env) return;
    const std::string v(env);
    if (v == "error")
        spdlog::set_level(spdlog::level::err);
    else if (v == "warn")
        spdlog::set_level(spdlog::level::warn);
    else if (v == "info")
        spdlog::set_level(spdlog::level::info);
    else if (v == "debug")
        spdlog::set_level(spdlog::level::debug);
    else
        spdlog::warn("EQRADAR_LOG='{}' is not one of error, warn, info, debug; using info", v);
}

int run(const std::string& config, const std::string& preset, unsigned jobs, const std::string& out, bool plot)
{
    const auto start = std::chrono::steady_clock::now();
    cli::json doc = cli::json::object();
    std::filesystem::path base;
    if (!preset.empty()) doc = cli::preset(preset);
    if (!config.empty()) {
        const auto user = cli::read_json(config);
        base = std::filesystem::path(config).parent_path();
        if (preset.empty())
            doc = user;
        else
            doc.merge_patch(user);
    }
    const auto sc = cli::parse_scenario(doc, base);
    spdlog::info("scenario '{}' ({} series, {} jobs)", sc.name, sc.series.size(), jobs);
    const auto data = cli::run_scenario(sc, {jobs});
    const double seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    const auto a = cli::write_artifacts(sc, data, out, plot, seconds);
    spdlog::info("wrote {} ({:.1f} s)", a.csv.string(), seconds);
    if (plot) spdlog::info("wrote {}", a.svg.string());
    return Exit::ok;
}

int plot(const std::string& csv, const cli::PlotStyle& style, std::string out)
{
    std::ifstream in(csv, std::ios::binary);
    if (!in) throw eqradar::IoError("cannot open " + csv);
    const auto d = cli::read_csv(in);
    if (out.empty()) out = std::filesystem::path(csv).replace_extension(".svg").string();
    std::ofstream f(out, std::ios::binary);
    if (!f) throw eqradar::IoError("cannot write " + out);
    cli::write_svg(d, style, f);
    spdlog::info("wrote {}", out);
    return Exit::ok;
}

}  // namespace

int main(int argc, char** argv)
{
    setup_logging();

    CLI::App app{"Electron radar scenarios: decoherence, Franck-Condon factors and interference contrast"};
    app.require_subcommand(1);

    std::string config, preset_name, out = "out";
    unsigned jobs = std::max(1u, std::thread::hardware_concurrency());
    bool with_plot = false;
    auto* run_cmd = app.add_subcommand("run", "Run a scenario and write CSV, manifest and optional SVG");
    run_cmd->add_option("config", config, "Scenario file (JSON); patches the preset when both are given");
    run_cmd->add_option("--preset", preset_name, "Built-in scenario name");
    run_cmd->add_option("--jobs", jobs, "Worker threads")->check(CLI::PositiveNumber);
    run_cmd->add_option("--out", out, "Output directory");
    run_cmd->add_flag("--plot", with_plot, "Also write an SVG plot");

    std::string csv, svg_out;
    cli::PlotStyle style;
    auto* plot_cmd = app.add_subcommand("plot", "Plot a CSV written by run");
    plot_cmd->add_option("csv", csv, "CSV file")->required();
    plot_cmd->add_option("--y", style.y, "Column to plot, or 1-<column>");
    plot_cmd->add_option("--dashed", style.dashed, "Second column drawn dashed");
    plot_cmd->add_option("--title", style.title);
    plot_cmd->add_option("--x-label", style.x_label);
    plot_cmd->add_option("--y-label", style.y_label);
    plot_cmd->add_option("-o,--output", svg_out, "SVG path (default: next to the CSV)");

    std::string show;
    auto* presets_cmd = app.add_subcommand("presets", "List presets or print one as JSON");
    presets_cmd->add_option("--show", show, "Preset to print");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? Exit::ok : Exit::schema;
    }

    try {
        if (*run_cmd) {
            if (config.empty() && preset_name.empty()) {
                spdlog::error("run: give a config file, --preset, or both");
                return Exit::schema;
            }
            return run(config, preset_name, jobs, out, with_plot);
        }
        if (*plot_cmd) return plot(csv, style, svg_out);
        if (*presets_cmd) {
            if (show.empty())
                for (const auto& n : cli::preset_names()) std::cout << n << '\n';
            else
                std::cout << cli::preset(show).dump(2) << '\n';
            return Exit::ok;
        }
    } catch (const cli::ConfigError& e) {
        spdlog::error("config: {}", e.what());
        return Exit::schema;
    } catch (const std::invalid_argument& e) {
        spdlog::error("invalid parameter: {}", e.what());
        return Exit::schema;
    } catch (const eqradar::IoError& e) {
        spdlog::error("i/o: {}", e.what());
        return Exit::io;
    } catch (const eqradar::SolverError& e) {
        spdlog::error("solver: {}", e.what());
        return Exit::solver;
    } catch (const std::exception& e) {
        spdlog::error("solver: {}", e.what());
        return Exit::solver;
    }
    return Exit::ok;
}
