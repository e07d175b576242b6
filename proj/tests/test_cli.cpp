#include <cstdlib>
#include <fstream>
#include <sstream>
#include <sys/wait.h>

#include "doctest.h"

#include "config.hpp"
#include "output.hpp"
#include "presets.hpp"
#include "runner.hpp"

using namespace eqradar;
using namespace eqradar::cli;
namespace fs = std::filesystem;

namespace {

json vacuum_doc()
{
    return json::parse(R"({
        "name": "vac",
        "units": {"time": "ps"},
        "coupler": {"model": "counter-propagating", "alpha": 0.2},
        "probe": {"tau_e": 10, "tau_2": "optimal"},
        "radiation": {"type": "vacuum"},
        "sweep": {"variable": "t_e", "values": [0, 35, 120]}
    })");
}

fs::path scratch(const std::string& name)
{
    const fs::path p = fs::temp_directory_path() / ("eqradar_test_" + name);
    fs::remove_all(p);
    fs::create_directories(p);
    return p;
}

std::string slurp(const fs::path& p)
{
    std::ifstream in(p, std::ios::binary);
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

int run_bin(const std::string& args)
{
    const std::string cmd = std::string("EQRADAR_LOG=error ") + EQRADAR_BIN + " " + args + " >/dev/null 2>&1";
    const int st = std::system(cmd.c_str());
    return WIFEXITED(st) ? WEXITSTATUS(st) : -1;
}

}  // namespace

TEST_CASE("schema violations")
{
    auto bad = [](auto edit) {
        json d = vacuum_doc();
        edit(d);
        return d;
    };
    CHECK_NOTHROW(parse_scenario(vacuum_doc()));
    CHECK_THROWS_AS(parse_scenario(bad([](json& d) { d["colour"] = "red"; })), ConfigError);
    CHECK_THROWS_AS(parse_scenario(bad([](json& d) { d["probe"]["tau"] = 1.0; })), ConfigError);
    CHECK_THROWS_AS(parse_scenario(bad([](json& d) { d.erase("units"); })), ConfigError);
    CHECK_THROWS_AS(parse_scenario(bad([](json& d) { d["units"].erase("time"); })), ConfigError);
    CHECK_THROWS_AS(parse_scenario(bad([](json& d) { d["units"]["time"] = "fortnight"; })), ConfigError);
    CHECK_THROWS_AS(parse_scenario(bad([](json& d) { d["coupler"]["model"] = "magic"; })), ConfigError);
    CHECK_THROWS_AS(parse_scenario(bad([](json& d) { d["coupler"]["alpha"] = -1.0; })), ConfigError);
    CHECK_THROWS_AS(parse_scenario(bad([](json& d) { d["probe"]["tau_e"] = -3.0; })), ConfigError);
    CHECK_THROWS_AS(parse_scenario(bad([](json& d) { d["sweep"]["variable"] = "z"; })), ConfigError);
    CHECK_THROWS_AS(parse_scenario(bad([](json& d) { d["name"] = "a/b"; })), ConfigError);
    CHECK_THROWS_AS(parse_scenario(bad([](json& d) {
                        d["radiation"] = {{"type", "fock-mixture"}, {"p", {0.5, 0.4}}, {"omega0", 2e10}, {"gamma0", 1e9}};
                        d["units"]["angular_frequency"] = "rad/s";
                    })),
                    ConfigError);
    CHECK_THROWS_AS(parse_scenario(bad([](json& d) { d["series"] = json::array({{{"label", "a"}}, {{"label", "a"}}}); })),
                    ConfigError);
}

TEST_CASE("units convert to reduced values")
{
    json a = vacuum_doc();
    json b = vacuum_doc();
    b["units"]["time"] = "ns";
    b["probe"]["tau_e"] = 0.01;
    b["sweep"]["values"] = {0.0, 0.035, 0.12};
    const auto sa = parse_scenario(a), sb = parse_scenario(b);
    // l / v_F = 10 um / 1e5 m/s = 100 ps
    CHECK(sa.series[0].probe.tau_e == doctest::Approx(0.1).epsilon(1e-12));
    CHECK(sb.series[0].probe.tau_e == doctest::Approx(0.1).epsilon(1e-12));
    for (std::size_t i = 0; i < 3; ++i) {
        CHECK(sa.series[0].sweep.reduced[i] == doctest::Approx(sb.series[0].sweep.reduced[i]).epsilon(1e-12));
        CHECK(sa.series[0].sweep.reduced[i] == doctest::Approx(a["sweep"]["values"][i].get<double>() / 100.0).epsilon(1e-12));
    }
    CHECK(sa.series[0].sweep.shown[1] == 35.0);

    // e V (l / v_F) / hbar
    const double v = 1e-3;
    const double hbar = 6.62607015e-34 / (2.0 * pi);
    CHECK(reduced_voltage(sa.scales, v) == doctest::Approx(1.602176634e-19 * v * 1e-10 / hbar).epsilon(1e-12));
}

TEST_CASE("every preset parses")
{
    REQUIRE(!preset_names().empty());
    for (const auto& n : preset_names()) {
        INFO(n);
        const auto sc = parse_scenario(preset(n));
        CHECK(sc.name == n);
        CHECK(!sc.series.empty());
    }
    CHECK_THROWS_AS(preset("no-such-figure"), ConfigError);
}

TEST_CASE("vacuum scenario: relative contrast is one, output is reproducible")
{
    const auto sc = parse_scenario(vacuum_doc());
    const auto d = run_scenario(sc, {2});
    REQUIRE(d.curves.size() == 1);
    const auto rel = d.column("relative_abs");
    for (const auto& row : d.curves[0].rows) CHECK(row[rel] == 1.0);

    const auto dir1 = scratch("a"), dir2 = scratch("b");
    const auto a1 = write_artifacts(sc, d, dir1, true, 0.0);
    const auto a2 = write_artifacts(sc, run_scenario(sc, {1}), dir2, true, 0.0);
    CHECK(a1.csv.filename() == "vac.csv");
    CHECK(a1.manifest.filename() == "vac.manifest.json");
    CHECK(slurp(a1.csv) == slurp(a2.csv));
    CHECK(slurp(a1.csv).find('\r') == std::string::npos);

    std::ifstream in(a1.csv, std::ios::binary);
    const auto back = read_csv(in);
    CHECK(back.columns == d.columns);
    REQUIRE(back.curves.size() == 1);
    CHECK(back.curves[0].rows == d.curves[0].rows);
}

TEST_CASE("svg output")
{
    Dataset d;
    d.header = "test";
    d.columns = {"scan_value", "y", "z"};
    for (int c = 0; c < 3; ++c) {
        Curve cv;
        cv.label = "c" + std::to_string(c);
        for (int i = 0; i < 5; ++i) cv.rows.push_back({double(i), double(i * c), 1.0});
        d.curves.push_back(cv);
    }
    auto count = [](const std::string& s, const std::string& what) {
        std::size_t n = 0;
        for (auto p = s.find(what); p != std::string::npos; p = s.find(what, p + 1)) ++n;
        return n;
    };
    std::ostringstream plain, dashed;
    write_svg(d, {"y", "", "x", "y", "t"}, plain);
    write_svg(d, {"1-y", "z", "x", "y", "t"}, dashed);
    CHECK(plain.str().rfind("<svg", 0) == 0);
    CHECK(count(plain.str(), "<polyline") == 3);
    CHECK(count(dashed.str(), "<polyline") == 6);
    CHECK(count(dashed.str(), "stroke-dasharray") >= 3);

    CHECK(column_values(d, d.curves[2], "1-y")[3] == -5.0);
    CHECK_THROWS_AS(column_values(d, d.curves[0], "nope"), ConfigError);

    Dataset empty;
    empty.columns = {"scan_value", "y"};
    std::ostringstream os;
    CHECK_THROWS_AS(write_svg(empty, {"y", "", "", "", ""}, os), IoError);

    std::istringstream junk("not,a\ncsv");
    CHECK_THROWS_AS(read_csv(junk), IoError);
}

TEST_CASE("exit codes")
{
    const auto dir = scratch("bin");
    auto write = [&](const std::string& name, const json& j) {
        std::ofstream(dir / name) << j.dump();
        return (dir / name).string();
    };
    json unknown = vacuum_doc();
    unknown["extra"] = 1;
    json solver_fail = vacuum_doc();
    solver_fail["probe"]["tau_e"] = 0.01;
    solver_fail["units"]["angular_frequency"] = "rad/s";
    solver_fail["solver"] = {{"omega_max", 1e10}};

    CHECK(run_bin("run " + write("ok.json", vacuum_doc()) + " --jobs 2 --out " + (dir / "o").string()) == 0);
    CHECK(fs::exists(dir / "o" / "vac.csv"));
    CHECK(fs::exists(dir / "o" / "vac.manifest.json"));
    CHECK(run_bin("run " + write("unknown.json", unknown)) == 2);
    CHECK(run_bin("run " + (dir / "missing.json").string()) == 4);
    CHECK(run_bin("run --preset no-such-figure") == 2);
    CHECK(run_bin("run") == 2);
    CHECK(run_bin("frobnicate") == 2);
    CHECK(run_bin("run " + write("tight.json", solver_fail) + " --out " + (dir / "p").string()) == 3);
    CHECK(run_bin("presets") == 0);
}
