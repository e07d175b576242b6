#include "presets.hpp"

#include <fmt/format.h>

namespace eqradar::cli {

namespace {

// Reduced frequency w l / v_F to rad/s at the default 10 um, 1e5 m/s scales.
constexpr double rad_s(double X) { return X * 1e10; }

json base(const std::string& name, const std::string& kind)
{
    json j;
    j["name"] = name;
    j["kind"] = kind;
    j["units"] = {{"time", "ps"}, {"length", "um"}, {"velocity", "m/s"}, {"angular_frequency", "rad/s"}};
    j["scales"] = {{"length", 10.0}, {"velocity", 1e5}};
    return j;
}

json fig4()
{
    json j = base("fig4", "contrast");
    j["coupler"] = {{"model", "counter-propagating"}, {"alpha", 0.2}};
    j["probe"] = {{"tau_2", "optimal"}};
    j["radiation"] = {{"type", "vacuum"}};
    j["sweep"] = {{"variable", "tau_e"}, {"from", 2.0}, {"to", 100.0}, {"points", 50}};
    j["series"] = json::array();
    for (auto [label, alpha] : {std::pair{"alpha=0.2", 0.2}, {"alpha=1", 1.0}, {"alpha=15", 15.0}})
        j["series"].push_back({{"label", label}, {"coupler", {{"alpha", alpha}}}});
    j["plot"] = {{"y", "abs_x"}, {"x_label", "tau_e (ps)"}, {"y_label", "max over tau_2 of |X+dc|"},
                 {"title", "Vacuum contrast vs Leviton width"}};
    return j;
}

json squeezed_figure(const std::string& name, double tau_e_ps)
{
    json j = base(name, "contrast");
    j["coupler"] = {{"model", "counter-propagating"}, {"alpha", 0.2}};
    j["probe"] = {{"tau_e", tau_e_ps}, {"tau_2", "optimal"}};
    j["radiation"] = {{"type", "squeezed"}, {"omega0", rad_s(1.0)}, {"q0", 5.0}, {"db", 1.25}};
    j["sweep"] = {{"variable", "t_e"}, {"from", 0.0}, {"to", 400.0}, {"points", 201}};
    j["series"] = json::array();
    for (auto [wname, X] : {std::pair{"1", 1.0}, {"2", 2.0}, {"pi", pi}})
        for (double db : {0.5, 1.25, 3.0})
            j["series"].push_back({{"label", fmt::format("w0={} {}dB", wname, db)},
                                   {"radiation", {{"omega0", rad_s(X)}, {"db", db}}}});
    j["plot"] = {{"y", "abs_x"}, {"dashed", "baseline_abs"}, {"x_label", "t_e (ps)"}, {"y_label", "|X+dc|"},
                 {"title", fmt::format("Squeezed radiation, tau_e = {} ps", tau_e_ps)}};
    return j;
}

json fig8()
{
    json j = base("fig8", "contrast");
    j["coupler"] = {{"model", "counter-propagating"}, {"alpha", 0.1}};
    j["probe"] = {{"tau_e", 10.0}, {"tau_2", "optimal"}};
    j["radiation"] = {{"type", "fock"}, {"n", 1}, {"omega0", rad_s(2.0)}, {"gamma0", 1e9}};
    j["sweep"] = {{"variable", "t_e"}, {"from", -500.0}, {"to", 4000.0}, {"points", 181}};
    j["series"] = json::array();
    for (double alpha : {0.1, 15.0})
        for (double X : {2.0, 5.5, 10.0})
            j["series"].push_back({{"label", fmt::format("alpha={} w0={}", alpha, X)},
                                   {"coupler", {{"alpha", alpha}}},
                                   {"radiation", {{"omega0", rad_s(X)}}}});
    j["plot"] = {{"y", "1-relative_abs"}, {"x_label", "t_e (ps)"}, {"y_label", "relative contrast decrease"},
                 {"title", "Single edge magnetoplasmon"}};
    return j;
}

json coupler_figure(const std::string& name, const std::string& model, const std::string& title)
{
    json j = base(name, "coupler");
    j["units"] = {{"frequency", "GHz"}, {"length", "um"}, {"velocity", "m/s"}};
    j["coupler"] = {{"model", model}, {"alpha", 0.2}};
    j["sweep"] = {{"variable", "frequency"}, {"from", 0.0}, {"to", 30.0}, {"points", 601}};
    j["series"] = json::array();
    j["series"].push_back({{"label", "alpha=0.2"}});
    j["series"].push_back({{"label", "alpha=15"}, {"coupler", {{"alpha", 15.0}}}});
    j["plot"] = {{"y", "phase"}, {"dashed", "rc_phase"}, {"x_label", "f (GHz)"}, {"y_label", "phase (rad)"},
                 {"title", title}};
    return j;
}

json squeeze_min()
{
    json j = base("squeeze-min", "squeezing");
    j["coupler"] = {{"model", "counter-propagating"}, {"alpha", 0.2}};
    j["radiation"] = {{"type", "squeezed"}, {"omega0", rad_s(pi)}, {"q0", 5.0}, {"s_ba", {1.0, 0.0}}};
    j["sweep"] = {{"variable", "db"}, {"from", 0.0}, {"to", 6.0}, {"points", 61}};
    j["plot"] = {{"y", "max_abs_f"}, {"dashed", "min_abs_f"}, {"x_label", "squeezing (dB)"}, {"y_label", "|F|"},
                 {"title", "Extremes of the squeezed Franck-Condon factor"}};
    return j;
}

json emp_heat()
{
    json j = base("emp-heat", "heat");
    j["coupler"] = {{"model", "counter-propagating"}, {"alpha", 0.2}};
    j["radiation"] = {{"type", "fock"}, {"n", 1}, {"omega0", rad_s(2.0)}, {"gamma0", 1e9}};
    j["sweep"] = {{"variable", "t"}, {"from", -1000.0}, {"to", 5000.0}, {"points", 241}};
    j["plot"] = {{"y", "heat_lorentzian"}, {"dashed", "heat_exact"}, {"x_label", "t (ps)"}, {"y_label", "J_Q (W)"},
                 {"title", "Heat current of one edge magnetoplasmon"}};
    return j;
}

}  // namespace

const std::vector<std::string>& preset_names()
{
    static const std::vector<std::string> names{"fig4", "fig6", "fig7", "fig8", "fig10", "fig12", "squeeze-min", "emp-heat"};
    return names;
}

json preset(const std::string& name)
{
    if (name == "fig4") return fig4();
    if (name == "fig6") return squeezed_figure("fig6", 15.0);
    if (name == "fig7") return squeezed_figure("fig7", 2.5);
    if (name == "fig8") return fig8();
    if (name == "fig10") return coupler_figure("fig10", "top-gate", "Top gate transmission phase");
    if (name == "fig12") return coupler_figure("fig12", "counter-propagating", "Coupler angle");
    if (name == "squeeze-min") return squeeze_min();
    if (name == "emp-heat") return emp_heat();
    std::string known;
    for (const auto& n : preset_names()) known += (known.empty() ? "" : ", ") + n;
    throw ConfigError(fmt::format("unknown preset '{}' (one of {})", name, known));
}

}  // namespace eqradar::cli
