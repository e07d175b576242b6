#include "config.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <map>
#include <set>
#include <sstream>

#include <fmt/format.h>

namespace eqradar::cli {

namespace {

constexpr const char* dim_names[] = {"time", "length", "velocity", "angular_frequency", "frequency", "voltage"};

const std::map<std::string, double>& unit_table(Dim d)
{
    static const std::map<std::string, double> time{{"s", 1.0},    {"ms", 1e-3},  {"us", 1e-6},
                                                    {"ns", 1e-9},  {"ps", 1e-12}, {"fs", 1e-15}};
    static const std::map<std::string, double> length{{"m", 1.0}, {"mm", 1e-3}, {"um", 1e-6}, {"nm", 1e-9}};
    static const std::map<std::string, double> velocity{{"m/s", 1.0}};
    static const std::map<std::string, double> angular{{"rad/s", 1.0}, {"1/s", 1.0}};
    static const std::map<std::string, double> frequency{{"Hz", 1.0}, {"kHz", 1e3}, {"MHz", 1e6}, {"GHz", 1e9}};
    static const std::map<std::string, double> voltage{{"V", 1.0}, {"mV", 1e-3}, {"uV", 1e-6}};
    switch (d) {
    case Dim::time: return time;
    case Dim::length: return length;
    case Dim::velocity: return velocity;
    case Dim::angular_frequency: return angular;
    case Dim::frequency: return frequency;
    case Dim::voltage: return voltage;
    }
    return time;
}

// Object view that remembers which keys were read, so leftovers can be
// reported as unknown.
class Reader {
public:
    Reader(const json& j, std::string path) : j_(j), path_(std::move(path))
    {
        if (!j_.is_object()) throw ConfigError(fmt::format("{}: expected an object", where()));
    }

    std::string where() const { return path_.empty() ? "<root>" : path_; }
    std::string at(const std::string& key) const { return path_.empty() ? key : path_ + "." + key; }

    bool has(const std::string& key) const { return j_.contains(key); }

    const json& get(const std::string& key)
    {
        if (!j_.contains(key)) throw ConfigError(fmt::format("{}: missing required key", at(key)));
        used_.insert(key);
        return j_.at(key);
    }

    double number(const std::string& key)
    {
        const json& v = get(key);
        if (!v.is_number()) throw ConfigError(fmt::format("{}: expected a number", at(key)));
        const double x = v.get<double>();
        if (!std::isfinite(x)) throw ConfigError(fmt::format("{}: not finite", at(key)));
        return x;
    }

    double number_or(const std::string& key, double dflt) { return has(key) ? number(key) : dflt; }

    std::string string(const std::string& key)
    {
        const json& v = get(key);
        if (!v.is_string()) throw ConfigError(fmt::format("{}: expected a string", at(key)));
        return v.get<std::string>();
    }

    std::string string_or(const std::string& key, std::string dflt) { return has(key) ? string(key) : dflt; }

    Reader object(const std::string& key) { return Reader(get(key), at(key)); }

    void finish() const
    {
        for (auto it = j_.begin(); it != j_.end(); ++it)
            if (!used_.contains(it.key())) throw ConfigError(fmt::format("{}: unknown key", at(it.key())));
    }

private:
    const json& j_;
    std::string path_;
    std::set<std::string> used_;
};

struct Context {
    Scales scales;
    Units units;
    std::filesystem::path base_dir;
    Kind kind = Kind::contrast;

    double si(Reader& r, const std::string& key, Dim d) const { return r.number(key) * units.factor(d, r.at(key)); }

    double to_reduced(double si_value, Dim d) const
    {
        switch (d) {
        case Dim::time: return scales.time(si_value);
        case Dim::angular_frequency: return scales.freq(si_value);
        case Dim::frequency: return scales.freq(2.0 * pi * si_value);
        case Dim::voltage: return reduced_voltage(scales, si_value);
        default: return si_value;
        }
    }

    double reduced(Reader& r, const std::string& key, Dim d) const { return to_reduced(si(r, key, d), d); }

    double positive(Reader& r, const std::string& key, Dim d) const
    {
        const double v = reduced(r, key, d);
        if (!(v > 0.0)) throw ConfigError(fmt::format("{}: must be positive", r.at(key)));
        return v;
    }

    std::filesystem::path path(const std::string& p) const
    {
        std::filesystem::path q(p);
        return q.is_absolute() || base_dir.empty() ? q : base_dir / q;
    }
};

Units parse_units(Reader r)
{
    Units u;
    for (int i = 0; i < 6; ++i) {
        if (!r.has(dim_names[i])) continue;
        const std::string name = r.string(dim_names[i]);
        const auto& table = unit_table(static_cast<Dim>(i));
        auto it = table.find(name);
        if (it == table.end()) {
            std::string known;
            for (const auto& [k, v] : table) known += (known.empty() ? "" : ", ") + k;
            throw ConfigError(fmt::format("{}: unknown unit '{}' (one of {})", r.at(dim_names[i]), name, known));
        }
        u.entry[i] = *it;
    }
    r.finish();
    return u;
}

CouplerSpec parse_coupler(Reader r, const Context& ctx)
{
    CouplerSpec c;
    c.model = r.string("model");
    if (c.model == "counter-propagating" || c.model == "top-gate") {
        c.alpha = r.number("alpha");
        if (c.alpha < 0.0) throw ConfigError(fmt::format("{}: must be non-negative", r.at("alpha")));
    } else if (c.model == "tabulated") {
        c.file = ctx.path(r.string("file"));
    } else if (c.model != "direct") {
        throw ConfigError(fmt::format("{}: unknown model '{}' (counter-propagating, top-gate, direct, tabulated)",
                                      r.at("model"), c.model));
    }
    r.finish();
    return c;
}

SolverSpec parse_solver(Reader r, const Context& ctx)
{
    SolverSpec s;
    if (r.has("omega_max")) s.omega_max = ctx.positive(r, "omega_max", Dim::angular_frequency);
    if (r.has("step")) s.step = ctx.positive(r, "step", Dim::angular_frequency);
    const std::string k = r.string_or("kernel", "convolution");
    if (k == "convolution")
        s.kernel = decoherence::Kernel::convolution;
    else if (k == "as-written")
        s.kernel = decoherence::Kernel::as_written;
    else
        throw ConfigError(fmt::format("{}: expected 'convolution' or 'as-written'", r.at("kernel")));
    r.finish();
    return s;
}

ProbeSpec parse_probe(Reader r, const Context& ctx)
{
    ProbeSpec p;
    if (r.has("tau_e")) p.tau_e = ctx.positive(r, "tau_e", Dim::time);
    if (r.has("t_e")) p.t_e = ctx.reduced(r, "t_e", Dim::time);
    if (r.has("tau_2")) {
        const json& v = r.get("tau_2");
        if (v.is_string()) {
            if (v.get<std::string>() != "optimal")
                throw ConfigError(fmt::format("{}: expected a number or \"optimal\"", r.at("tau_2")));
        } else {
            p.tau2 = ctx.reduced(r, "tau_2", Dim::time);
        }
    }
    const std::string f = r.string_or("filter", "exact");
    if (f == "exact")
        p.filter = radar::Filter::exact;
    else if (f == "adiabatic")
        p.filter = radar::Filter::adiabatic;
    else
        throw ConfigError(fmt::format("{}: expected 'exact' or 'adiabatic'", r.at("filter")));
    r.finish();
    return p;
}

num::ComplexTable load_drive_series(const std::filesystem::path& path, const Scales& scales)
{
    std::ifstream in(path);
    if (!in) throw IoError(fmt::format("cannot open drive series {}", path.string()));
    std::string line;
    std::getline(in, line);
    if (line.rfind("t,vg", 0) != 0) throw ConfigError(fmt::format("{}: expected header 't,vg'", path.string()));
    std::vector<double> t;
    std::vector<cplx> v;
    int row = 1;
    while (std::getline(in, line)) {
        ++row;
        if (line.empty()) continue;
        std::istringstream ss(line);
        double a = 0.0, b = 0.0;
        char comma = 0;
        if (!(ss >> a >> comma >> b) || comma != ',')
            throw ConfigError(fmt::format("{}:{}: malformed row", path.string(), row));
        if (!t.empty() && !(scales.time(a) > t.back()))
            throw ConfigError(fmt::format("{}:{}: times must increase", path.string(), row));
        t.push_back(scales.time(a));
        v.emplace_back(reduced_voltage(scales, b));
    }
    if (t.size() < 4) throw ConfigError(fmt::format("{}: need at least four samples", path.string()));
    return num::ComplexTable(std::move(t), std::move(v));
}

double omega0_of(Reader& r, const Context& ctx) { return ctx.positive(r, "omega0", Dim::angular_frequency); }

RadiationSpec parse_radiation(Reader r, const Context& ctx)
{
    const std::string type = r.string("type");
    RadiationSpec out;
    if (type == "vacuum") {
        out = VacuumSpec{};
    } else if (type == "classical") {
        ClassicalSpec c;
        if (r.has("dc")) c.drive.dc = ctx.reduced(r, "dc", Dim::voltage);
        if (r.has("tones")) {
            const json& tones = r.get("tones");
            if (!tones.is_array()) throw ConfigError(fmt::format("{}: expected an array", r.at("tones")));
            for (std::size_t i = 0; i < tones.size(); ++i) {
                Reader t(tones[i], r.at(fmt::format("tones[{}]", i)));
                radiation::DriveTone tone;
                tone.omega = ctx.positive(t, "frequency", Dim::frequency);
                tone.amplitude = ctx.reduced(t, "amplitude", Dim::voltage);
                tone.phase = t.number_or("phase", 0.0);
                t.finish();
                c.drive.tones.push_back(tone);
            }
        }
        if (r.has("series")) {
            if (!c.drive.tones.empty() || c.drive.dc != 0.0)
                throw ConfigError(fmt::format("{}: a time series excludes dc and tones", r.at("series")));
            c.series_file = ctx.path(r.string("series"));
            c.drive.series = load_drive_series(c.series_file, ctx.scales);
        }
        out = std::move(c);
    } else if (type == "squeezed") {
        SqueezedSpec s;
        s.omega0 = omega0_of(r, ctx);
        s.q0 = r.number("q0");
        if (!(s.q0 > 1.0)) throw ConfigError(fmt::format("{}: narrowband states need Q0 > 1", r.at("q0")));
        if (r.has("db") && r.has("z")) throw ConfigError(fmt::format("{}: give one of db, z", r.where()));
        if (r.has("db")) s.z = radiation::squeezing_from_db(r.number("db"));
        if (r.has("z")) s.z = r.number("z");
        if (s.z < 0.0) throw ConfigError(fmt::format("{}: |z| must be non-negative", r.where()));
        s.z_arg = r.number_or("z_arg", 0.0);
        if (r.has("phi0")) s.phi0 = r.number("phi0");
        if (r.has("s_ba")) {
            const json& v = r.get("s_ba");
            if (!v.is_array() || v.size() != 2 || !v[0].is_number() || !v[1].is_number())
                throw ConfigError(fmt::format("{}: expected [re, im]", r.at("s_ba")));
            s.s_ba = cplx(v[0].get<double>(), v[1].get<double>());
        }
        out = s;
    } else if (type == "fock") {
        FockSpec f;
        const json& n = r.get("n");
        if (!n.is_number_integer() || n.get<long long>() < 0) throw ConfigError(fmt::format("{}: expected a non-negative integer", r.at("n")));
        f.n = n.get<unsigned>();
        f.omega0 = omega0_of(r, ctx);
        f.gamma0 = ctx.positive(r, "gamma0", Dim::angular_frequency);
        if (!(f.gamma0 < f.omega0)) throw ConfigError(fmt::format("{}: need gamma0 < omega0", r.where()));
        out = f;
    } else if (type == "fock-mixture") {
        MixtureSpec m;
        const json& p = r.get("p");
        if (!p.is_array() || p.empty()) throw ConfigError(fmt::format("{}: expected a non-empty array", r.at("p")));
        for (const auto& x : p) {
            if (!x.is_number() || x.get<double>() < 0.0)
                throw ConfigError(fmt::format("{}: probabilities must be non-negative numbers", r.at("p")));
            m.p.push_back(x.get<double>());
        }
        double sum = 0.0;
        for (double x : m.p) sum += x;
        if (std::abs(sum - 1.0) > 1e-12) throw ConfigError(fmt::format("{}: probabilities sum to {}", r.at("p"), sum));
        m.omega0 = omega0_of(r, ctx);
        m.gamma0 = ctx.positive(r, "gamma0", Dim::angular_frequency);
        if (!(m.gamma0 < m.omega0)) throw ConfigError(fmt::format("{}: need gamma0 < omega0", r.where()));
        out = m;
    } else {
        throw ConfigError(fmt::format("{}: unknown radiation type '{}' (vacuum, classical, squeezed, fock, fock-mixture)",
                                      r.at("type"), type));
    }
    r.finish();
    return out;
}

Variable parse_variable(const std::string& s, const std::string& where, Kind kind)
{
    static const std::map<std::string, Variable> names{
        {"t_e", Variable::t_e},       {"tau_e", Variable::tau_e}, {"tau_2", Variable::tau_2}, {"z", Variable::z},
        {"omega0", Variable::omega0}, {"frequency", Variable::frequency}, {"db", Variable::db},   {"t", Variable::t}};
    auto it = names.find(s);
    if (it == names.end()) throw ConfigError(fmt::format("{}: unknown sweep variable '{}'", where, s));
    const Variable v = it->second;
    bool ok = false;
    switch (kind) {
    case Kind::contrast:
        ok = v == Variable::t_e || v == Variable::tau_e || v == Variable::tau_2 || v == Variable::z ||
             v == Variable::omega0;
        break;
    case Kind::coupler: ok = v == Variable::frequency; break;
    case Kind::squeezing: ok = v == Variable::db || v == Variable::z; break;
    case Kind::heat: ok = v == Variable::t; break;
    }
    if (!ok) throw ConfigError(fmt::format("{}: variable '{}' does not apply to a {} scenario", where, s, to_string(kind)));
    return v;
}

std::optional<Dim> dim_of(Variable v)
{
    switch (v) {
    case Variable::t_e:
    case Variable::tau_e:
    case Variable::tau_2:
    case Variable::t: return Dim::time;
    case Variable::omega0: return Dim::angular_frequency;
    case Variable::frequency: return Dim::frequency;
    case Variable::z:
    case Variable::db: return std::nullopt;
    }
    return std::nullopt;
}

SweepSpec parse_sweep(Reader r, const Context& ctx)
{
    SweepSpec s;
    s.variable = parse_variable(r.string("variable"), r.at("variable"), ctx.kind);
    if (r.has("values")) {
        if (r.has("from") || r.has("to") || r.has("points"))
            throw ConfigError(fmt::format("{}: give either values or from/to/points", r.where()));
        const json& v = r.get("values");
        if (!v.is_array() || v.empty()) throw ConfigError(fmt::format("{}: expected a non-empty array", r.at("values")));
        for (const auto& x : v) {
            if (!x.is_number()) throw ConfigError(fmt::format("{}: expected numbers", r.at("values")));
            s.shown.push_back(x.get<double>());
        }
    } else {
        const double a = r.number("from"), b = r.number("to");
        const json& pts = r.get("points");
        if (!pts.is_number_integer() || pts.get<int>() < 1)
            throw ConfigError(fmt::format("{}: expected a positive integer", r.at("points")));
        const int n = pts.get<int>();
        if (n == 1 && a != b) throw ConfigError(fmt::format("{}: one point needs from == to", r.where()));
        for (int i = 0; i < n; ++i) s.shown.push_back(n == 1 ? a : a + (b - a) * i / (n - 1));
    }
    const auto d = dim_of(s.variable);
    const double f = d ? ctx.units.factor(*d, r.at("variable")) : 1.0;
    for (double x : s.shown) {
        const double red = d ? ctx.to_reduced(x * f, *d) : x;
        const bool must_be_positive = s.variable == Variable::tau_e || s.variable == Variable::omega0;
        if (must_be_positive && !(red > 0.0))
            throw ConfigError(fmt::format("{}: sweep values must be positive", r.where()));
        if ((s.variable == Variable::z || s.variable == Variable::frequency) && red < 0.0)
            throw ConfigError(fmt::format("{}: sweep values must be non-negative", r.where()));
        s.reduced.push_back(red);
    }
    r.finish();
    return s;
}

OptimizeSpec parse_optimize(Reader r, const Context& ctx)
{
    OptimizeSpec o;
    if (r.string("over") != "t_e") throw ConfigError(fmt::format("{}: only t_e can be optimized over", r.at("over")));
    const std::string goal = r.string_or("goal", "max");
    if (goal != "max" && goal != "min") throw ConfigError(fmt::format("{}: expected 'max' or 'min'", r.at("goal")));
    o.maximize = goal == "max";
    if (r.has("from") != r.has("to")) throw ConfigError(fmt::format("{}: give both from and to", r.where()));
    if (r.has("from")) {
        o.from = ctx.reduced(r, "from", Dim::time);
        o.to = ctx.reduced(r, "to", Dim::time);
        if (!(*o.to > *o.from)) throw ConfigError(fmt::format("{}: need to > from", r.where()));
    }
    if (r.has("points")) {
        const json& p = r.get("points");
        if (!p.is_number_integer() || p.get<int>() < 2)
            throw ConfigError(fmt::format("{}: expected an integer >= 2", r.at("points")));
        o.points = p.get<int>();
    }
    r.finish();
    return o;
}

PlotStyle parse_plot(Reader r)
{
    PlotStyle p;
    p.y = r.string_or("y", "");
    p.dashed = r.string_or("dashed", "");
    p.x_label = r.string_or("x_label", "");
    p.y_label = r.string_or("y_label", "");
    p.title = r.string_or("title", "");
    r.finish();
    return p;
}

void check_series(const Series& s, Kind kind, const std::string& where)
{
    const bool squeezed = std::holds_alternative<SqueezedSpec>(s.radiation);
    const bool fock = std::holds_alternative<FockSpec>(s.radiation) || std::holds_alternative<MixtureSpec>(s.radiation);
    const Variable v = s.sweep.variable;
    if (kind == Kind::contrast) {
        if (v == Variable::z && !squeezed) throw ConfigError(where + ": a z sweep needs squeezed radiation");
        if (v == Variable::omega0 && !squeezed && !fock)
            throw ConfigError(where + ": an omega0 sweep needs squeezed or Fock radiation");
        if (s.optimize && v == Variable::t_e) throw ConfigError(where + ": cannot optimize over the swept t_e");
        if (s.optimize && !s.optimize->from && !squeezed && !std::holds_alternative<ClassicalSpec>(s.radiation))
            throw ConfigError(where + ": optimize needs from/to unless the radiation is periodic");
    }
    if (kind == Kind::squeezing && !squeezed) throw ConfigError(where + ": squeezing scenarios need squeezed radiation");
    if (kind == Kind::heat && !fock) throw ConfigError(where + ": heat scenarios need Fock radiation");
}

Series parse_series(const json& doc, const std::string& path, const Context& ctx, const std::string& label)
{
    Reader r(doc, path);
    Series s;
    s.label = label;
    s.coupler = parse_coupler(r.object("coupler"), ctx);
    if (r.has("solver")) s.solver = parse_solver(r.object("solver"), ctx);
    if (r.has("probe")) s.probe = parse_probe(r.object("probe"), ctx);
    s.radiation = r.has("radiation") ? parse_radiation(r.object("radiation"), ctx) : RadiationSpec{VacuumSpec{}};
    s.sweep = parse_sweep(r.object("sweep"), ctx);
    if (r.has("optimize")) s.optimize = parse_optimize(r.object("optimize"), ctx);
    r.finish();
    check_series(s, ctx.kind, r.where());
    return s;
}

}  // namespace

double Units::factor(Dim d, const std::string& where) const
{
    const auto& e = entry[static_cast<int>(d)];
    if (!e) throw ConfigError(fmt::format("{}: units.{} is not declared", where, dim_names[static_cast<int>(d)]));
    return e->second;
}

const std::string& Units::name(Dim d) const
{
    static const std::string none;
    const auto& e = entry[static_cast<int>(d)];
    return e ? e->first : none;
}

std::string to_string(Kind k)
{
    switch (k) {
    case Kind::contrast: return "contrast";
    case Kind::coupler: return "coupler";
    case Kind::squeezing: return "squeezing";
    case Kind::heat: return "heat";
    }
    return "?";
}

std::string to_string(Variable v)
{
    switch (v) {
    case Variable::t_e: return "t_e";
    case Variable::tau_e: return "tau_e";
    case Variable::tau_2: return "tau_2";
    case Variable::z: return "z";
    case Variable::omega0: return "omega0";
    case Variable::frequency: return "frequency";
    case Variable::db: return "db";
    case Variable::t: return "t";
    }
    return "?";
}

double reduced_voltage(const Scales& s, double volts) { return si::e * volts * s.time_unit() / si::hbar; }

Scenario parse_scenario(const json& doc, const std::filesystem::path& base_dir)
{
    Reader r(doc, "");
    Scenario sc;
    sc.source = doc;
    sc.name = r.string("name");
    if (sc.name.empty() || sc.name.find_first_of("/\\ \t") != std::string::npos)
        throw ConfigError("name: must be a non-empty file-name-safe string");

    const std::string kind = r.string_or("kind", "contrast");
    if (kind == "contrast")
        sc.kind = Kind::contrast;
    else if (kind == "coupler")
        sc.kind = Kind::coupler;
    else if (kind == "squeezing")
        sc.kind = Kind::squeezing;
    else if (kind == "heat")
        sc.kind = Kind::heat;
    else
        throw ConfigError(fmt::format("kind: unknown kind '{}' (contrast, coupler, squeezing, heat)", kind));

    sc.units = parse_units(r.object("units"));
    Context ctx{Scales{}, sc.units, base_dir, sc.kind};
    if (r.has("scales")) {
        Reader s = r.object("scales");
        if (s.has("length")) sc.scales.length = ctx.si(s, "length", Dim::length);
        if (s.has("velocity")) sc.scales.velocity = ctx.si(s, "velocity", Dim::velocity);
        if (!(sc.scales.length > 0.0) || !(sc.scales.velocity > 0.0))
            throw ConfigError("scales: length and velocity must be positive");
        s.finish();
    }
    ctx.scales = sc.scales;

    if (r.has("plot")) sc.plot = parse_plot(r.object("plot"));

    // Series entries are merge patches on the common body.
    json body = json::object();
    for (const char* key : {"coupler", "solver", "probe", "radiation", "sweep", "optimize"})
        if (r.has(key)) body[key] = r.get(key);
    if (r.has("series")) {
        const json& list = r.get("series");
        if (!list.is_array() || list.empty()) throw ConfigError("series: expected a non-empty array");
        std::set<std::string> labels;
        for (std::size_t i = 0; i < list.size(); ++i) {
            const std::string where = fmt::format("series[{}]", i);
            if (!list[i].is_object()) throw ConfigError(where + ": expected an object");
            json patch = list[i];
            if (!patch.contains("label") || !patch["label"].is_string())
                throw ConfigError(where + ".label: missing required string");
            const std::string label = patch["label"].get<std::string>();
            if (!labels.insert(label).second) throw ConfigError(fmt::format("{}.label: duplicate '{}'", where, label));
            patch.erase("label");
            json merged = body;
            merged.merge_patch(patch);
            sc.series.push_back(parse_series(merged, where, ctx, label));
        }
    } else {
        sc.series.push_back(parse_series(body, "", ctx, sc.name));
    }
    r.finish();
    return sc;
}

json read_json(const std::filesystem::path& path)
{
    std::ifstream in(path);
    if (!in) throw IoError(fmt::format("cannot open {}", path.string()));
    try {
        return json::parse(in, nullptr, true, true);
    } catch (const json::parse_error& e) {
        throw ConfigError(fmt::format("{}: {}", path.string(), e.what()));
    }
}

coupler::Model build_model(const CouplerSpec& c, const Scales& scales)
{
    if (c.model == "counter-propagating") return coupler::CounterPropagating{c.alpha};
    if (c.model == "top-gate") return coupler::TopGate{c.alpha};
    if (c.model == "direct") return coupler::DirectDrive{};
    return coupler::load_tabulated(c.file, scales);
}

}  // namespace eqradar::cli
