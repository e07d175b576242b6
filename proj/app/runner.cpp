#include "runner.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <exception>
#include <fstream>
#include <mutex>
#include <thread>

#include <fmt/format.h>
#include <spdlog/spdlog.h>

namespace eqradar::cli {

namespace {

using radiation::FranckCondon;

// Calls fn(i) for i in [0, n) on up to `jobs` threads; results keep index order.
template <class T, class Fn>
std::vector<T> parallel_map(std::size_t n, unsigned jobs, Fn fn)
{
    std::vector<T> out(n);
    std::atomic<std::size_t> next{0};
    std::exception_ptr error;
    std::mutex m;
    auto work = [&] {
        for (std::size_t i; (i = next++) < n;) {
            try {
                out[i] = fn(i);
            } catch (...) {
                std::lock_guard lock(m);
                if (!error) error = std::current_exception();
                next = n;
            }
        }
    };
    {
        std::vector<std::jthread> pool;
        const unsigned k = std::max(1u, std::min<unsigned>(jobs, static_cast<unsigned>(n)));
        for (unsigned i = 1; i < k; ++i) pool.emplace_back(work);
        work();
    }
    if (error) std::rethrow_exception(error);
    return out;
}

json summary_json(const radar::SweepSummary& s)
{
    return {{"max_relative", s.max_relative},   {"argmax_relative", s.argmax_relative},
            {"min_relative", s.min_relative},   {"argmin_relative", s.argmin_relative},
            {"max_baseline", s.max_baseline},   {"argmax_baseline", s.argmax_baseline}};
}

class ContrastSeries {
public:
    ContrastSeries(const Scenario& sc, const Series& s) : s_(s), model_(build_model(s.coupler, sc.scales))
    {
        const auto& g = s.sweep.reduced;
        const double shortest = s.sweep.variable == Variable::tau_e ? *std::min_element(g.begin(), g.end()) : s.probe.tau_e;
        // negative harmonics sample Z up to their own frequency above the probe band
        double reach = 0.0;
        if (std::holds_alternative<SqueezedSpec>(s.radiation) || std::holds_alternative<ClassicalSpec>(s.radiation)) {
            std::optional<double> w0, z;
            if (s.sweep.variable == Variable::omega0) w0 = *std::max_element(g.begin(), g.end());
            if (s.sweep.variable == Variable::z) z = *std::max_element(g.begin(), g.end());
            const auto widest = make_fc(w0, z);
            if (const auto* h = std::get_if<radiation::Harmonics>(&widest)) reach = radar::harmonic_reach(*h, shortest);
        }
        const double omega_max = s.solver.omega_max.value_or(decoherence::default_omega_max(shortest) + reach);
        spdlog::info("[{}] solving elastic amplitude: {}, omega_max = {:.4g}", s.label, coupler::describe(model_), omega_max);
        z_ = decoherence::solve_elastic_amplitude(model_, omega_max, s.solver.step, &report_, s.solver.kernel);
        spdlog::debug("[{}] tau1 = {:.6g}, step = {:.3g}, refinement change = {:.2e}", s.label, z_.tau1, report_.step,
                      report_.refinement_change);
        if (s.sweep.variable != Variable::tau_e && s.sweep.variable != Variable::tau_2) {
            tau2_ = tau2_for(s.probe.tau_e);
            spdlog::info("[{}] tau_2 = {:.6g} l/v_F", s.label, tau2_);
        }
        if (s.sweep.variable != Variable::z && s.sweep.variable != Variable::omega0) fc_ = make_fc({}, {});
    }

    Curve run(unsigned jobs)
    {
        const auto& grid = s_.sweep.reduced;
        std::function<radar::RadarResult(double)> point;
        const double t_e = s_.probe.t_e;
        std::unique_ptr<radar::Radar> shared;
        auto shared_radar = [&](double lo, double hi) {
            shared = std::make_unique<radar::Radar>(z_, s_.probe.tau_e, tau2_, s_.probe.filter);
            prepare(*shared, fc_, lo, hi);
            return shared.get();
        };
        switch (s_.sweep.variable) {
        case Variable::t_e: {
            const auto [lo, hi] = std::minmax_element(grid.begin(), grid.end());
            const radar::Radar* r = shared_radar(*lo, *hi);
            point = [this, r](double v) { return evaluate(*r, fc_, v); };
            break;
        }
        case Variable::tau_e:
            point = [this, t_e](double v) {
                radar::Radar r(z_, v, tau2_for(v), s_.probe.filter);
                prepare(r, fc_, te_lo(t_e), te_hi(t_e));
                return evaluate(r, fc_, t_e);
            };
            break;
        case Variable::tau_2:
            point = [this, t_e](double v) {
                radar::Radar r(z_, s_.probe.tau_e, v, s_.probe.filter);
                prepare(r, fc_, te_lo(t_e), te_hi(t_e));
                return evaluate(r, fc_, t_e);
            };
            break;
        case Variable::z: {
            const radar::Radar* r = shared_radar(0.0, 1.0);
            point = [this, r, t_e](double v) { return evaluate(*r, make_fc({}, v), t_e); };
            break;
        }
        case Variable::omega0:
            point = [this, t_e](double v) {
                const FranckCondon f = make_fc(v, {});
                radar::Radar r(z_, s_.probe.tau_e, tau2_, s_.probe.filter);
                prepare(r, f, te_lo(t_e), te_hi(t_e));
                return evaluate(r, f, t_e);
            };
            break;
        default: throw ConfigError("unsupported sweep variable for a contrast scenario");
        }

        const auto points = radar::contrast_sweep(grid, point, jobs);
        Curve c;
        c.label = s_.label;
        std::vector<radar::SweepPoint> shown(points);
        for (std::size_t i = 0; i < points.size(); ++i) {
            const auto& r = points[i].result;
            shown[i].scan_value = s_.sweep.shown[i];
            c.rows.push_back({s_.sweep.shown[i], r.x_dc.real(), r.x_dc.imag(), std::abs(r.x_dc), std::abs(r.baseline),
                              std::abs(r.relative)});
        }
        c.diagnostics = {{"coupler", coupler::describe(model_)},
                         {"omega_max", z_.omega_max()},
                         {"solver_step", report_.step},
                         {"refinement_change", report_.refinement_change},
                         {"halvings", report_.halvings},
                         {"tau1", z_.tau1},
                         {"summary", summary_json(radar::summarize(shown))}};
        if (s_.sweep.variable != Variable::tau_e && s_.sweep.variable != Variable::tau_2) c.diagnostics["tau2"] = tau2_;
        return c;
    }

private:
    double tau2_for(double tau_e) const { return s_.probe.tau2 ? *s_.probe.tau2 : radar::optimal_tau2(z_, tau_e).tau2; }

    // t_e range visited by one evaluation at t_e.
    double te_lo(double t_e) const { return s_.optimize && s_.optimize->from ? *s_.optimize->from : t_e; }
    double te_hi(double t_e) const { return s_.optimize && s_.optimize->to ? *s_.optimize->to : t_e; }

    void prepare(radar::Radar& r, const FranckCondon& f, double te_lo, double te_hi) const
    {
        const auto* tr = std::get_if<radiation::Transient>(&f);
        if (!tr) return;
        const double tau2 = r.tau21() + z_.tau1;
        r.prepare_transient(te_lo + tau2 - tr->table.back() - 1.0, te_hi + tau2 - tr->table.front() + 1.0);
    }

    FranckCondon make_fc(std::optional<double> omega0, std::optional<double> z_abs) const
    {
        return std::visit(
            [&](const auto& spec) -> FranckCondon {
                using T = std::decay_t<decltype(spec)>;
                if constexpr (std::is_same_v<T, VacuumSpec>) {
                    return radiation::fc_vacuum();
                } else if constexpr (std::is_same_v<T, ClassicalSpec>) {
                    return radiation::fc_classical(model_, spec.drive);
                } else if constexpr (std::is_same_v<T, SqueezedSpec>) {
                    const double w0 = omega0.value_or(spec.omega0);
                    const cplx sba = spec.s_ba.value_or(coupler::s_ba(model_, w0));
                    const radiation::SqueezedNarrowband st{w0, spec.q0, std::polar(z_abs.value_or(spec.z), spec.z_arg), sba,
                                                           spec.phi0};
                    return radiation::fc_squeezed_harmonics(st);
                } else {
                    const double w0 = omega0.value_or(spec.omega0);
                    const auto chi = radiation::lorentzian_mode(w0, spec.gamma0);
                    const auto x = radiation::fock_x_table(model_, chi);
                    if constexpr (std::is_same_v<T, FockSpec>)
                        return radiation::fc_fock(spec.n, x);
                    else
                        return radiation::fc_mixture(spec.p, x);
                }
            },
            s_.radiation);
    }

    radar::RadarResult evaluate(const radar::Radar& r, const FranckCondon& f, double t_e) const
    {
        if (!s_.optimize) return r.xplus(f, t_e);
        const auto& o = *s_.optimize;
        double lo = 0.0, hi = 1.0;
        if (o.from) {
            lo = *o.from;
            hi = *o.to;
        } else if (const auto* h = std::get_if<radiation::Harmonics>(&f)) {
            hi = h->series.period();
        } else if (std::holds_alternative<radiation::Transient>(f)) {
            throw ConfigError(fmt::format("[{}] optimize over t_e needs from/to for a transient factor", s_.label));
        }
        const double sign = o.maximize ? 1.0 : -1.0;
        auto score = [&](double t) { return sign * std::abs(r.xplus(f, t).x_dc); };
        const double h = (hi - lo) / (o.points - 1);
        double best_t = lo, best = -std::numeric_limits<double>::infinity();
        for (int i = 0; i < o.points; ++i) {
            const double t = lo + h * i;
            const double v = score(t);
            if (v > best) best = v, best_t = t;
        }
        // golden-section refinement inside the neighbouring grid cells
        constexpr double g = 0.6180339887498949;
        double a = best_t - h, b = best_t + h;
        if (o.from) a = std::max(a, lo), b = std::min(b, hi);
        double c = b - g * (b - a), d = a + g * (b - a);
        double fc = score(c), fd = score(d);
        for (int i = 0; i < 60 && b - a > 1e-10; ++i) {
            if (fc > fd) {
                b = d, d = c, fd = fc;
                c = b - g * (b - a), fc = score(c);
            } else {
                a = c, c = d, fc = fd;
                d = a + g * (b - a), fd = score(d);
            }
        }
        const double t_opt = std::max(fc, fd) > best ? (fc > fd ? c : d) : best_t;
        return r.xplus(f, t_opt);
    }

    const Series& s_;
    coupler::Model model_;
    decoherence::ElasticAmplitude z_;
    decoherence::SolveReport report_;
    double tau2_ = 0.0;
    FranckCondon fc_;
};

double unwrap(double prev, double next)
{
    while (next - prev > pi) next -= 2.0 * pi;
    while (next - prev < -pi) next += 2.0 * pi;
    return next;
}

Curve run_coupler(const Scenario& sc, const Series& s)
{
    const auto model = build_model(s.coupler, sc.scales);
    const bool gate = std::holds_alternative<coupler::TopGate>(model);
    const auto rc = coupler::rc_expansion(model);
    Curve c;
    c.label = s.label;
    double phase = 0.0, rc_phase = 0.0;
    for (std::size_t i = 0; i < s.sweep.reduced.size(); ++i) {
        const double X = s.sweep.reduced[i];
        // RC circuit with the same low-frequency admittance
        const cplx y_rc = -I * X * rc.c_mu / (1.0 - I * X * rc.r * rc.c_mu);
        cplx u, u_rc;
        double mag, mag_rc;
        if (gate) {
            const cplx t = coupler::topgate_transmission(std::get<coupler::TopGate>(model).alpha, X);
            u = t;
            u_rc = 1.0 - y_rc;
            mag = std::abs(1.0 - t);
            mag_rc = std::abs(y_rc);
        } else {
            const auto S = coupler::s_matrix(model, X);
            u = 2.0 * S.s_bb - 1.0;
            u_rc = 1.0 - 2.0 * y_rc;
            mag = std::norm(S.s_ba);
            mag_rc = std::norm(y_rc);
        }
        phase = i ? unwrap(phase, std::arg(u)) : std::arg(u);
        rc_phase = i ? unwrap(rc_phase, std::arg(u_rc)) : std::arg(u_rc);
        c.rows.push_back({s.sweep.shown[i], phase, mag, rc_phase, mag_rc});
    }
    c.diagnostics = {{"coupler", coupler::describe(model)}, {"c_mu_over_c_q", rc.c_mu}, {"r_over_r_k", rc.r}};
    return c;
}

Curve run_squeezing(const Scenario& sc, const Series& s)
{
    const auto model = build_model(s.coupler, sc.scales);
    const auto& spec = std::get<SqueezedSpec>(s.radiation);
    const cplx sba = spec.s_ba.value_or(coupler::s_ba(model, spec.omega0));
    Curve c;
    c.label = s.label;
    for (std::size_t i = 0; i < s.sweep.reduced.size(); ++i) {
        const double v = s.sweep.reduced[i];
        const double z = s.sweep.variable == Variable::db ? radiation::squeezing_from_db(v) : v;
        const radiation::SqueezedNarrowband st{spec.omega0, spec.q0, std::polar(z, spec.z_arg), sba, spec.phi0};
        const double period = pi / spec.omega0;
        const double t_max = st.phase() / (2.0 * spec.omega0);
        double lo = radiation::fc_squeezed_exact(st, t_max + 0.5 * period), hi = radiation::fc_squeezed_exact(st, t_max);
        constexpr int n = 2048;
        for (int k = 0; k < n; ++k) {
            const double f = radiation::fc_squeezed_exact(st, period * k / n);
            lo = std::min(lo, f);
            hi = std::max(hi, f);
        }
        const double L = st.lambda();
        const double s2 = std::sinh(2.0 * z);
        const auto h = radiation::fc_squeezed_harmonics(st);
        c.rows.push_back({s.sweep.shown[i], z, L, lo, hi, std::exp(-0.5 * L * std::expm1(4.0 * z)),
                          std::exp(L * s2 * std::exp(-2.0 * z)), h.series[0].real()});
    }
    c.diagnostics = {{"coupler", coupler::describe(model)}, {"s_ba_re", sba.real()}, {"s_ba_im", sba.imag()}};
    return c;
}

Curve run_heat(const Scenario& sc, const Series& s, unsigned jobs)
{
    const auto model = build_model(s.coupler, sc.scales);
    const double watt = si::hbar * sc.scales.freq_unit() * sc.scales.freq_unit();
    double omega0 = 0.0, gamma0 = 0.0;
    std::function<double(double, radiation::HeatBranch, const radiation::LorentzianMode*)> heat;
    double mean_n = 0.0;
    if (const auto* f = std::get_if<FockSpec>(&s.radiation)) {
        omega0 = f->omega0, gamma0 = f->gamma0, mean_n = f->n;
        const radiation::FockLorentzian st{f->n, omega0, gamma0};
        heat = [st](double t, radiation::HeatBranch b, const radiation::LorentzianMode* chi) {
            return radiation::heat_current(st, t, b, chi);
        };
    } else {
        const auto& m = std::get<MixtureSpec>(s.radiation);
        omega0 = m.omega0, gamma0 = m.gamma0;
        const radiation::FockMixture st{m.p, omega0, gamma0};
        mean_n = st.mean();
        heat = [st](double t, radiation::HeatBranch b, const radiation::LorentzianMode* chi) {
            return radiation::heat_current(st, t, b, chi);
        };
    }
    const auto chi = radiation::lorentzian_mode(omega0, gamma0);
    const auto& g = s.sweep.reduced;
    Curve c;
    c.label = s.label;
    c.rows = parallel_map<std::vector<double>>(g.size(), jobs, [&](std::size_t i) {
        const double t = g[i];
        return std::vector<double>{s.sweep.shown[i], watt * heat(t, radiation::HeatBranch::lorentzian, &chi),
                                   watt * heat(t, radiation::HeatBranch::exact, &chi),
                                   radiation::fock_overlap_x(model, chi, t),
                                   radiation::fock_narrowband_x(model, omega0, gamma0, t)};
    });
    double energy = 0.0;
    for (std::size_t i = 1; i < g.size(); ++i) energy += 0.5 * (g[i] - g[i - 1]) * (c.rows[i][2] + c.rows[i - 1][2]) / watt;
    c.diagnostics = {{"coupler", coupler::describe(model)},
                     {"retained_norm", chi.retained_norm()},
                     {"energy_over_mean_n_hbar_omega0", energy / (mean_n * omega0)}};
    return c;
}

}  // namespace

std::vector<std::string> columns_for(Kind k)
{
    switch (k) {
    case Kind::contrast: return {"scan_value", "x_re", "x_im", "abs_x", "baseline_abs", "relative_abs"};
    case Kind::coupler: return {"scan_value", "phase", "magnitude", "rc_phase", "rc_magnitude"};
    case Kind::squeezing:
        return {"scan_value", "z", "lambda", "min_abs_f", "max_abs_f", "min_closed_form", "max_closed_form", "f0"};
    case Kind::heat: return {"scan_value", "heat_lorentzian", "heat_exact", "x_overlap", "x_narrowband"};
    }
    return {};
}

Dataset run_scenario(const Scenario& sc, const RunOptions& opt)
{
    Dataset d;
    d.header = "eqradar " + sc.source.dump();
    d.columns = columns_for(sc.kind);
    for (const auto& s : sc.series) {
        spdlog::info("[{}] {} sweep over {} ({} points)", s.label, to_string(sc.kind), to_string(s.sweep.variable),
                     s.sweep.reduced.size());
        switch (sc.kind) {
        case Kind::contrast: d.curves.push_back(ContrastSeries(sc, s).run(opt.jobs)); break;
        case Kind::coupler: d.curves.push_back(run_coupler(sc, s)); break;
        case Kind::squeezing: d.curves.push_back(run_squeezing(sc, s)); break;
        case Kind::heat: d.curves.push_back(run_heat(sc, s, opt.jobs)); break;
        }
    }
    return d;
}

Artifacts write_artifacts(const Scenario& sc, const Dataset& d, const std::filesystem::path& out, bool plot, double seconds)
{
    std::error_code ec;
    std::filesystem::create_directories(out, ec);
    if (ec) throw IoError(fmt::format("cannot create {}: {}", out.string(), ec.message()));

    Artifacts a;
    a.csv = out / (sc.name + ".csv");
    {
        std::ofstream f(a.csv, std::ios::binary);
        if (!f) throw IoError(fmt::format("cannot write {}", a.csv.string()));
        write_csv(d, f);
        if (!f) throw IoError(fmt::format("write failed: {}", a.csv.string()));
    }
    if (plot) {
        std::ifstream in(a.csv, std::ios::binary);
        const Dataset back = read_csv(in);
        a.svg = out / (sc.name + ".svg");
        std::ofstream f(a.svg, std::ios::binary);
        if (!f) throw IoError(fmt::format("cannot write {}", a.svg.string()));
        write_svg(back, sc.plot, f);
        if (!f) throw IoError(fmt::format("write failed: {}", a.svg.string()));
    }

    json m;
    m["scenario"] = sc.name;
    m["kind"] = to_string(sc.kind);
    m["runtime_seconds"] = seconds;
    m["scales"] = {{"length_m", sc.scales.length},
                   {"velocity_m_per_s", sc.scales.velocity},
                   {"time_unit_s", sc.scales.time_unit()},
                   {"frequency_unit_rad_per_s", sc.scales.freq_unit()}};
    m["config"] = sc.source;
    m["columns"] = d.columns;
    m["series"] = json::array();
    for (std::size_t i = 0; i < d.curves.size(); ++i) {
        const auto& s = sc.series[i];
        m["series"].push_back({{"label", d.curves[i].label},
                               {"sweep", to_string(s.sweep.variable)},
                               {"points", d.curves[i].rows.size()},
                               {"diagnostics", d.curves[i].diagnostics}});
    }
    m["outputs"] = {{"csv", a.csv.filename().string()}};
    if (plot) m["outputs"]["svg"] = a.svg.filename().string();
    a.manifest = out / (sc.name + ".manifest.json");
    std::ofstream f(a.manifest, std::ios::binary);
    if (!f) throw IoError(fmt::format("cannot write {}", a.manifest.string()));
    f << m.dump(2) << '\n';
    if (!f) throw IoError(fmt::format("write failed: {}", a.manifest.string()));
    return a;
}

}  // namespace eqradar::cli
