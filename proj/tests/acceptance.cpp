#include <chrono>
#include <cmath>
#include <functional>
#include <string>
#include <vector>

#include <boost/math/quadrature/gauss.hpp>
#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <boost/math/quadrature/tanh_sinh.hpp>
#include <boost/math/special_functions/bessel.hpp>
#include <fmt/format.h>

#include "eqradar/radar.hpp"
#include "eqradar/toy.hpp"

using namespace eqradar;
using radar::ElasticAmplitude;
using radar::FranckCondon;

namespace {

class Criterion {
public:
    Criterion(int n, std::string title) : n_(n), title_(std::move(title)), start_(std::chrono::steady_clock::now()) {}

    void check(bool ok, const std::string& what)
    {
        ok_ = ok_ && ok;
        notes_.push_back((ok ? "" : "FAILED ") + what);
    }

    bool report() const
    {
        const double s = std::chrono::duration<double>(std::chrono::steady_clock::now() - start_).count();
        fmt::print("{} criterion {}: {} ({:.1f} s)\n", ok_ ? "PASS" : "FAIL", n_, title_, s);
        for (const auto& m : notes_) fmt::print("    {}\n", m);
        std::fflush(stdout);
        return ok_;
    }

private:
    int n_;
    std::string title_;
    std::chrono::steady_clock::time_point start_;
    bool ok_ = true;
    std::vector<std::string> notes_;
};

double rel_err(cplx a, cplx b) { return std::abs(a - b) / std::abs(b); }

double panels(const std::function<double(double)>& f, double a, double b, double width)
{
    double sum = 0.0;
    for (double x = a; x < b; x += width) sum += boost::math::quadrature::gauss<double, 20>::integrate(f, x, std::min(x + width, b));
    return sum;
}

// max over t_e of score, on a grid plus golden-section refinement
double maximize(const std::function<double(double)>& score, double lo, double hi, int n)
{
    const double h = (hi - lo) / n;
    double bt = lo, bv = -1e300;
    for (int i = 0; i <= n; ++i)
        if (const double v = score(lo + i * h); v > bv) bv = v, bt = lo + i * h;
    constexpr double g = 0.6180339887498949;
    double a = bt - h, b = bt + h;
    double c = b - g * (b - a), d = a + g * (b - a), fc = score(c), fd = score(d);
    for (int i = 0; i < 50; ++i) {
        if (fc > fd) {
            b = d, d = c, fd = fc;
            c = b - g * (b - a), fc = score(c);
        } else {
            a = c, c = d, fc = fd;
            d = a + g * (b - a), fd = score(d);
        }
    }
    return std::max({bv, fc, fd});
}

bool collision()
{
    Criterion c(1, "collision phase");
    const auto p = toy::collision_phase({1e-6, 100e-9, 12.9, 1e5});
    c.check(std::abs(p.alpha_eff - 1.697) <= 0.01, fmt::format("alpha_eff = {:.4f} (1.697 +- 0.01)", p.alpha_eff));
    c.check(std::abs(p.delta_phi / (2.0 * pi) - 0.810) <= 0.005,
            fmt::format("dphi/2pi = {:.4f} (0.810 +- 0.005)", p.delta_phi / (2.0 * pi)));
    return c.report();
}

bool coupler_circles()
{
    Criterion c(2, "coupler circles and RC limit");
    for (double alpha : {0.2, 1.0, 15.0}) {
        const coupler::Model cp = coupler::CounterPropagating{alpha};
        double circle = 0.0, modulus = 0.0;
        for (int i = 0; i < 1000; ++i) {
            const double X = 0.05 * i;
            circle = std::max(circle, std::abs(std::abs(coupler::s_ba(cp, X) - 0.5) - 0.5));
            modulus = std::max(modulus, std::abs(std::abs(coupler::topgate_transmission(alpha, X)) - 1.0));
        }
        c.check(circle < 1e-10, fmt::format("alpha = {}: max ||S_ba - 1/2| - 1/2| = {:.1e} on 1000 points", alpha, circle));
        c.check(modulus < 1e-10, fmt::format("alpha = {}: max ||t| - 1| = {:.1e}", alpha, modulus));
        const double cmu = coupler::rc_expansion(cp).c_mu;
        c.check(std::abs(cmu * (2.0 + alpha) - 1.0) < 1e-4, fmt::format("alpha = {}: C_mu/C_q = {:.6f} vs 1/(2+alpha)", alpha, cmu));
        const double rc = coupler::rc_expansion(coupler::TopGate{alpha}).c_mu;
        c.check(std::abs(rc * (1.0 + alpha) - 1.0) < 1e-4,
                fmt::format("alpha = {}: top gate R_K C_mu = {:.6f} l/v_F vs 1/(1+alpha)", alpha, rc));
    }
    return c.report();
}

bool solver_health()
{
    Criterion c(3, "decoherence solver health");
    for (double alpha : {0.2, 1.0, 15.0}) {
        const auto z = decoherence::solve_elastic_amplitude(coupler::CounterPropagating{alpha}, 40.0, 0.01);
        double top = 0.0;
        for (cplx v : z.table.values()) top = std::max(top, std::abs(v));
        c.check(std::abs(z(0.0) - 1.0) < 1e-6 && top <= 1.0 + 1e-9,
                fmt::format("alpha = {}: |Z(0) - 1| = {:.1e}, max |Z| - 1 = {:.1e}", alpha, std::abs(z(0.0) - 1.0), top - 1.0));
    }
    auto solve = [](const coupler::Model& m, double h, double x, bool picard) {
        auto s = [&m](double w) { return coupler::s_bb(m, w); };
        const auto n = static_cast<std::size_t>(std::lround(x / h));
        const auto b = picard ? decoherence::volterra_picard(s, coupler::s_bb_slope0(m), h, n)
                              : decoherence::volterra_step(s, coupler::s_bb_slope0(m), h, n);
        return decoherence::cumulative_amplitude(b, h);
    };
    auto sup = [](const std::vector<cplx>& a, const std::vector<cplx>& b, std::size_t stride) {
        double m = 0.0;
        for (std::size_t i = 0; i < a.size(); ++i) m = std::max(m, std::abs(a[i] - b[i * stride]));
        return m;
    };
    const coupler::Model m1 = coupler::CounterPropagating{1.0};
    const auto z1 = solve(m1, 0.04, 20.0, false), z2 = solve(m1, 0.02, 20.0, false), z3 = solve(m1, 0.01, 20.0, false);
    const double order = std::log2(sup(z1, z2, 2) / sup(z2, z3, 2));
    c.check(order >= 1.8, fmt::format("step-halving order {:.3f}", order));
    for (double alpha : {0.0, 0.2, 1.0}) {
        const coupler::Model m = coupler::CounterPropagating{alpha};
        const double d = sup(solve(m, 0.01, 20.0, false), solve(m, 0.01, 20.0, true), 1);
        c.check(d < 1e-8, fmt::format("alpha = {}: Picard vs stepping {:.1e}", alpha, d));
    }
    return c.report();
}

bool vacuum_baseline()
{
    Criterion c(4, "vacuum baseline");
    const double tau_e = 0.1, tau1 = 1.0;
    const auto zb = decoherence::ballistic(tau1, decoherence::default_omega_max(tau_e), 0.005);
    double worst = 0.0;
    for (int k = -40; k <= 40; ++k) {
        const double tau21 = 0.25 * k * tau_e;
        worst = std::max(worst, rel_err(radar::vacuum_baseline(zb, tau_e, tau1 + tau21), 2.0 * tau_e / cplx(2.0 * tau_e, tau21)));
    }
    c.check(worst < 1e-8, fmt::format("ballistic: worst relative error {:.1e} over tau21/tau_e in [-10, 10]", worst));

    const std::vector<double> widths{0.05, 0.1, 0.2, 0.4, 0.7, 1.0};
    std::vector<std::vector<double>> curves;
    bool near_half = false;
    for (double alpha : {0.2, 1.0, 15.0}) {
        const auto z = decoherence::solve_elastic_amplitude(coupler::CounterPropagating{alpha},
                                                            decoherence::default_omega_max(widths.front()), 0.01);
        std::vector<double> v;
        for (double te : widths) v.push_back(std::abs(radar::optimal_tau2(z, te).baseline));
        bool monotone = true;
        for (std::size_t i = 1; i < v.size(); ++i) monotone = monotone && v[i] > v[i - 1];
        c.check(monotone, fmt::format("alpha = {}: max_tau2 |X| = {:.4f} .. {:.4f} increasing over tau_e = {} .. {}", alpha,
                                      v.front(), v.back(), widths.front(), widths.back()));
        near_half = near_half || std::abs(v[1] - 0.5) <= 0.1;
        curves.push_back(v);
    }
    c.check(near_half, fmt::format("tau_e = 0.1: {:.4f}, {:.4f}, {:.4f} (one within 0.5 +- 0.1)", curves[0][1], curves[1][1],
                                   curves[2][1]));
    c.check(curves[2][1] > curves[1][1] && curves[1][1] > curves[0][1], "tau_e = 0.1: alpha = 15 above 1 above 0.2");
    return c.report();
}

bool squeezing_extremes()
{
    Criterion c(5, "squeezed Franck-Condon extremes");
    auto extremes = [](const radiation::SqueezedNarrowband& s) {
        const double period = pi / s.omega0;
        auto f = [&](double t) { return radiation::fc_squeezed_exact(s, t); };
        return std::pair{-maximize([&](double t) { return -f(t); }, 0.0, period, 400),
                         maximize(f, 0.0, period, 400)};
    };
    for (double z : {0.05, 0.15, 0.3}) {
        const radiation::SqueezedNarrowband s{pi, 5.0, z, cplx(0.6, 0.8), {}};
        const double expect = std::exp(-s.lambda() * (std::exp(4.0 * z) - 1.0) / 2.0);
        const double mn = extremes(s).first;
        c.check(std::abs(mn - expect) < 1e-10, fmt::format("|z| = {}: min |F| = {:.12f}, closed form {:.12f}", z, mn, expect));
    }
    for (auto [db, target] : {std::pair{0.86, 0.018}, {3.0, 0.051}}) {
        const radiation::SqueezedNarrowband s{pi, 5.0, radiation::squeezing_from_db(db), 1.0, {}};
        const double up = extremes(s).second - 1.0;
        c.check(std::abs(up - target) <= 0.001, fmt::format("{} dB: max |F| - 1 = {:.3f} % ({:.1f} +- 0.1)", db, 100 * up, 100 * target));
    }
    return c.report();
}

double max_relative(const radar::Radar& r, const FranckCondon& f, double omega0)
{
    return maximize([&](double t) { return std::abs(r.xplus(f, t).relative); }, 0.0, pi / omega0, 96);
}

bool squeezing_headline(const ElasticAmplitude& z, const radar::Tau2Optimum& o, double tau_e)
{
    Criterion c(6, "squeezing headline contrast");
    const double w0 = pi;
    const coupler::Model m = coupler::CounterPropagating{0.2};
    const cplx sba = coupler::s_ba(m, w0);
    const radar::Radar r(z, tau_e, o.tau2);
    const radiation::SqueezedNarrowband s{w0, 5.0, radiation::squeezing_from_db(1.25), sba, {}};
    const double base = std::abs(o.baseline);
    const double gain = maximize([&](double t) { return std::abs(r.xplus(radiation::fc_squeezed_harmonics(s), t).x_dc); },
                                 0.0, pi / w0, 96) - base;
    c.check(std::abs(base - 0.575) <= 0.03, fmt::format("|baseline| = {:.4f} (0.575 +- 0.03)", base));
    c.check(std::abs(gain - 0.003) <= 0.002, fmt::format("max_t_e |X| - |baseline| = {:.5f} (0.003 +- 0.002)", gain));

    const double eta = radar::squeezing_eta(z, tau_e, o.tau2, w0), lam = s.lambda();
    double worst = 0.0;
    for (double db = 0.25; db <= 3.0; db += 0.25) {
        const double za = radiation::squeezing_from_db(db);
        const auto f = radiation::fc_squeezed_harmonics({w0, 5.0, za, sba, {}});
        worst = std::max(worst, std::abs(max_relative(r, f, w0) - 1.0 - lam * radar::squeezing_gain(eta, za)));
    }
    c.check(worst <= lam * lam, fmt::format("max_t_e |relative| vs 1 + Lambda F_eta: worst {:.2e} = {:.2f} Lambda^2 (Lambda = {:.4f}, eta = {:.4f}, 0.25..3 dB)",
                                            worst, worst / (lam * lam), lam, eta));
    return c.report();
}

bool squeezing_structure(const ElasticAmplitude& z, const radar::Tau2Optimum& o, double tau_e)
{
    Criterion c(7, "optimal squeezing");
    const double w0 = pi, step = 0.0025;
    // leading order in Lambda: a weak coupler isolates it
    const cplx sba = 0.2 * coupler::s_ba(coupler::CounterPropagating{0.2}, w0);
    const radar::Radar r(z, tau_e, o.tau2);
    const double eta = radar::squeezing_eta(z, tau_e, o.tau2, w0);
    const double z_opt = std::atanh(eta) / 4.0;
    double best = -1.0, z_best = 0.0, z_neg = -1.0;
    for (int i = 0; i * step <= 2.6 * z_opt; ++i) {
        const double za = i * step;
        const double v = max_relative(r, radiation::fc_squeezed_harmonics({w0, 5.0, za, sba, {}}), w0);
        if (v > best) best = v, z_best = za;
        if (i > 0 && v < 1.0 && z_neg < 0.0) z_neg = za;
    }
    c.check(std::abs(z_best - z_opt) <= step,
            fmt::format("argmax |z| = {:.4f}, arctanh(eta)/4 = {:.4f} (eta = {:.4f}, grid {})", z_best, z_opt, eta, step));
    c.check(z_neg > 0.0 && std::abs(z_neg - 2.0 * z_opt) <= step,
            fmt::format("max_t_e |relative| - 1 turns negative at |z| = {:.4f}, 2 |z|_opt = {:.4f}", z_neg, 2.0 * z_opt));
    return c.report();
}

bool fock_suite()
{
    Criterion c(8, "single edge magnetoplasmon");
    const double w0 = 2.0, g0 = 0.1;

    const radiation::LorentzianMode cut(w0, g0, 2.0 * w0);
    const radiation::FockLorentzian one{1, w0, g0};
    const double heat = panels([&](double t) { return radiation::heat_current(one, t, radiation::HeatBranch::exact, &cut); },
                               -50.0, 250.0, 2.0);
    c.check(std::abs(heat / w0 - 1.0) < 1e-3,
            fmt::format("int J_Q dt = {:.6f} hbar w0 (cut 2 w0, retained norm {:.4f})", heat / w0, cut.retained_norm()));

    const coupler::Model m = coupler::CounterPropagating{0.2};
    const radiation::LorentzianMode chi(w0, g0, 3.0 * w0);
    double worst = 0.0;
    for (double gt : {0.2, 1.0, 2.5, 5.0}) {
        const double a = radiation::fock_overlap_x(m, chi, gt / g0), b = radiation::fock_wigner_x(m, chi, gt / g0);
        worst = std::max(worst, std::abs(a - b) / a);
    }
    c.check(worst < 1e-6, fmt::format("x(t) overlap vs Wigner routes: worst relative {:.1e} on g0 t in [0.2, 5]", worst));

    const auto mode = radiation::lorentzian_mode(w0, g0);
    worst = 0.0;
    for (double t : {3.0 / w0, 5.0, 10.0, 20.0}) {
        const double nb = radiation::fock_narrowband_x(m, w0, g0, t);
        worst = std::max(worst, std::abs(radiation::fock_overlap_x(m, mode, t) - nb) / nb);
    }
    c.check(worst < 0.1, fmt::format("narrowband x(t): worst relative {:.3f} for t >= 3/w0, g0/w0 = 0.05", worst));

    const double tau_e = 0.1;
    double dip_locked_2 = 0.0, dip_blocked_2 = 0.0;
    for (double alpha : {0.1, 15.0}) {
        const coupler::Model ma = coupler::CounterPropagating{alpha};
        const auto z = decoherence::solve_elastic_amplitude(ma, decoherence::default_omega_max(tau_e), 0.01);
        const auto o = radar::optimal_tau2(z, tau_e);
        for (double X : {2.0, 5.5, 10.0}) {
            const auto x = radiation::fock_x_table(ma, radiation::lorentzian_mode(X, g0));
            const auto f = radiation::fc_fock(1, x);
            radar::Radar r(z, tau_e, o.tau2);
            r.prepare_transient(o.tau2 - 6.0 - x.back(), o.tau2 + 41.0 - x.front());
            const double dip = maximize([&](double t) { return 1.0 - std::abs(r.xplus(f, t).relative); }, -5.0, 40.0, 180);
            c.check(dip >= 0.005 && dip <= 0.10, fmt::format("alpha = {}, w0 = {}: dip {:.2f} % (0.5 .. 10)", alpha, X, 100 * dip));
            if (X == 2.0) (alpha < 1.0 ? dip_locked_2 : dip_blocked_2) = dip;
        }
    }
    c.check(dip_locked_2 > dip_blocked_2, "w0 = 2: voltage-locked dip exceeds Coulomb-blocked dip");
    return c.report();
}

bool filter_identities()
{
    Criterion c(9, "filter identities");
    const auto z = decoherence::solve_elastic_amplitude(coupler::CounterPropagating{0.2}, decoherence::default_omega_max(0.1), 0.01);
    const double tau_e = 0.25, tau2 = 0.5;
    using GK = boost::math::quadrature::gauss_kronrod<double, 21>;
    double worst = 0.0;
    for (double W : {0.0, 0.4, 3.0, 12.0}) {
        auto g = [&](double w) { return z(w) * std::exp(-(2.0 * w + W) * tau_e) * std::polar(1.0, -w * tau2); };
        cplx q = 0.0;
        for (double a = 0.0; a < 180.0; a += 0.5)
            q += cplx(GK::integrate([&](double w) { return g(w).real(); }, a, a + 0.5, 10, 1e-14),
                      GK::integrate([&](double w) { return g(w).imag(); }, a, a + 0.5, 10, 1e-14));
        q *= 2.0 * tau_e;
        const cplx f = radar::filter_f(z, tau_e, tau2, W);
        worst = std::max({worst, rel_err(f, q), rel_err(f, std::exp(-W * tau_e) * radar::vacuum_baseline(z, tau_e, tau2))});
    }
    c.check(worst < 1e-10, fmt::format("f(W >= 0) = e^(-W tau_e) f(0) vs direct quadrature: {:.1e}", worst));

    const double tau21 = 0.7;
    boost::math::quadrature::tanh_sinh<double> ts;
    const double inf = std::numeric_limits<double>::infinity();
    auto k = [&](double u) { return radar::filtering_kernel(0.2, tau21, 0.5 * tau21 + u); };
    const cplx total(ts.integrate([&](double u) { return k(u).real(); }, -inf, inf),
                     ts.integrate([&](double u) { return k(u).imag(); }, -inf, inf));
    c.check(std::abs(total - 1.0) < 1e-8, fmt::format("|int K - 1| = {:.1e}", std::abs(total - 1.0)));

    const double te = 0.15;
    const auto o = radar::optimal_tau2(z, te);
    const auto h = radiation::fc_squeezed_harmonics({pi, 5.0, std::log(2.0) / 4.0, 1.0, {}});
    worst = 0.0;
    for (double t : {0.0, 0.21, 0.6}) {
        const radar::LevitonProbe p{te, t};
        worst = std::max(worst, rel_err(radar::xplus_dc_kernel(z, p, o.tau2, h), radar::xplus_dc(z, p, o.tau2, h, radar::Filter::adiabatic).x_dc));
    }
    c.check(worst < 1e-8, fmt::format("kernel route vs adiabatic filter route: {:.1e}", worst));

    const coupler::Model m = coupler::CounterPropagating{0.2};
    radiation::ClassicalDrive d;
    d.tones.push_back({1.5, 2.0, 0.3});
    const auto fc = radiation::fc_classical(m, d);
    const auto series = radiation::photo_assisted_coefficients(fc);
    const double A = 2.0 * std::abs(coupler::drive_transfer(m, 1.5));
    worst = 0.0;
    for (int n = -8; n <= 8; ++n) worst = std::max(worst, std::abs(std::abs(series[n]) - std::abs(boost::math::cyl_bessel_j(std::abs(n), A))));
    for (double t : {0.0, 0.7, 2.9}) worst = std::max(worst, std::abs(radiation::evaluate(fc, t) - std::polar(1.0, radiation::drive_phase(m, d, t))));
    c.check(worst < 1e-10, fmt::format("Jacobi-Anger: harmonics vs Bessel and vs e^(i theta): {:.1e}", worst));
    return c.report();
}

bool bridge()
{
    Criterion c(10, "classical MZI bridge");
    const double tau_e = 0.1, tau1 = 1.0;
    const coupler::Model m = coupler::TopGate{0.0};
    radiation::ClassicalDrive d;
    d.tones.push_back({2.0, 1.3, 0.4});
    const auto fc = radiation::fc_classical(m, d);
    const auto z = decoherence::ballistic(tau1, decoherence::default_omega_max(tau_e));
    auto u = [](double t) { return 1.3 * std::cos(2.0 * t + 0.4); };
    double worst = 0.0;
    for (double te : {0.0, 0.3, 1.1})
        for (double tau2 : {1.0, 1.05, 1.4}) {
            const auto full = radar::xplus_dc(z, {tau_e, te}, tau2, fc);
            const auto toy = toy::classical_mzi_pq(toy::leviton(tau_e, te), u, tau1, tau2, {}, 0.0);
            worst = std::max(worst, std::abs(full.x_dc - toy.overlap));
        }
    c.check(worst < 1e-6, fmt::format("pipeline vs direct overlap: worst {:.1e}", worst));
    return c.report();
}

}  // namespace

int main()
{
    int failed = 0;
    auto run = [&](bool ok) { failed += ok ? 0 : 1; };
    run(collision());
    run(coupler_circles());
    run(solver_health());
    run(vacuum_baseline());
    run(squeezing_extremes());
    {
        const double tau_e = Scales{}.time(15e-12);
        const auto widest = radiation::fc_squeezed_harmonics(
            {pi, 5.0, radiation::squeezing_from_db(3.0), coupler::s_ba(coupler::CounterPropagating{0.2}, pi), {}});
        const auto z = decoherence::solve_elastic_amplitude(
            coupler::CounterPropagating{0.2}, decoherence::default_omega_max(tau_e) + radar::harmonic_reach(widest, tau_e), 0.01);
        const auto o = radar::optimal_tau2(z, tau_e);
        run(squeezing_headline(z, o, tau_e));
        run(squeezing_structure(z, o, tau_e));
    }
    run(fock_suite());
    run(filter_identities());
    run(bridge());
    fmt::print("{} of 10 criteria pass\n", 10 - failed);
    return failed == 0 ? 0 : 1;
}
