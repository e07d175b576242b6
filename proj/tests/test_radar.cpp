#include <cmath>
#include <vector>

#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <boost/math/quadrature/tanh_sinh.hpp>

#include "doctest.h"
#include "eqradar/radar.hpp"

using namespace eqradar;
using namespace eqradar::radar;

namespace {

const ElasticAmplitude& weak_coupler()
{
    static const auto z = decoherence::solve_elastic_amplitude(coupler::CounterPropagating{0.2},
                                                               decoherence::default_omega_max(0.1), 0.01);
    return z;
}

double rel(cplx a, cplx b) { return std::abs(a - b) / std::abs(b); }

// 2 tau_e int_0^inf Z(w) e^{-(2w+W) tau_e} e^{-i w tau2} dw on the interpolated table
cplx filter_quadrature(const ElasticAmplitude& z, double tau_e, double tau2, double W)
{
    using GK = boost::math::quadrature::gauss_kronrod<double, 21>;
    auto g = [&](double w) { return z(w) * std::exp(-(2.0 * w + W) * tau_e) * std::polar(1.0, -w * tau2); };
    cplx sum = 0.0;
    const double top = std::min(z.omega_max(), 45.0 / tau_e);
    for (double a = 0.0; a < top; a += 0.5) {
        const double b = std::min(a + 0.5, top);
        sum += cplx(GK::integrate([&](double w) { return g(w).real(); }, a, b, 10, 1e-14),
                    GK::integrate([&](double w) { return g(w).imag(); }, a, b, 10, 1e-14));
    }
    return 2.0 * tau_e * sum;
}

radiation::SqueezedNarrowband squeezed(double w0, double r)
{
    return {w0, 5.0, r, 1.0, 0.0};
}

num::ComplexTable gaussian_dip(double a, double sigma, double c)
{
    std::vector<double> t;
    std::vector<cplx> f;
    for (int i = -800; i <= 800; ++i) {
        t.push_back(c + 0.01 * sigma * i);
        f.emplace_back(1.0 - a * std::exp(-0.5 * std::pow((t.back() - c) / sigma, 2)));
    }
    return num::ComplexTable(t, f);
}

}  // namespace

TEST_CASE("leviton probe normalization")
{
    const LevitonProbe p{0.3, 1.2};
    using GK = boost::math::quadrature::gauss_kronrod<double, 31>;
    const double n = GK::integrate([&](double w) { return std::norm(p.spectrum(w)); }, 0.0, 200.0, 15, 1e-13) / (2.0 * pi);
    CHECK(n == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(p.spectrum(-0.1) == cplx(0.0));
}

TEST_CASE("ballistic baseline closed form")
{
    const double tau_e = 0.1, tau1 = 1.0;
    const auto z = decoherence::ballistic(tau1, decoherence::default_omega_max(tau_e), 0.005);
    CHECK(std::abs(vacuum_baseline(z, tau_e, tau1) - 1.0) < 1e-8);
    CHECK(std::abs(vacuum_baseline(z, tau_e, tau1 + 2.0 * tau_e)) == doctest::Approx(1.0 / std::sqrt(2.0)).epsilon(1e-8));
    for (int k = -20; k <= 20; ++k) {
        const double tau21 = 0.5 * k * tau_e;
        const cplx exact = 2.0 * tau_e / cplx(2.0 * tau_e, tau21);
        CHECK(rel(vacuum_baseline(z, tau_e, tau1 + tau21), exact) < 1e-8);
    }
    // negative frequencies: the exact filter is the adiabatic one
    for (double W : {-0.3, -2.0, -9.0}) {
        const double tau2 = tau1 + 0.07;
        CHECK(rel(filter_f(z, tau_e, tau2, W), filter_f_adiabatic(z, tau_e, tau2, W)) < 1e-8);
        CHECK(adiabatic_discrepancy(z, tau_e, tau2, W) < 1e-8);
    }
}

TEST_CASE("filter: positive-frequency identity against direct quadrature")
{
    const auto& z = weak_coupler();
    const double tau_e = 0.25, tau2 = 0.5;
    const cplx f0 = filter_f(z, tau_e, tau2, 0.0);
    CHECK(f0 == vacuum_baseline(z, tau_e, tau2));
    for (double W : {0.0, 0.4, 3.0, 12.0}) {
        CHECK(rel(filter_f(z, tau_e, tau2, W), std::exp(-W * tau_e) * f0) < 1e-12);
        CHECK(rel(filter_f(z, tau_e, tau2, W), filter_quadrature(z, tau_e, tau2, W)) < 1e-10);
    }
    CHECK(std::abs(f0) <= 1.0);
}

TEST_CASE("filter: adiabatic approximation for a weak coupler")
{
    const auto& z = weak_coupler();
    const double tau_e = 0.1;
    const auto opt = optimal_tau2(z, tau_e);
    CHECK(adiabatic_discrepancy(z, tau_e, opt.tau2, -0.1) < 0.05);
    CHECK(filter_f_adiabatic(z, tau_e, opt.tau2, 0.0) == filter_f(z, tau_e, opt.tau2, 0.0));
    // optimum is a maximum of the baseline
    for (double d : {-0.01, 0.01}) CHECK(std::abs(vacuum_baseline(z, tau_e, opt.tau2 + d)) < std::abs(opt.baseline));
    CHECK(std::abs(opt.baseline) == doctest::Approx(0.5).epsilon(0.2));
    CHECK_THROWS_AS(filter_f(z, tau_e, 0.3, -5000.0), std::out_of_range);
    CHECK_THROWS_AS(filter_f(z, 1e-3, 0.3, 0.0), SolverError);
}

TEST_CASE("vacuum gives relative contrast one on every route")
{
    const auto& z = weak_coupler();
    const LevitonProbe p{0.15, 0.4};
    const double tau2 = 0.45;
    const auto vac = radiation::fc_vacuum();
    const auto r = xplus_dc(z, p, tau2, vac);
    CHECK(r.relative == cplx(1.0));
    CHECK(r.x_dc == vacuum_baseline(z, p.tau_e, tau2));
    CHECK(xplus_dc_kernel(z, p, tau2, vac) == r.baseline);
    CHECK(xplus_dc(z, p, tau2, vac, Filter::adiabatic).relative == cplx(1.0));
}

TEST_CASE("filtering kernel")
{
    const double tau_e = 0.2, tau21 = 0.7, c = 0.5 * tau21;
    boost::math::quadrature::tanh_sinh<double> ts;
    const double inf = std::numeric_limits<double>::infinity();
    const double re = ts.integrate([&](double u) { return filtering_kernel(tau_e, tau21, c + u).real(); }, -inf, inf);
    const double im = ts.integrate([&](double u) { return filtering_kernel(tau_e, tau21, c + u).imag(); }, -inf, inf);
    CHECK(re == doctest::Approx(1.0).epsilon(1e-8));
    CHECK(std::abs(im) < 1e-8);
    // Lorentzian form with complex width
    const cplx a(tau_e, 0.5 * tau21);
    for (double s : {-1.0, 0.0, 0.35, 2.0})
        CHECK(std::abs(filtering_kernel(tau_e, tau21, s) - a / (pi * (a * a + (s - c) * (s - c)))) < 1e-12);
}

TEST_CASE("kernel route equals the adiabatic filter route")
{
    const auto& z = weak_coupler();
    const double tau_e = 0.15;
    const auto opt = optimal_tau2(z, tau_e);
    const auto f = radiation::fc_squeezed_harmonics(squeezed(pi, std::log(2.0) / 4.0));
    for (double te : {0.0, 0.21, 0.6}) {
        const LevitonProbe p{tau_e, te};
        const auto a = xplus_dc(z, p, opt.tau2, f, Filter::adiabatic);
        CHECK(rel(xplus_dc_kernel(z, p, opt.tau2, f), a.x_dc) < 1e-8);
    }
}

TEST_CASE("short Levitons sample F at the arrival time")
{
    const double tau1 = 1.0, tau_e = 1e-3;
    const auto z = decoherence::ballistic(tau1, decoherence::default_omega_max(tau_e), 0.05);
    const auto s = squeezed(0.5, 0.2);
    const auto f = radiation::fc_squeezed_harmonics(s);
    for (double te : {0.0, 1.0, 2.5}) {
        const auto r = xplus_dc(z, {tau_e, te}, tau1, f);
        CHECK(std::abs(r.relative - radiation::fc_squeezed_exact(s, te + tau1)) < 1e-3);
    }
}

TEST_CASE("time-averaged squeezed contrast")
{
    const auto& z = weak_coupler();
    const double tau_e = 0.15, w0 = 2.0;
    const auto opt = optimal_tau2(z, tau_e);
    const auto f = radiation::fc_squeezed_harmonics(squeezed(w0, 0.17));
    const Radar radar(z, tau_e, opt.tau2);
    const int n = 64;
    cplx mean = 0.0;
    for (int k = 0; k < n; ++k) mean += radar.xplus(f, k * (pi / w0) / n).x_dc;
    mean /= static_cast<double>(n);
    CHECK(rel(mean, opt.baseline * f.series[0]) < 1e-8);
}

TEST_CASE("time domain: ballistic Leviton and dc integral")
{
    const double tau_e = 0.1, tau1 = 1.0;
    const auto z = decoherence::ballistic(tau1, decoherence::default_omega_max(tau_e), 0.005);
    const LevitonProbe p{tau_e, 0.3};
    const auto vac = radiation::fc_vacuum();
    for (double t : {1.0, 1.3, 1.45, 2.0}) {
        const double expect = tau_e / pi / (tau_e * tau_e + std::pow(t - tau1 - p.t_e, 2));
        CHECK(std::abs(xplus_time_domain(z, p, tau1, vac, t) - expect) < 1e-7 * expect);
    }
    CHECK(std::abs(xplus_time_integral(z, p, tau1, vac).value - 1.0) < 1e-5);

    const auto& zc = weak_coupler();
    const auto opt = optimal_tau2(zc, tau_e);
    const auto ti = xplus_time_integral(zc, p, opt.tau2, vac);
    CHECK(rel(ti.value, opt.baseline) < 0.01);
    CHECK_FALSE(ti.flagged);
}

TEST_CASE("frequency-domain amplitudes")
{
    const auto& z = weak_coupler();
    const auto vac = effective_scattering_frequency(z, radiation::fc_vacuum(), 2.0, 2.0);
    REQUIRE(vac.lines.size() == 1);
    CHECK(vac.lines[0].weight == z(2.0));
    CHECK(vac.regular == cplx(0.0));

    const auto one = decoherence::from_function([](double) -> cplx { return 1.0; }, 20.0, 0.01);
    const auto h = radiation::fc_squeezed_harmonics(squeezed(1.5, 0.2));
    const auto ladder = effective_scattering_frequency(one, h, 3.0, 1.0);
    CHECK(static_cast<int>(ladder.lines.size()) == 2 * h.series.nmax() + 1);
    for (const auto& l : ladder.lines) {
        CHECK(std::abs(l.weight - h.series[l.n]) < 1e-14);
        CHECK(l.omega == doctest::Approx(3.0 * l.n));
    }

    // Gaussian dip: transform -a sigma sqrt(2 pi) e^{-W^2 sigma^2/2}, real and even
    const double a = 0.3, sigma = 2.0;
    const radiation::FranckCondon dip = radiation::Transient{gaussian_dip(a, sigma, 0.0)};
    for (double W : {0.0, 0.3, 1.0}) {
        const auto r = effective_scattering_frequency(z, dip, 1.0 + W, 1.0);
        const double ft = -a * sigma * std::sqrt(2.0 * pi) * std::exp(-0.5 * W * W * sigma * sigma);
        CHECK(std::abs(r.regular - ft * z(1.0)) < 1e-6);
    }
    CHECK_THROWS_AS(effective_scattering_frequency(z, dip, 1.0, -1.0), std::out_of_range);
}

TEST_CASE("energy-resolved narrow probe")
{
    const auto& z = weak_coupler();
    const double we = 5.0, ge = 0.1, tau2 = 0.4;
    const auto r = xplus_energy_resolved(z, radiation::fc_vacuum(), we, ge, tau2, 0.0);
    CHECK(r.valid);
    REQUIRE(r.amplitude.lines.size() == 1);
    CHECK(std::abs(r.amplitude.lines[0].weight - ge / std::sqrt(pi) * std::polar(1.0, -we * tau2) * z(we)) < 1e-15);
    CHECK_FALSE(xplus_energy_resolved(z, radiation::fc_vacuum(), we, 2.0, tau2, 0.0).valid);
    CHECK_THROWS_AS(xplus_energy_resolved(z, radiation::fc_vacuum(), we, 0.0, tau2, 0.0), std::invalid_argument);
}

TEST_CASE("dc current")
{
    const double fm = 1e9, e = si::e;
    auto res = [](cplx x) {
        RadarResult r;
        r.x_dc = x;
        return r;
    };
    CHECK(dc_current(res(0.0), fm, 0.0, 0.5, 0.5) == doctest::Approx(-e * fm / 2.0));
    CHECK(std::abs(dc_current(res(1.0), fm, pi, 0.5, 0.5)) < 1e-12 * e * fm);
    CHECK(dc_current(res(1.0), fm, 0.0, 0.5, 0.5) == doctest::Approx(-e * fm));
    // fringe visibility is |X|
    const cplx x = std::polar(0.37, 1.1);
    double lo = 0.0, hi = -1.0;
    for (int k = 0; k < 3600; ++k) {
        const double i = -dc_current(res(x), fm, 2.0 * pi * k / 3600.0, 0.5, 0.5);
        lo = k == 0 ? i : std::min(lo, i);
        hi = std::max(hi, i);
    }
    CHECK((hi - lo) / (hi + lo) == doctest::Approx(0.37).epsilon(1e-5));
    CHECK_THROWS_AS(dc_current(res(x), fm, 0.0, 1.5, 0.5), std::invalid_argument);
}

TEST_CASE("sweeps are ordered and independent of the thread count")
{
    const auto& z = weak_coupler();
    const double tau_e = 0.1;
    const auto opt = optimal_tau2(z, tau_e);
    const auto f = radiation::fc_squeezed_harmonics(squeezed(pi, 0.14));
    const Radar radar(z, tau_e, opt.tau2);
    std::vector<double> grid;
    for (int i = 0; i < 40; ++i) grid.push_back(0.025 * i);
    auto point = [&](double te) { return radar.xplus(f, te); };
    const auto a = contrast_sweep(grid, point, 1);
    const auto b = contrast_sweep(grid, point, 4);
    for (std::size_t i = 0; i < grid.size(); ++i) {
        CHECK(a[i].scan_value == grid[i]);
        CHECK(a[i].result.x_dc == b[i].result.x_dc);
    }
    const auto s = summarize(a);
    CHECK(s.max_relative >= s.min_relative);
    CHECK(s.max_baseline == doctest::Approx(std::abs(opt.baseline)));

    const auto vac = contrast_sweep(grid, [&](double te) { return radar.xplus(radiation::fc_vacuum(), te); }, 2);
    for (const auto& p : vac) CHECK(p.result.relative == cplx(1.0));
    CHECK_THROWS_AS(contrast_sweep(grid, [](double) -> RadarResult { throw SolverError("x"); }, 3), SolverError);
    CHECK_THROWS_AS(summarize(std::vector<SweepPoint>{}), std::invalid_argument);
}

TEST_CASE("photon-number mixtures scale the dip by the mean")
{
    const auto& z = weak_coupler();
    const double tau_e = 0.1;
    const auto opt = optimal_tau2(z, tau_e);
    std::vector<double> t;
    std::vector<cplx> x;
    for (int i = 0; i <= 400; ++i) {
        t.push_back(-5.0 + 0.05 * i);
        x.emplace_back(1e-3 * std::exp(-0.5 * t.back() * t.back()));
    }
    const num::ComplexTable xt(t, x);
    const std::vector<double> p{0.2, 0.3, 0.4, 0.1};
    const double mean = 0.3 + 0.8 + 0.3;
    Radar radar(z, tau_e, opt.tau2);
    radar.prepare_transient(-20.0, 20.0);
    const double te = -opt.tau2;
    const double d1 = 1.0 - std::abs(radar.xplus(radiation::fc_fock(1, xt), te).relative);
    const double dm = 1.0 - std::abs(radar.xplus(radiation::fc_mixture(p, xt), te).relative);
    CHECK(d1 > 1e-4);
    CHECK(std::abs(dm - mean * d1) < 10.0 * 1e-6);
}
