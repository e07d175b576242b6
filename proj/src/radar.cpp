#include "eqradar/radar.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <exception>
#include <mutex>
#include <thread>

#include <fmt/format.h>

namespace eqradar::radar {

namespace {

template <class... Ts>
struct overloaded : Ts... {
    using Ts::operator()...;
};
template <class... Ts>
overloaded(Ts...) -> overloaded<Ts...>;

void sorted_unique(std::vector<double>& v)
{
    std::sort(v.begin(), v.end());
    v.erase(std::unique(v.begin(), v.end(), [](double a, double b) { return std::abs(a - b) < 1e-13 * (1.0 + std::abs(a)); }),
            v.end());
}

// |f(W)| <= e^{-|W| tau_e}
bool negligible(cplx c, double W, double tau_e) { return std::abs(c) * std::exp(-std::abs(W) * tau_e) < 1e-16; }

// int_lo^max Z(w) e^{-kappa w} dw, stopped once e^{-Re kappa (w - lo)} < e^{-42}.
cplx damped_laplace(const ElasticAmplitude& z, cplx kappa, double lo = 0.0)
{
    const double hi = std::min(z.omega_max(), lo + 42.0 / kappa.real());
    return z.table.laplace(kappa, lo, hi);
}

void check_tau_e(double tau_e)
{
    if (!(tau_e > 0.0)) throw std::invalid_argument(fmt::format("Leviton width must be positive (got {})", tau_e));
}

// Grid with spacing `fine` on [c0, c1], growing geometrically to [lo, hi].
std::vector<double> graded_grid(double lo, double hi, double c0, double c1, double fine, double growth)
{
    c0 = std::clamp(c0, lo, hi);
    c1 = std::clamp(c1, lo, hi);
    std::vector<double> g;
    for (double x = c0, h = fine; x > lo; x -= h, h *= growth) g.push_back(x);
    g.push_back(lo);
    const auto n = static_cast<std::size_t>(std::ceil((c1 - c0) / fine));
    for (std::size_t i = 1; i <= n; ++i) g.push_back(c0 + (c1 - c0) * static_cast<double>(i) / static_cast<double>(n));
    for (double x = c1, h = fine; x < hi; x += h, h *= growth) g.push_back(x);
    g.push_back(hi);
    sorted_unique(g);
    return g;
}

constexpr double kernel_span = 1e4;

}  // namespace

cplx LevitonProbe::operator()(double t) const
{
    return std::sqrt(tau_e / pi) / cplx(tau_e, t - t_e);
}

cplx LevitonProbe::spectrum(double w) const
{
    if (w < 0.0) return 0.0;
    return std::sqrt(4.0 * pi * tau_e) * std::exp(-w * tau_e) * std::polar(1.0, w * t_e);
}

cplx filter_f(const ElasticAmplitude& z, double tau_e, double tau2, double omega)
{
    check_tau_e(tau_e);
    const double wmax = z.omega_max();
    const double lo = std::max(0.0, -omega);
    if (lo >= wmax) throw std::out_of_range(fmt::format("filter: |Omega| = {} beyond the solved range {}", lo, wmax));
    if (std::exp(-2.0 * tau_e * (wmax - lo)) > 1e-12)
        throw SolverError(fmt::format("filter: omega_max = {} too small for tau_e = {} at Omega = {}", wmax, tau_e, omega));
    const cplx kappa(2.0 * tau_e, tau2);
    if (omega >= 0.0) return 2.0 * tau_e * std::exp(-omega * tau_e) * damped_laplace(z, kappa);
    return 2.0 * tau_e * std::exp(lo * tau_e) * damped_laplace(z, kappa, lo);
}

cplx filter_f_adiabatic(const ElasticAmplitude& z, double tau_e, double tau2, double omega)
{
    const cplx f0 = filter_f(z, tau_e, tau2, 0.0);
    const double a = std::abs(omega);
    if (omega >= 0.0) return std::exp(-a * tau_e) * f0;
    return std::exp(-a * tau_e) * std::polar(1.0, -a * (tau2 - z.tau1)) * f0;
}

double adiabatic_discrepancy(const ElasticAmplitude& z, double tau_e, double tau2, double omega)
{
    return std::abs(filter_f(z, tau_e, tau2, omega) - filter_f_adiabatic(z, tau_e, tau2, omega)) /
           std::abs(filter_f(z, tau_e, tau2, 0.0));
}

cplx vacuum_baseline(const ElasticAmplitude& z, double tau_e, double tau2) { return filter_f(z, tau_e, tau2, 0.0); }

Tau2Optimum optimal_tau2(const ElasticAmplitude& z, double tau_e, double lo, double hi)
{
    if (!(hi > lo)) throw std::invalid_argument("optimal_tau2: empty range");
    auto v = [&](double t) { return std::abs(vacuum_baseline(z, tau_e, t)); };
    const double step = 0.01;
    const auto n = static_cast<std::size_t>(std::ceil((hi - lo) / step));
    std::size_t best = 0;
    double best_v = -1.0;
    for (std::size_t i = 0; i <= n; ++i) {
        const double x = std::min(hi, lo + step * static_cast<double>(i));
        const double y = v(x);
        if (y > best_v) best_v = y, best = i;
    }
    double a = std::max(lo, lo + step * (static_cast<double>(best) - 1.0));
    double b = std::min(hi, lo + step * (static_cast<double>(best) + 1.0));
    const double r = 0.5 * (std::sqrt(5.0) - 1.0);
    double c = b - r * (b - a), d = a + r * (b - a);
    double fc = v(c), fd = v(d);
    while (b - a > 1e-4) {
        if (fc > fd) {
            b = d, d = c, fd = fc;
            c = b - r * (b - a), fc = v(c);
        } else {
            a = c, c = d, fc = fd;
            d = a + r * (b - a), fd = v(d);
        }
    }
    const double t = 0.5 * (a + b);
    return {t, vacuum_baseline(z, tau_e, t)};
}

cplx filtering_kernel(double tau_e, double tau21, double s)
{
    return (1.0 / cplx(tau_e, s) + 1.0 / cplx(tau_e, -(s - tau21))) / (2.0 * pi);
}

// --- Radar --------------------------------------------------------------

Radar::Radar(const ElasticAmplitude& z, double tau_e, double tau2, Filter filter)
    : z_(&z), tau_e_(tau_e), tau2_(tau2), filter_(filter), f0_(filter_f(z, tau_e, tau2, 0.0))
{
}

cplx Radar::filter(double omega) const
{
    if (omega == 0.0) return f0_;
    if (omega > 0.0) return std::exp(-omega * tau_e_) * f0_;
    if (filter_ == Filter::adiabatic) return std::exp(omega * tau_e_) * std::polar(1.0, omega * tau21()) * f0_;
    return filter_f(*z_, tau_e_, tau2_, omega);
}

// h(s) = int f(W) e^{-iWs} dW/2pi
cplx Radar::response(double s) const
{
    if (filter_ == Filter::adiabatic) return f0_ * filtering_kernel(tau_e_, tau21(), s);
    if (std::exp(-tau_e_ * z_->omega_max()) > 1e-8)
        throw SolverError(fmt::format("transient response: omega_max = {} too small for tau_e = {}", z_->omega_max(), tau_e_));
    return tau_e_ / pi * damped_laplace(*z_, cplx(tau_e_, tau2_ - s)) / cplx(tau_e_, s);
}

void Radar::prepare_transient(double s_lo, double s_hi)
{
    if (!(s_hi > s_lo)) throw std::invalid_argument("prepare_transient: empty range");
    const double fine = tau_e_ / 16.0;
    const double memory = std::max(std::abs(tau21()), std::abs(z_->tau1)) + 10.0 * tau_e_ + 20.0;
    const auto s = graded_grid(s_lo, s_hi, -memory, memory, fine, 1.02);
    std::vector<cplx> v(s.size());
    for (std::size_t i = 0; i < s.size(); ++i) v[i] = response(s[i]);
    h_ = num::ComplexTable(std::vector<double>(s), std::move(v));
}

cplx Radar::xplus_transient(const radiation::Transient& tr, double T) const
{
    const auto& F = tr.table;
    auto h = [this](double s) { return h_.contains(s) ? h_(s) : response(s); };
    auto g = [&](double t) -> cplx { return (F(t) - 1.0) * h(T - t); };
    const auto grid = F.grid();
    std::vector<double> br;
    for (std::size_t i = 0; i < grid.size(); i += 8) br.push_back(grid[i]);
    br.push_back(grid.back());
    for (double c : {T, T - tau21()})
        for (double k : {-4.0, -1.0, 0.0, 1.0, 4.0}) {
            const double x = c + k * tau_e_;
            if (x > grid.front() && x < grid.back()) br.push_back(x);
        }
    sorted_unique(br);
    return f0_ + num::integrate_or_throw(g, br, {1e-9, 1e-13, 400000});
}

RadarResult Radar::xplus(const FranckCondon& f, double t_e) const
{
    const double T = t_e + tau2_;
    const cplx x = std::visit(overloaded{
                                  [this](const radiation::UnitConstant&) { return f0_; },
                                  [&](const radiation::Harmonics& h) {
                                      const double w = h.series.fundamental();
                                      cplx sum = 0.0;
                                      for (int n = -h.series.nmax(); n <= h.series.nmax(); ++n) {
                                          const cplx c = h.series[n];
                                          if (negligible(c, n * w, tau_e_)) continue;
                                          sum += c * std::polar(1.0, -n * w * T) * filter(n * w);
                                      }
                                      return sum;
                                  },
                                  [&](const radiation::Transient& tr) { return xplus_transient(tr, T); },
                              },
                              f);
    // complex division of equal operands is not exact
    return {x, f0_, x == f0_ ? cplx(1.0) : x / f0_, t_e, tau_e_, tau2_};
}

double squeezing_eta(const ElasticAmplitude& z, double tau_e, double tau2, double omega0)
{
    const double W = 2.0 * omega0;
    return std::abs(filter_f(z, tau_e, tau2, W) + filter_f(z, tau_e, tau2, -W)) / (2.0 * std::abs(vacuum_baseline(z, tau_e, tau2)));
}

double squeezing_gain(double eta, double z_abs)
{
    const double c = std::cosh(2.0 * z_abs), s = std::sinh(2.0 * z_abs);
    return eta * c * s - s * s;
}

double harmonic_reach(const radiation::Harmonics& h, double tau_e)
{
    const double w = h.series.fundamental();
    double reach = 0.0;
    for (int n = -h.series.nmax(); n <= h.series.nmax(); ++n)
        if (!negligible(h.series[n], n * w, tau_e)) reach = std::max(reach, std::abs(n * w));
    return reach;
}

RadarResult xplus_dc(const ElasticAmplitude& z, const LevitonProbe& probe, double tau2, const FranckCondon& f, Filter filter)
{
    Radar r(z, probe.tau_e, tau2, filter);
    if (auto* tr = std::get_if<radiation::Transient>(&f)) {
        const double T = probe.t_e + tau2;
        r.prepare_transient(T - tr->table.back(), T - tr->table.front());
    }
    return r.xplus(f, probe.t_e);
}

cplx xplus_dc_kernel(const ElasticAmplitude& z, const LevitonProbe& probe, double tau2, const FranckCondon& f)
{
    const double tau_e = probe.tau_e;
    const double tau21 = tau2 - z.tau1;
    const double T = probe.t_e + tau2;
    const cplx f0 = vacuum_baseline(z, tau_e, tau2);
    const num::QuadOptions opt{1e-12, 1e-14, 2000000};

    return std::visit(
        overloaded{
            [&](const radiation::UnitConstant&) { return f0; },
            [&](const radiation::Harmonics& h) {
                const cplx c0 = h.series[0];
                auto g = [&](double s) -> cplx { return filtering_kernel(tau_e, tau21, s) * (h.series(T - s) - c0); };
                const double p = h.series.period();
                std::vector<double> br;
                for (double x = -kernel_span; x < kernel_span; x += (std::abs(x) < 50.0 ? 0.5 * p : p)) br.push_back(x);
                br.push_back(kernel_span);
                for (double k : {-4.0, -1.0, 0.0, 1.0, 4.0})
                    for (double c : {0.0, tau21}) br.push_back(c + k * tau_e);
                sorted_unique(br);
                return f0 * (c0 + num::integrate_or_throw(g, br, opt));
            },
            [&](const radiation::Transient& tr) {
                const auto& F = tr.table;
                auto g = [&](double s) -> cplx { return filtering_kernel(tau_e, tau21, s) * (F(T - s) - 1.0); };
                std::vector<double> br;
                const auto grid = F.grid();
                for (std::size_t i = 0; i < grid.size(); i += 8) br.push_back(T - grid[i]);
                br.push_back(T - grid.back());
                for (double k : {-4.0, -1.0, 0.0, 1.0, 4.0})
                    for (double c : {0.0, tau21}) {
                        const double x = c + k * tau_e;
                        if (x > T - grid.back() && x < T - grid.front()) br.push_back(x);
                    }
                sorted_unique(br);
                return f0 * (1.0 + num::integrate_or_throw(g, br, opt));
            },
        },
        f);
}

namespace {

// sqrt(v_F) psi(t) for a Leviton with extra damping eta.
cplx leviton_psi(const ElasticAmplitude& z, const LevitonProbe& p, double t, double eta)
{
    return std::sqrt(4.0 * pi * p.tau_e) / (2.0 * pi) * damped_laplace(z, cplx(p.tau_e + eta, t - p.t_e));
}

}  // namespace

cplx xplus_time_domain(const ElasticAmplitude& z, const LevitonProbe& probe, double tau2, const FranckCondon& f, double t,
                       double eta)
{
    check_tau_e(probe.tau_e);
    return radiation::evaluate(f, t) * std::conj(probe(t - tau2)) * leviton_psi(z, probe, t, eta);
}

namespace {

cplx time_integral(const ElasticAmplitude& z, const LevitonProbe& probe, double tau2, const FranckCondon& f, double eta)
{
    const double te = probe.t_e;
    const double fine = probe.tau_e / 16.0;
    const double c0 = te + std::min({0.0, tau2, z.tau1}) - 10.0 * probe.tau_e;
    const double c1 = te + std::max({0.0, tau2, z.tau1}) + 10.0 * probe.tau_e + 20.0;
    const auto grid = graded_grid(te - kernel_span, te + kernel_span, c0, c1, fine, 1.03);
    std::vector<cplx> psi(grid.size());
    for (std::size_t i = 0; i < grid.size(); ++i) psi[i] = leviton_psi(z, probe, grid[i], eta);
    const num::ComplexTable table(std::vector<double>(grid), std::move(psi));

    auto g = [&](double t) -> cplx { return radiation::evaluate(f, t) * std::conj(probe(t - tau2)) * table(t); };
    std::vector<double> br;
    for (std::size_t i = 0; i < grid.size(); i += 4) br.push_back(grid[i]);
    br.push_back(grid.back());
    sorted_unique(br);
    return num::integrate_or_throw(g, br, {1e-9, 1e-13, 2000000});
}

}  // namespace

TimeIntegral xplus_time_integral(const ElasticAmplitude& z, const LevitonProbe& probe, double tau2, const FranckCondon& f,
                                 double eta)
{
    check_tau_e(probe.tau_e);
    TimeIntegral r;
    r.value = time_integral(z, probe, tau2, f, 0.0);
    if (eta > 0.0) {
        const cplx v = time_integral(z, probe, tau2, f, eta);
        r.eta_error = std::abs(v - r.value) / std::abs(r.value);
    }
    r.flagged = r.eta_error > 0.01;
    return r;
}

FrequencyAmplitude effective_scattering_frequency(const ElasticAmplitude& z, const FranckCondon& f, double omega_plus,
                                                  double omega_minus)
{
    if (omega_minus < 0.0 || omega_minus > z.omega_max())
        throw std::out_of_range(fmt::format("scattering amplitude: omega- = {} outside [0, {}]", omega_minus, z.omega_max()));
    const cplx zm = z(omega_minus);
    FrequencyAmplitude r;
    std::visit(overloaded{
                   [&](const radiation::UnitConstant&) { r.lines.push_back({0, 0.0, zm}); },
                   [&](const radiation::Harmonics& h) {
                       const double w = h.series.fundamental();
                       for (int n = -h.series.nmax(); n <= h.series.nmax(); ++n)
                           r.lines.push_back({n, n * w, h.series[n] * zm});
                   },
                   [&](const radiation::Transient& tr) {
                       r.lines.push_back({0, 0.0, zm});
                       const auto g = tr.table.grid();
                       std::vector<cplx> d(g.size());
                       for (std::size_t i = 0; i < d.size(); ++i) d[i] = tr.table.values()[i] - 1.0;
                       const num::ComplexTable delta(std::vector<double>(g.begin(), g.end()), std::move(d));
                       const double om = omega_plus - omega_minus;
                       r.regular = delta.laplace(cplx(0.0, -om)) * zm;
                   },
               },
               f);
    return r;
}

EnergyResolved xplus_energy_resolved(const ElasticAmplitude& z, const FranckCondon& f, double omega_e, double gamma_e,
                                     double tau2, double omega)
{
    if (!(gamma_e > 0.0)) throw std::invalid_argument("energy-resolved probe: gamma_e must be positive");
    EnergyResolved r;
    r.amplitude = effective_scattering_frequency(z, f, omega + omega_e, omega_e);
    const cplx scale = gamma_e / std::sqrt(pi) * std::polar(1.0, -omega_e * tau2);
    r.amplitude.regular *= scale;
    for (auto& l : r.amplitude.lines) l.weight *= scale;
    r.valid = gamma_e < 0.1 * std::abs(omega_e);
    return r;
}

double dc_current(const RadarResult& x, double f_m, double phi_ab, double t_a, double t_b)
{
    if (t_a < 0.0 || t_a > 1.0 || t_b < 0.0 || t_b > 1.0)
        throw std::invalid_argument("dc_current: transmissions must lie in [0, 1]");
    const double r_a = 1.0 - t_a, r_b = 1.0 - t_b;
    const double k = std::sqrt(r_a * t_a * r_b * t_b);
    return -si::e * f_m * (r_a * r_b + t_a * t_b + 2.0 * k * (std::polar(1.0, phi_ab) * x.x_dc).real());
}

std::vector<SweepPoint> contrast_sweep(std::span<const double> grid, const std::function<RadarResult(double)>& point,
                                       unsigned jobs)
{
    std::vector<SweepPoint> out(grid.size());
    std::atomic<std::size_t> next{0};
    std::exception_ptr error;
    std::mutex error_mutex;
    auto worker = [&] {
        for (std::size_t i = next++; i < grid.size(); i = next++) {
            try {
                out[i] = {grid[i], point(grid[i])};
            } catch (...) {
                std::lock_guard lock(error_mutex);
                if (!error) error = std::current_exception();
                next = grid.size();
            }
        }
    };
    jobs = std::max(1u, std::min<unsigned>(jobs, static_cast<unsigned>(grid.size())));
    if (jobs == 1) {
        worker();
    } else {
        std::vector<std::jthread> pool;
        for (unsigned j = 0; j < jobs; ++j) pool.emplace_back(worker);
    }
    if (error) std::rethrow_exception(error);
    return out;
}

SweepSummary summarize(std::span<const SweepPoint> points)
{
    if (points.empty()) throw std::invalid_argument("summarize: empty sweep");
    SweepSummary s;
    s.max_relative = -1.0;
    s.min_relative = std::numeric_limits<double>::infinity();
    s.max_baseline = -1.0;
    for (const auto& p : points) {
        const double rel = std::abs(p.result.relative);
        const double base = std::abs(p.result.baseline);
        if (rel > s.max_relative) s.max_relative = rel, s.argmax_relative = p.scan_value;
        if (rel < s.min_relative) s.min_relative = rel, s.argmin_relative = p.scan_value;
        if (base > s.max_baseline) s.max_baseline = base, s.argmax_baseline = p.scan_value;
    }
    return s;
}

}  // namespace eqradar::radar
