#include "eqradar/radiation.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <memory>
#include <mutex>
#include <numeric>

#include <fmt/format.h>

namespace eqradar::radiation {

namespace {

template <class... Ts>
struct overloaded : Ts... {
    using Ts::operator()...;
};
template <class... Ts>
overloaded(Ts...) -> overloaded<Ts...>;

// S_ba(w) / (-i w), finite at w = 0.
cplx transfer_ba(const coupler::Model& m, double w)
{
    if (std::holds_alternative<coupler::CounterPropagating>(m) || std::holds_alternative<coupler::Tabulated>(m))
        return coupler::drive_transfer(m, w);
    return 0.0;
}

// Building the kernel table costs seconds; keep one per coupler.
const coupler::GammaKernel& gamma_kernel_for(const coupler::Model& m)
{
    static std::mutex mu;
    static std::map<std::pair<std::size_t, double>, std::unique_ptr<coupler::GammaKernel>> cache;
    const double alpha = std::visit(overloaded{
                                        [](const coupler::CounterPropagating& c) { return c.alpha; },
                                        [](const coupler::TopGate& c) { return c.alpha; },
                                        [](const auto&) { return 0.0; },
                                    },
                                    m);
    const std::lock_guard lock(mu);
    auto& slot = cache[{m.index(), alpha}];
    if (!slot) slot = std::make_unique<coupler::GammaKernel>(m);
    return *slot;
}

void sorted_unique(std::vector<double>& v)
{
    std::sort(v.begin(), v.end());
    v.erase(std::unique(v.begin(), v.end(), [](double a, double b) { return std::abs(a - b) < 1e-14 * (1.0 + std::abs(a)); }),
            v.end());
}

// Lorentzian peak refinement plus one break per oscillation period of e^{-iwt}.
std::vector<double> frequency_breaks(double lo, double hi, double w0, double g0, double t)
{
    std::vector<double> b{lo, hi};
    for (double k : {0.0, 0.25, 0.5, 1.0, 2.0, 4.0, 8.0, 16.0, 32.0, 64.0}) {
        for (double s : {-1.0, 1.0}) {
            const double w = w0 + s * k * g0;
            if (w > lo && w < hi) b.push_back(w);
        }
    }
    if (std::abs(t) > 0.0) {
        const double period = 2.0 * pi / std::abs(t);
        const auto n = static_cast<std::size_t>(std::floor((hi - lo) / period));
        if (n < 200000)
            for (std::size_t i = 1; i <= n; ++i) b.push_back(lo + static_cast<double>(i) * period);
    }
    sorted_unique(b);
    return b;
}

void check_narrowband(double omega0, double gamma0)
{
    if (!(omega0 > 0.0) || !(gamma0 > 0.0) || !(gamma0 < omega0))
        throw std::invalid_argument(fmt::format("narrowband mode needs 0 < gamma0 < omega0 (got {}, {})", gamma0, omega0));
}

}  // namespace

cplx evaluate(const FranckCondon& f, double t)
{
    return std::visit(overloaded{
                          [](const UnitConstant&) -> cplx { return 1.0; },
                          [t](const Harmonics& h) -> cplx { return h.series(t); },
                          [t](const Transient& tr) -> cplx { return tr.table.contains(t) ? tr.table(t) : cplx(1.0); },
                      },
                      f);
}

FranckCondon fc_vacuum() { return UnitConstant{}; }

// --- classical drives ---------------------------------------------------

double drive_period(const ClassicalDrive& d)
{
    if (d.tones.empty()) return 2.0 * pi;
    double wmin = std::numeric_limits<double>::infinity();
    for (const auto& tone : d.tones) {
        if (!(tone.omega > 0.0)) throw std::invalid_argument(fmt::format("drive tone frequency {} must be positive", tone.omega));
        wmin = std::min(wmin, tone.omega);
    }
    for (const auto& tone : d.tones) {
        const double r = tone.omega / wmin;
        if (std::abs(r - std::round(r)) > 1e-9 * r)
            throw std::invalid_argument(fmt::format("drive tones {} and {} are not commensurate", tone.omega, wmin));
    }
    return 2.0 * pi / wmin;
}

double drive_phase(const coupler::Model& m, const ClassicalDrive& d, double t)
{
    if (d.series) {
        const auto& gamma = gamma_kernel_for(m);
        const auto& v = *d.series;
        auto g = [&](double s) -> cplx {
            const double u = t - s;
            return v.contains(u) ? gamma(s) * v(u).real() : 0.0;
        };
        auto br = gamma.breaks();
        for (double x : {t - v.back(), t - v.front()})
            if (x > br.front() && x < br.back()) br.push_back(x);
        sorted_unique(br);
        return num::integrate_or_throw(g, br, {1e-11, 1e-14}).real();
    }
    double theta = d.dc * coupler::drive_transfer(m, 0.0).real();
    for (const auto& tone : d.tones) {
        const cplx gt = coupler::drive_transfer(m, tone.omega);
        theta += tone.amplitude * (std::polar(1.0, tone.omega * t + tone.phase) * std::conj(gt)).real();
    }
    return theta;
}

FranckCondon fc_classical(const coupler::Model& m, const ClassicalDrive& d)
{
    const double band = coupler::max_frequency(m);
    for (const auto& tone : d.tones)
        if (tone.omega > band)
            throw std::invalid_argument(fmt::format("drive tone at {} exceeds the coupler grid ({})", tone.omega, band));

    if (d.series) {
        if (!d.tones.empty() || d.dc != 0.0)
            throw std::invalid_argument("drive: a time series excludes dc and tone components");
        if (std::holds_alternative<coupler::Tabulated>(m))
            throw std::invalid_argument("drive: time-series drives need an analytic coupler");
        const auto& gamma = gamma_kernel_for(m);
        const auto& v = *d.series;
        const auto src = v.grid();
        // Extend past the end of the drive by the kernel memory.
        std::vector<double> t(src.begin(), src.end());
        const double h = (src.back() - src.front()) / static_cast<double>(src.size() - 1);
        for (double x = src.back() + h; x < src.back() + gamma.s_max(); x += h) t.push_back(x);
        std::vector<cplx> f(t.size());
        for (std::size_t i = 0; i < t.size(); ++i) {
            auto g = [&, ti = t[i]](double s) -> cplx {
                const double u = ti - s;
                return v.contains(u) ? gamma(s) * v(u).real() : 0.0;
            };
            auto br = gamma.breaks();
            for (std::size_t k = 0; k < src.size(); k += 8) {
                const double x = t[i] - src[k];
                if (x > br.front() && x < br.back()) br.push_back(x);
            }
            for (double x : {t[i] - src.back(), t[i] - src.front()})
                if (x > br.front() && x < br.back()) br.push_back(x);
            sorted_unique(br);
            f[i] = std::polar(1.0, num::integrate_or_throw(g, br, {1e-11, 1e-14}).real());
        }
        return Transient{num::ComplexTable(std::move(t), std::move(f))};
    }

    const double period = drive_period(d);
    if (d.tones.empty()) return Harmonics{num::FourierSeries(period, {std::polar(1.0, drive_phase(m, d, 0.0))})};

    // Tone transfers are fixed; evaluate the phase without re-entering the coupler.
    const double dc_phase = d.dc * coupler::drive_transfer(m, 0.0).real();
    std::vector<cplx> gt;
    for (const auto& tone : d.tones) gt.push_back(std::conj(coupler::drive_transfer(m, tone.omega)));
    auto f = [&](double t) -> cplx {
        double theta = dc_phase;
        for (std::size_t k = 0; k < d.tones.size(); ++k)
            theta += d.tones[k].amplitude * (std::polar(1.0, d.tones[k].omega * t + d.tones[k].phase) * gt[k]).real();
        return std::polar(1.0, theta);
    };
    return Harmonics{num::fourier_coeffs_periodic(f, period)};
}

num::FourierSeries photo_assisted_coefficients(const FranckCondon& f)
{
    return std::visit(overloaded{
                          [](const UnitConstant&) { return num::FourierSeries(2.0 * pi, {cplx(1.0)}); },
                          [](const Harmonics& h) { return h.series; },
                          [](const Transient&) -> num::FourierSeries {
                              throw std::invalid_argument("photo-assisted coefficients need a periodic Franck-Condon factor");
                          },
                      },
                      f);
}

// --- squeezed radiation ---------------------------------------------------

double squeezing_from_db(double db) { return db * std::log(10.0) / 40.0; }

double fc_squeezed_exact(const SqueezedNarrowband& s, double t)
{
    const double r = std::abs(s.z);
    const double sh = std::sinh(2.0 * r);
    const double ch = std::cosh(2.0 * r);
    return std::exp(s.lambda() * sh * (ch * std::cos(2.0 * s.omega0 * t - s.phase()) - sh));
}

Harmonics fc_squeezed_harmonics(const SqueezedNarrowband& s)
{
    check_narrowband(s.omega0, s.omega0 / s.q0);
    const double r = std::abs(s.z);
    const double sh = std::sinh(2.0 * r);
    const double ch = std::cosh(2.0 * r);
    const double lam = s.lambda();
    const double pref = std::exp(-lam * sh * sh);
    const double arg = lam * ch * sh;
    const double phi0 = s.phase();

    std::vector<double> mag{pref * num::bessel_i(0, arg)};
    if (arg > 0.0) {
        for (int n = 1; n < 10000; ++n) {
            const double v = pref * num::bessel_i(n, arg);
            mag.push_back(v);
            if (n > arg && v < 1e-14) break;
        }
    }
    const int nmax = static_cast<int>(mag.size()) - 1;
    std::vector<cplx> c(2 * nmax + 1);
    for (int n = -nmax; n <= nmax; ++n) c[n + nmax] = mag[std::abs(n)] * std::polar(1.0, n * phi0);
    return Harmonics{num::FourierSeries(pi / s.omega0, std::move(c))};
}

Moments squeezing_effective_moments(const coupler::Model& m, double omega0, const std::function<double(double)>& nbar,
                                    const std::function<cplx(double)>& xi, double band)
{
    if (!(omega0 > 0.0) || !(band > 0.0)) throw std::invalid_argument("squeezing moments: omega0 and band must be positive");
    const num::QuadOptions opt{1e-10, 1e-15, 200000};
    Moments mo;

    const double lo = std::max(0.0, omega0 - band);
    auto n_int = [&](double w) -> cplx {
        if (w <= 0.0) return 0.0;
        const double n = nbar(w);
        if (n < 0.0) throw std::invalid_argument("squeezing moments: negative occupation");
        return std::norm(coupler::s_ba(m, w)) * n / w;
    };
    std::vector<double> nb{lo, omega0, omega0 + band};
    if (lo == omega0) nb.erase(nb.begin());
    mo.n_eff = num::integrate_or_throw(n_int, nb, opt).real();

    const double b = std::min(band, omega0);
    auto x_int = [&](double W) -> cplx {
        const double q = omega0 * omega0 - W * W;
        if (q <= 0.0) return 0.0;
        return coupler::s_ba(m, omega0 + W) * coupler::s_ba(m, omega0 - W) * xi(W) / std::sqrt(q);
    };
    const std::vector<double> xb{-b, 0.0, b};
    mo.xi_eff = num::integrate_or_throw(x_int, xb, opt);
    return mo;
}

FranckCondon fc_gaussian(double omega0, const Moments& mo, const std::function<double(double)>& phase)
{
    if (mo.n_eff == 0.0 && mo.xi_eff == 0.0 && !phase) return UnitConstant{};
    auto f = [&](double t) -> cplx {
        const double mag = std::exp((mo.xi_eff * std::polar(1.0, -2.0 * omega0 * t)).real() - mo.n_eff);
        return phase ? std::polar(mag, phase(t)) : cplx(mag);
    };
    return Harmonics{num::fourier_coeffs_periodic(f, pi / omega0)};
}

// --- single edge magnetoplasmons ------------------------------------------

LorentzianMode::LorentzianMode(double omega0, double gamma0, double omega_cut)
    : omega0_(omega0), gamma0_(gamma0), omega_cut_(omega_cut)
{
    check_narrowband(omega0, gamma0);
    if (!(omega_cut > omega0)) throw std::invalid_argument("Lorentzian mode: cutoff below the carrier");
    norm_ = (std::atan(2.0 * (omega_cut - omega0) / gamma0) + std::atan(2.0 * omega0 / gamma0)) / pi;
    scale_ = 1.0 / std::sqrt(norm_);
}

cplx LorentzianMode::operator()(double w) const
{
    if (w < 0.0 || w > omega_cut_) return 0.0;
    return scale_ * std::sqrt(gamma0_) / cplx(w - omega0_, 0.5 * gamma0_);
}

std::vector<double> LorentzianMode::breaks(double lo, double hi, double t) const
{
    return frequency_breaks(lo, hi, omega0_, gamma0_, t);
}

LorentzianMode lorentzian_mode(double omega0, double gamma0) { return LorentzianMode(omega0, gamma0, 20.0 * omega0); }

double FockMixture::mean() const
{
    double n = 0.0;
    for (std::size_t k = 0; k < p.size(); ++k) n += static_cast<double>(k) * p[k];
    return n;
}

double fock_overlap_x(const coupler::Model& m, const LorentzianMode& chi, double t)
{
    // w = u^2 removes the 1/sqrt(w) endpoint behaviour.
    auto g = [&](double u) -> cplx {
        const double w = u * u;
        return 2.0 * coupler::s_ba(m, w) * chi(w) * std::polar(1.0, -w * t);
    };
    auto wb = chi.breaks(0.0, chi.omega_cut(), t);
    std::vector<double> ub(wb.size());
    std::transform(wb.begin(), wb.end(), ub.begin(), [](double w) { return std::sqrt(w); });
    sorted_unique(ub);
    const cplx a = num::integrate_or_throw(g, ub, {1e-11, 1e-15, 400000}) / (2.0 * pi);
    return 2.0 * pi * std::norm(a);
}

double fock_wigner_x(const coupler::Model& m, const LorentzianMode& chi, double t)
{
    const double wc = chi.omega_cut();
    const double w0 = chi.omega0();
    const num::QuadOptions inner_opt{1e-11, 1e-16, 400000};
    auto inner = [&](double w) -> cplx {
        const double lim = std::min(2.0 * w, 2.0 * (wc - w));
        if (lim <= 0.0) return 0.0;
        auto f = [&](double W) -> cplx {
            const double w1 = w + 0.5 * W;
            const double w2 = w - 0.5 * W;
            const double q = w1 * w2;
            if (q <= 0.0) return 0.0;
            return std::polar(1.0, -W * t) * transfer_ba(m, w1) * std::conj(transfer_ba(m, w2)) * std::sqrt(q) * chi(w1) *
                   std::conj(chi(w2));
        };
        std::vector<double> br{-lim, lim};
        for (double x : {2.0 * (w - w0), -2.0 * (w - w0), 0.0})
            if (x > -lim && x < lim) br.push_back(x);
        for (double k : {0.5, 1.0, 2.0, 4.0, 8.0})
            for (double x : {2.0 * (w - w0) + k * chi.gamma0(), 2.0 * (w - w0) - k * chi.gamma0(),
                             -2.0 * (w - w0) + k * chi.gamma0(), -2.0 * (w - w0) - k * chi.gamma0()})
                if (x > -lim && x < lim) br.push_back(x);
        if (std::abs(t) > 0.0) {
            const double period = 2.0 * pi / std::abs(t);
            for (double x = -lim + period; x < lim; x += period) br.push_back(x);
        }
        sorted_unique(br);
        return num::integrate_or_throw(f, br, inner_opt) / (2.0 * pi);
    };
    auto wb = chi.breaks(0.0, wc);
    wb.push_back(0.5 * wc);
    sorted_unique(wb);
    const cplx v = num::integrate_or_throw(inner, wb, {1e-9, 1e-15, 100000}) / (2.0 * pi);
    return 2.0 * pi * v.real();
}

double fock_narrowband_x(const coupler::Model& m, double omega0, double gamma0, double t)
{
    if (t < 0.0) return 0.0;
    return 2.0 * pi * std::norm(coupler::s_ba(m, omega0)) * (gamma0 / omega0) * std::exp(-gamma0 * t);
}

num::ComplexTable fock_x_table(const coupler::Model& m, const LorentzianMode& chi)
{
    const double w0 = chi.omega0();
    const double g0 = chi.gamma0();
    const double wc = chi.omega_cut();

    // g(w) = S_ba chi / sqrt(w) on a grid graded towards 0 and the carrier.
    std::vector<double> w{0.0};
    double x = std::min(1e-6, 1e-6 * w0);
    while (x < wc) {
        w.push_back(x);
        const double h = std::min({g0 / 16.0 + 0.05 * std::abs(x - w0), 0.05 * x, 0.02});
        x += std::max(h, 1e-9);
    }
    w.push_back(wc);
    std::vector<cplx> g(w.size());
    for (std::size_t i = 0; i < w.size(); ++i) g[i] = -I * transfer_ba(m, w[i]) * std::sqrt(w[i]) * chi(w[i]);
    const num::ComplexTable spectrum(std::move(w), std::move(g));

    const double t0 = -5.0 / g0;
    const double t1 = 15.0 / g0;
    const double dt = 2.0 * pi / (40.0 * w0);
    const auto n = static_cast<std::size_t>(std::ceil((t1 - t0) / dt));
    std::vector<double> t(n + 1);
    std::vector<cplx> v(n + 1);
    for (std::size_t i = 0; i <= n; ++i) {
        t[i] = t0 + (t1 - t0) * static_cast<double>(i) / static_cast<double>(n);
        v[i] = 2.0 * pi * std::norm(spectrum.laplace(I * t[i]) / (2.0 * pi));
    }
    return num::ComplexTable(std::move(t), std::move(v));
}

FranckCondon fc_fock(unsigned n, const num::ComplexTable& x)
{
    if (n == 0) return UnitConstant{};
    std::vector<cplx> f(x.size());
    for (std::size_t i = 0; i < f.size(); ++i) f[i] = num::laguerre(n, x.values()[i].real());
    const auto g = x.grid();
    return Transient{num::ComplexTable(std::vector<double>(g.begin(), g.end()), std::move(f))};
}

FranckCondon fc_mixture(std::span<const double> p, const num::ComplexTable& x)
{
    const double total = std::accumulate(p.begin(), p.end(), 0.0);
    if (std::abs(total - 1.0) > 1e-12) throw std::invalid_argument(fmt::format("Fock mixture: probabilities sum to {}", total));
    if (std::any_of(p.begin(), p.end(), [](double q) { return q < 0.0; }))
        throw std::invalid_argument("Fock mixture: negative probability");
    if (p.size() == 1 || std::all_of(p.begin() + 1, p.end(), [](double q) { return q == 0.0; })) return UnitConstant{};

    std::vector<cplx> f(x.size(), 0.0);
    for (std::size_t i = 0; i < f.size(); ++i) {
        const double xi = x.values()[i].real();
        double sum = 0.0;
        for (std::size_t k = 0; k < p.size(); ++k)
            if (p[k] != 0.0) sum += p[k] * num::laguerre(static_cast<unsigned>(k), xi);
        f[i] = sum;
    }
    const auto g = x.grid();
    return Transient{num::ComplexTable(std::vector<double>(g.begin(), g.end()), std::move(f))};
}

double wigner_noise_exact(const LorentzianMode& chi, double t, double w)
{
    const double aw = std::abs(w);
    const double lim = std::min(2.0 * aw, 2.0 * (chi.omega_cut() - aw));
    if (lim <= 0.0) return 0.0;
    auto f = [&](double W) -> cplx {
        const double q = aw * aw - 0.25 * W * W;
        if (q <= 0.0) return 0.0;
        return std::polar(1.0, -W * t) * std::sqrt(q) * chi(aw + 0.5 * W) * std::conj(chi(aw - 0.5 * W));
    };
    const double d = 2.0 * (aw - chi.omega0());
    std::vector<double> br{-lim, lim, 0.0};
    for (double k : {0.0, 0.5, 1.0, 2.0, 4.0, 8.0})
        for (double x : {d + k * chi.gamma0(), d - k * chi.gamma0(), -d + k * chi.gamma0(), -d - k * chi.gamma0()})
            if (x > -lim && x < lim) br.push_back(x);
    if (std::abs(t) > 0.0) {
        const double period = 2.0 * pi / std::abs(t);
        for (double x = -lim + period; x < lim; x += period) br.push_back(x);
    }
    sorted_unique(br);
    return (num::integrate_or_throw(f, br, {1e-10, 1e-15, 400000}) / (4.0 * pi * pi)).real();
}

double wigner_noise_lorentzian(double omega0, double gamma0, double t, double w)
{
    if (t <= 0.0) return 0.0;
    const double u = 2.0 * (std::abs(w) - omega0) * t;
    const double sinc = std::abs(u) < 1e-8 ? 1.0 - u * u / 6.0 : std::sin(u) / u;
    return omega0 / (2.0 * pi) * 4.0 * gamma0 * t * sinc * std::exp(-gamma0 * t);
}

namespace {

double single_heat(double omega0, double gamma0, double t, HeatBranch branch, const LorentzianMode* chi)
{
    if (branch == HeatBranch::lorentzian) return t < 0.0 ? 0.0 : omega0 * gamma0 * std::exp(-gamma0 * t);
    if (!chi) throw std::invalid_argument("heat current: exact branch needs the mode");
    auto g = [&](double u) -> cplx {
        const double w = u * u;
        return 2.0 * u * std::sqrt(w) * (*chi)(w) * std::polar(1.0, -w * t);
    };
    auto wb = chi->breaks(0.0, chi->omega_cut(), t);
    std::vector<double> ub(wb.size());
    std::transform(wb.begin(), wb.end(), ub.begin(), [](double w) { return std::sqrt(w); });
    sorted_unique(ub);
    const cplx c = num::integrate_or_throw(g, ub, {1e-11, 1e-15, 400000});
    return std::norm(c) / (4.0 * pi * pi);
}

}  // namespace

double heat_current(const FockLorentzian& s, double t, HeatBranch branch, const LorentzianMode* chi)
{
    return s.n * single_heat(s.omega0, s.gamma0, t, branch, chi);
}

double heat_current(const FockMixture& s, double t, HeatBranch branch, const LorentzianMode* chi)
{
    const double total = std::accumulate(s.p.begin(), s.p.end(), 0.0);
    if (std::abs(total - 1.0) > 1e-12) throw std::invalid_argument(fmt::format("Fock mixture: probabilities sum to {}", total));
    return s.mean() * single_heat(s.omega0, s.gamma0, t, branch, chi);
}

}  // namespace eqradar::radiation
