#include "eqradar/coupler.hpp"

#include <algorithm>
#include <array>
#include <limits>
#include <cmath>
#include <fstream>
#include <sstream>

#include <fmt/format.h>

namespace eqradar::coupler {

namespace {

template <class... Ts>
struct overloaded : Ts... {
    using Ts::operator()...;
};
template <class... Ts>
overloaded(Ts...) -> overloaded<Ts...>;

void check_frequency(double X)
{
    if (X < 0.0 || std::isnan(X)) throw std::invalid_argument(fmt::format("coupler: negative frequency {}", X));
}

// 1 - e^{iX} without cancellation.
cplx one_minus_expi(double X) { return -2.0 * I * std::sin(0.5 * X) * std::polar(1.0, 0.5 * X); }

// Denominator constant: 2 for two coupled channels, 1 for a gate.
double screening(const Model& m) { return std::holds_alternative<CounterPropagating>(m) ? 2.0 : 1.0; }

double alpha_of(const Model& m)
{
    if (auto* cp = std::get_if<CounterPropagating>(&m)) return cp->alpha;
    if (auto* tg = std::get_if<TopGate>(&m)) return tg->alpha;
    return 0.0;
}

// Density of a sum of n uniform [0,1] variables.
double irwin_hall(int n, double s)
{
    if (s < 0.0 || s > n) return 0.0;
    double sum = 0.0;
    double binom = 1.0;
    const int jmax = std::min(n, static_cast<int>(std::floor(s)));
    for (int j = 0; j <= jmax; ++j) {
        sum += ((j % 2) ? -1.0 : 1.0) * binom * std::pow(s - j, n - 1);
        binom = binom * (n - j) / (j + 1);
    }
    return sum / std::tgamma(static_cast<double>(n));
}

}  // namespace

std::string describe(const Model& m)
{
    return std::visit(overloaded{
                          [](const CounterPropagating& c) { return fmt::format("counter-propagating(alpha={})", c.alpha); },
                          [](const TopGate& t) { return fmt::format("top-gate(alpha={})", t.alpha); },
                          [](const DirectDrive&) { return std::string("direct-drive"); },
                          [](const Tabulated& t) { return fmt::format("tabulated({} points)", t.s_bb.size()); },
                      },
                      m);
}

cplx transit(double X)
{
    if (std::abs(X) < 1e-3) {
        const double x2 = X * X;
        return cplx(1.0 - x2 / 6.0 + x2 * x2 / 120.0, X / 2.0 - X * x2 / 24.0);
    }
    return (std::polar(1.0, X) - 1.0) / (I * X);
}

cplx topgate_transmission(double alpha, double X)
{
    check_frequency(X);
    const cplx f = transit(X);
    return std::polar(1.0, X) * (1.0 + alpha * std::conj(f)) / (1.0 + alpha * f);
}

cplx s_ba(const Model& m, double X)
{
    check_frequency(X);
    return std::visit(overloaded{
                          [X](const CounterPropagating& c) -> cplx {
                              const cplx f = transit(X);
                              return -I * X * f / (2.0 + c.alpha * f);
                          },
                          [](const TopGate&) -> cplx { return 0.0; },
                          [](const DirectDrive&) -> cplx { return 0.0; },
                          [X](const Tabulated& t) -> cplx { return t.s_ba(X); },
                      },
                      m);
}

cplx s_bb(const Model& m, double X)
{
    check_frequency(X);
    return std::visit(overloaded{
                          [&m, X](const CounterPropagating&) -> cplx { return 1.0 - s_ba(m, X); },
                          [X](const TopGate& t) -> cplx { return topgate_transmission(t.alpha, X); },
                          [X](const DirectDrive&) -> cplx { return std::polar(1.0, X); },
                          [X](const Tabulated& t) -> cplx { return t.s_bb(X); },
                      },
                      m);
}

SMatrix s_matrix(const Model& m, double X)
{
    check_frequency(X);
    SMatrix s;
    s.s_bb = s_bb(m, X);
    s.s_ba = s_ba(m, X);
    s.s_ab = s.s_ba;
    if (std::holds_alternative<CounterPropagating>(m)) {
        s.s_aa = s.s_bb;
    } else if (std::abs(s.s_ba) > 0.0) {
        s.s_aa = -std::conj(s.s_bb) * s.s_ba / std::conj(s.s_ba);
    } else {
        s.s_aa = 1.0;
    }
    return s;
}

cplx s_bb_slope0(const Model& m)
{
    return std::visit(overloaded{
                          [](const CounterPropagating& c) -> cplx { return I / (2.0 + c.alpha); },
                          [](const TopGate& t) -> cplx { return I / (1.0 + t.alpha); },
                          [](const DirectDrive&) -> cplx { return I; },
                          [](const Tabulated& t) -> cplx { return t.s_bb.derivative(t.s_bb.front()); },
                      },
                      m);
}

double max_frequency(const Model& m)
{
    if (auto* t = std::get_if<Tabulated>(&m)) return std::min(t->s_bb.back(), t->s_ba.back());
    return std::numeric_limits<double>::infinity();
}

cplx admittance_from_t(cplx t)
{
    if (std::abs(std::abs(t) - 1.0) > 1e-6)
        throw std::invalid_argument(fmt::format("admittance_from_t: |t| = {} is not unimodular", std::abs(t)));
    return 1.0 - t;
}

DirectResponse direct_drive_response(double X)
{
    check_frequency(X);
    return {std::polar(1.0, X), transit(X)};
}

cplx drive_transfer(const Model& m, double X)
{
    check_frequency(X);
    return std::visit(overloaded{
                          [X](const CounterPropagating& c) -> cplx {
                              const cplx f = transit(X);
                              return f / (2.0 + c.alpha * f);
                          },
                          [X](const TopGate& t) -> cplx {
                              const cplx f = transit(X);
                              return f / (1.0 + t.alpha * f);
                          },
                          [X](const DirectDrive&) -> cplx { return transit(X); },
                          [X](const Tabulated& t) -> cplx {
                              if (X < 1e-9) return t.s_ba.derivative(t.s_ba.front()) / (-I);
                              return t.s_ba(X) / (-I * X);
                          },
                      },
                      m);
}

RC rc_expansion(const Model& m)
{
    auto y = [&m](double X) -> cplx {
        if (std::holds_alternative<CounterPropagating>(m)) return s_ba(m, X);
        if (auto* tg = std::get_if<TopGate>(&m)) return one_minus_expi(X) / (1.0 + tg->alpha * transit(X));
        return 1.0 - s_bb(m, X);
    };
    constexpr int levels = 5;
    double x0 = 0.2;
    if (auto* t = std::get_if<Tabulated>(&m)) x0 = std::min(x0, t->s_bb.back());

    std::array<std::array<double, levels>, levels> c{}, q{};
    for (int k = 0; k < levels; ++k) {
        const double X = x0 / std::pow(2.0, k);
        const cplx v = y(X);
        c[k][0] = -v.imag() / X;
        q[k][0] = v.real() / (X * X);
        for (int j = 1; j <= k; ++j) {
            const double w = std::pow(4.0, j) - 1.0;
            c[k][j] = c[k][j - 1] + (c[k][j - 1] - c[k - 1][j - 1]) / w;
            q[k][j] = q[k][j - 1] + (q[k][j - 1] - q[k - 1][j - 1]) / w;
        }
    }
    const int n = levels - 1;
    RC rc;
    rc.c_mu = c[n][n];
    rc.error = std::abs(c[n][n] - c[n - 1][n - 1]);
    rc.r = q[n][n] / (rc.c_mu * rc.c_mu);
    if (!(rc.c_mu > 0.0) || rc.error > 1e-6 * rc.c_mu)
        throw SolverError(fmt::format("rc_expansion: low-frequency fit failed (C/C_q = {}, error {})", rc.c_mu, rc.error));
    return rc;
}

namespace {

constexpr int series_terms = 4;

double series_part(double c, double a, double s)
{
    double sum = 0.0;
    double coef = 1.0 / c;
    for (int k = 0; k < series_terms; ++k) {
        sum += coef * irwin_hall(k + 1, s);
        coef *= -a;
    }
    return sum;
}

// (1/pi) int_0^inf Re[(f/c)(-a f)^K / (1 + a f) e^{-iXs}] dX
double remainder_part(double c, double a, double s)
{
    constexpr int K = series_terms;
    if (a == 0.0) return 0.0;
    const double tail_scale = std::pow(a, K) * std::pow(2.0, K + 1) / (c * K * pi);
    const double xmax = std::max(50.0, std::pow(tail_scale / 1e-13, 1.0 / K));
    auto rem = [&](double X) -> cplx {
        const cplx f = transit(X);
        const cplx g = (f / c) * std::pow(-a * f, K) / (1.0 + a * f);
        return (g * std::polar(1.0, -X * s)).real();
    };
    const double period = 2.0 * pi / std::max(1.0, std::abs(s));
    const std::size_t n = static_cast<std::size_t>(std::ceil(xmax / std::min(pi, period)));
    std::vector<double> br(n + 1);
    for (std::size_t i = 0; i <= n; ++i) br[i] = xmax * static_cast<double>(i) / static_cast<double>(n);
    num::QuadOptions opt{1e-10, 1e-14, 400000};
    return num::integrate_or_throw(rem, br, opt).real() / pi;
}

}  // namespace

double gamma_kernel(const Model& m, double s)
{
    if (std::holds_alternative<DirectDrive>(m)) return irwin_hall(1, s);

    if (std::holds_alternative<Tabulated>(m)) {
        const auto& t = std::get<Tabulated>(m);
        const auto grid = t.s_ba.grid();
        std::vector<double> br;
        for (std::size_t i = 0; i < grid.size(); i += 16) br.push_back(grid[i]);
        if (br.back() != grid.back()) br.push_back(grid.back());
        auto g = [&](double X) -> cplx { return (drive_transfer(m, X) * std::polar(1.0, -X * s)).real(); };
        return num::integrate_or_throw(g, br, {1e-10, 1e-13}).real() / pi;
    }

    const double c = screening(m);
    const double a = alpha_of(m) / c;
    return series_part(c, a, s) + remainder_part(c, a, s);
}

GammaKernel::GammaKernel(Model m, double s_max, double ds) : model_(std::move(m)), s_max_(s_max)
{
    if (std::holds_alternative<Tabulated>(model_)) throw std::invalid_argument("GammaKernel: tabulated couplers unsupported");
    const double a = alpha_of(model_);
    if (a == 0.0) return;
    const std::size_t n = static_cast<std::size_t>(std::ceil(s_max / ds));
    std::vector<double> s(n + 1);
    std::vector<cplx> v(n + 1);
    const double c = screening(model_);
    for (std::size_t i = 0; i <= n; ++i) {
        s[i] = s_max * static_cast<double>(i) / static_cast<double>(n);
        v[i] = remainder_part(c, a / c, s[i]);
    }
    remainder_ = num::ComplexTable(std::move(s), std::move(v));
}

double GammaKernel::operator()(double s) const
{
    if (s < 0.0 || s > s_max_) return 0.0;
    if (std::holds_alternative<DirectDrive>(model_)) return irwin_hall(1, s);
    const double c = screening(model_);
    const double a = alpha_of(model_) / c;
    double v = series_part(c, a, s);
    if (!remainder_.empty()) v += remainder_(s).real();
    return v;
}

std::vector<double> GammaKernel::breaks() const
{
    std::vector<double> b;
    for (int k = 0; k <= series_terms && k < s_max_; ++k) b.push_back(k);
    b.push_back(s_max_);
    return b;
}

num::ComplexTable gamma_ba(const Model& m, std::span<const double> tau)
{
    const double probe = 1e-6;
    if (std::abs(drive_transfer(m, probe)) > 1e6)
        throw SolverError("gamma_ba: S_ba(w)/w diverges at low frequency");
    std::vector<cplx> v(tau.size());
    for (std::size_t i = 0; i < tau.size(); ++i) v[i] = gamma_kernel(m, tau[i]);
    return num::ComplexTable(std::vector<double>(tau.begin(), tau.end()), std::move(v));
}

cplx effective_gate_voltage(double alpha, double X, cplx v_gate)
{
    check_frequency(X);
    return v_gate / (1.0 + alpha * transit(X));
}

Tabulated make_tabulated(num::ComplexTable sbb, num::ComplexTable sba)
{
    if (sbb.empty() || sba.empty()) throw std::invalid_argument("tabulated coupler: empty table");
    if (sbb.front() != 0.0 || sba.front() != 0.0)
        throw std::invalid_argument("tabulated coupler: grid must start at omega = 0");
    const auto g = sbb.grid();
    if (g.size() != sba.size()) throw std::invalid_argument("tabulated coupler: grids differ");
    for (std::size_t i = 0; i < g.size(); ++i) {
        if (sba.grid()[i] != g[i]) throw std::invalid_argument("tabulated coupler: grids differ");
        const double norm = std::norm(sbb.values()[i]) + std::norm(sba.values()[i]);
        if (std::abs(norm - 1.0) > 1e-9)
            throw std::invalid_argument(fmt::format("tabulated coupler: |S_bb|^2+|S_ba|^2 = {} at row {}", norm, i));
    }
    return {std::move(sbb), std::move(sba)};
}

Tabulated load_tabulated(const std::filesystem::path& path, const Scales& scales)
{
    std::ifstream in(path);
    if (!in) throw IoError("cannot open coupler table " + path.string());
    std::string line;
    if (!std::getline(in, line)) throw std::invalid_argument("coupler table is empty: " + path.string());
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line != "omega,s_bb_re,s_bb_im,s_ba_re,s_ba_im")
        throw std::invalid_argument("coupler table header must be omega,s_bb_re,s_bb_im,s_ba_re,s_ba_im");

    std::vector<double> x;
    std::vector<cplx> bb, ba;
    int row = 1;
    while (std::getline(in, line)) {
        ++row;
        if (line.empty() || line == "\r") continue;
        std::replace(line.begin(), line.end(), ',', ' ');
        std::istringstream ss(line);
        double w, a, b, c, d;
        if (!(ss >> w >> a >> b >> c >> d)) throw std::invalid_argument(fmt::format("coupler table: bad row {}", row));
        x.push_back(scales.freq(w));
        bb.emplace_back(a, b);
        ba.emplace_back(c, d);
    }
    return make_tabulated(num::ComplexTable(x, bb), num::ComplexTable(x, ba));
}

}  // namespace eqradar::coupler
