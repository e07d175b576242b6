#include "eqradar/numerics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <queue>
#include <string>

#include <fmt/format.h>

#include <boost/math/quadrature/gauss.hpp>
#include <boost/math/quadrature/gauss_kronrod.hpp>

namespace eqradar::num {

double laguerre(unsigned n, double x)
{
    if (!std::isfinite(x)) throw std::domain_error("laguerre: non-finite argument");
    double prev = 1.0, v = 1.0 - x;
    if (n == 0) return 1.0;
    for (unsigned k = 1; k < n; ++k) {
        const double next = ((2.0 * k + 1.0 - x) * v - k * prev) / (k + 1.0);
        prev = v;
        v = next;
    }
    if (!std::isfinite(v)) throw std::overflow_error("laguerre: overflow for N=" + std::to_string(n));
    return v;
}

double bessel_i(int n, double x)
{
    if (x < 0.0 || std::isnan(x)) throw std::domain_error("bessel_i: x must be >= 0");
    return std::cyl_bessel_i(static_cast<double>(std::abs(n)), x);
}

namespace {

using GK = boost::math::quadrature::gauss_kronrod<double, 15>;

struct Panel {
    double a, b;
    cplx value;
    double error;
    double l1;
    bool operator<(const Panel& o) const { return error < o.error; }
};

// Nodes are stored for x >= 0; even indices are shared with the 7-point Gauss rule.
Panel gk_panel(const ComplexFn& f, double a, double b)
{
    static const auto& x = GK::abscissa();
    static const auto& wk = GK::weights();
    static const auto& wg = boost::math::quadrature::gauss<double, 7>::weights();
    const double c = 0.5 * (a + b), h = 0.5 * (b - a);
    const cplx v0 = f(c);
    cplx k = wk[0] * v0, g = wg[0] * v0;
    double l1 = wk[0] * std::abs(v0);
    for (std::size_t i = 1; i < x.size(); ++i) {
        const cplx lo = f(c - h * x[i]), hi = f(c + h * x[i]);
        k += wk[i] * (lo + hi);
        if (i % 2 == 0) g += wg[i / 2] * (lo + hi);
        l1 += wk[i] * (std::abs(lo) + std::abs(hi));
    }
    return {a, b, h * k, h * std::abs(k - g), h * l1};
}

}  // namespace

QuadResult integrate(const ComplexFn& f, std::span<const double> breaks, const QuadOptions& opt)
{
    if (breaks.size() < 2) throw std::invalid_argument("integrate: need at least two break points");
    std::priority_queue<Panel> queue;
    std::vector<Panel> frozen;
    QuadResult res;
    for (std::size_t i = 0; i + 1 < breaks.size(); ++i) {
        if (!(breaks[i + 1] > breaks[i])) throw std::invalid_argument("integrate: breaks not increasing");
        queue.push(gk_panel(f, breaks[i], breaks[i + 1]));
        res.evaluations += 15;
    }

    auto totals = [&] {
        cplx v = 0.0;
        double e = 0.0, l1 = 0.0;
        auto q = queue;
        while (!q.empty()) {
            v += q.top().value;
            e += q.top().error;
            l1 += q.top().l1;
            q.pop();
        }
        for (const auto& p : frozen) {
            v += p.value;
            e += p.error;
            l1 += p.l1;
        }
        return std::tuple{v, e, l1};
    };

    auto [value, error, l1] = totals();
    int panels = static_cast<int>(queue.size());
    int since_refresh = 0;
    // Abscissae far from the origin carry rounding of order eps |x|.
    const double offset = std::max(std::abs(breaks.front()), std::abs(breaks.back())) / (breaks.back() - breaks.front());
    const double eps = std::numeric_limits<double>::epsilon() * std::max(1.0, offset);
    while (!queue.empty()) {
        double target = std::max(opt.abs_tol, opt.rel_tol * std::abs(value));
        if (error <= target || error <= 50.0 * eps * l1) {
            res.converged = true;
            break;
        }
        if (panels >= opt.max_panels) break;
        Panel worst = queue.top();
        queue.pop();
        double mid = 0.5 * (worst.a + worst.b);
        if (!(mid > worst.a && mid < worst.b) || (worst.b - worst.a) < 1e-13 * std::max(1.0, std::abs(mid))) {
            frozen.push_back(worst);
            continue;
        }
        Panel left = gk_panel(f, worst.a, mid);
        Panel right = gk_panel(f, mid, worst.b);
        res.evaluations += 30;
        value += left.value + right.value - worst.value;
        error += left.error + right.error - worst.error;
        l1 += left.l1 + right.l1 - worst.l1;
        queue.push(left);
        queue.push(right);
        ++panels;
        if (++since_refresh == 200) {
            std::tie(value, error, l1) = totals();
            since_refresh = 0;
        }
    }
    std::tie(value, error, l1) = totals();
    res.value = value;
    res.error = error;
    if (!res.converged) {
        double target = std::max(opt.abs_tol, opt.rel_tol * std::abs(value));
        res.converged = error <= target || error <= 50.0 * eps * l1;
    }
    return res;
}

QuadResult integrate(const ComplexFn& f, double a, double b, const QuadOptions& opt)
{
    const double br[2] = {a, b};
    return integrate(f, std::span<const double>(br, 2), opt);
}

cplx integrate_or_throw(const ComplexFn& f, std::span<const double> breaks, const QuadOptions& opt)
{
    QuadResult r = integrate(f, breaks, opt);
    if (!r.converged) {
        throw SolverError(fmt::format("quadrature did not converge on [{}, {}]: estimated error {:.3e} for |value| {:.3e} after {} evaluations",
                                      breaks.front(), breaks.back(), r.error, std::abs(r.value), r.evaluations));
    }
    return r.value;
}

cplx quad_damped(const ComplexFn& f, double damping, double period_hint, double rel_tol)
{
    if (!(damping > 0.0)) throw std::invalid_argument("quad_damped: damping must be positive");
    const double upper = 40.0 / damping;
    std::size_t n = 1;
    if (period_hint > 0.0) {
        const double panel = period_hint * 15.0 / 8.0;
        n = static_cast<std::size_t>(std::ceil(upper / panel));
        n = std::clamp<std::size_t>(n, 1, 20000);
    }
    std::vector<double> br(n + 1);
    for (std::size_t i = 0; i <= n; ++i) br[i] = upper * static_cast<double>(i) / static_cast<double>(n);
    QuadOptions opt;
    opt.rel_tol = rel_tol;
    opt.max_panels = static_cast<int>(n) + 100000;
    return integrate_or_throw(f, br, opt);
}

FourierSeries::FourierSeries(double period, std::vector<cplx> coeffs) : period_(period), c_(std::move(coeffs))
{
    if (!(period > 0.0)) throw std::invalid_argument("FourierSeries: period must be positive");
    if (c_.size() % 2 != 1) throw std::invalid_argument("FourierSeries: coefficient count must be odd");
    nmax_ = static_cast<int>(c_.size() / 2);
}

cplx FourierSeries::operator[](int n) const
{
    if (std::abs(n) > nmax_) return 0.0;
    return c_[static_cast<std::size_t>(n + nmax_)];
}

cplx FourierSeries::operator()(double t) const
{
    const double w = fundamental();
    cplx s = 0.0;
    for (int n = -nmax_; n <= nmax_; ++n) s += (*this)[n] * std::polar(1.0, -w * n * t);
    return s;
}

FourierSeries fourier_coeffs_periodic(const ComplexFn& f, double period, double tol)
{
    if (!(period > 0.0)) throw std::invalid_argument("fourier_coeffs_periodic: period must be positive");
    for (std::size_t m = 64; m <= (1u << 17); m *= 2) {
        std::vector<cplx> samples(m);
        for (std::size_t j = 0; j < m; ++j) samples[j] = f(period * static_cast<double>(j) / static_cast<double>(m));
        std::vector<cplx> roots(m);
        for (std::size_t j = 0; j < m; ++j) roots[j] = std::polar(1.0, 2.0 * pi * static_cast<double>(j) / static_cast<double>(m));

        const int k = static_cast<int>(m / 4);
        std::vector<cplx> c(static_cast<std::size_t>(2 * k + 1));
        double scale = 0.0;
        for (int n = -k; n <= k; ++n) {
            cplx s = 0.0;
            const std::size_t step = static_cast<std::size_t>((n % static_cast<int>(m) + static_cast<int>(m)) % static_cast<int>(m));
            std::size_t idx = 0;
            for (std::size_t j = 0; j < m; ++j) {
                s += samples[j] * roots[idx];
                idx += step;
                if (idx >= m) idx -= m;
            }
            c[static_cast<std::size_t>(n + k)] = s / static_cast<double>(m);
            scale = std::max(scale, std::abs(s) / static_cast<double>(m));
        }
        const double floor = tol * std::max(1.0, scale);
        double tail = 0.0;
        for (int n = k / 2 + 1; n <= k; ++n) {
            tail = std::max({tail, std::abs(c[static_cast<std::size_t>(n + k)]), std::abs(c[static_cast<std::size_t>(-n + k)])});
        }
        if (tail >= floor) continue;

        int nmax = 0;
        for (int n = k; n > 0; --n) {
            if (std::abs(c[static_cast<std::size_t>(n + k)]) >= floor || std::abs(c[static_cast<std::size_t>(-n + k)]) >= floor) {
                nmax = n;
                break;
            }
        }
        nmax += 1;  // first coefficient below the floor closes the list
        std::vector<cplx> out(c.begin() + (k - nmax), c.begin() + (k + nmax + 1));
        return FourierSeries(period, std::move(out));
    }
    throw SolverError("fourier_coeffs_periodic: coefficients did not decay below tolerance");
}

namespace {

// Derivative at z[k] of the Lagrange polynomial through z, applied to y.
cplx lagrange_slope(std::span<const double> z, std::span<const cplx> y, std::size_t k)
{
    cplx d = 0.0;
    const std::size_t m = z.size();
    for (std::size_t j = 0; j < m; ++j) {
        if (j == k) {
            double s = 0.0;
            for (std::size_t l = 0; l < m; ++l)
                if (l != k) s += 1.0 / (z[k] - z[l]);
            d += y[k] * s;
        } else {
            double num = 1.0, den = 1.0;
            for (std::size_t l = 0; l < m; ++l) {
                if (l != j) den *= z[j] - z[l];
                if (l != j && l != k) num *= z[k] - z[l];
            }
            d += y[j] * (num / den);
        }
    }
    return d;
}

// m_k = int_0^L r^k e^{-kappa r} dr for k = 0..3.
std::array<cplx, 4> moments(cplx kappa, double L)
{
    std::array<cplx, 4> m{};
    const cplx z = kappa * L;
    if (std::abs(z) < 1.0) {
        for (int k = 0; k < 4; ++k) {
            cplx term = 1.0;
            cplx s = 0.0;
            for (int j = 0; j < 30; ++j) {
                s += term / static_cast<double>(k + j + 1);
                term *= -z / static_cast<double>(j + 1);
                if (std::abs(term) < 1e-18) break;
            }
            m[static_cast<std::size_t>(k)] = s * std::pow(L, k + 1);
        }
    } else {
        const cplx E = std::exp(-z);
        m[0] = (1.0 - E) / kappa;
        double Lk = 1.0;
        for (int k = 1; k < 4; ++k) {
            Lk *= L;
            m[static_cast<std::size_t>(k)] = (static_cast<double>(k) * m[static_cast<std::size_t>(k - 1)] - Lk * E) / kappa;
        }
    }
    return m;
}

}  // namespace

ComplexTable::ComplexTable(std::vector<double> x, std::vector<cplx> y) : x_(std::move(x)), y_(std::move(y))
{
    if (x_.size() != y_.size()) throw std::invalid_argument("ComplexTable: size mismatch");
    if (x_.size() < 2) throw std::invalid_argument("ComplexTable: need at least two points");
    for (std::size_t i = 0; i < x_.size(); ++i) {
        if (!std::isfinite(x_[i]) || !std::isfinite(y_[i].real()) || !std::isfinite(y_[i].imag()))
            throw std::invalid_argument("ComplexTable: non-finite entry");
        if (i > 0 && !(x_[i] > x_[i - 1])) throw std::invalid_argument("ComplexTable: grid not strictly increasing");
    }
    const std::size_t n = x_.size();
    const std::size_t w = std::min<std::size_t>(5, n);
    d_.resize(n);
    for (std::size_t i = 0; i < n; ++i) {
        std::size_t lo = (i >= w / 2) ? i - w / 2 : 0;
        lo = std::min(lo, n - w);
        d_[i] = lagrange_slope(std::span<const double>(x_).subspan(lo, w), std::span<const cplx>(y_).subspan(lo, w), i - lo);
    }
    const double h = (x_.back() - x_.front()) / static_cast<double>(n - 1);
    uniform_ = true;
    for (std::size_t i = 1; i < n && uniform_; ++i)
        uniform_ = std::abs((x_[i] - x_[i - 1]) - h) <= 1e-9 * h;
}

std::size_t ComplexTable::interval(double x) const
{
    const std::size_t n = x_.size();
    std::size_t i;
    if (uniform_) {
        const double h = (x_.back() - x_.front()) / static_cast<double>(n - 1);
        double r = std::floor((x - x_.front()) / h);
        i = static_cast<std::size_t>(std::clamp(r, 0.0, static_cast<double>(n - 2)));
        while (i > 0 && x < x_[i]) --i;
        while (i + 2 < n && x >= x_[i + 1]) ++i;
    } else {
        auto it = std::upper_bound(x_.begin(), x_.end(), x);
        i = static_cast<std::size_t>(std::max<std::ptrdiff_t>(0, (it - x_.begin()) - 1));
        i = std::min(i, n - 2);
    }
    return i;
}

cplx ComplexTable::operator()(double x) const
{
    if (!contains(x)) throw std::out_of_range("ComplexTable: evaluation at " + std::to_string(x) + " outside grid");
    const std::size_t i = interval(x);
    const double h = x_[i + 1] - x_[i];
    const double t = (x - x_[i]) / h;
    const double h00 = (1.0 + 2.0 * t) * (1.0 - t) * (1.0 - t);
    const double h10 = t * (1.0 - t) * (1.0 - t);
    const double h01 = t * t * (3.0 - 2.0 * t);
    const double h11 = t * t * (t - 1.0);
    return h00 * y_[i] + (h10 * h) * d_[i] + h01 * y_[i + 1] + (h11 * h) * d_[i + 1];
}

cplx ComplexTable::derivative(double x) const
{
    if (!contains(x)) throw std::out_of_range("ComplexTable: derivative outside grid");
    const std::size_t i = interval(x);
    const double h = x_[i + 1] - x_[i];
    const double t = (x - x_[i]) / h;
    const double g00 = 6.0 * t * (t - 1.0) / h;
    const double g10 = (1.0 - t) * (1.0 - 3.0 * t);
    const double g01 = -g00;
    const double g11 = t * (3.0 * t - 2.0);
    return g00 * y_[i] + g10 * d_[i] + g01 * y_[i + 1] + g11 * d_[i + 1];
}

cplx ComplexTable::laplace(cplx kappa, double a, double b) const
{
    if (a == b) return 0.0;
    if (a > b) return -laplace(kappa, b, a);
    if (!contains(a) || !contains(b)) throw std::out_of_range("ComplexTable::laplace: limits outside grid");

    // Polynomial of interval i re-expanded around s0 = lo - x_i, integrated over [lo, hi].
    auto piece = [&](std::size_t i, double lo, double hi) -> cplx {
        const double h = x_[i + 1] - x_[i];
        const cplx delta = (y_[i + 1] - y_[i]) / h;
        const cplx c2 = (3.0 * delta - 2.0 * d_[i] - d_[i + 1]) / h;
        const cplx c3 = (d_[i] + d_[i + 1] - 2.0 * delta) / (h * h);
        const double s0 = lo - x_[i];
        const cplx q0 = y_[i] + s0 * (d_[i] + s0 * (c2 + s0 * c3));
        const cplx q1 = d_[i] + s0 * (2.0 * c2 + 3.0 * s0 * c3);
        const cplx q2 = c2 + 3.0 * s0 * c3;
        const auto m = moments(kappa, hi - lo);
        return std::exp(-kappa * lo) * (q0 * m[0] + q1 * m[1] + q2 * m[2] + c3 * m[3]);
    };

    const std::size_t ia = interval(a);
    const std::size_t ib = interval(b);
    if (ia == ib) return piece(ia, a, b);

    cplx total = piece(ia, a, x_[ia + 1]);
    total += piece(ib, x_[ib], b);
    if (ib <= ia + 1) return total;

    if (!uniform_) {
        for (std::size_t i = ia + 1; i < ib; ++i) total += piece(i, x_[i], x_[i + 1]);
        return total;
    }

    const double h = (x_.back() - x_.front()) / static_cast<double>(x_.size() - 1);
    const auto m = moments(kappa, h);
    const cplx A = m[0] - 3.0 * m[2] / (h * h) + 2.0 * m[3] / (h * h * h);
    const cplx B = 3.0 * m[2] / (h * h) - 2.0 * m[3] / (h * h * h);
    const cplx C = m[1] - 2.0 * m[2] / h + m[3] / (h * h);
    const cplx D = -m[2] / h + m[3] / (h * h);
    const cplx w = std::exp(-kappa * h);
    cplx acc = 0.0;
    cplx E = 0.0;
    for (std::size_t i = ia + 1; i < ib; ++i) {
        if ((i - ia - 1) % 256 == 0) E = std::exp(-kappa * x_[i]);
        acc += E * (A * y_[i] + B * y_[i + 1] + C * d_[i] + D * d_[i + 1]);
        E *= w;
    }
    return total + acc;
}

ComplexTable fourier_transform_transient(const ComplexTable& f, std::span<const double> omega)
{
    double peak = 0.0;
    for (const cplx& v : f.values()) peak = std::max(peak, std::abs(v));
    std::vector<cplx> out(omega.size(), cplx{});
    if (peak > 0.0) {
        const double edge = std::max(std::abs(f.values().front()), std::abs(f.values().back()));
        if (edge >= 1e-6 * peak)
            throw std::invalid_argument("fourier_transform_transient: table does not decay at its ends");
        for (std::size_t k = 0; k < omega.size(); ++k) out[k] = f.laplace(cplx(0.0, -omega[k]));
    }
    return ComplexTable(std::vector<double>(omega.begin(), omega.end()), std::move(out));
}

}  // namespace eqradar::num
