#include "eqradar/decoherence.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <mutex>
#include <ostream>

#include <fftw3.h>

#include <fmt/format.h>

namespace eqradar::decoherence {

namespace {

std::vector<cplx> sample_kernel(const std::function<cplx(double)>& s, double h, std::size_t n)
{
    std::vector<cplx> k(n + 1);
    for (std::size_t j = 0; j <= n; ++j) k[j] = s(h * static_cast<double>(j)) - 1.0;
    return k;
}

// Linear convolutions through FFTW. Plans are created under a lock since the
// planner is not reentrant; execution on fresh buffers is.
class Convolver {
public:
    ~Convolver()
    {
        std::lock_guard lock(planner_mutex());
        for (auto& [n, p] : plans_) {
            fftw_destroy_plan(p.forward);
            fftw_destroy_plan(p.backward);
        }
    }

    // out[i] += sum_p a[p] c[i - p] for i in [first, first + count).
    void accumulate(std::span<const cplx> a, std::span<const cplx> c, std::size_t first, std::size_t count, cplx* out,
                    std::size_t c_key = 0)
    {
        std::size_t m = 1;
        while (m < a.size() + c.size()) m <<= 1;
        Plan& p = plan(m);
        std::fill(p.x.begin(), p.x.end(), cplx{});
        std::copy(a.begin(), a.end(), p.x.begin());
        execute(p.forward, p.x);
        const std::vector<cplx>& cf = transformed(c, m, c_key);
        for (std::size_t i = 0; i < m; ++i) p.x[i] *= cf[i];
        execute(p.backward, p.x);
        const double scale = 1.0 / static_cast<double>(m);
        for (std::size_t i = 0; i < count; ++i) out[i] += p.x[first + i] * scale;
    }

private:
    struct Plan {
        fftw_plan forward{}, backward{};
        std::vector<cplx> x;
    };

    static std::mutex& planner_mutex()
    {
        static std::mutex m;
        return m;
    }

    static void execute(fftw_plan p, std::vector<cplx>& x)
    {
        auto* d = reinterpret_cast<fftw_complex*>(x.data());
        fftw_execute_dft(p, d, d);
    }

    Plan& plan(std::size_t m)
    {
        auto it = plans_.find(m);
        if (it != plans_.end()) return it->second;
        Plan p;
        p.x.resize(m);
        auto* d = reinterpret_cast<fftw_complex*>(p.x.data());
        {
            std::lock_guard lock(planner_mutex());
            p.forward = fftw_plan_dft_1d(static_cast<int>(m), d, d, FFTW_FORWARD, FFTW_ESTIMATE | FFTW_UNALIGNED);
            p.backward = fftw_plan_dft_1d(static_cast<int>(m), d, d, FFTW_BACKWARD, FFTW_ESTIMATE | FFTW_UNALIGNED);
        }
        return plans_.emplace(m, std::move(p)).first->second;
    }

    // Transform of c zero-padded to m, cached by (key, m) when key != 0.
    const std::vector<cplx>& transformed(std::span<const cplx> c, std::size_t m, std::size_t key)
    {
        if (key != 0) {
            auto it = kernels_.find({key, m});
            if (it != kernels_.end()) return it->second;
        }
        std::vector<cplx> x(m);
        std::copy(c.begin(), c.end(), x.begin());
        execute(plan(m).forward, x);
        if (key == 0) {
            scratch_ = std::move(x);
            return scratch_;
        }
        return kernels_.emplace(std::pair{key, m}, std::move(x)).first->second;
    }

    std::map<std::size_t, Plan> plans_;
    std::map<std::pair<std::size_t, std::size_t>, std::vector<cplx>> kernels_;
    std::vector<cplx> scratch_;
};

// Forward stepping of w_n B_n = k_n + h(B_0 k_n / 2 + sum_{j=1}^{n-1} B_j k_{n-j} + B_n k_0 / 2).
// The history sum is accumulated by divide and conquer: once B is known on
// [lo, mid) its contribution to [mid, hi) is added with one FFT product.
class ConvolutionStepper {
public:
    ConvolutionStepper(const std::vector<cplx>& k, cplx b0, double h) : k_(k), b0_(b0), h_(h), b_(k.size()), acc_(k.size())
    {
        b_[0] = b0;
    }

    std::vector<cplx> run()
    {
        if (k_.size() > 1) solve(1, k_.size());
        return b_;
    }

private:
    static constexpr std::size_t leaf = 64;

    void solve(std::size_t lo, std::size_t hi)
    {
        if (hi - lo <= leaf) {
            for (std::size_t n = lo; n < hi; ++n) {
                cplx s = acc_[n];
                for (std::size_t j = lo; j < n; ++j) s += b_[j] * k_[n - j];
                const double w = h_ * static_cast<double>(n);
                b_[n] = (k_[n] + h_ * (0.5 * b0_ * k_[n] + s)) / (w - 0.5 * h_ * k_[0]);
            }
            return;
        }
        const std::size_t mid = lo + (hi - lo) / 2;
        solve(lo, mid);
        // contribution of B_j, j in [lo, mid), to n in [mid, hi): index n - lo - 1 of B * k[1..]
        const std::size_t len = mid - lo;
        const std::size_t span = hi - lo;
        std::span<const cplx> a(b_.data() + lo, len);
        std::span<const cplx> c(k_.data() + 1, span - 1);
        conv_.accumulate(a, c, len - 1, hi - mid, acc_.data() + mid, span);
        solve(mid, hi);
    }

    const std::vector<cplx>& k_;
    cplx b0_;
    double h_;
    std::vector<cplx> b_, acc_;
    Convolver conv_;
};

std::vector<cplx> step_convolution(const std::vector<cplx>& k, cplx b0, double h)
{
    return ConvolutionStepper(k, b0, h).run();
}

std::vector<cplx> step_as_written(const std::vector<cplx>& k, cplx b0, double h)
{
    const std::size_t N = k.size() - 1;
    std::vector<cplx> out(N + 1);
    out[0] = b0;
    cplx running = 0.5 * b0 * k[0];
    for (std::size_t n = 1; n <= N; ++n) {
        const double w = h * static_cast<double>(n);
        out[n] = (k[n] + h * running) / (w - 0.5 * h * k[n]);
        running += out[n] * k[n];
    }
    return out;
}

double sup_diff(std::span<const cplx> coarse, std::span<const cplx> fine)
{
    double d = 0.0;
    for (std::size_t i = 0; i < coarse.size(); ++i) d = std::max(d, std::abs(coarse[i] - fine[2 * i]));
    return d;
}

ElasticAmplitude make_amplitude(std::vector<cplx> z, double h, Kernel kernel, std::string source)
{
    std::vector<double> w(z.size());
    for (std::size_t i = 0; i < w.size(); ++i) w[i] = h * static_cast<double>(i);
    w.back() = h * static_cast<double>(w.size() - 1);
    ElasticAmplitude a;
    a.table = num::ComplexTable(std::move(w), std::move(z));
    a.step = h;
    a.kernel = kernel;
    a.source = std::move(source);
    a.tau1 = wigner_smith_delay(a);
    return a;
}

}  // namespace

std::vector<cplx> volterra_step(const std::function<cplx(double)>& s, cplx slope0, double h, std::size_t n_steps,
                                Kernel kernel)
{
    if (!(h > 0.0)) throw std::invalid_argument("volterra_step: step must be positive");
    const auto k = sample_kernel(s, h, n_steps);
    return kernel == Kernel::convolution ? step_convolution(k, slope0, h) : step_as_written(k, slope0, h);
}

std::vector<cplx> volterra_picard(const std::function<cplx(double)>& s, cplx slope0, double h, std::size_t n_steps,
                                  double tol, int max_iter)
{
    const auto k = sample_kernel(s, h, n_steps);
    const std::size_t N = n_steps;
    std::vector<cplx> cur(N + 1), next(N + 1), hist(N + 1);
    cur[0] = next[0] = slope0;
    for (std::size_t n = 1; n <= N; ++n) cur[n] = k[n] / (h * static_cast<double>(n));

    Convolver conv;
    std::span<const cplx> kk(k.data() + 1, N);
    double last_change = std::numeric_limits<double>::infinity();
    for (int it = 0; it < max_iter; ++it) {
        // hist[n] = sum_{j=1}^{n-1} B_j k_{n-j}
        std::fill(hist.begin(), hist.end(), cplx{});
        if (N >= 2) conv.accumulate(std::span<const cplx>(cur.data() + 1, N), kk, 0, N - 1, hist.data() + 2, 1);
        double change = 0.0, scale = 1.0;
        for (std::size_t n = 1; n <= N; ++n) {
            const double w = h * static_cast<double>(n);
            const cplx rhs = k[n] + h * (0.5 * slope0 * k[n] + hist[n] + 0.5 * cur[n] * k[0]);
            next[n] = rhs / w;
            change = std::max(change, std::abs(next[n] - cur[n]));
            scale = std::max(scale, std::abs(next[n]));
        }
        std::swap(cur, next);
        if (change <= tol * scale) return cur;
        if (it > 50 && change > 10.0 * last_change) throw SolverError("volterra_picard: iteration diverges");
        last_change = change;
    }
    throw SolverError(fmt::format("volterra_picard: no convergence after {} iterations", max_iter));
}

std::vector<cplx> cumulative_amplitude(std::span<const cplx> b, double h)
{
    std::vector<cplx> z(b.size());
    if (b.empty()) return z;
    z[0] = 1.0;
    for (std::size_t n = 1; n < b.size(); ++n) z[n] = z[n - 1] + 0.5 * h * (b[n - 1] + b[n]);
    return z;
}

double default_omega_max(double tau_e)
{
    if (!(tau_e > 0.0)) throw std::invalid_argument("default_omega_max: tau_e must be positive");
    return 40.0 / (2.0 * tau_e);
}

ElasticAmplitude solve_elastic_amplitude(const coupler::Model& m, double omega_max, double step, SolveReport* report,
                                         Kernel kernel)
{
    if (!(omega_max > 0.0)) throw std::invalid_argument("solve_elastic_amplitude: omega_max must be positive");
    if (!(step > 0.0)) throw std::invalid_argument("solve_elastic_amplitude: step must be positive");
    if (step > 2.0 * pi / 16.0)
        throw std::invalid_argument("solve_elastic_amplitude: step must give at least 16 points per 2 pi");
    if (omega_max > coupler::max_frequency(m))
        throw std::invalid_argument("solve_elastic_amplitude: omega_max beyond the coupler table");

    auto s = [&m](double w) { return coupler::s_bb(m, w); };
    const cplx b0 = coupler::s_bb_slope0(m);

    std::size_t n = static_cast<std::size_t>(std::ceil(omega_max / step));
    double h = omega_max / static_cast<double>(n);
    auto solve = [&](double hh, std::size_t nn) { return cumulative_amplitude(volterra_step(s, b0, hh, nn, kernel), hh); };

    std::vector<cplx> coarse = solve(h, n);
    double change = 0.0;
    int halvings = 0;
    constexpr int max_halvings = 6;
    for (;; ++halvings) {
        if (halvings == max_halvings)
            throw SolverError(fmt::format("solve_elastic_amplitude: no convergence under refinement (last change {:.3g})", change));
        auto fine = solve(0.5 * h, 2 * n);
        change = sup_diff(coarse, fine);
        h *= 0.5;
        n *= 2;
        coarse = std::move(fine);
        if (change < 1e-6) break;
    }

    double peak = 0.0;
    for (const cplx& v : coarse) peak = std::max(peak, std::abs(v));
    if (peak > 1.0 + 1e-6)
        throw SolverError(fmt::format("solve_elastic_amplitude: |Z| reaches {:.9f} > 1", peak));

    if (report) *report = {h, change, halvings + 1};
    return make_amplitude(std::move(coarse), h, kernel, coupler::describe(m));
}

ElasticAmplitude from_function(const std::function<cplx(double)>& z, double omega_max, double step, std::string source)
{
    const std::size_t n = static_cast<std::size_t>(std::ceil(omega_max / step));
    const double h = omega_max / static_cast<double>(n);
    std::vector<cplx> v(n + 1);
    for (std::size_t i = 0; i <= n; ++i) v[i] = z(h * static_cast<double>(i));
    return make_amplitude(std::move(v), h, Kernel::convolution, std::move(source));
}

ElasticAmplitude ballistic(double tau1, double omega_max, double step)
{
    return from_function([tau1](double w) { return std::polar(1.0, w * tau1); }, omega_max, step,
                         fmt::format("ballistic(tau1={})", tau1));
}

double inelastic_probability(const ElasticAmplitude& z, double w)
{
    const double p = 1.0 - std::norm(z(w));
    if (p < -1e-9 || p > 1.0 + 1e-9) throw SolverError(fmt::format("inelastic probability {} outside [0,1]", p));
    return std::clamp(p, 0.0, 1.0);
}

double wigner_smith_delay(const ElasticAmplitude& z)
{
    const double H = std::min(0.08, z.omega_max() / 4.0);
    constexpr int levels = 4;
    double r[levels][levels];
    const double arg0 = std::arg(z(0.0));
    for (int k = 0; k < levels; ++k) {
        const double w = H / std::pow(2.0, k);
        r[k][0] = (std::arg(z(w)) - arg0) / w;
        for (int j = 1; j <= k; ++j) {
            const double p = std::pow(2.0, j);
            r[k][j] = (p * r[k][j - 1] - r[k - 1][j - 1]) / (p - 1.0);
        }
    }
    const double tau = r[levels - 1][levels - 1];
    const double err = std::abs(tau - r[levels - 2][levels - 2]);
    if (err > 1e-5 * std::max(1.0, std::abs(tau)))
        throw SolverError(fmt::format("wigner_smith_delay: derivative too noisy (estimate {}, spread {})", tau, err));
    return tau;
}

num::ComplexTable elastic_amplitude_time(const ElasticAmplitude& z, std::span<const double> tau, double eta)
{
    if (!(eta > 0.0)) throw std::invalid_argument("elastic_amplitude_time: eta must be positive");
    std::vector<cplx> v(tau.size());
    const double wm = z.omega_max();
    const cplx zm = z(wm);
    for (std::size_t i = 0; i < tau.size(); ++i) {
        const cplx kappa(eta, tau[i]);
        v[i] = (z.table.laplace(kappa) + zm * std::exp(-kappa * wm) / kappa) / (2.0 * pi);
    }
    return num::ComplexTable(std::vector<double>(tau.begin(), tau.end()), std::move(v));
}

void write_csv(const ElasticAmplitude& z, std::ostream& out, const Scales& scales)
{
    out << "omega,z_re,z_im,sigma_in\n";
    const auto g = z.table.grid();
    const auto v = z.table.values();
    for (std::size_t i = 0; i < g.size(); ++i) {
        out << fmt::format("{:.17g},{:.17g},{:.17g},{:.17g}\n", scales.rad_per_s(g[i]), v[i].real(), v[i].imag(),
                           std::max(0.0, 1.0 - std::norm(v[i])));
    }
}

}  // namespace eqradar::decoherence
