#pragma once

#include <functional>
#include <optional>
#include <span>
#include <vector>

#include "eqradar/decoherence.hpp"
#include "eqradar/radiation.hpp"

// Interference signal of the electron radar for a Leviton probe.
namespace eqradar::radar {

using decoherence::ElasticAmplitude;
using radiation::FranckCondon;

struct LevitonProbe {
    double tau_e = 0.1;
    double t_e = 0.0;

    // sqrt(v_F) phi(t)
    cplx operator()(double t) const;
    // phi~(w) / sqrt(v_F), zero for w < 0
    cplx spectrum(double w) const;
};

enum class Filter { exact, adiabatic };

// f(W) = 2 tau_e int_{max(0,-W)}^inf Z(w) e^{-(2w+W) tau_e} e^{-i w tau_2} dw
cplx filter_f(const ElasticAmplitude& z, double tau_e, double tau2, double omega);
// e^{-|W| tau_e} e^{-i |W| tau_21} f(0) for W < 0, tau_21 = tau_2 - tau_1.
cplx filter_f_adiabatic(const ElasticAmplitude& z, double tau_e, double tau2, double omega);
// |f_exact - f_adiabatic| / |f(0)|
double adiabatic_discrepancy(const ElasticAmplitude& z, double tau_e, double tau2, double omega);

cplx vacuum_baseline(const ElasticAmplitude& z, double tau_e, double tau2);

struct Tau2Optimum {
    double tau2 = 0.0;
    cplx baseline;
};

// argmax of |baseline| over [lo, hi]: grid scan then golden section to 1e-4.
Tau2Optimum optimal_tau2(const ElasticAmplitude& z, double tau_e, double lo = 0.0, double hi = 3.0);

// (1/2pi) [1/(tau_e + i s) + 1/(tau_e - i (s - tau21))]
cplx filtering_kernel(double tau_e, double tau21, double s);

struct RadarResult {
    cplx x_dc;
    cplx baseline;
    cplx relative;
    double t_e = 0.0;
    double tau_e = 0.0;
    double tau2 = 0.0;
};

// Evaluates X+dc for one elastic amplitude, probe width and tau_2. Keeps a
// pointer to z, which must outlive it.
class Radar {
public:
    Radar(const ElasticAmplitude& z, double tau_e, double tau2, Filter filter = Filter::exact);

    cplx baseline() const { return f0_; }
    cplx filter(double omega) const;
    double tau21() const { return tau2_ - z_->tau1; }

    // Tabulates the time-domain response for transient factors on
    // T - t in [s_lo, s_hi]; calls outside fall back to direct evaluation.
    void prepare_transient(double s_lo, double s_hi);

    RadarResult xplus(const FranckCondon& f, double t_e) const;

private:
    cplx response(double s) const;
    cplx xplus_transient(const radiation::Transient& tr, double T) const;

    const ElasticAmplitude* z_;
    double tau_e_, tau2_;
    Filter filter_;
    cplx f0_;
    num::ComplexTable h_;
};

// Leading order in Lambda, max_t_e |relative| = 1 + Lambda F_eta(|z|) with
// eta = |f(2 w0) + f(-2 w0)| / 2|f(0)|, i.e. e^{-2 w0 tau_e} |cos(w0 tau21)|
// for the adiabatic filter.
double squeezing_eta(const ElasticAmplitude& z, double tau_e, double tau2, double omega0);
double squeezing_gain(double eta, double z_abs);

// Largest |n w| among the harmonics that Radar::xplus keeps at this width.
double harmonic_reach(const radiation::Harmonics& h, double tau_e);

RadarResult xplus_dc(const ElasticAmplitude& z, const LevitonProbe& probe, double tau2, const FranckCondon& f,
                     Filter filter = Filter::exact);

// baseline * (K * F)(t_e + tau_2), by direct quadrature of the convolution.
cplx xplus_dc_kernel(const ElasticAmplitude& z, const LevitonProbe& probe, double tau2, const FranckCondon& f);

// X+(t) = F(t) phi*(t - tau_2) psi(t), psi = Z_1 * phi, with an extra e^{-eta w} damping.
cplx xplus_time_domain(const ElasticAmplitude& z, const LevitonProbe& probe, double tau2, const FranckCondon& f, double t,
                       double eta = 0.0);

struct TimeIntegral {
    cplx value;
    double eta_error = 0.0;  // relative change between eta and eta = 0
    bool flagged = false;    // eta_error above 1 %
};

TimeIntegral xplus_time_integral(const ElasticAmplitude& z, const LevitonProbe& probe, double tau2, const FranckCondon& f,
                                 double eta = 1e-3);

// Frequency-domain amplitudes carry a regular part and weights of
// 2 pi delta(w+ - w- - n W1) lines.
struct CombLine {
    int n = 0;
    double omega = 0.0;  // line position in w+ - w-
    cplx weight;
};

struct FrequencyAmplitude {
    cplx regular;
    std::vector<CombLine> lines;
};

// R~(w+, w-) = F~(w+ - w-) Z(w-)
FrequencyAmplitude effective_scattering_frequency(const ElasticAmplitude& z, const FranckCondon& f, double omega_plus,
                                                  double omega_minus);

struct EnergyResolved {
    FrequencyAmplitude amplitude;
    bool valid = true;  // gamma_e well below omega_e
};

// Narrow Gaussian probe centred at omega_e with spectral width gamma_e.
EnergyResolved xplus_energy_resolved(const ElasticAmplitude& z, const FranckCondon& f, double omega_e, double gamma_e,
                                     double tau2, double omega);

// Average current (A) at repetition rate f_m (Hz) through splitters of
// transmissions T_A, T_B.
double dc_current(const RadarResult& x, double f_m, double phi_ab, double t_a, double t_b);

struct SweepPoint {
    double scan_value = 0.0;
    RadarResult result;
};

struct SweepSummary {
    double max_relative = 0.0;
    double argmax_relative = 0.0;
    double min_relative = 0.0;
    double argmin_relative = 0.0;
    double max_baseline = 0.0;
    double argmax_baseline = 0.0;
};

// Evaluates `point` on each grid value with up to `jobs` threads; the
// result is ordered like the grid.
std::vector<SweepPoint> contrast_sweep(std::span<const double> grid, const std::function<RadarResult(double)>& point,
                                       unsigned jobs = 1);
SweepSummary summarize(std::span<const SweepPoint> points);

}  // namespace eqradar::radar
