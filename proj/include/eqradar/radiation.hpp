#pragma once

#include <functional>
#include <optional>
#include <span>
#include <variant>
#include <vector>

#include "eqradar/coupler.hpp"
#include "eqradar/numerics.hpp"

// Franck-Condon factors F(t) of the incoming radiation, reduced units.
namespace eqradar::radiation {

struct UnitConstant {};

// F(t) = sum_n F_n exp(-i n W t), W = series.fundamental().
struct Harmonics {
    num::FourierSeries series;
};

// F(t) tabulated; F = 1 outside the table.
struct Transient {
    num::ComplexTable table;
};

using FranckCondon = std::variant<UnitConstant, Harmonics, Transient>;

cplx evaluate(const FranckCondon& f, double t);
FranckCondon fc_vacuum();

// --- classical drives ---------------------------------------------------

// Voltages are given as the phase e V l / (hbar v_F) they imprint in one transit.
struct DriveTone {
    double omega = 0.0;
    double amplitude = 0.0;
    double phase = 0.0;  // v(t) = amplitude cos(omega t + phase)
};

struct ClassicalDrive {
    double dc = 0.0;
    std::vector<DriveTone> tones;
    std::optional<num::ComplexTable> series;  // v(t) samples, used instead of tones
};

// theta(t) = int Gamma(t - s) v(s) ds.
double drive_phase(const coupler::Model& m, const ClassicalDrive& d, double t);

// Common period of the tones; throws if they are not commensurate.
double drive_period(const ClassicalDrive& d);

FranckCondon fc_classical(const coupler::Model& m, const ClassicalDrive& d);
num::FourierSeries photo_assisted_coefficients(const FranckCondon& f);

// --- squeezed radiation ---------------------------------------------------

struct SqueezedNarrowband {
    double omega0 = 0.0;
    double q0 = 0.0;
    cplx z;
    cplx s_ba;                  // S_ba(omega0)
    std::optional<double> phi0;  // defaults to 2 arg S_ba + arg z

    double lambda() const { return std::norm(s_ba) / q0; }
    double phase() const { return phi0 ? *phi0 : 2.0 * std::arg(s_ba) + std::arg(z); }
};

// |z| for a quadrature noise reduction of `db` decibels (e^{4|z|} = 10^{db/10}).
double squeezing_from_db(double db);

double fc_squeezed_exact(const SqueezedNarrowband& s, double t);
Harmonics fc_squeezed_harmonics(const SqueezedNarrowband& s);

struct Moments {
    double n_eff = 0.0;
    cplx xi_eff;
};

// n_eff = int |S_ba|^2 nbar(w)/w dw,
// xi_eff = int_{-w0}^{w0} S_ba(w0+W) S_ba(w0-W) xi(W) / sqrt(w0^2 - W^2) dW,
// where xi(W) pairs the modes w0 +/- W. `band` bounds the supports of nbar
// around omega0 and of xi around 0.
Moments squeezing_effective_moments(const coupler::Model& m, double omega0, const std::function<double(double)>& nbar,
                                    const std::function<cplx(double)>& xi, double band);

// |F| = exp(Re[xi_eff e^{-2 i w0 t}] - n_eff) times e^{i phase(t)}.
FranckCondon fc_gaussian(double omega0, const Moments& mo, const std::function<double(double)>& phase = {});

// --- single edge magnetoplasmons ------------------------------------------

// sqrt(gamma0) / (w - w0 + i gamma0/2) on [0, omega_cut], renormalized.
class LorentzianMode {
public:
    LorentzianMode(double omega0, double gamma0, double omega_cut);
    cplx operator()(double w) const;
    double omega0() const { return omega0_; }
    double gamma0() const { return gamma0_; }
    double omega_cut() const { return omega_cut_; }
    // Norm of the untruncated mode kept on [0, omega_cut].
    double retained_norm() const { return norm_; }
    // Break points for quadratures over [lo, hi].
    std::vector<double> breaks(double lo, double hi, double t = 0.0) const;

private:
    double omega0_, gamma0_, omega_cut_, norm_, scale_;
};

// Mode with the default cutoff used for x(t).
LorentzianMode lorentzian_mode(double omega0, double gamma0);

struct FockLorentzian {
    unsigned n = 1;
    double omega0 = 0.0;
    double gamma0 = 0.0;
};

struct FockMixture {
    std::vector<double> p;  // p[N]
    double omega0 = 0.0;
    double gamma0 = 0.0;
    double mean() const;
};

// x(t) = 2 pi |int S_ba chi / sqrt(w) e^{-iwt} dw/2pi|^2
double fock_overlap_x(const coupler::Model& m, const LorentzianMode& chi, double t);
// Same quantity as a time-frequency filter of the single-EMP current noise.
double fock_wigner_x(const coupler::Model& m, const LorentzianMode& chi, double t);
// 2 pi |S_ba(w0)|^2 (gamma0/w0) Theta(t) e^{-gamma0 t}
double fock_narrowband_x(const coupler::Model& m, double omega0, double gamma0, double t);

// x(t) on [-5/gamma0, 15/gamma0] with at least 40 points per carrier period.
num::ComplexTable fock_x_table(const coupler::Model& m, const LorentzianMode& chi);

FranckCondon fc_fock(unsigned n, const num::ComplexTable& x);
FranckCondon fc_mixture(std::span<const double> p, const num::ComplexTable& x);

// Excess current noise Wigner function divided by e^2.
double wigner_noise_exact(const LorentzianMode& chi, double t, double w);
double wigner_noise_lorentzian(double omega0, double gamma0, double t, double w);

// Heat current in units of hbar (v_F/l)^2.
enum class HeatBranch { lorentzian, exact };
double heat_current(const FockLorentzian& s, double t, HeatBranch branch = HeatBranch::lorentzian,
                    const LorentzianMode* chi = nullptr);
double heat_current(const FockMixture& s, double t, HeatBranch branch = HeatBranch::lorentzian,
                    const LorentzianMode* chi = nullptr);

}  // namespace eqradar::radiation
