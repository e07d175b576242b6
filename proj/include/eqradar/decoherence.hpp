#pragma once

#include <functional>
#include <iosfwd>
#include <span>
#include <vector>

#include "eqradar/coupler.hpp"
#include "eqradar/numerics.hpp"

namespace eqradar::decoherence {

// Form of the memory term in w B(w) = S(w) - 1 + int_0^w B(w') K(w, w') dw'.
//   convolution: K = S(w - w') - 1
//   as_written:  K = S(w') - 1
enum class Kernel { convolution, as_written };

// Elastic amplitude Z(w) on [0, omega_max] (reduced units).
struct ElasticAmplitude {
    num::ComplexTable table;
    double tau1 = 0.0;   // Wigner-Smith delay, l/v_F
    double step = 0.0;
    Kernel kernel = Kernel::convolution;
    std::string source;

    cplx operator()(double w) const { return table(w); }
    double omega_max() const { return table.back(); }
};

// Discrete solution of the integral equation on w_n = n h, n = 0..n_steps.
// Returns B_n; slope0 is dS/dw at 0+.
std::vector<cplx> volterra_step(const std::function<cplx(double)>& s, cplx slope0, double h, std::size_t n_steps,
                                Kernel kernel = Kernel::convolution);

// Successive substitution on the same discrete equations. Throws SolverError
// if the iterates stop contracting before reaching tol.
std::vector<cplx> volterra_picard(const std::function<cplx(double)>& s, cplx slope0, double h, std::size_t n_steps,
                                  double tol = 1e-13, int max_iter = 5000);

// Z_n = 1 + cumulative trapezoid of B.
std::vector<cplx> cumulative_amplitude(std::span<const cplx> b, double h);

struct SolveReport {
    double step = 0.0;
    double refinement_change = 0.0;  // sup |Z_h - Z_{h/2}|
    int halvings = 0;
};

// Solves with step halving until the sup-norm change is below 1e-6.
// The returned table holds the finer of the last two solutions.
ElasticAmplitude solve_elastic_amplitude(const coupler::Model& m, double omega_max, double step,
                                         SolveReport* report = nullptr, Kernel kernel = Kernel::convolution);

// Default spectral range for Levitons no shorter than tau_e.
double default_omega_max(double tau_e);

// Tabulates a known amplitude, e.g. ballistic e^{i w tau}.
ElasticAmplitude from_function(const std::function<cplx(double)>& z, double omega_max, double step,
                               std::string source = "function");
ElasticAmplitude ballistic(double tau1, double omega_max, double step = 0.01);

double inelastic_probability(const ElasticAmplitude& z, double w);

// d arg Z / dw at 0 by Richardson-extrapolated forward differences.
double wigner_smith_delay(const ElasticAmplitude& z);

// Z_1(tau) = int_0^inf Z(w) e^{-eta w} e^{-i w tau} dw/2pi, with a
// constant-amplitude tail beyond omega_max.
num::ComplexTable elastic_amplitude_time(const ElasticAmplitude& z, std::span<const double> tau, double eta = 1e-3);

void write_csv(const ElasticAmplitude& z, std::ostream& out, const Scales& scales);

}  // namespace eqradar::decoherence
