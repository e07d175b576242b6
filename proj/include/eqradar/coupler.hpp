#pragma once

#include <filesystem>
#include <span>
#include <string>
#include <variant>

#include "eqradar/common.hpp"
#include "eqradar/numerics.hpp"

// Coupler models. All frequencies are X = w l / v_F and all times are in
// units of l / v_F; SI conversion happens through Scales at the edges.
namespace eqradar::coupler {

struct CounterPropagating {
    double alpha = 0.0;
};

struct TopGate {
    double alpha = 0.0;
};

struct DirectDrive {};

// S_bb and S_ba sampled on a reduced-frequency grid starting at 0.
struct Tabulated {
    num::ComplexTable s_bb;
    num::ComplexTable s_ba;
};

using Model = std::variant<CounterPropagating, TopGate, DirectDrive, Tabulated>;

struct SMatrix {
    cplx s_aa, s_ab, s_ba, s_bb;
};

std::string describe(const Model& m);

// (e^{iX} - 1)/(iX), series near 0.
cplx transit(double X);

SMatrix s_matrix(const Model& m, double X);
cplx s_bb(const Model& m, double X);
cplx s_ba(const Model& m, double X);

// dS_bb/dX at 0+.
cplx s_bb_slope0(const Model& m);

// Largest X the model can be evaluated at.
double max_frequency(const Model& m);

cplx topgate_transmission(double alpha, double X);

// Y/(e^2/h) = 1 - t. Throws if |t| is not 1 within 1e-6.
cplx admittance_from_t(cplx t);

struct RC {
    double c_mu;   // C_mu / C_q
    double r;      // R / R_K
    double error;  // Richardson error estimate on c_mu
};

// Low-frequency RC parameters of the coupler admittance 1 - S_bb.
RC rc_expansion(const Model& m);

struct DirectResponse {
    cplx phase;   // e^{iX}
    cplx c_q;     // C_q(w) / C_q
};

DirectResponse direct_drive_response(double X);

// -R_K Y(w) / (i w) in units of l/v_F. Counter-propagating and tabulated
// couplers use S_ba; gates and direct contacts use 1 - S_bb.
cplx drive_transfer(const Model& m, double X);

// Real time-domain kernel Gamma(s) = int_0^inf drive_transfer e^{-iXs} dX/2pi + c.c.
double gamma_kernel(const Model& m, double s);
num::ComplexTable gamma_ba(const Model& m, std::span<const double> tau);

// Gamma(s) with the smooth remainder tabulated once on [0, s_max]; the
// piecewise-polynomial part is evaluated exactly. Beyond s_max it is zero.
class GammaKernel {
public:
    explicit GammaKernel(Model m, double s_max = 40.0, double ds = 0.02);
    double operator()(double s) const;
    double s_max() const { return s_max_; }
    // Points where Gamma or its derivatives jump.
    std::vector<double> breaks() const;

private:
    Model model_;
    double s_max_;
    num::ComplexTable remainder_;
};

cplx effective_gate_voltage(double alpha, double X, cplx v_gate);

// CSV with header omega,s_bb_re,s_bb_im,s_ba_re,s_ba_im (omega in rad/s).
Tabulated load_tabulated(const std::filesystem::path& path, const Scales& scales);
Tabulated make_tabulated(num::ComplexTable s_bb, num::ComplexTable s_ba);

}  // namespace eqradar::coupler
