#pragma once

#include <functional>

#include "eqradar/common.hpp"

// Closed-form single-particle models of the interferometer.
namespace eqradar::toy {

struct CollisionGeometry {
    double l = 1e-6;      // m
    double d = 100e-9;    // m
    double eps_r = 12.9;
    double v_f = 1e5;     // m/s
};

struct CollisionPhase {
    double alpha_eff = 0.0;
    double delta_phi = 0.0;  // rad
};

CollisionPhase collision_phase(const CollisionGeometry& g);

// sqrt(v_F) phi(t) in reduced units; center and width place quadrature breaks.
struct Wavepacket {
    std::function<cplx(double)> amplitude;
    double center = 0.0;
    double width = 0.1;
};

Wavepacket leviton(double tau_e, double t_e);

struct Splitters {
    double t_a = 0.5;
    double t_b = 0.5;
};

struct MziResult {
    double p_1out = 0.0;
    double p_q = 0.0;
    cplx overlap;                    // int phi(t - tau1) e^{i theta(t)} phi*(t - tau2) dt
    double short_pulse_phase = 0.0;  // theta at the arrival time center + tau1
};

// U(t) is the reduced voltage e U l / (hbar v_F); theta(t) = int_{t - tau1}^t U.
MziResult classical_mzi_pq(const Wavepacket& phi, const std::function<double(double)>& u, double tau1, double tau2,
                           const Splitters& s, double phi_ab);

struct EvProbabilities {
    double p_none = 0.0;
    double p_1out = 0.0;
    double p_2out = 0.0;
};

// A1: amplitude for the particle to pass the bomb arm unabsorbed; the two
// overlaps are <Idle|Fizzled> and <Psi|Psi'>.
EvProbabilities elitzur_vaidman(cplx a1, cplx overlap_bomb, cplx overlap_photon, double phi_ab);

}  // namespace eqradar::toy
