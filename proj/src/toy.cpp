#include "eqradar/toy.hpp"

#include <algorithm>
#include <cmath>
#include <vector>

#include <fmt/format.h>

#include "eqradar/numerics.hpp"

namespace eqradar::toy {

CollisionPhase collision_phase(const CollisionGeometry& g)
{
    if (!(g.l > 0.0) || !(g.d > 0.0) || !(g.eps_r > 0.0) || !(g.v_f > 0.0))
        throw std::invalid_argument("collision geometry: all parameters must be positive");
    CollisionPhase p;
    p.alpha_eff = si::alpha_qed / g.eps_r * (si::c / g.v_f);
    p.delta_phi = p.alpha_eff * std::asinh(g.l / g.d);
    return p;
}

Wavepacket leviton(double tau_e, double t_e)
{
    if (!(tau_e > 0.0)) throw std::invalid_argument("leviton: width must be positive");
    return {[tau_e, t_e](double t) { return std::sqrt(tau_e / pi) / cplx(tau_e, t - t_e); }, t_e, tau_e};
}

namespace {

double phase(const std::function<double(double)>& u, double t, double tau1)
{
    if (tau1 == 0.0) return 0.0;
    auto g = [&](double s) -> cplx { return u(s); };
    const double br[] = {std::min(t - tau1, t), std::max(t - tau1, t)};
    const double sign = tau1 > 0.0 ? 1.0 : -1.0;
    return sign * num::integrate_or_throw(g, br, {1e-12, 1e-14}).real();
}

// Overlap over [c - L, c + L].
cplx overlap(const Wavepacket& phi, const std::function<double(double)>& u, double tau1, double tau2, double L)
{
    auto f = [&](double t) -> cplx {
        return phi.amplitude(t - tau1) * std::polar(1.0, phase(u, t, tau1)) * std::conj(phi.amplitude(t - tau2));
    };
    const double c = phi.center + 0.5 * (tau1 + tau2);
    const double fine = 0.25 * phi.width;
    const double core = 10.0 * phi.width + 0.5 * std::abs(tau1 - tau2);
    std::vector<double> br;
    for (double x = c - core; x <= c + core; x += fine) br.push_back(x);
    for (double x = c + core, h = fine; x < c + L; x += h, h = std::min(1.1 * h, 0.5)) {
        br.push_back(x);
        br.push_back(2.0 * c - x);
    }
    br.push_back(c - L);
    br.push_back(c + L);
    std::sort(br.begin(), br.end());
    br.erase(std::unique(br.begin(), br.end()), br.end());
    return num::integrate_or_throw(f, br, {1e-12, 1e-15, 2000000});
}

}  // namespace

MziResult classical_mzi_pq(const Wavepacket& phi, const std::function<double(double)>& u, double tau1, double tau2,
                           const Splitters& s, double phi_ab)
{
    if (s.t_a < 0.0 || s.t_a > 1.0 || s.t_b < 0.0 || s.t_b > 1.0)
        throw std::invalid_argument("splitter transmissions must lie in [0, 1]");
    // The overlap tail falls off as 1/L; two spans remove it.
    constexpr double L = 2000.0;
    const cplx i1 = overlap(phi, u, tau1, tau2, L);
    const cplx i2 = overlap(phi, u, tau1, tau2, 2.0 * L);

    const double r_a = 1.0 - s.t_a, r_b = 1.0 - s.t_b;
    const double k = std::sqrt(r_a * r_b * s.t_a * s.t_b);
    MziResult r;
    r.overlap = 2.0 * i2 - i1;
    r.p_q = 2.0 * k * (std::polar(1.0, phi_ab) * r.overlap).real();
    r.p_1out = r_a * r_b + s.t_a * s.t_b + r.p_q;
    r.short_pulse_phase = phase(u, phi.center + tau1, tau1);
    return r;
}

EvProbabilities elitzur_vaidman(cplx a1, cplx overlap_bomb, cplx overlap_photon, double phi_ab)
{
    const double a2 = std::norm(a1);
    if (a2 > 1.0 + 1e-12) throw std::invalid_argument(fmt::format("Elitzur-Vaidman: |A1| = {} exceeds 1", std::sqrt(a2)));
    const double pq = 0.5 * (a1 * std::polar(1.0, phi_ab) * overlap_bomb * overlap_photon).real();
    EvProbabilities p;
    p.p_none = 0.5 * (1.0 - a2);
    p.p_1out = 0.25 * (1.0 + a2) - pq;
    p.p_2out = 0.25 * (1.0 + a2) + pq;
    return p;
}

}  // namespace eqradar::toy
