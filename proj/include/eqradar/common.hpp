#pragma once

#include <complex>
#include <numbers>
#include <stdexcept>

namespace eqradar {

using cplx = std::complex<double>;

inline constexpr double pi = std::numbers::pi;
inline constexpr cplx I{0.0, 1.0};

namespace si {
inline constexpr double e = 1.602176634e-19;
inline constexpr double h = 6.62607015e-34;
inline constexpr double hbar = h / (2.0 * pi);
inline constexpr double c = 299792458.0;
inline constexpr double R_K = h / (e * e);
inline constexpr double alpha_qed = 1.0 / 137.035999;
}  // namespace si

// Reduced units: times in l/v_F, angular frequencies in v_F/l.
struct Scales {
    double length = 10e-6;    // m
    double velocity = 1e5;    // m/s

    double time_unit() const { return length / velocity; }
    double freq_unit() const { return velocity / length; }

    double time(double seconds) const { return seconds / time_unit(); }
    double seconds(double reduced) const { return reduced * time_unit(); }
    double freq(double rad_per_s) const { return rad_per_s / freq_unit(); }
    double rad_per_s(double reduced) const { return reduced * freq_unit(); }

    // Quantum capacitance e^2 l / (h v_F).
    double quantum_capacitance() const { return si::e * si::e * length / (si::h * velocity); }
};

// Numerical failure inside a solver (non-convergence, broken physical bound).
class SolverError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class IoError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

}  // namespace eqradar
