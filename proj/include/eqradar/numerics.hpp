#pragma once

#include <functional>
#include <span>
#include <vector>

#include "eqradar/common.hpp"

namespace eqradar::num {

using ComplexFn = std::function<cplx(double)>;

// L_n(x). Throws std::overflow_error if the value is not finite.
double laguerre(unsigned n, double x);

// Modified Bessel function I_n(x), x >= 0.
double bessel_i(int n, double x);

struct QuadResult {
    cplx value;
    double error = 0.0;
    int evaluations = 0;
    bool converged = false;
};

struct QuadOptions {
    double rel_tol = 1e-8;
    double abs_tol = 0.0;
    int max_panels = 50000;
};

// Globally adaptive 15-point Gauss-Kronrod over the panels delimited by `breaks`
// (at least two strictly increasing points).
QuadResult integrate(const ComplexFn& f, std::span<const double> breaks, const QuadOptions& opt = {});
QuadResult integrate(const ComplexFn& f, double a, double b, const QuadOptions& opt = {});

// Like integrate(), but throws SolverError when the tolerance is not met.
cplx integrate_or_throw(const ComplexFn& f, std::span<const double> breaks, const QuadOptions& opt = {});

// Integral over [0, inf) of an integrand carrying an e^{-damping*w} envelope.
// The range is cut at 40/damping and the initial panels hold at least eight
// nodes per `period_hint` (ignored when <= 0).
cplx quad_damped(const ComplexFn& f, double damping, double period_hint, double rel_tol = 1e-8);

// Coefficients of f(t) = sum_n c_n exp(-2 pi i n t / period).
class FourierSeries {
public:
    FourierSeries() = default;
    FourierSeries(double period, std::vector<cplx> coeffs);  // coeffs indexed -nmax..nmax

    double period() const { return period_; }
    double fundamental() const { return 2.0 * pi / period_; }
    int nmax() const { return nmax_; }
    cplx operator[](int n) const;
    cplx operator()(double t) const;
    std::span<const cplx> coefficients() const { return c_; }

private:
    double period_ = 1.0;
    int nmax_ = 0;
    std::vector<cplx> c_;
};

FourierSeries fourier_coeffs_periodic(const ComplexFn& f, double period, double tol = 1e-14);

// Piecewise-cubic Hermite table; slopes from local five-point Lagrange fits.
// Evaluation outside [front, back] throws std::out_of_range.
class ComplexTable {
public:
    ComplexTable() = default;
    ComplexTable(std::vector<double> x, std::vector<cplx> y);

    cplx operator()(double x) const;
    cplx derivative(double x) const;

    std::span<const double> grid() const { return x_; }
    std::span<const cplx> values() const { return y_; }
    std::size_t size() const { return x_.size(); }
    bool empty() const { return x_.empty(); }
    double front() const { return x_.front(); }
    double back() const { return x_.back(); }
    bool contains(double x) const { return !x_.empty() && x >= x_.front() && x <= x_.back(); }

    // Exact integral of the interpolant times e^{-kappa u} over [a, b].
    cplx laplace(cplx kappa, double a, double b) const;
    cplx laplace(cplx kappa) const { return laplace(kappa, front(), back()); }

private:
    std::size_t interval(double x) const;

    std::vector<double> x_;
    std::vector<cplx> y_;
    std::vector<cplx> d_;
    bool uniform_ = false;
};

// F(w) = int f(t) e^{i w t} dt, integrating the table's interpolant exactly.
ComplexTable fourier_transform_transient(const ComplexTable& f, std::span<const double> omega);

}  // namespace eqradar::num
