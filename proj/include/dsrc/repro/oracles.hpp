#pragma once

#include <cmath>
#include <cstddef>
#include <functional>

#include "dsrc/core/errors.hpp"

namespace dsrc {

// Independent reference integrators for the oracle-based checks. These
// share no code with the BSDE solver path they are used to judge.

/// Classical fixed-step RK4 for a scalar autonomous-in-y ODE y' = f(t, y).
inline double rk4_integrate(const std::function<double(double, double)>& f,
                            double y0, double t0, double t1, std::size_t steps) {
    const double h = (t1 - t0) / static_cast<double>(steps);
    double y = y0;
    for (std::size_t k = 0; k < steps; ++k) {
        const double t = t0 + h * static_cast<double>(k);
        const double k1 = f(t, y);
        const double k2 = f(t + 0.5 * h, y + 0.5 * h * k1);
        const double k3 = f(t + 0.5 * h, y + 0.5 * h * k2);
        const double k4 = f(t + h, y + h * k3);
        y += h / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
    }
    return y;
}

/// Plain bisection for an increasing function with a sign change on [lo, hi].
inline double bisection_root(const std::function<double(double)>& f, double lo,
                             double hi, double tol = 1e-14,
                             std::size_t max_iter = 200) {
    double flo = f(lo);
    if (flo > 0.0) throw NumericError("bisection: f(lo) must be <= 0");
    if (f(hi) < 0.0) throw NumericError("bisection: f(hi) must be >= 0");
    for (std::size_t i = 0; i < max_iter && hi - lo > tol; ++i) {
        const double mid = 0.5 * (lo + hi);
        if (f(mid) <= 0.0) lo = mid;
        else hi = mid;
    }
    return 0.5 * (lo + hi);
}

} // namespace dsrc
