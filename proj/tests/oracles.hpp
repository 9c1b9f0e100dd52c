#pragma once

// Test-only oracles, independent of the library's quadrature paths:
// closed-form antiderivatives for power-law radial integrals and a brute
// midpoint integrator on a log grid.

#include <cmath>
#include <functional>
#include <limits>

namespace oracles {

inline constexpr double inf = std::numeric_limits<double>::infinity();

// int_lo^hi c r^{p - beta - 1} dr by the closed-form antiderivative.
inline double power_law_moment(double c, double beta, double p, double lo, double hi) {
    const double e = p - beta;
    if (e == 0.0) {
        if (lo == 0.0 || hi == inf) return inf;
        return c * std::log(hi / lo);
    }
    double upper, lower;
    if (hi == inf) {
        if (e > 0.0) return inf;
        upper = 0.0;
    } else {
        upper = c * std::pow(hi, e) / e;
    }
    if (lo == 0.0) {
        if (e < 0.0) return inf;
        lower = 0.0;
    } else {
        lower = c * std::pow(lo, e) / e;
    }
    return upper - lower;
}

// brute midpoint rule on a log grid; for finite well-behaved integrands only
inline double brute_log_integral(const std::function<double(double)>& f, double lo, double hi,
                                 int n = 200000) {
    const double llo = std::log(lo), lhi = std::log(hi);
    const double h = (lhi - llo) / n;
    double acc = 0.0;
    for (int i = 0; i < n; ++i) {
        const double t = llo + (i + 0.5) * h;
        const double r = std::exp(t);
        acc += f(r) * r * h;
    }
    return acc;
}

// n-th forward difference sign probe used as the independent check for the
// order tests: evaluates phi exactly on a uniform grid and returns the worst
// signed value of (-1)^n Delta^n phi.
inline double worst_alternating_difference(const std::function<double(double)>& phi, double lo,
                                           double hi, int n_points, int order) {
    const double h = (hi - lo) / (n_points - 1);
    double worst = 0.0;
    for (int i = 0; i + order < n_points; ++i) {
        double dd = 0.0;
        double binom = 1.0;
        for (int k = 0; k <= order; ++k) {
            dd += ((order - k) % 2 == 0 ? 1.0 : -1.0) * binom * phi(lo + (i + k) * h);
            binom = binom * (order - k) / (k + 1.0);
        }
        const double signed_v = (order % 2 == 0 ? 1.0 : -1.0) * dd;
        worst = std::min(worst, signed_v);
    }
    return worst;
}

}  // namespace oracles
