#pragma once

#include <complex>
#include <cstdint>
#include <functional>
#include <limits>
#include <span>
#include <vector>

namespace levyconj {

inline constexpr double kInf = std::numeric_limits<double>::infinity();

/// Result of an adaptive quadrature pass.
struct IntegralEstimate {
    double value = 0.0;
    double abs_error = 0.0;
    bool converged = false;
    std::size_t evaluations = 0;
};

struct ComplexIntegralEstimate {
    std::complex<double> value{0.0, 0.0};
    double abs_error = 0.0;
    bool converged = false;
    std::size_t evaluations = 0;
};

/// Adaptive Gauss-Kronrod 7-15 on a finite interval. Bisects the worst
/// subinterval until the combined error estimate meets
/// max(abs_tol, rel_tol*|value|) or max_intervals is exhausted.
/// Optional breakpoints are honored as initial subdivision seams.
IntegralEstimate integrate(const std::function<double(double)>& f, double lo, double hi,
                           double abs_tol = 1e-10, double rel_tol = 1e-10,
                           std::size_t max_intervals = 100000,
                           std::span<const double> breakpoints = {});

ComplexIntegralEstimate integrate_complex(const std::function<std::complex<double>(double)>& f,
                                          double lo, double hi, double abs_tol = 1e-10,
                                          double rel_tol = 1e-10,
                                          std::size_t max_intervals = 100000,
                                          std::span<const double> breakpoints = {});

enum class LimitStatus { converged, diverging, inconclusive };

struct LimitResult {
    LimitStatus status = LimitStatus::inconclusive;
    double value = 0.0;
    double spread = 0.0;  // residual disagreement of the last extrapolants
};

/// Classifies the limit of a sequence of partial values (partial sums or
/// partial integrals at expanding cutoffs). With use_aitken the sequence is
/// accelerated by Aitken's delta-squared before the Cauchy test; the raw
/// variant matches the plain successive-difference protocol.
LimitResult classify_limit(std::span<const double> partials, bool use_aitken,
                           double eps = 1e-8, double growth_factor = 1e3);

/// Vector version: converged only if every component converges; diverging if
/// any component diverges.
struct VectorLimitResult {
    LimitStatus status = LimitStatus::inconclusive;
    std::vector<double> value;
    double spread = 0.0;
};
VectorLimitResult classify_limit_vec(const std::vector<std::vector<double>>& partials,
                                     bool use_aitken, double eps = 1e-8,
                                     double growth_factor = 1e3);

/// Integral over (lo, hi) with improper ends (lo may be 0, hi may be +inf),
/// on a log scale with geometric slab expansion: status reports whether the
/// expanding partial sums settled (converged), kept growing (diverging), or
/// neither within the slab budget.
struct ImproperEstimate {
    double value = 0.0;
    double abs_error = 0.0;
    LimitStatus status = LimitStatus::converged;
};
ImproperEstimate integrate_improper(const std::function<double(double)>& f, double lo, double hi,
                                    double abs_tol = 1e-11, double rel_tol = 1e-9);

/// Gamma function by Lanczos approximation (relative accuracy ~1e-14 on the
/// positive axis, reflection for negative non-integer arguments).
double gamma_fn(double x);
double log_gamma(double x);  // x > 0

double normal_cdf(double x);
/// Inverse standard normal CDF (Wichura's AS241, ~1e-15).
double normal_quantile(double p);

struct RootResult {
    double root = 0.0;
    int iterations = 0;
    bool converged = false;
};

/// Brent's method on a bracketing interval [lo, hi] with f(lo), f(hi) of
/// opposite sign (throws std::invalid_argument otherwise).
RootResult find_root(const std::function<double(double)>& f, double lo, double hi,
                     double x_tol = 0.0, double f_tol = 0.0, int max_iter = 200);

/// SplitMix64 step; also usable as a cheap 64-bit mixer.
std::uint64_t splitmix64(std::uint64_t& state);
std::uint64_t mix64(std::uint64_t x);

}  // namespace levyconj
