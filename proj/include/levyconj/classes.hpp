#pragma once

#include <functional>
#include <span>
#include <string>
#include <vector>

#include "levyconj/measure_core.hpp"

namespace levyconj {

enum class Verdict;  // defined in mapping.hpp

enum class OrderMode { monotone, increasing };
enum class FunctionDomain { real_line, positive_half };

struct OrderTestResult {
    int verdict = 0;  // 1 yes, -1 no, 0 inconclusive (boundary-tight)
    double worst_violation = 0.0;
    double location = 0.0;
    std::string note;
};

/// Finite-difference test for "monotone of order p" / "increasing of order p"
/// on a uniform grid: checks sign of (-1)^n Delta^n phi for n = 1..p with
/// tolerances 10^n * eps_grid, plus the decay probe at the appropriate end.
/// The increasing mode applies the reflection phi(-u) on the real line and
/// the u^{p-1} phi(1/u) transform on the positive half-line, then tests
/// monotonicity. p must be a positive integer <= 8 (non-integer orders are
/// rejected: the defining fractional-integral representation has no finite
/// verification procedure); the grid needs at least 10 p points.
OrderTestResult order_test(std::span<const double> u, std::span<const double> phi, int p,
                           OrderMode mode, FunctionDomain dom, bool require_decay = true);

/// Evaluator-backed variant: samples n points uniformly over [lo, hi]
/// (in the transformed variable for increasing mode).
OrderTestResult order_test(const std::function<double(double)>& phi, double lo, double hi, int n,
                           int p, OrderMode mode, FunctionDomain dom, bool require_decay = true);

struct CompleteMonotoneResult {
    int verdict = 0;
    int depth = 8;
    int failed_order = 0;  // first order that failed, 0 if none
    double worst_violation = 0.0;
};

/// order_test for p = 1..N; "yes" is explicitly the finite-depth proxy.
CompleteMonotoneResult completely_monotone_test(const std::function<double(double)>& phi,
                                                double lo, double hi, int n = 400, int N = 8);

enum class ClassVariant { L, Lstar };

struct ClassReport {
    int verdict = 0;  // 1 yes, -1 no, 0 inconclusive
    double alpha = 0.0;
    ClassVariant variant = ClassVariant::L;
    struct Ray {
        double worst_violation = 0.0;
        double location = 0.0;
    };
    std::vector<Ray> rays;
    std::string note;
};

/// alpha-decomposability class test: L requires u^{alpha+1} l(u) non-increasing
/// per ray (and A = 0 when alpha > 2); Lstar requires u^{3-alpha} l(u)
/// non-decreasing (and A = 0 when alpha > 0). Atomic rays fail unless nu = 0.
ClassReport class_membership(const Triplet& t, double alpha, ClassVariant variant);

struct NotDecomposableError : std::runtime_error {
    double witness_radius;
    NotDecomposableError(const std::string& what, double r)
        : std::runtime_error(what), witness_radius(r) {}
};

/// Removes the scaled dilate factor of the decomposability identity and
/// returns the cofactor triplet; throws NotDecomposableError with a witness
/// radius when the subtraction leaves a signed measure or a non-PSD matrix.
Triplet factor_decompose(const Triplet& t, double alpha, double b, ClassVariant variant);

struct StableBlend {
    double beta = 1.0;  // in (0,2)
    double mass = 1.0;
    std::vector<std::pair<Direction, double>> rays;  // weights sum to 1
};

/// Builds the completely-selfdecomposable triplet with the given discrete
/// exponent blend: nu = sum mass * PowerLaw(1, beta) rays, gamma = 0, A = 0.
/// The blend is recorded as metadata on the triplet.
Triplet build_L_infinity(std::span<const StableBlend> spec);

}  // namespace levyconj
