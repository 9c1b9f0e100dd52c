#pragma once

#include <span>
#include <vector>

#include "levyconj/measure_core.hpp"

namespace levyconj {

/// The inversion mu -> mu' on triplets without Gaussian part: the Levy
/// measure becomes the |x|^2-weighted pushforward under x -> x/|x|^2 and
/// gamma is negated plus the unit-sphere correction. Throws
/// NotDefinableError when A != 0 (split off the Gaussian part first).
Triplet invert(const Triplet& t);

struct SemistableReport {
    struct Span {
        double b = 2.0;
        bool pass = false;
        double max_rel_dev = 0.0;
    };
    double alpha = 1.0;
    std::vector<Span> spans;
    bool all_pass = false;  // "stable" when the default span grid passes
};

/// Checks b^alpha nu = T_b nu on a family of annular probe sets
/// (log-spaced radii per ray). Pass means max relative deviation <= tol.
SemistableReport check_semistable(const Triplet& t, double alpha, std::span<const double> spans,
                                  double tol = 1e-9);
SemistableReport check_semistable(const Triplet& t, double alpha, double tol = 1e-9);

}  // namespace levyconj
