#pragma once

#include <complex>
#include <span>

#include "levyconj/measure_core.hpp"

namespace levyconj {

class MappingKernel;

struct CumulantResult {
    std::complex<double> value{0.0, 0.0};
    double abs_error = 0.0;
};

/// Cumulant (log characteristic function) C(z) = log mu^(z) of a triplet in
/// the cut1 form. The branch is the one fixed by the integral formula;
/// C(0) = 0. Throws NumericError when the quadrature cannot reach
/// max(1e-10, 1e-8 |value|).
CumulantResult cumulant(const Triplet& t, std::span<const double> z);

/// Cumulant of the mapped law, computed in the t-variable as
/// int_a^b h(t) C_rho(t z) dt (two-sided kernels integrate over R\{0}).
/// Throws NotDefinableError when the integral is detected divergent.
CumulantResult mapped_cumulant(const MappingKernel& k, const Triplet& rho,
                               std::span<const double> z);

}  // namespace levyconj
