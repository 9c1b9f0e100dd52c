#pragma once

#include <optional>
#include <string>
#include <vector>

#include "levyconj/kernel.hpp"
#include "levyconj/measure_core.hpp"

namespace levyconj {

enum class Verdict { yes, no, inconclusive };

std::string to_string(Verdict);

struct Evidence {
    std::string name;
    IntegralKind kind = IntegralKind::finite;
    double value = 0.0;
};

struct DomainReport {
    Verdict in_de = Verdict::inconclusive;
    Verdict in_d = Verdict::inconclusive;
    Verdict in_d0 = Verdict::inconclusive;
    std::vector<Evidence> evidence;
};

/// Membership of rho in the essential/plain/absolute domains of Lambda_h,
/// by the family-specific moment criteria. Custom one-sided kernels are
/// tested for essential definability only, by direct quadrature of the
/// cumulant criterion.
DomainReport check_domain(const MappingKernel& k, const Triplet& rho);

/// The deterministic transform on triplets: nu_mu(B) = int h(t) nu_rho(B/t),
/// A_mu = (int h u^2) A_rho, gamma by the t-variable formula. Per-ray output
/// densities are Grid (400 log nodes) backed by the exact quadrature
/// evaluator; full-line power-law inputs map to exact power laws.
Triplet apply_mapping(const MappingKernel& k, const Triplet& rho);

/// n-fold application with a per-step domain check; throws NotDefinableError
/// naming the failing step.
Triplet iterate_mapping(const MappingKernel& k, const Triplet& rho, int n,
                        std::vector<DomainReport>* step_reports = nullptr);

struct RangeReport {
    Verdict verdict = Verdict::inconclusive;    // plain range
    Verdict essential = Verdict::inconclusive;  // the order-test part
    Verdict absolute = Verdict::inconclusive;
    double order = 0.0;
    struct Ray {
        std::vector<double> grid_u;
        std::vector<double> k_values;
        double worst_violation = 0.0;
    };
    std::vector<Ray> rays;
    std::vector<Evidence> side_conditions;
    std::string note;
};

/// Tests mu against the range description of the kernel family: extracts the
/// k-function on each ray, runs the order/complete-monotonicity test, and
/// combines with the alpha-dependent side condition.
RangeReport check_range(const MappingKernel& k, const Triplet& mu);

}  // namespace levyconj
