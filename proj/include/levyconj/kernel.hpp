#pragma once

#include <functional>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "levyconj/numerics.hpp"

namespace levyconj {

struct BarPhiFamily {
    double p = 1.0;
    double alpha = 0.0;  // p > 0, alpha < 2;  h(u) = (1-u)^{p-1} u^{-alpha-1} / Gamma(p) on (0,1)
};
struct LambdaQFamily {
    double q = 1.0;
    double alpha = 0.0;  // q > 0, alpha < 2;  h(u) = (-log u)^{q-1} u^{-alpha-1} / Gamma(q)
};
struct PsiFamily {
    double alpha = 0.0;
    double beta = 1.0;  // alpha < 2, beta > 0;  h(u) = u^{-alpha-1} e^{-u^beta} on (0,inf)
};
struct GaussTypeGFamily {};  // h(u) = (2 pi)^{-1/2} e^{-u^2/2} on R\{0}
struct CustomCFamily {
    std::function<double(double)> h;
    double a = 0.0;
    double b = 1.0;
    std::string expr;
};
struct CustomDFamily {
    std::function<double(double)> h;  // on R\{0}
    std::string expr;
};

using KernelFamily = std::variant<BarPhiFamily, LambdaQFamily, PsiFamily, GaussTypeGFamily,
                                  CustomCFamily, CustomDFamily>;

enum class ConditionClass { c1, c2, c1_and_c2, d };

/// A stochastic-integral mapping kernel: h on (a,b) with its decreasing
/// primitive g(t) = int_t^b h, the inverse f, and the condition class that
/// decides which improper-integral type the mapping takes. Conjugation
/// (h -> h(1/u)/u^4) is tracked as a flag so that conjugating twice restores
/// the original parameters exactly.
class MappingKernel {
public:
    static MappingKernel build(KernelFamily family, bool conjugated = false);
    MappingKernel conjugate() const;

    const KernelFamily& family() const { return family_; }
    bool conjugated() const { return conjugated_; }
    bool two_sided() const { return two_sided_; }
    ConditionClass condition() const { return condition_; }
    double a() const { return a_; }
    double b() const { return b_; }
    double c() const { return c_; }            // g(a+), +inf when h is C1-only
    double c_numeric() const;                   // always via quadrature (tests)

    double h(double u) const;
    double g(double t) const;                   // closed form when available
    double g_numeric(double t) const;           // generic quadrature path
    double f(double s) const;                   // closed form when available
    double f_numeric(double s) const;           // generic bracketed inversion of g_numeric

    /// intensity moment int h(u) u^k du over the domain (one-sided kernels);
    /// +inf when divergent. Closed forms for the named families.
    double h_moment(double k) const;
    /// two-sided kernels: moment over (0,inf) and over (-inf,0) against |u|^k.
    std::pair<double, double> h_moment_two_sided(double k) const;

    /// Power exponents of h at its endpoints (h ~ const * u^e), used for
    /// Grid extrapolation slopes of mapped densities.
    double low_end_exponent() const;
    double high_end_exponent() const;

    /// alpha-like parameter for the named families (drives domain criteria);
    /// nullopt for custom kernels.
    std::optional<double> family_alpha() const;

    std::string describe() const;

private:
    MappingKernel() = default;
    void classify();

    KernelFamily family_;
    bool conjugated_ = false;
    bool two_sided_ = false;
    ConditionClass condition_ = ConditionClass::c1;
    double a_ = 0.0, b_ = 1.0, c_ = kInf;
};

enum class AsymptoticProbe { f_at_c, f_star_at_0 };

struct AsymptoticReport {
    struct Probe {
        double s;
        double f_value;
        double asymptote;  // NaN when only a decay rate is predicted
        double ratio;      // f/asymptote, or measured-rate/predicted-rate
    };
    std::vector<Probe> probes;
    bool rate_only = false;  // exponential-decay families: ratio tests the rate
};

/// Compares f (or the conjugate's f) against the family's published
/// asymptote at extreme probe points. Unsupported for custom kernels.
AsymptoticReport asymptotic_check(const MappingKernel& k, AsymptoticProbe which);

}  // namespace levyconj
