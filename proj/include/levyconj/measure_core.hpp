#pragma once

#include <functional>
#include <map>
#include <memory>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <variant>
#include <vector>

#include "levyconj/numerics.hpp"

namespace levyconj {

// ---------------------------------------------------------------------------
// errors

struct RepresentationError : std::runtime_error {
    using std::runtime_error::runtime_error;
};
struct NumericError : std::runtime_error {
    using std::runtime_error::runtime_error;
};
struct NotDefinableError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// ---------------------------------------------------------------------------
// radial parts

/// c * r^{-beta-1} on (r_lo, r_hi).
struct PowerLawDensity {
    double coeff = 1.0;
    double beta = 0.5;
    double r_lo = 0.0;
    double r_hi = kInf;
};

/// Arbitrary nonnegative density with declared tail indices: the density
/// behaves like r^{-theta0-1} near 0 (when r_lo = 0) and r^{-thetainf-1}
/// near infinity (when r_hi = inf; thetainf = +inf means faster than any
/// power). `expr` optionally holds the grammar source for serialization.
struct AnalyticDensity {
    std::function<double(double)> eval;
    double r_lo = 0.0;
    double r_hi = kInf;
    double theta0 = 0.0;
    double thetainf = kInf;
    std::string expr;
};

/// Piecewise power-law density: log-spaced nodes with values, power-law
/// extrapolation with slopes ext_lo/ext_hi (d log density / d log r) between
/// the end nodes and the support bounds, zero outside [r_lo, r_hi].
/// `exact`, when set, is a higher-fidelity evaluator for the same density
/// (e.g. the quadrature that produced the nodes); it is consulted by all
/// numerics and dropped by serialization.
struct GridDensity {
    std::vector<double> log_nodes;
    std::vector<double> values;
    double ext_lo = 0.0;
    double ext_hi = -3.0;
    double r_lo = 0.0;
    double r_hi = kInf;
    std::shared_ptr<const std::function<double(double)>> exact;
};

using RadialDensity = std::variant<std::monostate, PowerLawDensity, AnalyticDensity, GridDensity>;

struct RadialAtom {
    double r = 1.0;
    double mass = 1.0;
};

struct RadialPart {
    std::vector<RadialAtom> atoms;
    RadialDensity density;
};

/// Evaluate the density part at radius r (0 outside support).
double density_value(const RadialDensity& d, double r);
bool has_density(const RadialDensity& d);
/// Support bounds of the density part; {0, 0} when there is none.
std::pair<double, double> density_support(const RadialDensity& d);

/// Tail description of a density at one end of its support.
struct TailInfo {
    bool touches = false;   // support reaches 0 (resp. infinity)
    double index = 0.0;     // density ~ coeff * r^{-index-1}
    double coeff = 0.0;     // exact for PowerLaw/Grid, probe estimate otherwise
    bool exact = false;     // power law holds exactly in the tail
};
TailInfo tail_at_zero(const RadialDensity& d);
TailInfo tail_at_infinity(const RadialDensity& d);

// ---------------------------------------------------------------------------
// measure and triplet

class Direction {
public:
    explicit Direction(std::vector<double> xi);
    const std::vector<double>& coords() const { return xi_; }
    int dimension() const { return static_cast<int>(xi_.size()); }
    double operator[](std::size_t i) const { return xi_[i]; }
    bool operator==(const Direction& o) const { return xi_ == o.xi_; }

private:
    std::vector<double> xi_;
};

struct LevyComponent {
    Direction xi;
    double weight = 1.0;
    RadialPart radial;
};

struct LevyMeasure {
    int dimension = 1;
    std::vector<LevyComponent> components;

    static LevyMeasure zero(int d) { return LevyMeasure{d, {}}; }
};

/// Merges atoms sitting at identical (direction, radius) pairs; leaves
/// densities untouched. Inversions and convolutions call this to keep a
/// canonical form.
LevyMeasure merge_atoms(const LevyMeasure& nu);

enum class GammaRepresentation { cut1, cut1_sharp, cut1_open, cut1_half, rr, drift, mean };

std::string to_string(GammaRepresentation);

/// Small dense symmetric matrix (Gaussian covariance).
class SymMatrix {
public:
    SymMatrix() = default;
    explicit SymMatrix(int d) : d_(d), a_(static_cast<std::size_t>(d) * d, 0.0) {}
    static SymMatrix zero(int d) { return SymMatrix(d); }
    static SymMatrix identity(int d);
    int dim() const { return d_; }
    double& at(int i, int j) { return a_[static_cast<std::size_t>(i) * d_ + j]; }
    double at(int i, int j) const { return a_[static_cast<std::size_t>(i) * d_ + j]; }
    bool is_zero(double tol = 0.0) const;
    double min_eigenvalue() const;  // Jacobi sweep
    /// Lower-triangular factor L with L L^T = A (PSD input; small negative
    /// eigenvalues within tol are clamped).
    SymMatrix cholesky(double tol = 1e-12) const;
    SymMatrix scaled(double s) const;
    SymMatrix plus(const SymMatrix& o) const;
    const std::vector<double>& data() const { return a_; }

private:
    int d_ = 0;
    std::vector<double> a_;
};

/// Exponent records attached by the L-infinity constructor; carried through
/// inversion only.
struct StableExponent {
    double beta;
    double mass;
};

/// Levy-Khintchine triplet. Stored gamma is always in the cut1
/// representation; `repr` records the representation requested for display,
/// and convert_gamma produces the re-expressed gamma.
struct Triplet {
    SymMatrix gaussian;
    LevyMeasure levy;
    std::vector<double> gamma;
    GammaRepresentation repr = GammaRepresentation::cut1;
    std::vector<StableExponent> stable_exponents;  // metadata, may be empty

    int dimension() const { return levy.dimension; }
    bool is_id0(double tol = 1e-12) const { return gaussian.is_zero(tol); }
};

/// Builds a triplet, converting gamma from `repr` into cut1 on the spot.
Triplet make_triplet(SymMatrix a, LevyMeasure nu, std::vector<double> gamma,
                     GammaRepresentation repr = GammaRepresentation::cut1);

/// d=1 compound Poisson helper: nu = mass * delta_{r} on the positive ray,
/// gamma in cut1.
Triplet poisson_triplet(double mass, double gamma_cut1 = 0.0, double r = 1.0);
/// d-dimensional point mass delta_c (nu = 0, A = 0).
Triplet dirac_triplet(std::vector<double> c);

// ---------------------------------------------------------------------------
// integration against the measure

enum class Region { inner, outer, sphere, all };

/// Scalar- or vector-valued radial integrand phi(r xi) with declared
/// asymptotics |phi(r xi)| ~ r^power (log r)^log_power at each end.
/// exact_power means the power law holds exactly with a nonzero coefficient
/// on each ray (true for |x|^a and for x), so critical-exponent equalities
/// against exact power-law tails are decidable.
struct RadialIntegrand {
    std::function<void(const Direction&, double, std::span<double>)> eval;
    int arity = 1;
    double power0 = 0.0;
    double log_power0 = 0.0;
    double powerinf = 0.0;
    double log_powerinf = 0.0;
    bool exact_power = true;
};

RadialIntegrand abs_power_integrand(double alpha);       // |x|^alpha
RadialIntegrand abs_power_log_integrand(double alpha, double log_pow, bool at_zero);
RadialIntegrand vector_integrand(int d);                 // x itself

enum class IntegralKind { finite, infinite, inconclusive };

struct LevyIntegral {
    IntegralKind kind = IntegralKind::finite;
    std::vector<double> value;  // arity entries; unset unless finite
    double abs_error = 0.0;

    double scalar() const { return value.empty() ? 0.0 : value[0]; }
};

/// Integrates phi over the region against nu. Estimated absolute error is
/// kept below max(1e-10, 1e-8 |value|); divergence is decided by tail-index
/// comparison, never by quadrature blow-up.
LevyIntegral levy_integral(const LevyMeasure& nu, const RadialIntegrand& phi,
                           Region region = Region::all);

/// Same over the radial window (lo, hi]; used for gamma corrections.
LevyIntegral levy_integral_window(const LevyMeasure& nu, const RadialIntegrand& phi, double lo,
                                  double hi, bool include_lo = false, bool include_hi = true);

// ---------------------------------------------------------------------------
// operations

struct ValidationReport {
    bool ok = true;
    struct Component {
        std::size_t index = 0;
        IntegralKind kind = IntegralKind::finite;
        double square_one_integral = 0.0;  // component contribution to int (r^2 ^ 1)
    };
    std::vector<Component> components;
    std::vector<std::string> problems;
};

ValidationReport validate_measure(const LevyMeasure& nu);

enum class WeakMeanStatus { exists, exists_absolutely, none, inconclusive };

struct MomentReport {
    bool has_drift = false;
    std::optional<std::vector<double>> drift;
    bool has_mean = false;
    std::optional<std::vector<double>> mean;
    struct WeakMean {
        std::vector<double> value;
        WeakMeanStatus status = WeakMeanStatus::inconclusive;
    } weak_mean;
    struct FractionalMoment {
        double alpha;
        Region region;
        IntegralKind kind;
        double value;
    };
    std::vector<FractionalMoment> fractional_moments;
};

MomentReport moment_report(const Triplet& t, std::span<const double> fractional_alphas = {});

Triplet convert_gamma(const Triplet& t, GammaRepresentation target);
Triplet dilate(const Triplet& t, double b);
Triplet convolve(const Triplet& t1, const Triplet& t2);
Triplet power(const Triplet& t, double s);
std::pair<Triplet, Triplet> split_gaussian(const Triplet& t);

/// Total density of nu at x = r*xi, summing every component on that
/// direction (within tol on the direction match). Atoms excluded.
double ray_density(const LevyMeasure& nu, const Direction& xi, double r);
/// Mass nu assigns to the annulus {x = u xi' : xi' == xi, lo < u <= hi}.
double ray_annulus_mass(const LevyMeasure& nu, const Direction& xi, double lo, double hi);
/// All distinct directions appearing in nu.
std::vector<Direction> ray_directions(const LevyMeasure& nu);

}  // namespace levyconj
