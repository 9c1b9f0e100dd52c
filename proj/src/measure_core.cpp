#include "levyconj/measure_core.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <numeric>
#include <sstream>

namespace levyconj {

namespace {

constexpr double kSphereTol = 1e-12;  // |r - 1| window counting as the unit sphere

double sq(double x) { return x * x; }

/// Upper incomplete gamma Gamma(a, x), a > 0, x >= 0.
double upper_gamma(double a, double x) {
    if (x < 0.0) throw std::invalid_argument("upper_gamma: x < 0");
    if (x == 0.0) return gamma_fn(a);
    if (x < a + 1.0) {
        // lower series, then complement
        double sum = 1.0 / a, term = sum;
        for (int n = 1; n < 500; ++n) {
            term *= x / (a + n);
            sum += term;
            if (std::abs(term) < 1e-17 * std::abs(sum)) break;
        }
        const double lower = sum * std::exp(-x + a * std::log(x));
        return gamma_fn(a) - lower;
    }
    // continued fraction (Lentz)
    double b = x + 1.0 - a, c = 1e300, d = 1.0 / b, h = d;
    for (int i = 1; i < 500; ++i) {
        const double an = -i * (i - a);
        b += 2.0;
        d = an * d + b;
        if (std::abs(d) < 1e-300) d = 1e-300;
        c = b + an / c;
        if (std::abs(c) < 1e-300) c = 1e-300;
        d = 1.0 / d;
        const double del = d * c;
        h *= del;
        if (std::abs(del - 1.0) < 1e-16) break;
    }
    return std::exp(-x + a * std::log(x)) * h;
}

}  // namespace

// ---------------------------------------------------------------------------
// radial densities

double density_value(const RadialDensity& d, double r) {
    if (r <= 0.0) return 0.0;
    if (std::holds_alternative<std::monostate>(d)) return 0.0;
    if (const auto* p = std::get_if<PowerLawDensity>(&d)) {
        if (r < p->r_lo || r > p->r_hi) return 0.0;
        return p->coeff * std::pow(r, -p->beta - 1.0);
    }
    if (const auto* a = std::get_if<AnalyticDensity>(&d)) {
        if (r < a->r_lo || r > a->r_hi) return 0.0;
        return a->eval(r);
    }
    const auto& g = std::get<GridDensity>(d);
    if (r < g.r_lo || r > g.r_hi) return 0.0;
    if (g.exact) return std::max(0.0, (*g.exact)(r));
    if (g.log_nodes.empty()) return 0.0;
    const double t = std::log(r);
    if (t <= g.log_nodes.front())
        return g.values.front() * std::exp(g.ext_lo * (t - g.log_nodes.front()));
    if (t >= g.log_nodes.back())
        return g.values.back() * std::exp(g.ext_hi * (t - g.log_nodes.back()));
    const auto it = std::upper_bound(g.log_nodes.begin(), g.log_nodes.end(), t);
    const std::size_t i = static_cast<std::size_t>(it - g.log_nodes.begin()) - 1;
    const double t0 = g.log_nodes[i], t1 = g.log_nodes[i + 1];
    const double w = (t - t0) / (t1 - t0);
    const double v0 = g.values[i], v1 = g.values[i + 1];
    if (v0 > 0.0 && v1 > 0.0) return std::exp((1.0 - w) * std::log(v0) + w * std::log(v1));
    return (1.0 - w) * v0 + w * v1;
}

bool has_density(const RadialDensity& d) { return !std::holds_alternative<std::monostate>(d); }

std::pair<double, double> density_support(const RadialDensity& d) {
    if (const auto* p = std::get_if<PowerLawDensity>(&d)) return {p->r_lo, p->r_hi};
    if (const auto* a = std::get_if<AnalyticDensity>(&d)) return {a->r_lo, a->r_hi};
    if (const auto* g = std::get_if<GridDensity>(&d)) return {g->r_lo, g->r_hi};
    return {0.0, 0.0};
}

TailInfo tail_at_zero(const RadialDensity& d) {
    TailInfo t;
    if (const auto* p = std::get_if<PowerLawDensity>(&d)) {
        if (p->r_lo == 0.0) t = {true, p->beta, p->coeff, true};
        return t;
    }
    if (const auto* a = std::get_if<AnalyticDensity>(&d)) {
        if (a->r_lo == 0.0) {
            const double probe = std::min(1e-4, (a->r_hi < kInf ? a->r_hi : 1.0) * 1e-4);
            const double c = a->eval(probe) * std::pow(probe, a->theta0 + 1.0);
            t = {true, a->theta0, std::max(c, 0.0), false};
        }
        return t;
    }
    if (const auto* g = std::get_if<GridDensity>(&d)) {
        if (g->r_lo == 0.0 && !g->log_nodes.empty()) {
            const double idx = -g->ext_lo - 1.0;
            const double c = g->values.front() * std::exp(-g->ext_lo * g->log_nodes.front());
            t = {true, idx, c, !g->exact};
        }
        return t;
    }
    return t;
}

TailInfo tail_at_infinity(const RadialDensity& d) {
    TailInfo t;
    if (const auto* p = std::get_if<PowerLawDensity>(&d)) {
        if (p->r_hi == kInf) t = {true, p->beta, p->coeff, true};
        return t;
    }
    if (const auto* a = std::get_if<AnalyticDensity>(&d)) {
        if (a->r_hi == kInf) {
            double c = 0.0;
            if (a->thetainf < kInf) {
                const double probe = std::max(1e4, (a->r_lo > 0.0 ? a->r_lo : 1.0) * 1e4);
                c = a->eval(probe) * std::pow(probe, a->thetainf + 1.0);
            }
            t = {true, a->thetainf, std::max(c, 0.0), false};
        }
        return t;
    }
    if (const auto* g = std::get_if<GridDensity>(&d)) {
        if (g->r_hi == kInf && !g->log_nodes.empty()) {
            const double idx = -g->ext_hi - 1.0;
            const double c = g->values.back() * std::exp(-g->ext_hi * g->log_nodes.back());
            t = {true, idx, c, !g->exact};
        }
        return t;
    }
    return t;
}

// ---------------------------------------------------------------------------
// measure basics

Direction::Direction(std::vector<double> xi) : xi_(std::move(xi)) {
    if (xi_.empty()) throw std::invalid_argument("Direction: empty vector");
    double n2 = 0.0;
    for (double c : xi_) n2 += c * c;
    if (std::abs(std::sqrt(n2) - 1.0) > 1e-12)
        throw std::invalid_argument("Direction: not a unit vector");
}

LevyMeasure merge_atoms(const LevyMeasure& nu) {
    LevyMeasure out = nu;
    // merge duplicate radii within each component, then across components
    // sharing a direction
    for (auto& comp : out.components) {
        std::map<double, double> massed;
        for (const auto& a : comp.radial.atoms) massed[a.r] += a.mass;
        comp.radial.atoms.clear();
        for (const auto& [r, m] : massed) comp.radial.atoms.push_back({r, m});
    }
    for (std::size_t i = 0; i < out.components.size(); ++i) {
        for (std::size_t j = i + 1; j < out.components.size(); ++j) {
            auto& a = out.components[i];
            auto& b = out.components[j];
            if (!(a.xi == b.xi)) continue;
            // move atoms of b colliding with atoms of a into a
            for (auto& atom_a : a.radial.atoms) {
                auto it = std::find_if(b.radial.atoms.begin(), b.radial.atoms.end(),
                                       [&](const RadialAtom& x) { return x.r == atom_a.r; });
                if (it != b.radial.atoms.end()) {
                    atom_a.mass += it->mass * b.weight / a.weight;
                    b.radial.atoms.erase(it);
                }
            }
        }
    }
    std::erase_if(out.components, [](const LevyComponent& c) {
        return c.radial.atoms.empty() && !has_density(c.radial.density);
    });
    return out;
}

std::string to_string(GammaRepresentation r) {
    switch (r) {
        case GammaRepresentation::cut1: return "cut1";
        case GammaRepresentation::cut1_sharp: return "cut1_sharp";
        case GammaRepresentation::cut1_open: return "cut1_open";
        case GammaRepresentation::cut1_half: return "cut1_half";
        case GammaRepresentation::rr: return "rr";
        case GammaRepresentation::drift: return "drift";
        case GammaRepresentation::mean: return "mean";
    }
    return "?";
}

SymMatrix SymMatrix::identity(int d) {
    SymMatrix m(d);
    for (int i = 0; i < d; ++i) m.at(i, i) = 1.0;
    return m;
}

bool SymMatrix::is_zero(double tol) const {
    for (double v : a_)
        if (std::abs(v) > tol) return false;
    return true;
}

double SymMatrix::min_eigenvalue() const {
    if (d_ == 0) return 0.0;
    // Jacobi rotations on a copy
    std::vector<double> m = a_;
    auto at2 = [&](int i, int j) -> double& { return m[static_cast<std::size_t>(i) * d_ + j]; };
    for (int sweep = 0; sweep < 64; ++sweep) {
        double off = 0.0;
        for (int i = 0; i < d_; ++i)
            for (int j = i + 1; j < d_; ++j) off += sq(at2(i, j));
        if (off < 1e-30) break;
        for (int p = 0; p < d_; ++p) {
            for (int q = p + 1; q < d_; ++q) {
                if (std::abs(at2(p, q)) < 1e-300) continue;
                const double theta = 0.5 * (at2(q, q) - at2(p, p)) / at2(p, q);
                const double sgn = theta >= 0.0 ? 1.0 : -1.0;
                const double t = sgn / (std::abs(theta) + std::sqrt(theta * theta + 1.0));
                const double c = 1.0 / std::sqrt(t * t + 1.0), s = t * c;
                for (int k = 0; k < d_; ++k) {
                    const double mkp = at2(k, p), mkq = at2(k, q);
                    at2(k, p) = c * mkp - s * mkq;
                    at2(k, q) = s * mkp + c * mkq;
                }
                for (int k = 0; k < d_; ++k) {
                    const double mpk = at2(p, k), mqk = at2(q, k);
                    at2(p, k) = c * mpk - s * mqk;
                    at2(q, k) = s * mpk + c * mqk;
                }
            }
        }
    }
    double mn = at2(0, 0);
    for (int i = 1; i < d_; ++i) mn = std::min(mn, at2(i, i));
    return mn;
}

SymMatrix SymMatrix::cholesky(double tol) const {
    SymMatrix L(d_);
    for (int i = 0; i < d_; ++i) {
        for (int j = 0; j <= i; ++j) {
            double s = at(i, j);
            for (int k = 0; k < j; ++k) s -= L.at(i, k) * L.at(j, k);
            if (i == j) {
                if (s < -tol) throw NumericError("cholesky: matrix not PSD");
                L.at(i, i) = std::sqrt(std::max(s, 0.0));
            } else {
                L.at(i, j) = L.at(j, j) > 0.0 ? s / L.at(j, j) : 0.0;
            }
        }
    }
    return L;
}

SymMatrix SymMatrix::scaled(double s) const {
    SymMatrix m = *this;
    for (double& v : m.a_) v *= s;
    return m;
}

SymMatrix SymMatrix::plus(const SymMatrix& o) const {
    if (o.d_ != d_) throw std::invalid_argument("SymMatrix::plus: dimension mismatch");
    SymMatrix m = *this;
    for (std::size_t i = 0; i < a_.size(); ++i) m.a_[i] += o.a_[i];
    return m;
}

// ---------------------------------------------------------------------------
// integrands

RadialIntegrand abs_power_integrand(double alpha) {
    RadialIntegrand phi;
    phi.eval = [alpha](const Direction&, double r, std::span<double> out) {
        out[0] = std::pow(r, alpha);
    };
    phi.arity = 1;
    phi.power0 = alpha;
    phi.powerinf = alpha;
    phi.exact_power = true;
    return phi;
}

RadialIntegrand abs_power_log_integrand(double alpha, double log_pow, bool at_zero) {
    RadialIntegrand phi;
    phi.eval = [alpha, log_pow, at_zero](const Direction&, double r, std::span<double> out) {
        const double lg = at_zero ? -std::log(r) : std::log(r);
        out[0] = std::pow(r, alpha) * std::pow(std::max(lg, 0.0), log_pow);
    };
    phi.arity = 1;
    phi.power0 = alpha;
    phi.powerinf = alpha;
    if (at_zero)
        phi.log_power0 = log_pow;
    else
        phi.log_powerinf = log_pow;
    phi.exact_power = true;
    return phi;
}

RadialIntegrand vector_integrand(int d) {
    RadialIntegrand phi;
    phi.eval = [](const Direction& xi, double r, std::span<double> out) {
        for (std::size_t k = 0; k < out.size(); ++k) out[k] = r * xi[k];
    };
    phi.arity = d;
    phi.power0 = 1.0;
    phi.powerinf = 1.0;
    phi.exact_power = true;
    return phi;
}

// ---------------------------------------------------------------------------
// the radial integration engine

namespace {

struct Window {
    double lo = 0.0, hi = kInf;
    bool include_lo = false, include_hi = true;
};

// Convergence of int r^{s-1} (|log r|)^l dr at an improper end.
// exact: tail is an exact power law, so equality is decidable.
IntegralKind end_kind(double s, double l, bool exact) {
    if (s > 0.0) return IntegralKind::finite;
    if (s < 0.0) return IntegralKind::infinite;
    if (!exact) return IntegralKind::inconclusive;
    return l < -1.0 ? IntegralKind::finite : IntegralKind::infinite;
}

// int_0^delta r^{s-1} (-log r)^l dr for s > 0, delta < 1 (or the mirrored
// integral at infinity with the same formula under r -> 1/r).
double power_log_remainder(double s, double l, double delta) {
    const double L = -std::log(delta);
    if (l == 0.0) return std::exp(-s * L) / s;
    return upper_gamma(l + 1.0, s * L) / std::pow(s, l + 1.0);
}

struct PieceResult {
    IntegralKind kind = IntegralKind::finite;
    double value = 0.0;
    double abs_error = 0.0;
};

// Integrate f(r) (already including the density factor) over [lo, hi] on a
// log scale, 0 < lo < hi < inf.
PieceResult quad_log(const std::function<double(double)>& f, double lo, double hi, double abs_tol,
                     std::span<const double> breakpoints = {}) {
    PieceResult out;
    if (!(lo < hi)) return out;
    std::vector<double> bp;
    for (double b : breakpoints)
        if (b > lo && b < hi) bp.push_back(std::log(b));
    auto e = integrate([&](double t) { return f(std::exp(t)) * std::exp(t); }, std::log(lo),
                       std::log(hi), abs_tol, 1e-10, 100000, bp);
    out.value = e.value;
    out.abs_error = e.abs_error;
    if (!e.converged) out.kind = IntegralKind::inconclusive;
    return out;
}

// One scalar radial integral of phi_k against the density part of `part`
// over the window. The asymptotic descriptors refer to |phi| on this ray.
PieceResult density_window_integral(const RadialDensity& density,
                                    const std::function<double(double)>& phi_times_density,
                                    const RadialIntegrand& spec, double wlo, double whi,
                                    double abs_tol) {
    PieceResult out;
    if (!has_density(density)) return out;
    auto [slo, shi] = density_support(density);
    double lo = std::max(wlo, slo), hi = std::min(whi, shi);
    if (!(lo < hi)) return out;

    double cut_lo = lo, cut_hi = hi;
    double tail_value = 0.0, tail_error = 0.0;

    if (lo == 0.0) {
        const TailInfo t = tail_at_zero(density);
        const double s = spec.power0 - t.index;  // integrand ~ r^{s-1} (log)^l
        const IntegralKind k = end_kind(s, spec.log_power0, t.exact && spec.exact_power);
        if (k != IntegralKind::finite) {
            out.kind = k;
            return out;
        }
        // remainder closure below delta
        double delta = std::min({0.5, hi * 0.5, 1e-3});
        for (int iter = 0; iter < 60; ++iter) {
            const double coeff =
                t.exact ? t.coeff
                        : density_value(density, delta) * std::pow(delta, t.index + 1.0);
            const double rem = coeff * power_log_remainder(s, spec.log_power0, delta);
            if (t.exact) {
                tail_value = rem;
                tail_error = 0.0;  // closed form on an exact power tail
                break;
            }
            if (rem < 0.25 * abs_tol || delta < 1e-280) {
                tail_value = rem;  // estimate; bounded by tolerance
                tail_error = rem;
                break;
            }
            delta = std::min(delta * delta, delta * 1e-4);
        }
        cut_lo = delta;
    }
    if (hi == kInf) {
        const TailInfo t = tail_at_infinity(density);
        const double s = t.index - spec.powerinf;
        const IntegralKind k = end_kind(s, spec.log_powerinf, t.exact && spec.exact_power);
        if (k != IntegralKind::finite) {
            out.kind = k;
            return out;
        }
        if (t.index == kInf) {
            // super-polynomial decay: expand until the integrand is negligible
            double R = std::max({2.0, cut_lo * 2.0, slo * 2.0, 1.0});
            while (R < 1e300 && std::abs(phi_times_density(R)) * R > 0.01 * abs_tol) R *= 2.0;
            cut_hi = R;
        } else {
            double R = std::max({2.0, cut_lo * 2.0, 10.0});
            double rem = 0.0, coeff = 0.0;
            for (int iter = 0; iter < 200; ++iter) {
                coeff = t.exact ? t.coeff : density_value(density, R) * std::pow(R, t.index + 1.0);
                rem = coeff * power_log_remainder(s, spec.log_powerinf, 1.0 / R);
                if (t.exact || rem < 0.25 * abs_tol || R > 1e280) break;
                R *= 16.0;
            }
            tail_value += rem;
            tail_error += t.exact ? 0.0 : rem;
            cut_hi = R;
        }
    }
    PieceResult mid = quad_log(phi_times_density, cut_lo, std::min(cut_hi, hi), abs_tol);
    if (mid.kind != IntegralKind::finite) return mid;
    out.value = mid.value + tail_value;
    out.abs_error = mid.abs_error + tail_error;
    return out;
}

LevyIntegral integrate_window(const LevyMeasure& nu, const RadialIntegrand& phi,
                              const Window& win) {
    LevyIntegral out;
    out.value.assign(static_cast<std::size_t>(phi.arity), 0.0);
    const double abs_tol = 1e-11;
    std::vector<double> buf(static_cast<std::size_t>(phi.arity));
    bool any_inconclusive = false;
    for (const auto& comp : nu.components) {
        // atoms
        for (const auto& atom : comp.radial.atoms) {
            const bool in = (atom.r > win.lo || (win.include_lo && atom.r == win.lo)) &&
                            (atom.r < win.hi || (win.include_hi && atom.r == win.hi));
            if (!in) continue;
            phi.eval(comp.xi, atom.r, buf);
            for (int k = 0; k < phi.arity; ++k)
                out.value[static_cast<std::size_t>(k)] += comp.weight * atom.mass * buf[k];
        }
        // density
        if (!has_density(comp.radial.density)) continue;
        for (int k = 0; k < phi.arity; ++k) {
            auto f = [&](double r) {
                phi.eval(comp.xi, r, buf);
                return buf[static_cast<std::size_t>(k)] *
                       density_value(comp.radial.density, r);
            };
            PieceResult pr = density_window_integral(comp.radial.density, f, phi, win.lo, win.hi,
                                                     abs_tol);
            if (pr.kind == IntegralKind::infinite) {
                out.kind = IntegralKind::infinite;
                out.value.clear();
                return out;
            }
            if (pr.kind == IntegralKind::inconclusive) {
                any_inconclusive = true;
                continue;
            }
            out.value[static_cast<std::size_t>(k)] += comp.weight * pr.value;
            out.abs_error += comp.weight * pr.abs_error;
        }
    }
    if (any_inconclusive) {
        out.kind = IntegralKind::inconclusive;
        out.value.clear();
    }
    return out;
}

}  // namespace

LevyIntegral levy_integral(const LevyMeasure& nu, const RadialIntegrand& phi, Region region) {
    Window w;
    switch (region) {
        case Region::inner: w = {0.0, 1.0, false, true}; break;
        case Region::outer: w = {1.0, kInf, false, true}; break;
        case Region::all: w = {0.0, kInf, false, true}; break;
        case Region::sphere: {
            // atoms at radius 1 only; densities contribute zero mass there
            LevyIntegral out;
            out.value.assign(static_cast<std::size_t>(phi.arity), 0.0);
            std::vector<double> buf(static_cast<std::size_t>(phi.arity));
            for (const auto& comp : nu.components)
                for (const auto& atom : comp.radial.atoms)
                    if (std::abs(atom.r - 1.0) <= kSphereTol) {
                        phi.eval(comp.xi, atom.r, buf);
                        for (int k = 0; k < phi.arity; ++k)
                            out.value[static_cast<std::size_t>(k)] +=
                                comp.weight * atom.mass * buf[k];
                    }
            return out;
        }
    }
    return integrate_window(nu, phi, w);
}

LevyIntegral levy_integral_window(const LevyMeasure& nu, const RadialIntegrand& phi, double lo,
                                  double hi, bool include_lo, bool include_hi) {
    return integrate_window(nu, phi, Window{lo, hi, include_lo, include_hi});
}

// ---------------------------------------------------------------------------
// validation

ValidationReport validate_measure(const LevyMeasure& nu) {
    ValidationReport rep;
    for (std::size_t i = 0; i < nu.components.size(); ++i) {
        const auto& comp = nu.components[i];
        auto problem = [&](const std::string& what) {
            rep.ok = false;
            std::ostringstream os;
            os << "component " << i << ": " << what;
            rep.problems.push_back(os.str());
        };
        if (comp.xi.dimension() != nu.dimension) problem("direction dimension mismatch");
        if (!(comp.weight > 0.0)) problem("weight <= 0");
        std::vector<double> radii;
        for (const auto& a : comp.radial.atoms) {
            if (!(a.r > 0.0)) problem("atom radius <= 0");
            if (!(a.mass > 0.0)) problem("atom mass <= 0");
            radii.push_back(a.r);
        }
        std::sort(radii.begin(), radii.end());
        if (std::adjacent_find(radii.begin(), radii.end()) != radii.end())
            problem("duplicate atom radii");
        if (const auto* p = std::get_if<PowerLawDensity>(&comp.radial.density)) {
            if (!(p->coeff > 0.0)) problem("power-law coefficient <= 0");
            if (!(p->r_lo >= 0.0) || !(p->r_hi > p->r_lo)) problem("bad power-law support");
        }
        // nonnegativity probes for analytic / grid densities
        auto [slo, shi] = density_support(comp.radial.density);
        if (has_density(comp.radial.density) && shi > slo) {
            const double plo = std::max(slo, shi < kInf ? shi * 1e-6 : 1e-6);
            const double phi_r = shi < kInf ? shi : std::max(1e6, plo * 1e6);
            for (int k = 0; k <= 64; ++k) {
                const double r =
                    plo * std::pow(phi_r / plo, static_cast<double>(k) / 64.0);
                if (density_value(comp.radial.density, r) < 0.0) {
                    problem("negative density at probe radius " + std::to_string(r));
                    break;
                }
            }
        }

        ValidationReport::Component c;
        c.index = i;
        LevyMeasure single{nu.dimension, {comp}};
        RadialIntegrand sq1;
        sq1.eval = [](const Direction&, double r, std::span<double> out) {
            out[0] = std::min(r * r, 1.0);
        };
        sq1.arity = 1;
        sq1.power0 = 2.0;
        sq1.powerinf = 0.0;
        sq1.exact_power = true;
        LevyIntegral li = levy_integral(single, sq1, Region::all);
        c.kind = li.kind;
        if (li.kind == IntegralKind::finite) {
            c.square_one_integral = li.scalar();
        } else {
            rep.ok = false;
            rep.problems.push_back("component " + std::to_string(i) +
                                   (li.kind == IntegralKind::infinite
                                        ? ": int (r^2 ^ 1) diverges"
                                        : ": int (r^2 ^ 1) inconclusive"));
        }
        rep.components.push_back(c);
    }
    return rep;
}

// ---------------------------------------------------------------------------
// gamma representation corrections

namespace {

// gamma_repr = gamma_cut1 + correction(repr)
std::vector<double> repr_correction(const LevyMeasure& nu, GammaRepresentation repr) {
    const int d = nu.dimension;
    std::vector<double> corr(static_cast<std::size_t>(d), 0.0);
    auto add = [&](const LevyIntegral& li, double scale, const char* name) {
        if (li.kind == IntegralKind::infinite)
            throw RepresentationError(std::string("representation unavailable: ") + name +
                                      " diverges");
        if (li.kind == IntegralKind::inconclusive)
            throw RepresentationError(std::string("representation unavailable: ") + name +
                                      " inconclusive");
        for (int k = 0; k < d; ++k) corr[static_cast<std::size_t>(k)] += scale * li.value[k];
    };
    switch (repr) {
        case GammaRepresentation::cut1: break;
        case GammaRepresentation::cut1_sharp: {
            RadialIntegrand inner;
            inner.eval = [](const Direction& xi, double r, std::span<double> out) {
                for (std::size_t k = 0; k < out.size(); ++k)
                    out[k] = (r * r / (1.0 + r * r)) * r * xi[k];
            };
            inner.arity = d;
            inner.power0 = 3.0;
            inner.powerinf = 1.0;
            add(levy_integral(nu, inner, Region::inner), -1.0, "inner x|x|^2/(1+|x|^2)");
            RadialIntegrand outer;
            outer.eval = [](const Direction& xi, double r, std::span<double> out) {
                for (std::size_t k = 0; k < out.size(); ++k) out[k] = r / (1.0 + r * r) * xi[k];
            };
            outer.arity = d;
            outer.power0 = 1.0;
            outer.powerinf = -1.0;
            add(levy_integral(nu, outer, Region::outer), 1.0, "outer x/(1+|x|^2)");
            break;
        }
        case GammaRepresentation::cut1_open:
            add(levy_integral(nu, vector_integrand(d), Region::sphere), -1.0, "sphere x");
            break;
        case GammaRepresentation::cut1_half:
            add(levy_integral(nu, vector_integrand(d), Region::sphere), -0.5, "sphere x");
            break;
        case GammaRepresentation::rr: {
            RadialIntegrand unit;
            unit.eval = [](const Direction& xi, double r, std::span<double> out) {
                (void)r;
                for (std::size_t k = 0; k < out.size(); ++k) out[k] = xi[k];
            };
            unit.arity = d;
            unit.power0 = 0.0;
            unit.powerinf = 0.0;
            add(levy_integral(nu, unit, Region::outer), 1.0, "outer x/|x|");
            break;
        }
        case GammaRepresentation::drift:
            add(levy_integral(nu, vector_integrand(d), Region::inner), -1.0, "inner |x| moment");
            break;
        case GammaRepresentation::mean:
            add(levy_integral(nu, vector_integrand(d), Region::outer), 1.0, "outer |x| moment");
            break;
    }
    return corr;
}

}  // namespace

Triplet make_triplet(SymMatrix a, LevyMeasure nu, std::vector<double> gamma,
                     GammaRepresentation repr) {
    const int d = nu.dimension;
    if (a.dim() == 0) a = SymMatrix::zero(d);
    if (a.dim() != d) throw std::invalid_argument("make_triplet: Gaussian dimension mismatch");
    if (gamma.size() != static_cast<std::size_t>(d))
        throw std::invalid_argument("make_triplet: gamma dimension mismatch");
    if (a.min_eigenvalue() < -1e-12) throw std::invalid_argument("make_triplet: A not PSD");
    Triplet t;
    t.gaussian = std::move(a);
    t.levy = std::move(nu);
    if (repr != GammaRepresentation::cut1) {
        const auto corr = repr_correction(t.levy, repr);
        for (int k = 0; k < d; ++k) gamma[static_cast<std::size_t>(k)] -= corr[k];
    }
    t.gamma = std::move(gamma);
    t.repr = GammaRepresentation::cut1;
    return t;
}

Triplet poisson_triplet(double mass, double gamma_cut1, double r) {
    LevyMeasure nu{1, {LevyComponent{Direction({1.0}), 1.0, RadialPart{{{r, mass}}, {}}}}};
    return make_triplet(SymMatrix::zero(1), std::move(nu), {gamma_cut1});
}

Triplet dirac_triplet(std::vector<double> c) {
    const int d = static_cast<int>(c.size());
    return make_triplet(SymMatrix::zero(d), LevyMeasure::zero(d), std::move(c));
}

Triplet convert_gamma(const Triplet& t, GammaRepresentation target) {
    Triplet out = t;
    const auto corr = repr_correction(t.levy, target);
    for (std::size_t k = 0; k < out.gamma.size(); ++k) out.gamma[k] = t.gamma[k] + corr[k];
    out.repr = target;
    return out;
}

// ---------------------------------------------------------------------------
// moments

MomentReport moment_report(const Triplet& t, std::span<const double> fractional_alphas) {
    MomentReport rep;
    const int d = t.dimension();
    const LevyMeasure& nu = t.levy;

    LevyIntegral inner_abs = levy_integral(nu, abs_power_integrand(1.0), Region::inner);
    if (inner_abs.kind == IntegralKind::finite) {
        rep.has_drift = true;
        LevyIntegral ix = levy_integral(nu, vector_integrand(d), Region::inner);
        std::vector<double> dr(t.gamma);
        for (int k = 0; k < d; ++k) dr[static_cast<std::size_t>(k)] -= ix.value[k];
        rep.drift = dr;
    }
    LevyIntegral outer_abs = levy_integral(nu, abs_power_integrand(1.0), Region::outer);
    if (outer_abs.kind == IntegralKind::finite) {
        rep.has_mean = true;
        LevyIntegral ox = levy_integral(nu, vector_integrand(d), Region::outer);
        std::vector<double> mn(t.gamma);
        for (int k = 0; k < d; ++k) mn[static_cast<std::size_t>(k)] += ox.value[k];
        rep.mean = mn;
    }

    // weak mean: gamma + lim_a int_{1<|x|<=a} x nu
    if (rep.has_mean) {
        rep.weak_mean.value = *rep.mean;
        rep.weak_mean.status = WeakMeanStatus::exists_absolutely;
    } else {
        std::vector<std::vector<double>> partials;
        for (int k = 1; k <= 6; ++k) {
            LevyIntegral w =
                levy_integral_window(nu, vector_integrand(d), 1.0, std::pow(10.0, k));
            if (w.kind != IntegralKind::finite) {
                partials.clear();
                break;
            }
            std::vector<double> row(t.gamma);
            for (int c = 0; c < d; ++c) row[static_cast<std::size_t>(c)] += w.value[c];
            partials.push_back(row);
        }
        if (partials.empty()) {
            rep.weak_mean.status = WeakMeanStatus::none;
        } else {
            VectorLimitResult lr = classify_limit_vec(partials, /*use_aitken=*/false, 1e-8);
            switch (lr.status) {
                case LimitStatus::converged: {
                    rep.weak_mean.value = lr.value;
                    rep.weak_mean.status = WeakMeanStatus::exists;
                    // absolute refinement: int_1^inf r |sum_i w_i xi_i l_i(r)| dr
                    double theta_min = kInf;
                    for (const auto& comp : nu.components) {
                        TailInfo ti = tail_at_infinity(comp.radial.density);
                        if (ti.touches) theta_min = std::min(theta_min, ti.index);
                    }
                    if (theta_min > 1.0) {
                        rep.weak_mean.status = WeakMeanStatus::exists_absolutely;
                    } else {
                        std::vector<double> abs_partials;
                        auto vnorm = [&](double r) {
                            double s2 = 0.0;
                            for (int c = 0; c < d; ++c) {
                                double acc = 0.0;
                                for (const auto& comp : nu.components)
                                    acc += comp.weight * comp.xi[static_cast<std::size_t>(c)] *
                                           density_value(comp.radial.density, r);
                                s2 += acc * acc;
                            }
                            return r * std::sqrt(s2);
                        };
                        bool ok = true;
                        for (int k = 1; k <= 6 && ok; ++k) {
                            auto e = integrate([&](double u) { return vnorm(std::exp(u)) *
                                                                     std::exp(u); },
                                               0.0, k * std::log(10.0), 1e-11, 1e-9);
                            ok = e.converged;
                            abs_partials.push_back(e.value);
                        }
                        if (ok) {
                            LimitResult ar = classify_limit(abs_partials, /*use_aitken=*/true,
                                                            1e-8);
                            if (ar.status == LimitStatus::converged)
                                rep.weak_mean.status = WeakMeanStatus::exists_absolutely;
                        }
                    }
                    break;
                }
                case LimitStatus::diverging:
                    rep.weak_mean.status = WeakMeanStatus::none;
                    break;
                case LimitStatus::inconclusive:
                    rep.weak_mean.status = WeakMeanStatus::inconclusive;
                    break;
            }
        }
    }

    for (double alpha : fractional_alphas) {
        for (Region reg : {Region::inner, Region::outer}) {
            LevyIntegral li = levy_integral(nu, abs_power_integrand(alpha), reg);
            rep.fractional_moments.push_back(
                {alpha, reg, li.kind,
                 li.kind == IntegralKind::finite ? li.scalar() : kInf});
        }
    }
    return rep;
}

// ---------------------------------------------------------------------------
// dilation, convolution, powers

namespace {

RadialDensity dilate_density(const RadialDensity& den, double b) {
    if (std::holds_alternative<std::monostate>(den)) return den;
    if (const auto* p = std::get_if<PowerLawDensity>(&den)) {
        PowerLawDensity q = *p;
        q.coeff = p->coeff * std::pow(b, p->beta);
        q.r_lo = p->r_lo * b;
        q.r_hi = p->r_hi == kInf ? kInf : p->r_hi * b;
        return q;
    }
    if (const auto* a = std::get_if<AnalyticDensity>(&den)) {
        AnalyticDensity q = *a;
        auto base = a->eval;
        q.eval = [base, b](double u) { return base(u / b) / b; };
        q.r_lo = a->r_lo * b;
        q.r_hi = a->r_hi == kInf ? kInf : a->r_hi * b;
        q.expr.clear();
        return q;
    }
    const auto& g = std::get<GridDensity>(den);
    GridDensity q = g;
    const double lb = std::log(b);
    for (auto& t : q.log_nodes) t += lb;
    for (auto& v : q.values) v /= b;
    q.r_lo = g.r_lo * b;
    q.r_hi = g.r_hi == kInf ? kInf : g.r_hi * b;
    if (g.exact) {
        auto base = g.exact;
        q.exact = std::make_shared<const std::function<double(double)>>(
            [base, b](double u) { return (*base)(u / b) / b; });
    }
    return q;
}

}  // namespace

Triplet dilate(const Triplet& t, double b) {
    if (!(b > 0.0)) throw std::invalid_argument("dilate: b must be positive");
    if (b == 1.0) return t;
    Triplet out;
    out.gaussian = t.gaussian.scaled(b * b);
    out.levy.dimension = t.levy.dimension;
    for (const auto& comp : t.levy.components) {
        LevyComponent c{comp.xi, comp.weight, {}};
        for (const auto& a : comp.radial.atoms) c.radial.atoms.push_back({a.r * b, a.mass});
        c.radial.density = dilate_density(comp.radial.density, b);
        out.levy.components.push_back(std::move(c));
    }
    const int d = t.dimension();
    out.gamma.assign(static_cast<std::size_t>(d), 0.0);
    for (int k = 0; k < d; ++k) out.gamma[static_cast<std::size_t>(k)] = b * t.gamma[k];
    if (b > 1.0) {
        LevyIntegral w = levy_integral_window(t.levy, vector_integrand(d), 1.0 / b, 1.0);
        for (int k = 0; k < d; ++k) out.gamma[static_cast<std::size_t>(k)] -= b * w.value[k];
    } else {
        LevyIntegral w = levy_integral_window(t.levy, vector_integrand(d), 1.0, 1.0 / b);
        for (int k = 0; k < d; ++k) out.gamma[static_cast<std::size_t>(k)] += b * w.value[k];
    }
    out.repr = GammaRepresentation::cut1;
    out.stable_exponents = t.stable_exponents;
    return out;
}

Triplet convolve(const Triplet& t1, const Triplet& t2) {
    if (t1.dimension() != t2.dimension())
        throw std::invalid_argument("convolve: dimension mismatch");
    Triplet out;
    out.gaussian = t1.gaussian.plus(t2.gaussian);
    out.levy.dimension = t1.levy.dimension;
    out.levy.components = t1.levy.components;
    out.levy.components.insert(out.levy.components.end(), t2.levy.components.begin(),
                               t2.levy.components.end());
    out.levy = merge_atoms(out.levy);
    out.gamma = t1.gamma;
    for (std::size_t k = 0; k < out.gamma.size(); ++k) out.gamma[k] += t2.gamma[k];
    out.repr = GammaRepresentation::cut1;
    out.stable_exponents = t1.stable_exponents;
    out.stable_exponents.insert(out.stable_exponents.end(), t2.stable_exponents.begin(),
                                t2.stable_exponents.end());
    return out;
}

Triplet power(const Triplet& t, double s) {
    if (!(s >= 0.0)) throw std::invalid_argument("power: s must be >= 0");
    Triplet out;
    out.levy.dimension = t.levy.dimension;
    out.gaussian = t.gaussian.scaled(s);
    out.gamma = t.gamma;
    for (double& g : out.gamma) g *= s;
    if (s > 0.0) {
        out.levy.components = t.levy.components;
        for (auto& c : out.levy.components) c.weight *= s;
        out.stable_exponents = t.stable_exponents;
        for (auto& e : out.stable_exponents) e.mass *= s;
    }
    out.repr = GammaRepresentation::cut1;
    return out;
}

std::pair<Triplet, Triplet> split_gaussian(const Triplet& t) {
    const int d = t.dimension();
    Triplet gauss = make_triplet(t.gaussian, LevyMeasure::zero(d),
                                 std::vector<double>(static_cast<std::size_t>(d), 0.0));
    Triplet id0;
    id0.gaussian = SymMatrix::zero(d);
    id0.levy = t.levy;
    id0.gamma = t.gamma;
    id0.repr = GammaRepresentation::cut1;
    id0.stable_exponents = t.stable_exponents;
    return {gauss, id0};
}

// ---------------------------------------------------------------------------
// ray helpers

namespace {
bool same_direction(const Direction& a, const Direction& b) {
    if (a.dimension() != b.dimension()) return false;
    double d2 = 0.0;
    for (int k = 0; k < a.dimension(); ++k) d2 += sq(a[static_cast<std::size_t>(k)] -
                                                     b[static_cast<std::size_t>(k)]);
    return d2 < 1e-20;
}
}  // namespace

double ray_density(const LevyMeasure& nu, const Direction& xi, double r) {
    double v = 0.0;
    for (const auto& comp : nu.components)
        if (same_direction(comp.xi, xi)) v += comp.weight *
                                              density_value(comp.radial.density, r);
    return v;
}

double ray_annulus_mass(const LevyMeasure& nu, const Direction& xi, double lo, double hi) {
    double total = 0.0;
    for (const auto& comp : nu.components) {
        if (!same_direction(comp.xi, xi)) continue;
        for (const auto& a : comp.radial.atoms)
            if (a.r > lo && a.r <= hi) total += comp.weight * a.mass;
        if (!has_density(comp.radial.density)) continue;
        auto [slo, shi] = density_support(comp.radial.density);
        const double l = std::max(lo, slo), h = std::min(hi, shi);
        if (l < h) {
            auto pr = quad_log([&](double r) { return density_value(comp.radial.density, r); },
                               l, h, 1e-13);
            total += comp.weight * pr.value;
        }
    }
    return total;
}

std::vector<Direction> ray_directions(const LevyMeasure& nu) {
    std::vector<Direction> dirs;
    for (const auto& comp : nu.components) {
        bool seen = false;
        for (const auto& d : dirs)
            if (same_direction(d, comp.xi)) {
                seen = true;
                break;
            }
        if (!seen) dirs.push_back(comp.xi);
    }
    return dirs;
}

}  // namespace levyconj
