#include "levyconj/classes.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "levyconj/mapping.hpp"

namespace levyconj {

namespace {

// noise floor from second-difference statistics of a smoothed copy
double estimate_noise(std::span<const double> phi) {
    const std::size_t n = phi.size();
    double scale = 0.0;
    for (double v : phi) scale = std::max(scale, std::abs(v));
    if (n < 5) return 1e-13 * std::max(scale, 1.0);
    std::vector<double> resid;
    resid.reserve(n - 2);
    for (std::size_t i = 1; i + 1 < n; ++i) {
        const double smooth = (phi[i - 1] + phi[i] + phi[i + 1]) / 3.0;
        resid.push_back(std::abs(phi[i] - smooth));
    }
    std::nth_element(resid.begin(), resid.begin() + resid.size() / 2, resid.end());
    const double med = resid[resid.size() / 2];
    return std::max(1.4826 * med * 1e-3, 1e-13 * std::max(scale, 1.0));
}

// divided differences over consecutive windows; sign test with
// noise-propagated tolerances.  (-1)^n dd_n >= 0 is the monotone-of-order
// requirement at each order n (mean-value theorem on non-uniform nodes).
struct DDCheck {
    double worst = 0.0;     // worst normalized violation, in units of 10^n eps
    double location = 0.0;
    bool clear_violation = false;
    bool boundary = false;
};

DDCheck dd_sign_check(std::span<const double> u, std::span<const double> phi, int p,
                      double eps_grid) {
    DDCheck res;
    const std::size_t n = u.size();
    std::vector<double> cur(phi.begin(), phi.end());
    // dd of order m over window starting at i uses nodes u[i..i+m]
    for (int m = 1; m <= p; ++m) {
        std::vector<double> next(n - static_cast<std::size_t>(m));
        for (std::size_t i = 0; i + static_cast<std::size_t>(m) < n; ++i) {
            next[i] = (cur[i + 1] - cur[i]) / (u[i + static_cast<std::size_t>(m)] - u[i]);
        }
        cur = next;
        const double want_sign = (m % 2 == 0) ? 1.0 : -1.0;
        for (std::size_t i = 0; i < cur.size(); ++i) {
            // noise propagated into the divided difference
            double sens = 0.0;
            for (int kk = 0; kk <= m; ++kk) {
                double prod = 1.0;
                for (int j = 0; j <= m; ++j) {
                    if (j == kk) continue;
                    prod *= std::abs(u[i + static_cast<std::size_t>(kk)] -
                                     u[i + static_cast<std::size_t>(j)]);
                }
                sens += 1.0 / prod;
            }
            const double tol = std::pow(10.0, m) * eps_grid * sens;
            const double signed_dd = want_sign * cur[i];
            if (signed_dd < -tol) {
                const double norm_viol = -signed_dd / std::max(tol, 1e-300);
                if (norm_viol > res.worst) {
                    res.worst = norm_viol;
                    res.location = u[i + static_cast<std::size_t>(m) / 2];
                }
                if (norm_viol > 10.0) res.clear_violation = true;
                else res.boundary = true;
            }
        }
    }
    return res;
}

OrderTestResult run_monotone(std::span<const double> u, std::span<const double> phi, int p,
                             bool require_decay, double decay_probe_value, bool have_probe) {
    OrderTestResult out;
    const double eps = estimate_noise(phi);
    DDCheck dd = dd_sign_check(u, phi, p, eps);
    out.worst_violation = dd.worst;
    out.location = dd.location;
    if (dd.clear_violation) {
        out.verdict = -1;
        return out;
    }
    if (require_decay) {
        double scale = 0.0;
        for (double v : phi) scale = std::max(scale, std::abs(v));
        const double tail = have_probe ? decay_probe_value : phi.back();
        if (scale > 0.0) {
            if (tail > 0.05 * scale) {
                out.verdict = -1;
                out.note = "no decay at the far end";
                return out;
            }
            if (tail > std::max(1e-3 * scale, 10.0 * eps)) {
                out.verdict = 0;
                out.note = "decay probe boundary-tight";
                return out;
            }
        }
    }
    out.verdict = dd.boundary ? 0 : 1;
    return out;
}

}  // namespace

OrderTestResult order_test(std::span<const double> u, std::span<const double> phi, int p,
                           OrderMode mode, FunctionDomain dom, bool require_decay) {
    if (p < 1 || p > 8)
        throw std::invalid_argument("order_test: order must be an integer in 1..8");
    if (u.size() != phi.size() || u.size() < static_cast<std::size_t>(10 * p))
        throw std::invalid_argument("order_test: grid needs at least 10 p points");
    if (!std::is_sorted(u.begin(), u.end()))
        throw std::invalid_argument("order_test: grid must be sorted");

    if (mode == OrderMode::monotone)
        return run_monotone(u, phi, p, require_decay, 0.0, false);

    // increasing of order p: reflect (real line) or apply u^{p-1} phi(1/u)
    // (half-line) and test monotone; divided differences tolerate the
    // non-uniform transformed nodes.
    const std::size_t n = u.size();
    std::vector<double> tu(n), tphi(n);
    if (dom == FunctionDomain::real_line) {
        for (std::size_t i = 0; i < n; ++i) {
            tu[i] = -u[n - 1 - i];
            tphi[i] = phi[n - 1 - i];
        }
    } else {
        for (std::size_t i = 0; i < n; ++i) {
            const double v = 1.0 / u[n - 1 - i];
            tu[i] = v;
            tphi[i] = std::pow(v, p - 1.0) * phi[n - 1 - i];
        }
    }
    return run_monotone(tu, tphi, p, require_decay, 0.0, false);
}

OrderTestResult order_test(const std::function<double(double)>& phi, double lo, double hi, int n,
                           int p, OrderMode mode, FunctionDomain dom, bool require_decay) {
    if (p < 1 || p > 8)
        throw std::invalid_argument("order_test: order must be an integer in 1..8");
    if (n < 10 * p) throw std::invalid_argument("order_test: grid needs at least 10 p points");
    if (!(lo < hi)) throw std::invalid_argument("order_test: empty range");

    std::vector<double> u(static_cast<std::size_t>(n)), f(static_cast<std::size_t>(n));
    for (int i = 0; i < n; ++i) {
        u[static_cast<std::size_t>(i)] = lo + (hi - lo) * i / (n - 1.0);
        f[static_cast<std::size_t>(i)] = phi(u[static_cast<std::size_t>(i)]);
    }
    if (mode == OrderMode::monotone) {
        // decay probed beyond the grid through the evaluator
        double probe;
        if (dom == FunctionDomain::positive_half)
            probe = phi(std::max(hi * 100.0, hi + 100.0 * (hi - lo)));
        else
            probe = phi(hi + 10.0 * (hi - lo));
        return run_monotone(u, f, p, require_decay, probe, true);
    }
    // increasing: transform, then resample uniformly in the transformed
    // variable so the far-end decay probe is available
    if (dom == FunctionDomain::real_line) {
        auto tf = [&](double y) { return phi(-y); };
        return order_test(tf, -hi, -lo, n, p, OrderMode::monotone, dom, require_decay);
    }
    auto tf = [&](double v) { return std::pow(v, p - 1.0) * phi(1.0 / v); };
    return order_test(tf, 1.0 / hi, 1.0 / lo, n, p, OrderMode::monotone,
                      FunctionDomain::positive_half, require_decay);
}

CompleteMonotoneResult completely_monotone_test(const std::function<double(double)>& phi,
                                                double lo, double hi, int n, int N) {
    CompleteMonotoneResult out;
    out.depth = N;
    out.verdict = 1;
    for (int p = 1; p <= N; ++p) {
        OrderTestResult r = order_test(phi, lo, hi, n, p, OrderMode::monotone,
                                       FunctionDomain::positive_half);
        out.worst_violation = std::max(out.worst_violation, r.worst_violation);
        if (r.verdict < 0) {
            out.verdict = -1;
            out.failed_order = p;
            return out;
        }
        if (r.verdict == 0) out.verdict = 0;
    }
    return out;
}

// ---------------------------------------------------------------------------
// decomposability classes

ClassReport class_membership(const Triplet& t, double alpha, ClassVariant variant) {
    ClassReport rep;
    rep.alpha = alpha;
    rep.variant = variant;
    rep.verdict = 1;

    // Gaussian admissibility
    const double gauss_limit = variant == ClassVariant::L ? 2.0 : 0.0;
    if (!t.is_id0() && alpha > gauss_limit) {
        rep.verdict = -1;
        rep.note = "Gaussian part not allowed above alpha = " + std::to_string(gauss_limit);
        return rep;
    }
    if (t.levy.components.empty()) return rep;  // delta laws belong to every class

    for (const auto& comp : t.levy.components) {
        if (!comp.radial.atoms.empty()) {
            rep.verdict = -1;
            rep.note = "atomic radial part";
            return rep;
        }
    }
    const double expo = variant == ClassVariant::L ? alpha + 1.0 : 3.0 - alpha;
    const double sign = variant == ClassVariant::L ? 1.0 : -1.0;  // want non-increasing for L
    for (const auto& comp : t.levy.components) {
        auto [slo, shi] = density_support(comp.radial.density);
        if (!(shi > slo)) continue;
        const double lo = std::max(slo, 1e-6), hi = std::min(shi, 1e6);
        if (!(lo < hi)) continue;
        std::vector<double> probes;
        if (const auto* g = std::get_if<GridDensity>(&comp.radial.density);
            g && !g->exact) {
            for (double ln : g->log_nodes) {
                const double r = std::exp(ln);
                if (r >= lo && r <= hi) probes.push_back(r);
            }
        }
        if (probes.size() < 64) {
            probes.clear();
            for (int i = 0; i <= 512; ++i)
                probes.push_back(lo * std::pow(hi / lo, i / 512.0));
        }
        ClassReport::Ray ray;
        double scale = 0.0;
        std::vector<double> k_vals(probes.size());
        for (std::size_t i = 0; i < probes.size(); ++i) {
            k_vals[i] = std::pow(probes[i], expo) *
                        density_value(comp.radial.density, probes[i]);
            scale = std::max(scale, std::abs(k_vals[i]));
        }
        const double tol = 1e-9 * std::max(scale, 1e-300);
        for (std::size_t i = 0; i + 1 < probes.size(); ++i) {
            const double delta = sign * (k_vals[i + 1] - k_vals[i]);
            if (delta > tol && delta > ray.worst_violation) {
                ray.worst_violation = delta;
                ray.location = probes[i];
            }
        }
        if (ray.worst_violation > 10.0 * tol) rep.verdict = -1;
        else if (ray.worst_violation > 0.0 && rep.verdict == 1) rep.verdict = 0;
        rep.rays.push_back(ray);
    }
    return rep;
}

namespace {

bool same_dir(const Direction& a, const Direction& b) {
    if (a.dimension() != b.dimension()) return false;
    double d2 = 0.0;
    for (int k = 0; k < a.dimension(); ++k) {
        const double d = a[static_cast<std::size_t>(k)] - b[static_cast<std::size_t>(k)];
        d2 += d * d;
    }
    return d2 < 1e-20;
}

}  // namespace

Triplet factor_decompose(const Triplet& t, double alpha, double b, ClassVariant variant) {
    if (!(b > 1.0)) throw std::invalid_argument("factor_decompose: span must exceed 1");
    const int d = t.dimension();
    const Triplet sub = variant == ClassVariant::L
                            ? power(dilate(t, 1.0 / b), std::pow(b, alpha))
                            : power(dilate(t, b), std::pow(b, alpha - 2.0));

    Triplet out;
    out.levy.dimension = d;
    // Gaussian part
    SymMatrix a = t.gaussian;
    for (int i = 0; i < d; ++i)
        for (int j = 0; j < d; ++j) a.at(i, j) -= sub.gaussian.at(i, j);
    if (a.min_eigenvalue() < -1e-12)
        throw NotDecomposableError("factor_decompose: Gaussian part turns indefinite", 0.0);
    out.gaussian = a;
    // gamma
    out.gamma.assign(static_cast<std::size_t>(d), 0.0);
    for (int i = 0; i < d; ++i)
        out.gamma[static_cast<std::size_t>(i)] =
            t.gamma[static_cast<std::size_t>(i)] - sub.gamma[static_cast<std::size_t>(i)];

    // group both measures by direction
    std::vector<Direction> dirs = ray_directions(t.levy);
    for (const auto& dir : ray_directions(sub.levy)) {
        bool seen = false;
        for (const auto& e : dirs) seen = seen || same_dir(e, dir);
        if (!seen) dirs.push_back(dir);
    }
    for (const auto& dir : dirs) {
        // net atoms
        std::vector<RadialAtom> net;
        auto add_atoms = [&](const LevyMeasure& m, double sgn) {
            for (const auto& comp : m.components) {
                if (!same_dir(comp.xi, dir)) continue;
                for (const auto& atom : comp.radial.atoms) {
                    bool merged = false;
                    for (auto& e : net)
                        if (e.r == atom.r) {
                            e.mass += sgn * comp.weight * atom.mass;
                            merged = true;
                        }
                    if (!merged) net.push_back({atom.r, sgn * comp.weight * atom.mass});
                }
            }
        };
        add_atoms(t.levy, 1.0);
        add_atoms(sub.levy, -1.0);
        double atom_scale = 0.0;
        for (const auto& e : net) atom_scale = std::max(atom_scale, std::abs(e.mass));
        std::vector<RadialAtom> kept;
        for (const auto& e : net) {
            if (e.mass < -1e-12 * std::max(atom_scale, 1.0))
                throw NotDecomposableError("factor_decompose: negative atom mass", e.r);
            if (e.mass > 1e-12 * std::max(atom_scale, 1.0)) kept.push_back(e);
        }

        // net density: evaluator difference with nonnegativity probes
        bool t_has = false, sub_has = false;
        double slo = kInf, shi = 0.0;
        double theta0 = -kInf, thetainf = kInf;
        for (const auto& comp : t.levy.components)
            if (same_dir(comp.xi, dir) && has_density(comp.radial.density)) {
                t_has = true;
                auto [l, h] = density_support(comp.radial.density);
                slo = std::min(slo, l);
                shi = std::max(shi, h);
                TailInfo t0 = tail_at_zero(comp.radial.density);
                TailInfo ti = tail_at_infinity(comp.radial.density);
                if (t0.touches) theta0 = std::max(theta0, t0.index);
                if (ti.touches) thetainf = std::min(thetainf, ti.index);
            }
        for (const auto& comp : sub.levy.components)
            if (same_dir(comp.xi, dir) && has_density(comp.radial.density)) {
                sub_has = true;
                auto [l, h] = density_support(comp.radial.density);
                slo = std::min(slo, l);
                shi = std::max(shi, h);
            }
        RadialDensity den = std::monostate{};
        if (t_has || sub_has) {
            LevyMeasure tm = t.levy, sm = sub.levy;
            auto eval = [tm, sm, dir](double r) {
                return ray_density(tm, dir, r) - ray_density(sm, dir, r);
            };
            const double plo = std::max(slo, 1e-6), phi_r = std::min(shi, 1e6);
            double scale = 0.0;
            std::vector<double> vals(513);
            for (int i = 0; i <= 512; ++i) {
                const double r = plo * std::pow(phi_r / plo, i / 512.0);
                vals[static_cast<std::size_t>(i)] = eval(r);
                scale = std::max(scale, std::abs(vals[static_cast<std::size_t>(i)]));
            }
            for (int i = 0; i <= 512; ++i) {
                if (vals[static_cast<std::size_t>(i)] < -1e-10 * std::max(scale, 1e-300)) {
                    const double r = plo * std::pow(phi_r / plo, i / 512.0);
                    throw NotDecomposableError("factor_decompose: cofactor density negative", r);
                }
            }
            AnalyticDensity ad;
            ad.eval = [eval](double r) { return std::max(eval(r), 0.0); };
            ad.r_lo = slo;
            ad.r_hi = shi;
            ad.theta0 = theta0 == -kInf ? 0.0 : theta0;
            ad.thetainf = thetainf;
            den = ad;
        }
        if (!kept.empty() || has_density(den))
            out.levy.components.push_back({dir, 1.0, RadialPart{kept, den}});
    }
    out.repr = GammaRepresentation::cut1;
    return out;
}

Triplet build_L_infinity(std::span<const StableBlend> spec) {
    if (spec.empty()) throw std::invalid_argument("build_L_infinity: empty blend");
    int d = spec.front().rays.empty() ? 1 : spec.front().rays.front().first.dimension();
    Triplet out;
    out.levy.dimension = d;
    for (const auto& blend : spec) {
        if (!(blend.beta > 0.0 && blend.beta < 2.0))
            throw std::invalid_argument("build_L_infinity: beta outside (0,2)");
        if (!(blend.mass > 0.0))
            throw std::invalid_argument("build_L_infinity: mass must be positive");
        double wsum = 0.0;
        for (const auto& [xi, w] : blend.rays) {
            if (xi.dimension() != d)
                throw std::invalid_argument("build_L_infinity: mixed dimensions");
            wsum += w;
        }
        if (std::abs(wsum - 1.0) > 1e-9)
            throw std::invalid_argument("build_L_infinity: ray weights must sum to 1");
        for (const auto& [xi, w] : blend.rays) {
            PowerLawDensity pl;
            pl.coeff = 1.0;
            pl.beta = blend.beta;
            pl.r_lo = 0.0;
            pl.r_hi = kInf;
            out.levy.components.push_back({xi, blend.mass * w, RadialPart{{}, pl}});
        }
        out.stable_exponents.push_back({blend.beta, blend.mass});
    }
    out.gaussian = SymMatrix::zero(d);
    out.gamma.assign(static_cast<std::size_t>(d), 0.0);
    out.repr = GammaRepresentation::cut1;
    return out;
}

}  // namespace levyconj
