#include "levyconj/mapping.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "levyconj/charfn.hpp"
#include "levyconj/classes.hpp"

namespace levyconj {

std::string to_string(Verdict v) {
    switch (v) {
        case Verdict::yes: return "yes";
        case Verdict::no: return "no";
        case Verdict::inconclusive: return "inconclusive";
    }
    return "?";
}

namespace {

Verdict kind_to_verdict(IntegralKind k) {
    switch (k) {
        case IntegralKind::finite: return Verdict::yes;
        case IntegralKind::infinite: return Verdict::no;
        case IntegralKind::inconclusive: return Verdict::inconclusive;
    }
    return Verdict::inconclusive;
}

Verdict conj_and(Verdict a, Verdict b) {
    if (a == Verdict::no || b == Verdict::no) return Verdict::no;
    if (a == Verdict::inconclusive || b == Verdict::inconclusive) return Verdict::inconclusive;
    return Verdict::yes;
}

// weak tail vector V(s) = lim_a int_{s<|x|<=a} x nu (cancellation-aware)
struct WeakTail {
    LimitStatus status = LimitStatus::converged;
    std::vector<double> value;
    bool provably_infinite = false;
};

WeakTail weak_tail_vector(const LevyMeasure& nu, double s) {
    WeakTail out;
    const int d = nu.dimension;
    LevyIntegral direct = levy_integral_window(nu, vector_integrand(d), s, kInf);
    if (direct.kind == IntegralKind::finite) {
        out.value = direct.value;
        return out;
    }
    // expanding windows with cancellation
    std::vector<std::vector<double>> partials;
    for (int k = 1; k <= 7; ++k) {
        LevyIntegral w =
            levy_integral_window(nu, vector_integrand(d), s, s * std::pow(10.0, k));
        partials.push_back(w.value);
    }
    VectorLimitResult lr = classify_limit_vec(partials, true, 1e-9);
    out.status = lr.status;
    out.value = lr.value;
    if (lr.status == LimitStatus::diverging || direct.kind == IntegralKind::infinite) {
        // distinguish genuine absolute divergence from undecided cancellation:
        // if every direction-summed shell keeps one sign, the limit is infinite
        if (lr.status != LimitStatus::converged) out.provably_infinite = true;
    }
    if (lr.status == LimitStatus::converged) out.provably_infinite = false;
    return out;
}

// small mirrored helper for the conjugate criteria near zero
WeakTail weak_head_vector(const LevyMeasure& nu, double s) {
    WeakTail out;
    const int d = nu.dimension;
    LevyIntegral direct = levy_integral_window(nu, vector_integrand(d), 0.0, s, false, false);
    if (direct.kind == IntegralKind::finite) {
        out.value = direct.value;
        return out;
    }
    std::vector<std::vector<double>> partials;
    for (int k = 1; k <= 7; ++k) {
        LevyIntegral w = levy_integral_window(nu, vector_integrand(d), s * std::pow(10.0, -k), s,
                                              false, false);
        partials.push_back(w.value);
    }
    VectorLimitResult lr = classify_limit_vec(partials, true, 1e-9);
    out.status = lr.status;
    out.value = lr.value;
    out.provably_infinite = lr.status != LimitStatus::converged;
    return out;
}

double vec_norm(std::span<const double> v) {
    double s = 0.0;
    for (double x : v) s += x * x;
    return std::sqrt(s);
}

}  // namespace

// ---------------------------------------------------------------------------
// domain

DomainReport check_domain(const MappingKernel& k, const Triplet& rho) {
    DomainReport rep;
    const LevyMeasure& nu = rho.levy;

    if (k.two_sided()) {
        // improper integral convergent (absolutely) for every rho
        rep.in_de = rep.in_d = rep.in_d0 = Verdict::yes;
        rep.evidence.push_back({"condition (D): definable for all inputs",
                                IntegralKind::finite, 0.0});
        return rep;
    }

    const auto alpha_opt = k.family_alpha();
    if (!alpha_opt.has_value()) {
        // custom kernel: essential definability probed through the cumulant
        // criterion int |log rho^(f(s) z)| ds = int h(t) |C(t z)| dt
        std::vector<double> z(static_cast<std::size_t>(rho.dimension()), 0.0);
        z[0] = 1.0;
        Verdict de = Verdict::yes;
        try {
            std::vector<double> tz(z.size());
            auto absC = [&](double t) {
                for (std::size_t i = 0; i < z.size(); ++i) tz[i] = t * z[i];
                return std::abs(cumulant(rho, tz).value);
            };
            ImproperEstimate e = integrate_improper(
                [&](double t) { return k.h(t) * absC(t); }, k.a(), k.b(), 1e-9, 1e-7);
            if (e.status == LimitStatus::diverging) de = Verdict::no;
            else if (e.status == LimitStatus::inconclusive) de = Verdict::inconclusive;
            rep.evidence.push_back({"int h |C| (custom kernel probe)",
                                    e.status == LimitStatus::diverging ? IntegralKind::infinite
                                                                       : IntegralKind::finite,
                                    e.value});
        } catch (const std::exception&) {
            de = Verdict::inconclusive;
        }
        rep.in_de = de;
        rep.in_d = rep.in_d0 = Verdict::inconclusive;
        return rep;
    }
    const double alpha = *alpha_opt;
    const bool conj = k.conjugated();
    const auto* lq = std::get_if<LambdaQFamily>(&k.family());
    const double q = lq ? lq->q : 1.0;

    auto push_moment = [&](const char* name, const LevyIntegral& li) {
        rep.evidence.push_back(
            {name, li.kind, li.kind == IntegralKind::finite ? li.scalar() : kInf});
        return kind_to_verdict(li.kind);
    };

    // --- essential definability -------------------------------------------
    Verdict de = Verdict::yes;
    if (conj && alpha >= 0.0 && !rho.is_id0()) {
        de = Verdict::no;
        rep.evidence.push_back({"conjugate domain requires zero Gaussian part",
                                IntegralKind::infinite, kInf});
    } else if (alpha < 0.0) {
        rep.evidence.push_back({"alpha < 0: every input is essentially definable",
                                IntegralKind::finite, 0.0});
    } else if (!conj) {
        if (lq) {
            if (alpha == 0.0)
                de = push_moment("outer (log|x|)^q moment",
                                 levy_integral(nu, abs_power_log_integrand(0.0, q, false),
                                               Region::outer));
            else
                de = push_moment(
                    "outer (log|x|)^{q-1} |x|^alpha moment (|x|>2)",
                    levy_integral_window(nu, abs_power_log_integrand(alpha, q - 1.0, false), 2.0,
                                         kInf));
        } else {
            if (alpha == 0.0)
                de = push_moment("outer log|x| moment",
                                 levy_integral(nu, abs_power_log_integrand(0.0, 1.0, false),
                                               Region::outer));
            else
                de = push_moment("outer |x|^alpha moment",
                                 levy_integral(nu, abs_power_integrand(alpha), Region::outer));
        }
    } else {
        if (lq) {
            if (alpha == 0.0)
                de = push_moment("inner (-log|x|)^q |x|^2 moment",
                                 levy_integral_window(
                                     nu, abs_power_log_integrand(2.0, q, true), 0.0, 1.0, false,
                                     false));
            else
                de = push_moment(
                    "inner (-log|x|)^{q-1} |x|^{2-alpha} moment (|x|<1/2)",
                    levy_integral_window(nu, abs_power_log_integrand(2.0 - alpha, q - 1.0, true),
                                         0.0, 0.5, false, false));
        } else {
            if (alpha == 0.0)
                de = push_moment("inner (-log|x|) |x|^2 moment",
                                 levy_integral_window(nu, abs_power_log_integrand(2.0, 1.0, true),
                                                      0.0, 1.0, false, false));
            else
                de = push_moment("inner |x|^{2-alpha} moment",
                                 levy_integral_window(nu, abs_power_integrand(2.0 - alpha), 0.0,
                                                      1.0, false, false));
        }
    }
    rep.in_de = de;
    if (de == Verdict::no) {
        rep.in_d = rep.in_d0 = Verdict::no;
        return rep;
    }

    // --- plain and absolute -----------------------------------------------
    if (alpha < 1.0) {
        rep.in_d = rep.in_d0 = de;
        return rep;
    }

    const double gamma_scale = std::max(1.0, vec_norm(rho.gamma));
    if (alpha > 1.0) {
        Verdict side;
        MomentReport mr = moment_report(rho);
        if (!conj) {
            if (!mr.has_mean) {
                side = Verdict::no;
                rep.evidence.push_back({"mean: does not exist", IntegralKind::infinite, kInf});
            } else {
                const double m = vec_norm(*mr.mean);
                side = m <= 1e-9 * gamma_scale ? Verdict::yes : Verdict::no;
                rep.evidence.push_back({"|mean|", IntegralKind::finite, m});
            }
        } else {
            if (!mr.has_drift) {
                side = Verdict::no;
                rep.evidence.push_back({"drift: does not exist", IntegralKind::infinite, kInf});
            } else {
                const double m = vec_norm(*mr.drift);
                side = m <= 1e-9 * gamma_scale ? Verdict::yes : Verdict::no;
                rep.evidence.push_back({"|drift|", IntegralKind::finite, m});
            }
        }
        rep.in_d = rep.in_d0 = conj_and(de, side);
        return rep;
    }

    // alpha == 1
    if (lq && q < 1.0) {
        rep.in_d = rep.in_d0 = Verdict::inconclusive;
        rep.evidence.push_back({"alpha=1 with q<1: no known plain-domain description",
                                IntegralKind::inconclusive, 0.0});
        return rep;
    }
    MomentReport mr = moment_report(rho);
    Verdict centered;
    if (!conj) {
        if (!mr.has_mean) {
            centered = Verdict::no;
            rep.evidence.push_back({"mean: does not exist", IntegralKind::infinite, kInf});
        } else {
            const double m = vec_norm(*mr.mean);
            centered = m <= 1e-9 * gamma_scale ? Verdict::yes : Verdict::no;
            rep.evidence.push_back({"|mean|", IntegralKind::finite, m});
        }
    } else {
        if (!mr.has_drift) {
            centered = Verdict::no;
            rep.evidence.push_back({"drift: does not exist", IntegralKind::infinite, kInf});
        } else {
            const double m = vec_norm(*mr.drift);
            centered = m <= 1e-9 * gamma_scale ? Verdict::yes : Verdict::no;
            rep.evidence.push_back({"|drift|", IntegralKind::finite, m});
        }
    }
    if (centered == Verdict::no) {
        rep.in_d = rep.in_d0 = Verdict::no;
        return rep;
    }

    // limit criterion: lim int_1^r w(s) s^{-1} V(s) ds  (tail) or the
    // mirrored head version for the conjugate
    const int d = rho.dimension();
    auto V = [&](double s) -> WeakTail {
        return conj ? weak_head_vector(nu, s) : weak_tail_vector(nu, s);
    };
    bool inner_infinite = false, inner_inconclusive = false;
    auto V_checked = [&](double s) -> std::vector<double> {
        WeakTail w = V(s);
        if (w.provably_infinite) inner_infinite = true;
        if (w.status == LimitStatus::inconclusive) inner_inconclusive = true;
        return w.value;
    };
    // probe the inner integral first at a few s to catch hard divergence
    for (double s : {1.0, 4.0, 16.0}) {
        (void)V_checked(conj ? 1.0 / s : s);
        if (inner_infinite) break;
    }
    if (inner_infinite) {
        rep.in_d = rep.in_d0 = Verdict::no;
        rep.evidence.push_back({"alpha=1 limit criterion: inner tail vector integral diverges",
                                IntegralKind::infinite, kInf});
        return rep;
    }
    if (inner_inconclusive) {
        rep.in_d = rep.in_d0 = Verdict::inconclusive;
        rep.evidence.push_back({"alpha=1 limit criterion: inner tail vector inconclusive",
                                IntegralKind::inconclusive, 0.0});
        return rep;
    }
    auto weight = [&](double s) { return lq ? std::pow(std::log(s), q - 1.0) / s : 1.0 / s; };
    std::vector<std::vector<double>> partials;       // plain: signed integral
    std::vector<double> abs_partials;                // absolute: |V|
    std::vector<double> acc(static_cast<std::size_t>(d), 0.0);
    double acc_abs = 0.0;
    double lo_edge = 1.0;
    for (int kdec = 1; kdec <= 6; ++kdec) {
        const double hi_edge = std::pow(10.0, kdec);
        for (int c = 0; c < d; ++c) {
            auto e = integrate(
                [&](double ls) {
                    const double s = std::exp(ls);
                    const double sg = conj ? 1.0 / s : s;
                    const double w = lq ? std::pow(std::abs(std::log(sg)), q - 1.0) : 1.0;
                    std::vector<double> v = V_checked(sg);
                    return w * v[static_cast<std::size_t>(c)];
                },
                std::log(lo_edge), std::log(hi_edge), 1e-10, 1e-8, 2000);
            acc[static_cast<std::size_t>(c)] += e.value;
        }
        {
            auto e = integrate(
                [&](double ls) {
                    const double s = std::exp(ls);
                    const double sg = conj ? 1.0 / s : s;
                    const double w = lq ? std::pow(std::abs(std::log(sg)), q - 1.0) : 1.0;
                    return w * vec_norm(V_checked(sg));
                },
                std::log(lo_edge), std::log(hi_edge), 1e-10, 1e-8, 2000);
            acc_abs += e.value;
        }
        partials.push_back(acc);
        abs_partials.push_back(acc_abs);
        lo_edge = hi_edge;
        if (inner_infinite || inner_inconclusive) break;
    }
    (void)weight;
    if (inner_infinite) {
        rep.in_d = rep.in_d0 = Verdict::no;
        return rep;
    }
    if (inner_inconclusive) {
        rep.in_d = rep.in_d0 = Verdict::inconclusive;
        return rep;
    }
    VectorLimitResult lim = classify_limit_vec(partials, true, 1e-8);
    switch (lim.status) {
        case LimitStatus::converged:
            rep.in_d = Verdict::yes;
            rep.evidence.push_back({"alpha=1 limit value |.|", IntegralKind::finite,
                                    vec_norm(lim.value)});
            break;
        case LimitStatus::diverging:
            rep.in_d = Verdict::no;
            rep.evidence.push_back({"alpha=1 limit diverges", IntegralKind::infinite, kInf});
            break;
        case LimitStatus::inconclusive:
            rep.in_d = Verdict::inconclusive;
            rep.evidence.push_back({"alpha=1 limit inconclusive", IntegralKind::inconclusive,
                                    0.0});
            break;
    }
    LimitResult alim = classify_limit(abs_partials, true, 1e-8);
    rep.in_d0 = alim.status == LimitStatus::converged
                    ? conj_and(rep.in_d, Verdict::yes)
                    : (alim.status == LimitStatus::diverging ? Verdict::no
                                                             : Verdict::inconclusive);
    if (rep.in_d == Verdict::no) rep.in_d0 = Verdict::no;
    return rep;
}

// ---------------------------------------------------------------------------
// the transform

namespace {

// density of the mapped measure at u on one ray:
//   sum_atoms m h(u/r0)/r0 + int h(t) t^{-1} l(u/t) dt
double mapped_density_value(const MappingKernel& k, bool negative_side, const RadialPart& in,
                            double u) {
    auto hval = [&](double t) { return negative_side ? k.h(-t) : k.h(t); };
    double val = 0.0;
    for (const auto& atom : in.atoms) val += atom.mass * hval(u / atom.r) / atom.r;
    if (!has_density(in.density)) return val;
    auto [slo, shi] = density_support(in.density);
    if (!(shi > slo)) return val;
    const double a = k.two_sided() ? 0.0 : k.a();
    const double b = k.two_sided() ? kInf : k.b();
    double tlo = std::max(a, shi == kInf ? 0.0 : u / shi);
    double thi = std::min(b, slo == 0.0 ? kInf : u / slo);
    if (!(tlo < thi)) return val;
    ImproperEstimate e = integrate_improper(
        [&](double t) { return hval(t) * density_value(in.density, u / t) / t; }, tlo, thi,
        1e-280, 1e-9);
    return val + e.value;
}

constexpr int kGridNodes = 400;
constexpr double kGridFloor = 1e-6;
constexpr double kGridCeil = 1e6;

GridDensity build_output_grid(const MappingKernel& k, bool negative_side, const RadialPart& in) {
    GridDensity g;
    // support of the input ray measure
    double r_min = kInf, r_max = 0.0;
    for (const auto& atom : in.atoms) {
        r_min = std::min(r_min, atom.r);
        r_max = std::max(r_max, atom.r);
    }
    if (has_density(in.density)) {
        auto [slo, shi] = density_support(in.density);
        r_min = std::min(r_min, slo);
        r_max = std::max(r_max, shi);
    }
    const double a = k.two_sided() ? 0.0 : k.a();
    const double b = k.two_sided() ? kInf : k.b();
    const double sup_lo = a * r_min;  // 0*inf cannot occur: a=0 or r_min finite
    const double sup_hi = b == kInf || r_max == kInf ? kInf : b * r_max;
    g.r_lo = sup_lo;
    g.r_hi = sup_hi;
    const double lo = std::max(sup_lo, kGridFloor);
    const double hi = std::min(sup_hi, kGridCeil);
    if (!(lo < hi)) return g;

    auto eval = [k, negative_side, in](double u) {
        return mapped_density_value(k, negative_side, in, u);
    };
    g.log_nodes.resize(kGridNodes);
    g.values.resize(kGridNodes);
    const double llo = std::log(lo), lhi = std::log(hi);
    for (int i = 0; i < kGridNodes; ++i) {
        const double t = (llo * (kGridNodes - 1 - i) + lhi * i) / (kGridNodes - 1);
        g.log_nodes[static_cast<std::size_t>(i)] = t;
        g.values[static_cast<std::size_t>(i)] = eval(std::exp(t));
    }
    // extrapolation slopes from edge probes of the exact evaluator
    auto slope = [&](double u, double dir) {
        const double f1 = eval(u), f2 = eval(u * std::pow(1.25, dir));
        if (f1 > 0.0 && f2 > 0.0) return (std::log(f2) - std::log(f1)) / (dir * std::log(1.25));
        return dir > 0 ? -40.0 : 40.0;  // effectively truncate
    };
    g.ext_lo = g.r_lo < lo ? slope(lo, -1.0) : 0.0;
    g.ext_hi = g.r_hi > hi ? slope(hi, +1.0) : -40.0;
    g.exact = std::make_shared<const std::function<double(double)>>(eval);
    return g;
}

}  // namespace

Triplet apply_mapping(const MappingKernel& k, const Triplet& rho) {
    DomainReport dom = check_domain(k, rho);
    if (dom.in_de == Verdict::no)
        throw NotDefinableError("apply_mapping: input outside the essential domain of " +
                                k.describe());
    const int d = rho.dimension();

    // Gaussian part
    const double f2 = k.two_sided()
                          ? k.h_moment_two_sided(2.0).first + k.h_moment_two_sided(2.0).second
                          : k.h_moment(2.0);
    SymMatrix a_out = SymMatrix::zero(d);
    if (!rho.is_id0()) {
        if (!(f2 < kInf))
            throw NotDefinableError("apply_mapping: kernel is not square-integrable, input must "
                                    "have zero Gaussian part");
        a_out = rho.gaussian.scaled(f2);
    }

    // measure part
    LevyMeasure nu_out;
    nu_out.dimension = d;
    for (const auto& comp : rho.levy.components) {
        struct Side {
            bool negative;
            Direction xi;
        };
        std::vector<Side> sides;
        sides.push_back({false, comp.xi});
        if (k.two_sided()) {
            std::vector<double> neg(comp.xi.coords());
            for (double& c : neg) c = -c;
            sides.push_back({true, Direction(neg)});
        }
        for (const auto& side : sides) {
            RadialPart rest = comp.radial;  // non-fast-path pieces
            // exact transport of full-line power laws
            if (const auto* pl = std::get_if<PowerLawDensity>(&comp.radial.density);
                pl && pl->r_lo == 0.0 && pl->r_hi == kInf) {
                double factor;
                if (k.two_sided()) {
                    auto [pos, neg] = k.h_moment_two_sided(pl->beta);
                    factor = side.negative ? neg : pos;
                } else {
                    factor = k.h_moment(pl->beta);
                }
                if (!(factor < kInf))
                    throw NotDefinableError(
                        "apply_mapping: power-law moment diverges (outside domain)");
                PowerLawDensity out_pl = *pl;
                out_pl.coeff = pl->coeff * factor;
                nu_out.components.push_back(
                    {side.xi, comp.weight, RadialPart{{}, out_pl}});
                rest.density = std::monostate{};
            }
            if (!rest.atoms.empty() || has_density(rest.density)) {
                GridDensity g = build_output_grid(k, side.negative, rest);
                if (!g.log_nodes.empty())
                    nu_out.components.push_back({side.xi, comp.weight, RadialPart{{}, g}});
            }
        }
    }

    // gamma by the t-variable formula
    std::vector<double> gamma_out(static_cast<std::size_t>(d), 0.0);
    {
        std::vector<double> breakpoints{1.0};
        for (const auto& comp : rho.levy.components)
            for (const auto& atom : comp.radial.atoms) breakpoints.push_back(1.0 / atom.r);
        auto bracket = [&](double t, int c) {
            double v = rho.gamma[static_cast<std::size_t>(c)];
            if (t < 1.0) {
                LevyIntegral w =
                    levy_integral_window(rho.levy, vector_integrand(d), 1.0, 1.0 / t);
                v += w.value[static_cast<std::size_t>(c)];
            } else if (t > 1.0) {
                LevyIntegral w =
                    levy_integral_window(rho.levy, vector_integrand(d), 1.0 / t, 1.0);
                v -= w.value[static_cast<std::size_t>(c)];
            }
            return v;
        };
        auto gamma_side = [&](bool negative) {
            std::vector<double> out_part(static_cast<std::size_t>(d), 0.0);
            const double a = k.two_sided() ? 0.0 : k.a();
            const double b = k.two_sided() ? kInf : k.b();
            for (int c = 0; c < d; ++c) {
                auto F = [&](double t) {
                    const double hv = negative ? k.h(-t) : k.h(t);
                    const double sgn = negative ? -1.0 : 1.0;
                    return sgn * t * hv * bracket(t, c);
                };
                // integrate on log t with slab expansion; breakpoints seeded
                double core_lo = a > 0.0 ? a : 1e-3;
                double core_hi = b < kInf ? b : 1e3;
                std::vector<double> lbp;
                for (double bp : breakpoints)
                    if (bp > core_lo && bp < core_hi) lbp.push_back(std::log(bp));
                auto e = integrate([&](double lt) { return F(std::exp(lt)) * std::exp(lt); },
                                   std::log(core_lo), std::log(core_hi), 1e-11, 1e-9, 100000,
                                   lbp);
                double total = e.value;
                if (a == 0.0) {
                    std::vector<double> parts{total};
                    double edge = core_lo;
                    for (int j = 0; j < 40; ++j) {
                        const double next = edge / 8.0;
                        auto es = integrate(
                            [&](double lt) { return F(std::exp(lt)) * std::exp(lt); },
                            std::log(next), std::log(edge), 1e-12, 1e-9);
                        total += es.value;
                        parts.push_back(total);
                        edge = next;
                        if (std::abs(es.value) < 1e-13 && j > 1) break;
                        if (j >= 6) {
                            LimitResult lr = classify_limit(parts, true, 1e-11);
                            if (lr.status == LimitStatus::diverging)
                                throw NotDefinableError(
                                    "apply_mapping: gamma integral diverges near t=0");
                            if (lr.status == LimitStatus::converged &&
                                std::abs(es.value) < 1e-11) {
                                total = lr.value;
                                break;
                            }
                        }
                    }
                }
                if (b == kInf) {
                    std::vector<double> parts{total};
                    double edge = core_hi;
                    for (int j = 0; j < 40; ++j) {
                        const double next = edge * 8.0;
                        auto es = integrate(
                            [&](double lt) { return F(std::exp(lt)) * std::exp(lt); },
                            std::log(edge), std::log(next), 1e-12, 1e-9);
                        total += es.value;
                        parts.push_back(total);
                        edge = next;
                        if (std::abs(es.value) < 1e-13 && j > 1) break;
                        if (j >= 6) {
                            LimitResult lr = classify_limit(parts, true, 1e-11);
                            if (lr.status == LimitStatus::diverging)
                                throw NotDefinableError(
                                    "apply_mapping: gamma integral diverges near t=inf");
                            if (lr.status == LimitStatus::converged &&
                                std::abs(es.value) < 1e-11) {
                                total = lr.value;
                                break;
                            }
                        }
                    }
                }
                out_part[static_cast<std::size_t>(c)] = total;
            }
            return out_part;
        };
        std::vector<double> gpos = gamma_side(false);
        for (int c = 0; c < d; ++c) gamma_out[static_cast<std::size_t>(c)] += gpos[c];
        if (k.two_sided()) {
            std::vector<double> gneg = gamma_side(true);
            for (int c = 0; c < d; ++c) gamma_out[static_cast<std::size_t>(c)] += gneg[c];
        }
    }

    Triplet out;
    out.gaussian = a_out;
    out.levy = std::move(nu_out);
    out.gamma = std::move(gamma_out);
    out.repr = GammaRepresentation::cut1;
    return out;
}

Triplet iterate_mapping(const MappingKernel& k, const Triplet& rho, int n,
                        std::vector<DomainReport>* step_reports) {
    if (n < 1) throw std::invalid_argument("iterate_mapping: n must be >= 1");
    Triplet cur = rho;
    for (int j = 0; j < n; ++j) {
        DomainReport rep = check_domain(k, cur);
        if (step_reports) step_reports->push_back(rep);
        if (rep.in_de == Verdict::no) {
            std::ostringstream os;
            os << "iterate_mapping: step " << (j + 1) << " leaves the domain of "
               << k.describe();
            throw NotDefinableError(os.str());
        }
        cur = apply_mapping(k, cur);
    }
    return cur;
}

// ---------------------------------------------------------------------------
// range

namespace {

int near_integer(double x) {
    const double r = std::round(x);
    return std::abs(x - r) < 1e-9 ? static_cast<int>(r) : -1;
}

}  // namespace

RangeReport check_range(const MappingKernel& k, const Triplet& mu) {
    RangeReport rep;
    const auto alpha_opt = k.family_alpha();
    const bool type_g = std::holds_alternative<GaussTypeGFamily>(k.family());
    if (!alpha_opt.has_value() && !type_g) {
        rep.note = "range description unavailable for custom kernels";
        return rep;
    }
    const bool conj = k.conjugated();
    const double alpha = alpha_opt.value_or(0.0);

    // Gaussian admissibility
    if (!mu.is_id0()) {
        const bool ok_gauss = type_g || alpha < 0.0 ? true : false;
        if (!(conj || type_g)) {
            // plain one-sided C1 kernels always carry the Gaussian part through
        } else if (!ok_gauss) {
            rep.verdict = rep.essential = rep.absolute = Verdict::no;
            rep.note = "conjugate range with alpha >= 0 lies in ID0";
            return rep;
        }
    }

    // order parameter
    double order = 0.0;
    bool complete = false;
    if (const auto* bp = std::get_if<BarPhiFamily>(&k.family())) order = bp->p;
    if (const auto* lq = std::get_if<LambdaQFamily>(&k.family())) order = lq->q;
    if (std::holds_alternative<PsiFamily>(k.family()) || type_g) complete = true;
    rep.order = complete ? 8 : order;

    const int p_int = complete ? 8 : near_integer(order);
    if (!complete && p_int < 1) {
        rep.note = "order test supports integer orders only";
        rep.verdict = rep.essential = rep.absolute = Verdict::inconclusive;
        return rep;
    }

    // per-ray order tests
    bool any_atoms = false;
    for (const auto& comp : mu.levy.components)
        if (!comp.radial.atoms.empty()) any_atoms = true;
    Verdict essential = Verdict::yes;
    if (any_atoms) {
        essential = Verdict::no;
        rep.note = "atomic radial parts cannot carry the required density form";
    } else {
        const double beta_psi = [&] {
            if (const auto* ps = std::get_if<PsiFamily>(&k.family())) return ps->beta;
            return 1.0;
        }();
        for (const auto& comp : mu.levy.components) {
            if (!has_density(comp.radial.density)) continue;
            auto [slo, shi] = density_support(comp.radial.density);
            double lo = std::max(slo, 1e-5);
            double hi = shi == kInf ? 1e4 : shi * 1.25;  // overshoot a finite edge
            if (!(lo < hi)) continue;
            auto raw = [&](double u) { return density_value(comp.radial.density, u); };

            OrderTestResult r;
            RangeReport::Ray ray;
            const int n_grid = 400;
            if (type_g) {
                if (!conj) {
                    auto kf = [&](double v) { return raw(std::sqrt(v)); };
                    auto cm = completely_monotone_test(kf, lo * lo, hi * hi, n_grid, 8);
                    r.verdict = cm.verdict;
                    r.worst_violation = cm.worst_violation;
                } else {
                    auto kf = [&](double v) { return std::pow(v, -2.0) * raw(1.0 /
                                                                             std::sqrt(v)); };
                    auto cm = completely_monotone_test(kf, 1.0 / (hi * hi), 1.0 / (lo * lo),
                                                       n_grid, 8);
                    r.verdict = cm.verdict;
                    r.worst_violation = cm.worst_violation;
                }
            } else if (std::holds_alternative<PsiFamily>(k.family())) {
                if (!conj) {
                    auto kf = [&](double v) {
                        const double u = std::pow(v, 1.0 / beta_psi);
                        return std::pow(u, alpha + 1.0) * raw(u);
                    };
                    auto cm = completely_monotone_test(kf, std::pow(lo, beta_psi),
                                                       std::pow(hi, beta_psi), n_grid, 8);
                    r.verdict = cm.verdict;
                    r.worst_violation = cm.worst_violation;
                } else {
                    auto kf = [&](double v) {
                        const double u = std::pow(v, -1.0 / beta_psi);
                        return std::pow(u, 3.0 - alpha) * raw(u);
                    };
                    auto cm = completely_monotone_test(kf, std::pow(hi, -beta_psi),
                                                       std::pow(lo, -beta_psi), n_grid, 8);
                    r.verdict = cm.verdict;
                    r.worst_violation = cm.worst_violation;
                }
            } else if (std::holds_alternative<LambdaQFamily>(k.family())) {
                if (!conj) {
                    auto kf = [&](double y) {
                        const double u = std::exp(y);
                        return std::pow(u, alpha + 1.0) * raw(u);
                    };
                    r = order_test(kf, std::log(lo), std::log(hi), n_grid, p_int,
                                   OrderMode::monotone, FunctionDomain::real_line);
                } else {
                    auto kf = [&](double y) {
                        const double u = std::exp(y);
                        return std::pow(u, 3.0 - alpha) * raw(u);
                    };
                    r = order_test(kf, std::log(lo), std::log(hi), n_grid, p_int,
                                   OrderMode::increasing, FunctionDomain::real_line);
                }
            } else {  // BarPhi
                if (!conj) {
                    auto kf = [&](double u) { return std::pow(u, alpha + 1.0) * raw(u); };
                    r = order_test(kf, lo, hi, n_grid, p_int, OrderMode::monotone,
                                   FunctionDomain::positive_half);
                } else {
                    auto kf = [&](double u) {
                        return std::pow(u, static_cast<double>(p_int) + 2.0 - alpha) * raw(u);
                    };
                    r = order_test(kf, lo, hi, n_grid, p_int, OrderMode::increasing,
                                   FunctionDomain::positive_half);
                }
            }
            ray.worst_violation = r.worst_violation;
            rep.rays.push_back(ray);
            if (r.verdict < 0) essential = Verdict::no;
            else if (r.verdict == 0 && essential == Verdict::yes)
                essential = Verdict::inconclusive;
        }
        // type G additionally requires symmetry
        if (type_g && essential != Verdict::no) {
            bool sym = vec_norm(mu.gamma) <= 1e-9;
            const auto dirs = ray_directions(mu.levy);
            for (const auto& xi : dirs) {
                std::vector<double> neg(xi.coords());
                for (double& c : neg) c = -c;
                Direction mir(neg);
                for (double rr : {0.3, 1.0, 3.7}) {
                    if (std::abs(ray_density(mu.levy, xi, rr) - ray_density(mu.levy, mir, rr)) >
                        1e-9 * (ray_density(mu.levy, xi, rr) + 1e-30))
                        sym = false;
                }
            }
            if (!sym) {
                essential = Verdict::no;
                rep.note = "type-G range requires a symmetric law";
            }
        }
    }
    rep.essential = essential;

    // side conditions
    Verdict side_plain = Verdict::yes, side_abs = Verdict::yes;
    if (!type_g && alpha >= 1.0) {
        if (conj) {
            if (alpha == 1.0) {
                side_plain = side_abs = Verdict::inconclusive;
                rep.note = "plain/absolute conjugate range at alpha=1 has no known description";
            } else {
                MomentReport mr = moment_report(mu);
                const double sc = std::max(1.0, vec_norm(mu.gamma));
                Verdict v = !mr.has_drift ? Verdict::no
                                          : (vec_norm(*mr.drift) <= 1e-8 * sc ? Verdict::yes
                                                                              : Verdict::no);
                rep.side_conditions.push_back(
                    {"|drift|", mr.has_drift ? IntegralKind::finite : IntegralKind::infinite,
                     mr.has_drift ? vec_norm(*mr.drift) : kInf});
                side_plain = side_abs = v;
            }
        } else {
            MomentReport mr = moment_report(mu);
            const double sc = std::max(1.0, vec_norm(mu.gamma));
            if (alpha > 1.0) {
                Verdict v = !mr.has_mean ? Verdict::no
                                         : (vec_norm(*mr.mean) <= 1e-8 * sc ? Verdict::yes
                                                                            : Verdict::no);
                rep.side_conditions.push_back(
                    {"|mean|", mr.has_mean ? IntegralKind::finite : IntegralKind::infinite,
                     mr.has_mean ? vec_norm(*mr.mean) : kInf});
                side_plain = side_abs = v;
            } else {
                // alpha = 1: weak mean zero (absolutely, for the absolute range)
                const auto& wm = mr.weak_mean;
                const bool zero = !wm.value.empty() && vec_norm(wm.value) <= 1e-8 * sc;
                rep.side_conditions.push_back(
                    {"|weak mean|",
                     wm.status == WeakMeanStatus::none ? IntegralKind::infinite
                                                       : IntegralKind::finite,
                     wm.value.empty() ? kInf : vec_norm(wm.value)});
                if (wm.status == WeakMeanStatus::none) side_plain = Verdict::no;
                else if (wm.status == WeakMeanStatus::inconclusive)
                    side_plain = Verdict::inconclusive;
                else side_plain = zero ? Verdict::yes : Verdict::no;
                if (wm.status == WeakMeanStatus::exists_absolutely)
                    side_abs = zero ? Verdict::yes : Verdict::no;
                else if (side_plain == Verdict::no) side_abs = Verdict::no;
                else side_abs = Verdict::inconclusive;
            }
        }
    }
    rep.verdict = conj_and(essential, side_plain);
    rep.absolute = conj_and(essential, side_abs);
    return rep;
}

}  // namespace levyconj
