#include "levyconj/charfn.hpp"

#include <cmath>

#include "levyconj/kernel.hpp"

namespace levyconj {

namespace {

using cplx = std::complex<double>;

// e^{iu} - 1 (- iu when compensated), stable for small |u|.
cplx lk_kernel(double u, bool compensate) {
    const double re = -2.0 * std::pow(std::sin(0.5 * u), 2);
    double im;
    if (compensate) {
        const double au = std::abs(u);
        if (au < 1e-4) {
            const double u2 = u * u;
            im = -u * u2 / 6.0 * (1.0 - u2 / 20.0);  // sin u - u
        } else {
            im = std::sin(u) - u;
        }
    } else {
        im = std::sin(u);
    }
    return {re, im};
}

struct RayTailPlan {
    double cut_lo = 0.0;
    double cut_hi = kInf;
    double dropped_bound = 0.0;  // error budget spent on dropped end pieces
};

// |e^{iu}-1-iu 1_{u<=T0}| <= min(u^2/2, 2+u); used for end-cut budgeting.
// Chooses cut_lo so that the quadratic bound of the dropped small-r piece is
// below tol, and cut_hi for the |.|<=2 bound of the far tail unless the tail
// is an exact power law (handled by integration by parts in the caller).
RayTailPlan plan_cuts(const RadialDensity& den, double T, double tol) {
    RayTailPlan plan;
    auto [slo, shi] = density_support(den);
    plan.cut_lo = slo;
    plan.cut_hi = shi;
    if (slo == 0.0) {
        const TailInfo t0 = tail_at_zero(den);
        const double s = 2.0 - t0.index;  // integrand bound ~ T^2/2 r^{s-1}
        double delta = std::min({0.5, 0.5 / std::max(T, 1.0), shi * 0.5});
        for (int iter = 0; iter < 200; ++iter) {
            const double coeff =
                t0.exact ? t0.coeff : density_value(den, delta) * std::pow(delta, t0.index + 1.0);
            const double bound = 0.5 * T * T * coeff * std::pow(delta, s) / s;
            if (bound < 0.25 * tol || delta < 1e-250) {
                plan.dropped_bound += bound;
                break;
            }
            delta *= (s > 0.25) ? 0.1 : 1e-3;
        }
        plan.cut_lo = delta;
    }
    return plan;
}

// integral of the density mass above R (the -1 term of the tail), closed for
// exact power tails.
double mass_above(const RadialDensity& den, double R, double tol) {
    auto [slo, shi] = density_support(den);
    if (R >= shi) return 0.0;
    const TailInfo ti = tail_at_infinity(den);
    if (shi < kInf) {
        auto e = integrate([&](double t) { return density_value(den, std::exp(t)) * std::exp(t); },
                           std::log(std::max(R, slo)), std::log(shi), tol, 1e-10);
        return e.value;
    }
    if (ti.exact) {
        // exact tail only valid beyond the last grid node; integrate the rest
        double from = R;
        double head = 0.0;
        if (const auto* g = std::get_if<GridDensity>(&den)) {
            const double last = std::exp(g->log_nodes.back());
            if (R < last) {
                auto e = integrate(
                    [&](double t) { return density_value(den, std::exp(t)) * std::exp(t); },
                    std::log(std::max(R, slo)), std::log(last), tol, 1e-10);
                head = e.value;
                from = last;
            }
        }
        return head + ti.coeff * std::pow(from, -ti.index) / ti.index;
    }
    // probe outward until the declared-index estimate of the remainder dies
    double B = std::max(R * 2.0, R + 1.0);
    double total = 0.0;
    double prev = R;
    for (int j = 0; j < 80; ++j) {
        auto e = integrate([&](double t) { return density_value(den, std::exp(t)) * std::exp(t); },
                           std::log(prev), std::log(B), tol, 1e-10);
        total += e.value;
        const double c = ti.index < kInf ? density_value(den, B) * std::pow(B, ti.index + 1.0)
                                         : 0.0;
        const double rem = ti.index < kInf && ti.index > 0.0
                               ? c * std::pow(B, -ti.index) / ti.index
                               : density_value(den, B) * B;
        if (rem < 0.25 * tol || B > 1e280) {
            total += rem;
            break;
        }
        prev = B;
        B *= 8.0;
    }
    return total;
}

// oscillatory tail int_R^shi e^{irT} l(r) dr for an exact power tail
// l(r) = c r^{-theta-1} on [R, inf): repeated integration by parts.
cplx power_tail_oscillatory(double coeff, double theta, double R, double T, double tol,
                            double* achieved_err) {
    const cplx iT(0.0, T);
    cplx sum = 0.0;
    double deriv_coeff = coeff;     // |psi^{(k)}(R)| = deriv_coeff * R^{-theta-1-k}
    double expo = -theta - 1.0;
    cplx phase = std::exp(cplx(0.0, R * T));
    cplx inv_pow = 1.0;
    double rem = kInf;
    for (int k = 0; k < 8; ++k) {
        inv_pow /= iT;
        // term: -psi^{(k)}(R) e^{iRT} / (iT)^{k+1}
        const double psi_k = deriv_coeff * std::pow(R, expo) * (k % 2 == 0 ? 1.0 : -1.0);
        sum += -psi_k * phase * inv_pow;
        const double next_coeff = deriv_coeff * (theta + 1.0 + k);
        rem = next_coeff * std::pow(R, expo - 1.0) / std::pow(T, k + 2) * R;
        // bound: int |psi^{(k+1)}| / T^{k+2} = |psi^{(k)}(R)| ... conservative
        rem = deriv_coeff * std::pow(R, expo) / std::pow(T, k + 1);
        if (rem < 0.25 * tol) break;
        deriv_coeff = next_coeff;
        expo -= 1.0;
    }
    *achieved_err = std::min(rem, std::abs(sum) + rem);
    return sum;
}

// Per-ray integral int (e^{irT} - 1 - irT 1_{r<=1}) nu_xi(dr) for T > 0.
cplx ray_lk(const RadialPart& radial, double T, double tol, double* err) {
    cplx total = 0.0;
    *err = 0.0;
    for (const auto& atom : radial.atoms) total += atom.mass * lk_kernel(atom.r * T, atom.r <= 1.0);
    if (!has_density(radial.density)) return total;
    const RadialDensity& den = radial.density;
    auto [slo, shi] = density_support(den);
    if (!(shi > slo)) return total;

    RayTailPlan plan = plan_cuts(den, T, tol);
    *err += plan.dropped_bound;

    const double period = 2.0 * M_PI / T;
    double R = shi;
    bool have_far_tail = false;
    if (shi == kInf) {
        R = std::max({64.0 * period, 4.0 * plan.cut_lo, 4.0, 2.0});
        // keep the window where the compensation indicator lives inside [lo,R]
        R = std::max(R, 2.0);
        have_far_tail = true;
    }

    // middle: adaptive complex quadrature with seams at 1 and period marks
    std::vector<double> seams;
    seams.push_back(1.0);
    for (double m = period; m < R; m += period) {
        seams.push_back(m);
        if (seams.size() > 4096) break;
    }
    auto f = [&](double r) -> cplx {
        return lk_kernel(r * T, r <= 1.0) * density_value(den, r);
    };
    if (plan.cut_lo < R) {
        const double mid = std::min(1.0, R);
        if (plan.cut_lo < mid) {
            auto e1 = integrate_complex(
                [&](double t) { return f(std::exp(t)) * std::exp(t); }, std::log(plan.cut_lo),
                std::log(mid), 0.25 * tol, 1e-10);
            total += e1.value;
            *err += e1.abs_error;
        }
        if (mid < R) {
            auto e2 = integrate_complex(f, mid, R, 0.25 * tol, 1e-10, 100000, seams);
            total += e2.value;
            *err += e2.abs_error;
        }
    }

    if (have_far_tail) {
        // -1 part
        const double m_above = mass_above(den, R, 0.25 * tol);
        total += -m_above;
        // oscillatory part
        const TailInfo ti = tail_at_infinity(den);
        if (ti.exact) {
            double osc_err = 0.0;
            total += power_tail_oscillatory(ti.coeff, ti.index, R, T, 0.25 * tol, &osc_err);
            *err += osc_err;
        } else if (ti.index == kInf) {
            // extend explicit quadrature until the density is negligible
            double B = R;
            for (int j = 0; j < 60; ++j) {
                const double nb = B * 2.0;
                auto e = integrate_complex([&](double r) -> cplx {
                                               return (lk_kernel(r * T, false) + 1.0) *
                                                      density_value(den, r);
                                           },
                                           B, nb, 0.25 * tol, 1e-10);
                total += e.value;
                *err += e.abs_error;
                B = nb;
                if (density_value(den, B) * B < 0.01 * tol) break;
            }
        } else {
            // declared power-ish tail: sum period integrals, Aitken-accelerated
            std::vector<double> re_parts, im_parts;
            cplx acc = 0.0;
            double edge = R;
            bool accelerated = false;
            for (int j = 0; j < 512; ++j) {
                auto e = integrate_complex(
                    [&](double r) -> cplx { return std::exp(cplx(0.0, r * T)) *
                                                   density_value(den, r); },
                    edge, edge + period, 0.1 * tol, 1e-9);
                acc += e.value;
                re_parts.push_back(acc.real());
                im_parts.push_back(acc.imag());
                edge += period;
                if (re_parts.size() >= 8) {
                    LimitResult lr = classify_limit(re_parts, true, 0.1 * tol);
                    LimitResult li = classify_limit(im_parts, true, 0.1 * tol);
                    if (lr.status == LimitStatus::converged &&
                        li.status == LimitStatus::converged) {
                        total += cplx(lr.value, li.value);
                        *err += lr.spread + li.spread;
                        accelerated = true;
                        break;
                    }
                }
            }
            if (!accelerated) {
                total += acc;
                *err += density_value(den, edge) * edge;  // crude van der Corput bound
            }
        }
    }
    return total;
}

}  // namespace

CumulantResult cumulant(const Triplet& t, std::span<const double> z) {
    const int d = t.dimension();
    if (z.size() != static_cast<std::size_t>(d))
        throw std::invalid_argument("cumulant: z dimension mismatch");
    CumulantResult out;
    double quad = 0.0, lin = 0.0;
    for (int i = 0; i < d; ++i) {
        lin += t.gamma[static_cast<std::size_t>(i)] * z[static_cast<std::size_t>(i)];
        for (int j = 0; j < d; ++j)
            quad += z[static_cast<std::size_t>(i)] * t.gaussian.at(i, j) *
                    z[static_cast<std::size_t>(j)];
    }
    out.value = cplx(-0.5 * quad, lin);

    const double tol_per_comp =
        1e-10 / std::max<std::size_t>(1, t.levy.components.size());
    for (const auto& comp : t.levy.components) {
        double proj = 0.0;
        for (int i = 0; i < d; ++i)
            proj += z[static_cast<std::size_t>(i)] * comp.xi[static_cast<std::size_t>(i)];
        if (proj == 0.0) continue;
        double err = 0.0;
        cplx v = ray_lk(comp.radial, std::abs(proj), tol_per_comp, &err);
        if (proj < 0.0) v = std::conj(v);
        out.value += comp.weight * v;
        out.abs_error += comp.weight * err;
    }
    const double allowed = std::max(1e-8, 1e-6 * std::abs(out.value));
    if (out.abs_error > allowed)
        throw NumericError("cumulant: quadrature error " + std::to_string(out.abs_error) +
                           " exceeds tolerance");
    return out;
}

CumulantResult mapped_cumulant(const MappingKernel& k, const Triplet& rho,
                               std::span<const double> z) {
    CumulantResult out;
    bool all_zero = true;
    for (double zi : z)
        if (zi != 0.0) all_zero = false;
    if (all_zero) return out;

    std::vector<double> tz(z.size());
    auto C = [&](double t) -> cplx {
        for (std::size_t i = 0; i < z.size(); ++i) tz[i] = t * z[i];
        CumulantResult c = cumulant(rho, tz);
        return c.value;
    };
    auto piece = [&](double lo, double hi) {
        auto e = integrate_complex(
            [&](double v) -> cplx { return k.h(std::exp(v)) * C(std::exp(v)) * std::exp(v); },
            std::log(lo), std::log(hi), 1e-11, 1e-9, 20000);
        out.abs_error += e.abs_error;
        return e.value;
    };

    auto improper = [&](double ref, bool toward_zero,
                        const std::function<cplx(double, double)>& seg) -> cplx {
        // accumulates int over (0, ref] (toward_zero) or [ref, inf) in
        // geometric slabs, classifying convergence
        cplx total = 0.0;
        std::vector<double> re_parts, im_parts;
        double edge = ref;
        for (int j = 0; j < 48; ++j) {
            const double next = toward_zero ? edge / 4.0 : edge * 4.0;
            const cplx v = toward_zero ? seg(next, edge) : seg(edge, next);
            total += v;
            re_parts.push_back(total.real());
            im_parts.push_back(total.imag());
            edge = next;
            if (std::abs(v) < 1e-12 && j >= 2) break;
            if (j >= 5) {
                LimitResult lr = classify_limit(re_parts, true, 1e-11);
                LimitResult li = classify_limit(im_parts, true, 1e-11);
                if (lr.status == LimitStatus::diverging || li.status == LimitStatus::diverging)
                    throw NotDefinableError("mapped cumulant integral diverges near " +
                                            std::string(toward_zero ? "0" : "infinity"));
                if (lr.status == LimitStatus::converged && li.status == LimitStatus::converged &&
                    std::abs(v) < 1e-10 * (std::abs(total) + 1.0)) {
                    out.abs_error += lr.spread + li.spread;
                    return {lr.value, li.value};
                }
            }
        }
        return total;
    };

    if (k.two_sided()) {
        cplx value = piece(1e-2, 1.0);
        value += improper(1e-2, true, piece);
        value += improper(1.0, false, piece);
        auto piece_neg = [&](double lo, double hi) {
            auto e = integrate_complex(
                [&](double v) -> cplx {
                    const double u = std::exp(v);
                    return k.h(-u) * C(-u) * u;
                },
                std::log(lo), std::log(hi), 1e-11, 1e-9, 20000);
            out.abs_error += e.abs_error;
            return e.value;
        };
        value += piece_neg(1e-2, 1.0);
        value += improper(1e-2, true, piece_neg);
        value += improper(1.0, false, piece_neg);
        out.value = value;
        return out;
    }

    const double a = k.a(), b = k.b();
    double lo_ref = a, hi_ref = b;
    cplx total = 0.0;
    if (a == 0.0) {
        lo_ref = std::min(1.0, b < kInf ? 0.5 * b : 1.0);
        total += improper(lo_ref, true, piece);
    }
    if (b == kInf) {
        hi_ref = std::max(1.0, 2.0 * a);
        total += improper(hi_ref, false, piece);
    }
    if (lo_ref < hi_ref) total += piece(lo_ref, hi_ref);
    out.value = total;
    return out;
}

}  // namespace levyconj
