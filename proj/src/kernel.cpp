#include "levyconj/kernel.hpp"

#include <cmath>
#include <sstream>
#include <stdexcept>

#include "levyconj/measure_core.hpp"

namespace levyconj {

namespace {

double pow_int_or_real(double x, double e) { return std::pow(x, e); }

// int over (lo,hi) of F on a log scale with probe-driven cuts at improper
// ends; returns +inf if expanding partial sums keep growing.
double improper_positive_integral(const std::function<double(double)>& F, double lo, double hi,
                                  double tol) {
    double cut_lo = lo, cut_hi = hi;
    double total = 0.0;
    if (lo == 0.0) cut_lo = 1.0e-2 * (hi == kInf ? 1.0 : hi);
    if (hi == kInf) cut_hi = std::max(1.0, 100.0 * cut_lo);
    auto seg = [&](double l, double h) {
        auto e = integrate([&](double t) { return F(std::exp(t)) * std::exp(t); }, std::log(l),
                           std::log(h), tol, 1e-10);
        return e.value;
    };
    if (cut_lo < cut_hi) total = seg(cut_lo, cut_hi);
    if (lo == 0.0) {
        std::vector<double> parts{total};
        double edge = cut_lo;
        for (int j = 0; j < 40; ++j) {
            const double next = edge / 8.0;
            const double v = seg(next, edge);
            total += v;
            parts.push_back(total);
            edge = next;
            if (v < 0.1 * tol && j > 2) break;
            if (j >= 6) {
                LimitResult lr = classify_limit(parts, true, 1e-12);
                if (lr.status == LimitStatus::diverging) return kInf;
            }
        }
        LimitResult lr = classify_limit(parts, true, 1e-10);
        if (lr.status == LimitStatus::diverging) return kInf;
        if (lr.status == LimitStatus::inconclusive && parts.size() > 30) return kInf;
    }
    if (hi == kInf) {
        std::vector<double> parts{total};
        double edge = cut_hi;
        for (int j = 0; j < 40; ++j) {
            const double next = edge * 8.0;
            const double v = seg(edge, next);
            total += v;
            parts.push_back(total);
            edge = next;
            if (v < 0.1 * tol && j > 2) break;
            if (j >= 6) {
                LimitResult lr = classify_limit(parts, true, 1e-12);
                if (lr.status == LimitStatus::diverging) return kInf;
            }
        }
        LimitResult lr = classify_limit(parts, true, 1e-10);
        if (lr.status == LimitStatus::diverging) return kInf;
        if (lr.status == LimitStatus::inconclusive && parts.size() > 30) return kInf;
    }
    return total;
}

}  // namespace

MappingKernel MappingKernel::build(KernelFamily family, bool conjugated) {
    if (const auto* bp = std::get_if<BarPhiFamily>(&family)) {
        if (!(bp->p > 0.0) || !(bp->alpha < 2.0))
            throw std::invalid_argument("kernel: requires p > 0 and alpha < 2");
    } else if (const auto* lq = std::get_if<LambdaQFamily>(&family)) {
        if (!(lq->q > 0.0) || !(lq->alpha < 2.0))
            throw std::invalid_argument("kernel: requires q > 0 and alpha < 2");
    } else if (const auto* ps = std::get_if<PsiFamily>(&family)) {
        if (!(ps->beta > 0.0) || !(ps->alpha < 2.0))
            throw std::invalid_argument("kernel: requires beta > 0 and alpha < 2");
    } else if (const auto* cc = std::get_if<CustomCFamily>(&family)) {
        if (!cc->h) throw std::invalid_argument("kernel: custom evaluator missing");
        if (!(cc->a >= 0.0) || !(cc->b > cc->a))
            throw std::invalid_argument("kernel: custom domain requires 0 <= a < b");
    } else if (const auto* cd = std::get_if<CustomDFamily>(&family)) {
        if (!cd->h) throw std::invalid_argument("kernel: custom evaluator missing");
    }
    MappingKernel k;
    k.family_ = std::move(family);
    k.conjugated_ = conjugated;
    k.classify();
    return k;
}

MappingKernel MappingKernel::conjugate() const {
    return build(family_, !conjugated_);
}

void MappingKernel::classify() {
    two_sided_ = std::holds_alternative<GaussTypeGFamily>(family_) ||
                 std::holds_alternative<CustomDFamily>(family_);
    if (two_sided_) {
        condition_ = ConditionClass::d;
        a_ = -kInf;
        b_ = kInf;
        if (std::holds_alternative<CustomDFamily>(family_)) {
            const double m0 = improper_positive_integral(
                [&](double u) { return h(u) + h(-u); }, 0.0, kInf, 1e-11);
            const double m2 = improper_positive_integral(
                [&](double u) { return (h(u) + h(-u)) * u * u; }, 0.0, kInf, 1e-11);
            if (!(m0 < kInf) || !(m2 < kInf))
                throw std::invalid_argument("kernel: condition (D) integral diverges");
            c_ = m0;
        } else {
            c_ = 1.0;  // normal density integrates to one, conjugated or not
        }
        return;
    }

    // base-family endpoints; conjugation maps (a,b) -> (1/b, 1/a)
    double base_a = 0.0, base_b = 1.0;
    double alpha = 0.0;
    bool have_named = true;
    if (const auto* bp = std::get_if<BarPhiFamily>(&family_)) {
        base_a = 0.0;
        base_b = 1.0;
        alpha = bp->alpha;
    } else if (const auto* lq = std::get_if<LambdaQFamily>(&family_)) {
        base_a = 0.0;
        base_b = 1.0;
        alpha = lq->alpha;
    } else if (const auto* ps = std::get_if<PsiFamily>(&family_)) {
        base_a = 0.0;
        base_b = kInf;
        alpha = ps->alpha;
    } else {
        const auto& cc = std::get<CustomCFamily>(family_);
        base_a = cc.a;
        base_b = cc.b;
        have_named = false;
    }
    if (conjugated_) {
        a_ = base_b == kInf ? 0.0 : 1.0 / base_b;
        b_ = base_a == 0.0 ? kInf : 1.0 / base_a;
    } else {
        a_ = base_a;
        b_ = base_b;
    }

    if (have_named) {
        // base family satisfies C1 for alpha < 2, and C2 iff alpha < 0;
        // conjugation swaps C1 and C2.
        const bool base_c1 = true;
        const bool base_c2 = alpha < 0.0;
        const bool c1 = conjugated_ ? base_c2 : base_c1;
        const bool c2 = conjugated_ ? base_c1 : base_c2;
        condition_ = c1 && c2 ? ConditionClass::c1_and_c2
                              : (c1 ? ConditionClass::c1 : ConditionClass::c2);
        c_ = h_moment(0.0);
        return;
    }
    // custom one-sided kernel: probe both defining integrals
    const double m2 = improper_positive_integral([&](double u) { return h(u) * u * u; }, a_, b_,
                                                 1e-11);
    const double m0 = improper_positive_integral([&](double u) { return h(u); }, a_, b_, 1e-11);
    const bool c1 = m2 < kInf, c2 = m0 < kInf;
    if (!c1 && !c2)
        throw std::invalid_argument("kernel: custom h satisfies neither (C1) nor (C2)");
    condition_ = c1 && c2 ? ConditionClass::c1_and_c2
                          : (c1 ? ConditionClass::c1 : ConditionClass::c2);
    c_ = m0;
}

double MappingKernel::h(double u) const {
    auto base_eval = [this](double v) -> double {
        if (const auto* bp = std::get_if<BarPhiFamily>(&family_)) {
            if (v <= 0.0 || v >= 1.0) return 0.0;
            return std::exp(-log_gamma(bp->p) + (bp->p - 1.0) * std::log1p(-v) -
                            (bp->alpha + 1.0) * std::log(v));
        }
        if (const auto* lq = std::get_if<LambdaQFamily>(&family_)) {
            if (v <= 0.0 || v >= 1.0) return 0.0;
            return std::exp(-log_gamma(lq->q) + (lq->q - 1.0) * std::log(-std::log(v)) -
                            (lq->alpha + 1.0) * std::log(v));
        }
        if (const auto* ps = std::get_if<PsiFamily>(&family_)) {
            if (v <= 0.0) return 0.0;
            return std::exp(-(ps->alpha + 1.0) * std::log(v) - std::pow(v, ps->beta));
        }
        if (std::get_if<GaussTypeGFamily>(&family_)) {
            if (v == 0.0) return 0.0;
            return std::exp(-0.5 * v * v) / std::sqrt(2.0 * M_PI);
        }
        if (const auto* cc = std::get_if<CustomCFamily>(&family_)) {
            if (v <= cc->a || v >= cc->b) return 0.0;
            return cc->h(v);
        }
        const auto& cd = std::get<CustomDFamily>(family_);
        if (v == 0.0) return 0.0;
        return cd.h(v);
    };
    if (!conjugated_) return base_eval(u);
    if (u == 0.0) return 0.0;
    return base_eval(1.0 / u) * pow_int_or_real(std::abs(u), -4.0);
}

double MappingKernel::h_moment(double k) const {
    if (conjugated_) {
        MappingKernel base = *this;
        base.conjugated_ = false;
        base.classify();
        return base.h_moment(2.0 - k);  // int h*(u) u^k du = int h(v) v^{2-k} dv
    }
    if (const auto* bp = std::get_if<BarPhiFamily>(&family_)) {
        if (!(k > bp->alpha)) return kInf;
        return std::exp(log_gamma(k - bp->alpha) - log_gamma(bp->p + k - bp->alpha));
    }
    if (const auto* lq = std::get_if<LambdaQFamily>(&family_)) {
        if (!(k > lq->alpha)) return kInf;
        return std::pow(k - lq->alpha, -lq->q);
    }
    if (const auto* ps = std::get_if<PsiFamily>(&family_)) {
        if (!(k > ps->alpha)) return kInf;
        return gamma_fn((k - ps->alpha) / ps->beta) / ps->beta;
    }
    if (std::holds_alternative<GaussTypeGFamily>(family_) ||
        std::holds_alternative<CustomDFamily>(family_)) {
        auto [pos, neg] = h_moment_two_sided(k);
        return pos + neg;
    }
    return improper_positive_integral([&](double u) { return h(u) * std::pow(u, k); }, a_, b_,
                                      1e-11);
}

std::pair<double, double> MappingKernel::h_moment_two_sided(double k) const {
    if (!two_sided_) throw std::logic_error("h_moment_two_sided: one-sided kernel");
    if (std::holds_alternative<GaussTypeGFamily>(family_) && !conjugated_) {
        // (2 pi)^{-1/2} int_0^inf u^k e^{-u^2/2} du = 2^{k/2 - 1} Gamma((k+1)/2) / sqrt(pi)
        const double half = std::exp((0.5 * k - 1.0) * std::log(2.0) +
                                     log_gamma(0.5 * (k + 1.0))) / std::sqrt(M_PI);
        return {half, half};
    }
    const double pos = improper_positive_integral(
        [&](double u) { return h(u) * std::pow(u, k); }, 0.0, kInf, 1e-11);
    const double neg = improper_positive_integral(
        [&](double u) { return h(-u) * std::pow(u, k); }, 0.0, kInf, 1e-11);
    return {pos, neg};
}

double MappingKernel::c_numeric() const {
    if (two_sided_)
        return improper_positive_integral([&](double u) { return h(u) + h(-u); }, 0.0, kInf,
                                          1e-11);
    return improper_positive_integral([&](double u) { return h(u); }, a_, b_, 1e-11);
}

double MappingKernel::g_numeric(double t) const {
    if (two_sided_) {
        // g(t) = int_{(t,inf)\{0}} h du
        double v = improper_positive_integral([&](double u) { return h(u); }, 1e-12, kInf, 1e-12);
        if (t < 0.0)
            v += improper_positive_integral([&](double u) { return h(-u); }, 1e-12, -t, 1e-12);
        else if (t > 0.0)
            v -= integrate([&](double u) { return h(std::exp(u)) * std::exp(u); },
                           std::log(1e-12), std::log(t), 1e-13, 1e-11)
                     .value;
        return v;
    }
    if (!(t > a_ && t < b_)) throw std::invalid_argument("g: argument outside (a,b)");
    if (b_ < kInf) {
        // split at the midpoint in log scale to keep endpoint behavior tame
        auto e = integrate([&](double v) { return h(std::exp(v)) * std::exp(v); }, std::log(t),
                           std::log(b_), 1e-13, 1e-11);
        return e.value;
    }
    return improper_positive_integral([&](double u) { return h(u); }, t, kInf, 1e-12);
}

double MappingKernel::g(double t) const {
    if (!two_sided_ && !(t > a_ && t < b_))
        throw std::invalid_argument("g: argument outside (a,b)");
    if (std::holds_alternative<GaussTypeGFamily>(family_) && !conjugated_)
        return normal_cdf(-t);
    if (!conjugated_) {
        if (const auto* bp = std::get_if<BarPhiFamily>(&family_)) {
            if (bp->p == 1.0) {
                if (bp->alpha == 0.0) return -std::log(t);
                return (std::pow(t, -bp->alpha) - 1.0) / bp->alpha;
            }
            if (bp->alpha == -1.0)
                return std::pow(1.0 - t, bp->p) / std::exp(log_gamma(bp->p + 1.0));
        }
        if (const auto* lq = std::get_if<LambdaQFamily>(&family_)) {
            if (lq->alpha == 0.0)
                return std::pow(-std::log(t), lq->q) / std::exp(log_gamma(lq->q + 1.0));
            if (lq->q == 1.0) return (std::pow(t, -lq->alpha) - 1.0) / lq->alpha;
        }
    } else {
        if (const auto* bp = std::get_if<BarPhiFamily>(&family_)) {
            if (bp->p == 1.0)
                return std::pow(t, -(2.0 - bp->alpha)) / (2.0 - bp->alpha);
        }
        if (const auto* lq = std::get_if<LambdaQFamily>(&family_)) {
            if (lq->q == 1.0)
                return std::pow(t, -(2.0 - lq->alpha)) / (2.0 - lq->alpha);
        }
    }
    return g_numeric(t);
}

double MappingKernel::f_numeric(double s) const {
    const double cc = c_;
    if (!(s > 0.0) || !(s < cc)) throw std::invalid_argument("f: argument outside (0,c)");
    // bracket [lo,hi] with g(lo) > s > g(hi)
    double lo, hi;
    if (two_sided_) {
        lo = -1.0;
        hi = 1.0;
        while (g_numeric(lo) < s && lo > -1e12) lo *= 4.0;
        while (g_numeric(hi) > s && hi < 1e12) hi *= 4.0;
    } else {
        double mid;
        if (a_ > 0.0 && b_ < kInf) mid = std::sqrt(a_ * b_);
        else if (b_ < kInf) mid = b_ / 2.0;
        else if (a_ > 0.0) mid = a_ * 2.0;
        else mid = 1.0;
        lo = mid;
        hi = mid;
        int guard = 0;
        while (g_numeric(lo) < s && ++guard < 4000) lo = a_ == 0.0 ? lo / 2.0 : a_ + (lo - a_) / 2.0;
        guard = 0;
        while (g_numeric(hi) > s && ++guard < 4000)
            hi = b_ == kInf ? hi * 2.0 : b_ - (b_ - hi) / 2.0;
    }
    const double f_tol = 1e-10 * std::max(1.0, s);
    auto fn = [&](double t) { return g_numeric(t) - s; };
    RootResult r = find_root(fn, lo, hi, 0.0, f_tol);
    if (!r.converged) throw NumericError("f: bracketed inversion of g failed to converge");
    return r.root;
}

double MappingKernel::f(double s) const {
    const double cc = c_;
    if (!(s > 0.0) || !(s < cc)) throw std::invalid_argument("f: argument outside (0,c)");
    if (!conjugated_) {
        if (const auto* bp = std::get_if<BarPhiFamily>(&family_)) {
            if (bp->p == 1.0) {
                if (bp->alpha == 0.0) return std::exp(-s);
                if (bp->alpha < 0.0)
                    return std::pow(1.0 - (-bp->alpha) * s, -1.0 / bp->alpha);
                return std::pow(1.0 + bp->alpha * s, -1.0 / bp->alpha);
            }
            if (bp->alpha == -1.0)
                return 1.0 - std::pow(std::exp(log_gamma(bp->p + 1.0)) * s, 1.0 / bp->p);
        }
        if (const auto* lq = std::get_if<LambdaQFamily>(&family_)) {
            if (lq->alpha == 0.0)
                return std::exp(-std::pow(std::exp(log_gamma(lq->q + 1.0)) * s, 1.0 / lq->q));
            if (lq->q == 1.0) {
                if (lq->alpha < 0.0)
                    return std::pow(1.0 - (-lq->alpha) * s, -1.0 / lq->alpha);
                return std::pow(1.0 + lq->alpha * s, -1.0 / lq->alpha);
            }
        }
        if (const auto* ps = std::get_if<PsiFamily>(&family_)) {
            if (ps->alpha == -ps->beta)
                return std::pow(-std::log(ps->beta * s), 1.0 / ps->beta);
            if (ps->alpha == -1.0 && ps->beta == 1.0) return -std::log(s);
        }
        if (std::holds_alternative<GaussTypeGFamily>(family_))
            return normal_quantile(1.0 - s);
    } else {
        if (const auto* bp = std::get_if<BarPhiFamily>(&family_)) {
            if (bp->p == 1.0) return std::pow((2.0 - bp->alpha) * s, -1.0 / (2.0 - bp->alpha));
        }
        if (const auto* lq = std::get_if<LambdaQFamily>(&family_)) {
            if (lq->q == 1.0) return std::pow((2.0 - lq->alpha) * s, -1.0 / (2.0 - lq->alpha));
        }
    }
    return f_numeric(s);
}

double MappingKernel::low_end_exponent() const {
    if (conjugated_) {
        MappingKernel base = *this;
        base.conjugated_ = false;
        base.classify();
        return -4.0 - base.high_end_exponent();
    }
    if (const auto* bp = std::get_if<BarPhiFamily>(&family_)) return -bp->alpha - 1.0;
    if (const auto* lq = std::get_if<LambdaQFamily>(&family_)) return -lq->alpha - 1.0;
    if (const auto* ps = std::get_if<PsiFamily>(&family_)) return -ps->alpha - 1.0;
    return 0.0;
}

double MappingKernel::high_end_exponent() const {
    if (conjugated_) {
        MappingKernel base = *this;
        base.conjugated_ = false;
        base.classify();
        return -4.0 - base.low_end_exponent();
    }
    if (std::get_if<BarPhiFamily>(&family_) || std::get_if<LambdaQFamily>(&family_))
        return 0.0;  // finite edge at b = 1
    return -kInf;     // super-polynomial decay at infinity
}

std::optional<double> MappingKernel::family_alpha() const {
    if (const auto* bp = std::get_if<BarPhiFamily>(&family_)) return bp->alpha;
    if (const auto* lq = std::get_if<LambdaQFamily>(&family_)) return lq->alpha;
    if (const auto* ps = std::get_if<PsiFamily>(&family_)) return ps->alpha;
    return std::nullopt;
}

std::string MappingKernel::describe() const {
    std::ostringstream os;
    if (const auto* bp = std::get_if<BarPhiFamily>(&family_))
        os << "bar_phi(p=" << bp->p << ",alpha=" << bp->alpha << ")";
    else if (const auto* lq = std::get_if<LambdaQFamily>(&family_))
        os << "lambda_q(q=" << lq->q << ",alpha=" << lq->alpha << ")";
    else if (const auto* ps = std::get_if<PsiFamily>(&family_))
        os << "psi(alpha=" << ps->alpha << ",beta=" << ps->beta << ")";
    else if (std::holds_alternative<GaussTypeGFamily>(family_))
        os << "gauss_type_g";
    else if (std::holds_alternative<CustomCFamily>(family_))
        os << "custom_c";
    else
        os << "custom_d";
    if (conjugated_) os << "*";
    return os.str();
}

AsymptoticReport asymptotic_check(const MappingKernel& k, AsymptoticProbe which) {
    const MappingKernel* base = &k;
    MappingKernel conj = k.conjugate();
    const MappingKernel& probe_kernel = which == AsymptoticProbe::f_at_c ? *base : conj;

    AsymptoticReport rep;
    const auto fam = k.family();
    auto fail = [&]() -> AsymptoticReport& {
        throw std::invalid_argument("asymptotic_check: unsupported kernel family");
    };
    if (std::holds_alternative<CustomCFamily>(fam) || std::holds_alternative<CustomDFamily>(fam) ||
        std::holds_alternative<GaussTypeGFamily>(fam))
        fail();

    std::vector<double> ss = which == AsymptoticProbe::f_at_c
                                 ? std::vector<double>{1e2, 1e4, 1e6}
                                 : std::vector<double>{1e-2, 1e-4, 1e-6};
    double alpha = *k.family_alpha();

    if (which == AsymptoticProbe::f_at_c) {
        if (!(probe_kernel.c() == kInf))
            throw std::invalid_argument("asymptotic_check: c is finite, no s->inf regime");
        if (alpha == 0.0) {
            // exponential decay: only the rate is specified
            rep.rate_only = true;
            double rate_expected = 1.0;
            if (const auto* bp = std::get_if<BarPhiFamily>(&fam))
                rate_expected = gamma_fn(bp->p);
            else if (std::get_if<PsiFamily>(&fam))
                rate_expected = 1.0;
            else if (const auto* lq = std::get_if<LambdaQFamily>(&fam)) {
                if (lq->q != 1.0)
                    throw std::invalid_argument(
                        "asymptotic_check: alpha=0 log-family decay is not pure-exponential");
                rate_expected = 1.0;
            }
            for (std::size_t i = 0; i + 1 < ss.size(); ++i) {
                const double f1 = probe_kernel.f(ss[i]);
                const double f2 = probe_kernel.f(ss[i + 1]);
                const double rate = (std::log(f1) - std::log(f2)) / (ss[i + 1] - ss[i]);
                rep.probes.push_back({ss[i + 1], f2,
                                      std::numeric_limits<double>::quiet_NaN(),
                                      rate / rate_expected});
            }
            return rep;
        }
        if (!(alpha > 0.0))
            throw std::invalid_argument("asymptotic_check: f_at_c needs alpha >= 0");
        for (double s : ss) {
            const double fv = probe_kernel.f(s);
            double asym;
            if (const auto* bp = std::get_if<BarPhiFamily>(&fam)) {
                asym = std::pow(alpha * gamma_fn(bp->p) * s, -1.0 / alpha);
            } else if (const auto* lq = std::get_if<LambdaQFamily>(&fam)) {
                asym = std::pow(alpha * gamma_fn(lq->q) * s, -1.0 / alpha) *
                       std::pow(std::log(s) / alpha, (lq->q - 1.0) / alpha);
            } else {
                asym = std::pow(alpha * s, -1.0 / alpha);
            }
            rep.probes.push_back({s, fv, asym, fv / asym});
        }
        return rep;
    }

    // f_star_at_0: the conjugate f near s -> 0, power asymptote with exponent
    // -1/(2-alpha) for every family
    for (double s : ss) {
        const double fv = probe_kernel.f(s);
        double asym;
        if (const auto* bp = std::get_if<BarPhiFamily>(&fam)) {
            asym = std::pow((2.0 - alpha) * gamma_fn(bp->p) * s, -1.0 / (2.0 - alpha));
        } else if (const auto* lq = std::get_if<LambdaQFamily>(&fam)) {
            asym = std::pow(2.0 - alpha, -lq->q / (2.0 - alpha)) *
                   std::pow(gamma_fn(lq->q) * s, -1.0 / (2.0 - alpha)) *
                   std::pow(-std::log(s), (lq->q - 1.0) / (2.0 - alpha));
        } else {
            asym = std::pow((2.0 - alpha) * s, -1.0 / (2.0 - alpha));
        }
        rep.probes.push_back({s, fv, asym, fv / asym});
    }
    return rep;
}

}  // namespace levyconj
