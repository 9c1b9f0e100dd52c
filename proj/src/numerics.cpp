#include "levyconj/numerics.hpp"

#include <algorithm>
#include <cmath>
#include <queue>
#include <stdexcept>

namespace levyconj {

namespace {

// Gauss-Kronrod 7-15 nodes/weights on [-1,1] (QUADPACK dqk15).
constexpr double kXgk[8] = {
    0.991455371120812639206854697526329, 0.949107912342758524526189684047851,
    0.864864423359769072789712788640926, 0.741531185599394439863864773280788,
    0.586087235467691130294144838258730, 0.405845151377397166906606412076961,
    0.207784955007898467600689403773245, 0.000000000000000000000000000000000};
constexpr double kWgk[8] = {
    0.022935322010529224963732008058970, 0.063092092629978553290700663189204,
    0.104790010322250183839876322541518, 0.140653259715525918745189590510238,
    0.169004726639267902826583426598550, 0.190350578064785409913256402421014,
    0.204432940075298892414161999234649, 0.209482141084727828012999174891714};
constexpr double kWg[4] = {
    0.129484966168869693270611432679082, 0.279705391489276667901467771423780,
    0.381830050505118944950369775488975, 0.417959183673469387755102040816327};

template <typename T>
struct Panel {
    double lo, hi;
    T value;
    double error;
};

template <typename T, typename F>
Panel<T> gk15(const F& f, double lo, double hi, std::size_t& evals) {
    const double c = 0.5 * (lo + hi), h = 0.5 * (hi - lo);
    T fc = f(c);
    T kron = kWgk[7] * fc;
    T gauss = kWg[3] * fc;
    for (int j = 0; j < 7; ++j) {
        const double dx = h * kXgk[j];
        T f1 = f(c - dx), f2 = f(c + dx);
        kron += kWgk[j] * (f1 + f2);
        if (j % 2 == 1) gauss += kWg[j / 2] * (f1 + f2);
    }
    evals += 15;
    kron *= h;
    gauss *= h;
    double err = std::abs(kron - gauss);
    // QUADPACK-style sharpening of the raw difference.
    if (err > 0.0) err = std::pow(200.0 * err, 1.5);
    double scale = std::abs(kron);
    if (scale > 0.0 && err > scale) err = scale;
    return {lo, hi, kron, std::max(err, std::abs(kron - gauss))};
}

template <typename T, typename F>
void run_adaptive(const F& f, double lo, double hi, double abs_tol, double rel_tol,
                  std::size_t max_intervals, std::span<const double> breakpoints, T& value,
                  double& error, bool& converged, std::size_t& evals) {
    value = T{};
    error = 0.0;
    converged = true;
    evals = 0;
    if (!(lo < hi)) {
        if (lo == hi) return;
        throw std::invalid_argument("integrate: lo > hi");
    }
    std::vector<double> seams;
    seams.push_back(lo);
    for (double b : breakpoints)
        if (b > lo && b < hi) seams.push_back(b);
    seams.push_back(hi);
    std::sort(seams.begin(), seams.end());
    seams.erase(std::unique(seams.begin(), seams.end()), seams.end());

    auto cmp = [](const Panel<T>& a, const Panel<T>& b) { return a.error < b.error; };
    std::priority_queue<Panel<T>, std::vector<Panel<T>>, decltype(cmp)> heap(cmp);
    value = T{};
    for (std::size_t i = 0; i + 1 < seams.size(); ++i) {
        Panel<T> p = gk15<T>(f, seams[i], seams[i + 1], evals);
        value += p.value;
        error += p.error;
        heap.push(p);
    }
    std::size_t intervals = seams.size() - 1;
    const auto target = [&]() { return std::max(abs_tol, rel_tol * std::abs(value)); };
    while (error > target() && intervals < max_intervals) {
        Panel<T> worst = heap.top();
        heap.pop();
        const double mid = 0.5 * (worst.lo + worst.hi);
        if (!(worst.lo < mid && mid < worst.hi)) {
            // interval at machine resolution; cannot refine further
            heap.push(worst);
            break;
        }
        Panel<T> left = gk15<T>(f, worst.lo, mid, evals);
        Panel<T> right = gk15<T>(f, mid, worst.hi, evals);
        value += left.value + right.value - worst.value;
        error += left.error + right.error - worst.error;
        heap.push(left);
        heap.push(right);
        ++intervals;
    }
    converged = error <= target();
}

// Aitken delta-squared acceleration of a sequence tail.
std::vector<double> aitken(std::span<const double> v) {
    if (v.size() < 3) return {v.begin(), v.end()};
    std::vector<double> out;
    out.reserve(v.size() - 2);
    for (std::size_t i = 0; i + 2 < v.size(); ++i) {
        const double d1 = v[i + 1] - v[i];
        const double d2 = v[i + 2] - 2.0 * v[i + 1] + v[i];
        if (std::abs(d2) > 1e-300 * std::abs(d1)) {
            out.push_back(v[i] - d1 * d1 / d2);
        } else {
            out.push_back(v[i + 2]);
        }
    }
    return out;
}

}  // namespace

IntegralEstimate integrate(const std::function<double(double)>& f, double lo, double hi,
                           double abs_tol, double rel_tol, std::size_t max_intervals,
                           std::span<const double> breakpoints) {
    IntegralEstimate r;
    run_adaptive<double>(f, lo, hi, abs_tol, rel_tol, max_intervals, breakpoints, r.value,
                         r.abs_error, r.converged, r.evaluations);
    return r;
}

ComplexIntegralEstimate integrate_complex(const std::function<std::complex<double>(double)>& f,
                                          double lo, double hi, double abs_tol, double rel_tol,
                                          std::size_t max_intervals,
                                          std::span<const double> breakpoints) {
    ComplexIntegralEstimate r;
    run_adaptive<std::complex<double>>(f, lo, hi, abs_tol, rel_tol, max_intervals, breakpoints,
                                       r.value, r.abs_error, r.converged, r.evaluations);
    return r;
}

LimitResult classify_limit(std::span<const double> partials, bool use_aitken, double eps,
                           double growth_factor) {
    LimitResult res;
    const std::size_t n = partials.size();
    if (n < 3) return res;

    double scale = 0.0;
    for (double v : partials) scale = std::max(scale, std::abs(v));
    scale = std::max(scale, 1.0);

    std::vector<double> seq(partials.begin(), partials.end());
    if (use_aitken) {
        seq = aitken(partials);
        if (seq.size() >= 3) seq = aitken(seq);
    }
    if (seq.size() >= 3) {
        const std::size_t m = seq.size();
        const double d1 = std::abs(seq[m - 1] - seq[m - 2]);
        const double d2 = std::abs(seq[m - 2] - seq[m - 3]);
        if (d1 < eps * scale && d2 < eps * scale) {
            res.status = LimitStatus::converged;
            res.value = seq[m - 1];
            res.spread = std::max(d1, d2);
            return res;
        }
    }
    // monotone unbounded growth in magnitude
    bool monotone = true;
    for (std::size_t i = 0; i + 1 < n; ++i)
        if (std::abs(partials[i + 1]) < std::abs(partials[i])) monotone = false;
    const double head = std::max(std::abs(partials[0]), eps);
    if (monotone && std::abs(partials[n - 1]) > growth_factor * head) {
        res.status = LimitStatus::diverging;
        res.value = partials[n - 1];
        return res;
    }
    res.status = LimitStatus::inconclusive;
    res.value = seq.empty() ? partials[n - 1] : seq.back();
    res.spread = scale;
    return res;
}

VectorLimitResult classify_limit_vec(const std::vector<std::vector<double>>& partials,
                                     bool use_aitken, double eps, double growth_factor) {
    VectorLimitResult out;
    if (partials.empty()) return out;
    const std::size_t dim = partials.front().size();
    out.value.assign(dim, 0.0);
    out.status = LimitStatus::converged;
    for (std::size_t c = 0; c < dim; ++c) {
        std::vector<double> comp;
        comp.reserve(partials.size());
        for (const auto& row : partials) comp.push_back(row[c]);
        LimitResult r = classify_limit(comp, use_aitken, eps, growth_factor);
        out.value[c] = r.value;
        out.spread = std::max(out.spread, r.spread);
        if (r.status == LimitStatus::diverging) {
            out.status = LimitStatus::diverging;
            return out;
        }
        if (r.status == LimitStatus::inconclusive) out.status = LimitStatus::inconclusive;
    }
    return out;
}

ImproperEstimate integrate_improper(const std::function<double(double)>& f, double lo, double hi,
                                    double abs_tol, double rel_tol) {
    ImproperEstimate out;
    if (!(lo < hi)) return out;
    auto seg = [&](double l, double h) {
        auto e = integrate([&](double t) { return f(std::exp(t)) * std::exp(t); }, std::log(l),
                           std::log(h), 0.25 * abs_tol, rel_tol);
        out.abs_error += e.abs_error;
        return e.value;
    };
    double core_lo = lo, core_hi = hi;
    if (lo == 0.0) core_lo = hi < kInf ? hi / 4.0 : 0.25;
    if (hi == kInf) core_hi = std::max({1.0, 4.0 * core_lo, lo > 0.0 ? 4.0 * lo : 1.0});
    if (!(core_lo < core_hi)) core_hi = core_lo * 4.0;
    out.value = seg(core_lo, std::min(core_hi, hi));

    auto expand = [&](bool down) {
        std::vector<double> parts{out.value};
        double edge = down ? core_lo : core_hi;
        int quiet = 0;
        for (int j = 0; j < 64; ++j) {
            const double next = down ? edge / 8.0 : edge * 8.0;
            const double v = down ? seg(next, edge) : seg(edge, next);
            out.value += v;
            parts.push_back(out.value);
            edge = next;
            const double floor = std::max(abs_tol, rel_tol * std::abs(out.value));
            quiet = std::abs(v) < 0.05 * floor ? quiet + 1 : 0;
            if (quiet >= 2) return;
            if (j >= 6) {
                LimitResult lr = classify_limit(parts, true, 1e-12);
                if (lr.status == LimitStatus::diverging) {
                    out.status = LimitStatus::diverging;
                    return;
                }
            }
        }
        LimitResult lr = classify_limit(parts, true, rel_tol);
        if (lr.status == LimitStatus::converged) {
            out.abs_error += lr.spread;
            out.value = lr.value;
        } else {
            out.status = lr.status == LimitStatus::diverging ? LimitStatus::diverging
                                                             : LimitStatus::inconclusive;
        }
    };
    if (lo == 0.0 && out.status == LimitStatus::converged) expand(true);
    if (hi == kInf && out.status == LimitStatus::converged) expand(false);
    return out;
}

double log_gamma(double x) {
    if (!(x > 0.0)) throw std::invalid_argument("log_gamma: requires x > 0");
    // Lanczos, g = 7, n = 9
    static const double coeff[9] = {0.99999999999980993,  676.5203681218851,
                                    -1259.1392167224028,  771.32342877765313,
                                    -176.61502916214059,  12.507343278686905,
                                    -0.13857109526572012, 9.9843695780195716e-6,
                                    1.5056327351493116e-7};
    if (x < 0.5) {
        // reflection to keep the series on x >= 0.5
        return std::log(M_PI / std::sin(M_PI * x)) - log_gamma(1.0 - x);
    }
    const double z = x - 1.0;
    double a = coeff[0];
    const double t = z + 7.5;
    for (int i = 1; i < 9; ++i) a += coeff[i] / (z + i);
    return 0.5 * std::log(2.0 * M_PI) + (z + 0.5) * std::log(t) - t + std::log(a);
}

double gamma_fn(double x) {
    if (x > 0.0) {
        if (x > 171.0) return kInf;
        return std::exp(log_gamma(x));
    }
    if (x == std::floor(x)) throw std::invalid_argument("gamma_fn: non-positive integer");
    return M_PI / (std::sin(M_PI * x) * std::exp(log_gamma(1.0 - x)));
}

double normal_cdf(double x) { return 0.5 * std::erfc(-x * M_SQRT1_2); }

double normal_quantile(double p) {
    // Wichura's algorithm AS241 (PPND16).
    if (!(p > 0.0 && p < 1.0)) {
        if (p == 0.0) return -kInf;
        if (p == 1.0) return kInf;
        throw std::invalid_argument("normal_quantile: p outside [0,1]");
    }
    const double q = p - 0.5;
    double r;
    if (std::abs(q) <= 0.425) {
        r = 0.180625 - q * q;
        return q *
               (((((((2.5090809287301226727e3 * r + 3.3430575583588128105e4) * r +
                     6.7265770927008700853e4) * r + 4.5921953931549871457e4) * r +
                   1.3731693765509461125e4) * r + 1.9715909503065514427e3) * r +
                 1.3314166789178437745e2) * r + 3.3871328727963666080e0) /
               (((((((5.2264952788528545610e3 * r + 2.8729085735721942674e4) * r +
                     3.9307895800092710610e4) * r + 2.1213794301586595867e4) * r +
                   5.3941960214247511077e3) * r + 6.8718700749205790830e2) * r +
                 4.2313330701600911252e1) * r + 1.0);
    }
    r = q < 0.0 ? p : 1.0 - p;
    r = std::sqrt(-std::log(r));
    double val;
    if (r <= 5.0) {
        r -= 1.6;
        val = (((((((7.74545014278341407640e-4 * r + 2.27238449892691845833e-2) * r +
                    2.41780725177450611770e-1) * r + 1.27045825245236838258e0) * r +
                  3.64784832476320460504e0) * r + 5.76949722146069140550e0) * r +
                4.63033784615654529590e0) * r + 1.42343711074968357734e0) /
              (((((((1.05075007164441684324e-9 * r + 5.47593808499534494600e-4) * r +
                    1.51986665636164571966e-2) * r + 1.48103976427480074590e-1) * r +
                  6.89767334985100004550e-1) * r + 1.67638483018380384940e0) * r +
                2.05319162663775882187e0) * r + 1.0);
    } else {
        r -= 5.0;
        val = (((((((2.01033439929228813265e-7 * r + 2.71155556874348757815e-5) * r +
                    1.24266094738807843860e-3) * r + 2.65321895265761230930e-2) * r +
                  2.96560571828504891230e-1) * r + 1.78482653991729133580e0) * r +
                5.46378491116411436990e0) * r + 6.65790464350110377720e0) /
              (((((((2.04426310338993978564e-15 * r + 1.42151175831644588870e-7) * r +
                    1.84631831751005468180e-5) * r + 7.86869131145613259100e-4) * r +
                  1.48753612908506148525e-2) * r + 1.36929880922735805310e-1) * r +
                5.99832206555887937690e-1) * r + 1.0);
    }
    return q < 0.0 ? -val : val;
}

RootResult find_root(const std::function<double(double)>& f, double lo, double hi, double x_tol,
                     double f_tol, int max_iter) {
    double a = lo, b = hi;
    double fa = f(a), fb = f(b);
    RootResult res;
    if (fa == 0.0) return {a, 0, true};
    if (fb == 0.0) return {b, 0, true};
    if ((fa > 0.0) == (fb > 0.0))
        throw std::invalid_argument("find_root: interval does not bracket a root");
    double c = a, fc = fa, d = b - a, e = d;
    for (int iter = 1; iter <= max_iter; ++iter) {
        if ((fb > 0.0) == (fc > 0.0)) {
            c = a;
            fc = fa;
            d = e = b - a;
        }
        if (std::abs(fc) < std::abs(fb)) {
            a = b; b = c; c = a;
            fa = fb; fb = fc; fc = fa;
        }
        const double eps = std::numeric_limits<double>::epsilon();
        const double tol1 = 2.0 * eps * std::abs(b) + 0.5 * x_tol;
        const double xm = 0.5 * (c - b);
        if (std::abs(xm) <= tol1 || fb == 0.0 || std::abs(fb) <= f_tol) {
            res.root = b;
            res.iterations = iter;
            res.converged = true;
            return res;
        }
        if (std::abs(e) >= tol1 && std::abs(fa) > std::abs(fb)) {
            double p, q, r;
            const double s = fb / fa;
            if (a == c) {
                p = 2.0 * xm * s;
                q = 1.0 - s;
            } else {
                q = fa / fc;
                r = fb / fc;
                p = s * (2.0 * xm * q * (q - r) - (b - a) * (r - 1.0));
                q = (q - 1.0) * (r - 1.0) * (s - 1.0);
            }
            if (p > 0.0) q = -q;
            p = std::abs(p);
            if (2.0 * p < std::min(3.0 * xm * q - std::abs(tol1 * q), std::abs(e * q))) {
                e = d;
                d = p / q;
            } else {
                d = xm;
                e = d;
            }
        } else {
            d = xm;
            e = d;
        }
        a = b;
        fa = fb;
        b += (std::abs(d) > tol1) ? d : (xm > 0.0 ? tol1 : -tol1);
        fb = f(b);
    }
    res.root = b;
    res.iterations = max_iter;
    res.converged = false;
    return res;
}

std::uint64_t splitmix64(std::uint64_t& state) {
    std::uint64_t z = (state += 0x9e3779b97f4a7c15ULL);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

std::uint64_t mix64(std::uint64_t x) {
    std::uint64_t s = x;
    return splitmix64(s);
}

}  // namespace levyconj
