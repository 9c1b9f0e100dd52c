#include "levyconj/simulate.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <thread>

#include "levyconj/charfn.hpp"
#include "levyconj/mapping.hpp"

namespace levyconj {

namespace {

double uniform01(std::mt19937_64& rng) {
    return (rng() >> 11) * 0x1.0p-53;
}

double normal01(std::mt19937_64& rng) {
    double u;
    do {
        u = uniform01(rng);
    } while (u <= 0.0 || u >= 1.0);
    return normal_quantile(u);
}

unsigned poisson_draw(std::mt19937_64& rng, double lambda) {
    if (lambda <= 0.0) return 0;
    if (lambda <= 12.0) {
        const double L = std::exp(-lambda);
        double p = 1.0;
        unsigned k = 0;
        do {
            ++k;
            p *= uniform01(rng);
        } while (p > L);
        return k - 1;
    }
    return poisson_draw(rng, 0.5 * lambda) + poisson_draw(rng, lambda - 0.5 * lambda);
}

// sampler for jumps of |x| >= eps: flattens atoms and per-component densities
// into rate-weighted events with inverse-CDF radial draws
struct JumpSampler {
    struct Event {
        double rate;
        const Direction* xi;
        bool is_atom;
        double atom_r = 0.0;
        // density inverse CDF: log-radius cells with cell masses and local
        // power exponents
        std::vector<double> cell_log_r;   // size m+1
        std::vector<double> cell_cum;     // size m+1, cumulative mass, [0, rate]
        std::vector<double> cell_expo;    // size m, density ~ r^expo within cell
    };
    std::vector<Event> events;
    std::vector<double> cum_rates;
    double total_rate = 0.0;

    void add_atom(const Direction& xi, double rate, double r) {
        events.push_back({rate, &xi, true, r, {}, {}, {}});
    }
    void add_density(const Direction& xi, double weight, const RadialDensity& den, double eps) {
        auto [slo, shi] = density_support(den);
        const double lo = std::max(slo, eps);
        if (!(lo < shi)) return;
        const double hi_cap = shi == kInf ? std::max(lo * 1e12, 1e12) : shi;
        const int m = 512;
        Event ev;
        ev.is_atom = false;
        ev.xi = &xi;
        ev.cell_log_r.resize(m + 1);
        ev.cell_cum.assign(m + 1, 0.0);
        ev.cell_expo.resize(m);
        const double llo = std::log(lo), lhi = std::log(hi_cap);
        for (int i = 0; i <= m; ++i) ev.cell_log_r[static_cast<std::size_t>(i)] =
            llo + (lhi - llo) * i / m;
        double acc = 0.0;
        for (int i = 0; i < m; ++i) {
            const double r0 = std::exp(ev.cell_log_r[static_cast<std::size_t>(i)]);
            const double r1 = std::exp(ev.cell_log_r[static_cast<std::size_t>(i) + 1]);
            const double v0 = density_value(den, r0), v1 = density_value(den, r1);
            double expo = -2.0, mass;
            if (v0 > 0.0 && v1 > 0.0) {
                expo = (std::log(v1) - std::log(v0)) / (std::log(r1) - std::log(r0));
                mass = std::abs(expo + 1.0) > 1e-9
                           ? v0 * r0 * (std::pow(r1 / r0, expo + 1.0) - 1.0) / (expo + 1.0)
                           : v0 * r0 * std::log(r1 / r0);
            } else {
                mass = 0.5 * (v0 + v1) * (r1 - r0);
            }
            acc += weight * std::max(mass, 0.0);
            ev.cell_expo[static_cast<std::size_t>(i)] = expo;
            ev.cell_cum[static_cast<std::size_t>(i) + 1] = acc;
        }
        // tail mass beyond the cap (heavy tails): folded into the last cell
        if (shi == kInf) {
            TailInfo ti = tail_at_infinity(den);
            if (ti.touches && ti.index > 0.0 && ti.index < kInf) {
                const double extra =
                    weight * ti.coeff * std::pow(hi_cap, -ti.index) / ti.index;
                acc += extra;
                ev.cell_cum.back() = acc;
            }
        }
        ev.rate = acc;
        if (ev.rate > 0.0) events.push_back(std::move(ev));
    }
    void finalize() {
        cum_rates.clear();
        total_rate = 0.0;
        for (const auto& e : events) {
            total_rate += e.rate;
            cum_rates.push_back(total_rate);
        }
    }
    // draws radius and direction
    std::pair<double, const Direction*> draw(std::mt19937_64& rng) const {
        const double u = uniform01(rng) * total_rate;
        const std::size_t idx = static_cast<std::size_t>(
            std::lower_bound(cum_rates.begin(), cum_rates.end(), u) - cum_rates.begin());
        const Event& ev = events[std::min(idx, events.size() - 1)];
        if (ev.is_atom) return {ev.atom_r, ev.xi};
        const double v = uniform01(rng) * ev.rate;
        const std::size_t cell = static_cast<std::size_t>(
            std::upper_bound(ev.cell_cum.begin(), ev.cell_cum.end(), v) - ev.cell_cum.begin());
        const std::size_t i = std::clamp<std::size_t>(cell, 1, ev.cell_expo.size()) - 1;
        const double frac_mass = v - ev.cell_cum[i];
        const double cell_mass = ev.cell_cum[i + 1] - ev.cell_cum[i];
        const double w = cell_mass > 0.0 ? frac_mass / cell_mass : 0.5;
        const double r0 = std::exp(ev.cell_log_r[i]), r1 = std::exp(ev.cell_log_r[i + 1]);
        const double expo = ev.cell_expo[i];
        double r;
        if (std::abs(expo + 1.0) > 1e-9) {
            const double a = std::pow(r1 / r0, expo + 1.0);
            r = r0 * std::pow(1.0 + w * (a - 1.0), 1.0 / (expo + 1.0));
        } else {
            r = r0 * std::pow(r1 / r0, w);
        }
        return {r, ev.xi};
    }
};

}  // namespace

SampleBatch sample_mapped(const MappingKernel& k, const Triplet& rho, const SimConfig& cfg) {
    DomainReport dom = check_domain(k, rho);
    if (dom.in_de == Verdict::no)
        throw NotDefinableError("sample_mapped: input outside the essential domain");
    const int d = rho.dimension();
    const double c = k.c();

    // simulated interval
    double s_lo = 0.0, s_hi;
    const bool lower_truncated = k.condition() == ConditionClass::c2 ||
                                 k.condition() == ConditionClass::d ||
                                 (k.condition() == ConditionClass::c1_and_c2 && c < kInf &&
                                  k.b() == kInf);
    if (lower_truncated) s_lo = cfg.p_min.value_or(1e-4 * (c < kInf ? c : 1.0));
    if (c < kInf) {
        s_hi = k.two_sided() ? c - cfg.p_min.value_or(1e-4 * c) : c;
        if (cfg.q_max) s_hi = std::min(s_hi, *cfg.q_max);
    } else {
        if (cfg.q_max) {
            s_hi = *cfg.q_max;
        } else {
            // expand q until the omitted contribution bound falls under 1e-3:
            // int_q^c f^2 ds = int_a^{f(q)} h u^2 du and likewise for |f|
            double q = 1.0;
            for (int it = 0; it < 60; ++it) {
                const double fq = k.f(q);
                const double tail2 = integrate_improper(
                                         [&](double u) { return k.h(u) * u * u; },
                                         k.a(), fq, 1e-9, 1e-7)
                                         .value;
                if (tail2 < 1e-6) break;
                q *= 2.0;
            }
            s_hi = q;
        }
    }
    if (!(cfg.step > 0.0) || (c < kInf && !(cfg.step < c / 100.0)))
        throw std::invalid_argument("sample_mapped: step must be positive and < c/100");

    // time grid: geometric near truncated blow-up ends, uniform elsewhere
    std::vector<double> edges;
    edges.push_back(s_lo);
    double s = s_lo;
    if (lower_truncated && s_lo > 0.0) {
        double hstep = s_lo * 0.05;
        while (hstep < cfg.step && s + hstep < s_hi) {
            s += hstep;
            edges.push_back(s);
            hstep *= 1.05;
        }
    }
    const double upper_geo_from =
        k.two_sided() ? s_hi - std::min(0.05 * (s_hi - s_lo), 100.0 * cfg.step) : s_hi;
    while (s + cfg.step < upper_geo_from) {
        s += cfg.step;
        edges.push_back(s);
    }
    if (k.two_sided()) {
        // mirror-geometric zone toward the upper end where f -> -inf
        std::vector<double> tail_edges;
        double e = s_hi;
        double hstep = (s_hi - upper_geo_from) > 0.0 ? (s_hi - edges.back()) * 0.001 : cfg.step;
        hstep = std::max(hstep, 1e-9 * s_hi);
        while (e - hstep > edges.back() && tail_edges.size() < 4000) {
            tail_edges.push_back(e);
            e -= hstep;
            hstep *= 1.05;
        }
        for (auto it = tail_edges.rbegin(); it != tail_edges.rend(); ++it) edges.push_back(*it);
    } else {
        edges.push_back(s_hi);
    }
    const std::size_t n_steps = edges.size() - 1;

    // f at midpoints and per-step lengths
    std::vector<double> f_mid(n_steps), len(n_steps);
    for (std::size_t i = 0; i < n_steps; ++i) {
        const double mid = 0.5 * (edges[i] + edges[i + 1]);
        len[i] = edges[i + 1] - edges[i];
        f_mid[i] = k.f(std::min(std::max(mid, 1e-300), c * (1.0 - 1e-12)));
    }

    // effective drift: gamma - int_{eps<=|x|<=1} x nu  (cut1 compensation of
    // the retained jumps)
    std::vector<double> drift(static_cast<std::size_t>(d), 0.0);
    for (int i = 0; i < d; ++i) drift[static_cast<std::size_t>(i)] = rho.gamma[i];
    if (cfg.eps <= 1.0) {
        LevyIntegral w = levy_integral_window(rho.levy, vector_integrand(d), cfg.eps, 1.0, true,
                                              true);
        for (int i = 0; i < d; ++i) drift[static_cast<std::size_t>(i)] -= w.value[i];
    }

    // Gaussian factor: A (+ small-jump covariance under substitution policy)
    SymMatrix cov = rho.gaussian;
    if (cfg.policy == SmallJumpPolicy::gaussian_substitute) {
        RadialIntegrand xx;
        xx.arity = d * d;
        xx.eval = [d](const Direction& xi, double r, std::span<double> out) {
            for (int i = 0; i < d; ++i)
                for (int j = 0; j < d; ++j)
                    out[static_cast<std::size_t>(i * d + j)] =
                        r * r * xi[static_cast<std::size_t>(i)] *
                        xi[static_cast<std::size_t>(j)];
        };
        xx.power0 = 2.0;
        xx.powerinf = 2.0;
        LevyIntegral sj = levy_integral_window(rho.levy, xx, 0.0, cfg.eps, false, false);
        for (int i = 0; i < d; ++i)
            for (int j = 0; j < d; ++j)
                cov.at(i, j) += sj.value[static_cast<std::size_t>(i * d + j)];
    }
    const bool have_gauss = !cov.is_zero();
    SymMatrix chol = have_gauss ? cov.cholesky() : SymMatrix::zero(d);

    // retained-jump sampler
    JumpSampler sampler;
    for (const auto& comp : rho.levy.components) {
        for (const auto& atom : comp.radial.atoms)
            if (atom.r >= cfg.eps) sampler.add_atom(comp.xi, comp.weight * atom.mass, atom.r);
        if (has_density(comp.radial.density))
            sampler.add_density(comp.xi, comp.weight, comp.radial.density, cfg.eps);
    }
    sampler.finalize();
    const double horizon = s_hi - s_lo;
    const double expected_jumps = sampler.total_rate * horizon *
                                  static_cast<double>(cfg.n_samples);
    if (expected_jumps > 5e8)
        throw ResourceError(
            "sample_mapped: expected jump count " + std::to_string(expected_jumps) +
            " exceeds the budget; raise the small-jump cutoff eps");

    bool drift_nonzero = false;
    for (double v : drift)
        if (v != 0.0) drift_nonzero = true;
    // per-step deterministic drift contribution sum_i f(m_i) len_i * drift
    double f_len_sum = 0.0;
    for (std::size_t i = 0; i < n_steps; ++i) f_len_sum += f_mid[i] * len[i];

    SampleBatch batch;
    batch.n = cfg.n_samples;
    batch.dimension = d;
    batch.samples.assign(cfg.n_samples * static_cast<std::size_t>(d), 0.0);
    batch.config = cfg;
    batch.s_lo = s_lo;
    batch.s_hi = s_hi;
    batch.steps = n_steps;
    batch.stream_derivation = "sample j uses mt19937_64 seeded with splitmix64(seed ^ j)";

    std::vector<double> rate_step(n_steps);
    for (std::size_t i = 0; i < n_steps; ++i) rate_step[i] = sampler.total_rate * len[i];

    auto run_range = [&](std::size_t j0, std::size_t j1) {
        std::vector<double> y(static_cast<std::size_t>(d));
        std::vector<double> g(static_cast<std::size_t>(d));
        for (std::size_t j = j0; j < j1; ++j) {
            std::uint64_t st = cfg.seed ^ (0x9e3779b97f4a7c15ULL * (j + 1));
            std::mt19937_64 rng(splitmix64(st));
            std::fill(y.begin(), y.end(), 0.0);
            for (std::size_t i = 0; i < n_steps; ++i) {
                const unsigned nj = poisson_draw(rng, rate_step[i]);
                for (unsigned jj = 0; jj < nj; ++jj) {
                    auto [r, xi] = sampler.draw(rng);
                    for (int cdim = 0; cdim < d; ++cdim)
                        y[static_cast<std::size_t>(cdim)] +=
                            f_mid[i] * r * (*xi)[static_cast<std::size_t>(cdim)];
                }
                if (have_gauss) {
                    const double sq = std::sqrt(len[i]);
                    for (int cdim = 0; cdim < d; ++cdim)
                        g[static_cast<std::size_t>(cdim)] = normal01(rng);
                    for (int r_i = 0; r_i < d; ++r_i) {
                        double acc = 0.0;
                        for (int cdim = 0; cdim <= r_i; ++cdim)
                            acc += chol.at(r_i, cdim) * g[static_cast<std::size_t>(cdim)];
                        y[static_cast<std::size_t>(r_i)] += f_mid[i] * sq * acc;
                    }
                }
            }
            if (drift_nonzero)
                for (int cdim = 0; cdim < d; ++cdim)
                    y[static_cast<std::size_t>(cdim)] +=
                        f_len_sum * drift[static_cast<std::size_t>(cdim)];
            for (int cdim = 0; cdim < d; ++cdim)
                batch.samples[j * static_cast<std::size_t>(d) +
                              static_cast<std::size_t>(cdim)] =
                    y[static_cast<std::size_t>(cdim)];
        }
    };

    const int n_threads = std::max(1, cfg.threads);
    if (n_threads == 1) {
        run_range(0, cfg.n_samples);
    } else {
        std::vector<std::thread> workers;
        const std::size_t chunk = (cfg.n_samples + n_threads - 1) / n_threads;
        for (int w = 0; w < n_threads; ++w) {
            const std::size_t j0 = std::min(cfg.n_samples, w * chunk);
            const std::size_t j1 = std::min(cfg.n_samples, j0 + chunk);
            if (j0 < j1) workers.emplace_back(run_range, j0, j1);
        }
        for (auto& t : workers) t.join();
    }
    return batch;
}

std::vector<EcfRow> empirical_cf(const SampleBatch& batch,
                                 const std::vector<std::vector<double>>& z_grid, int bootstrap) {
    if (batch.n < 100) throw std::invalid_argument("empirical_cf: need at least 100 samples");
    const std::size_t n = batch.n;
    const int d = batch.dimension;

    // multinomial bootstrap counts, shared across z
    std::vector<std::uint8_t> counts;
    if (bootstrap > 0) {
        counts.assign(static_cast<std::size_t>(bootstrap) * n, 0);
        for (int r = 0; r < bootstrap; ++r) {
            std::uint64_t st = batch.config.seed ^ 0xb5ad4eceda1ce2a9ULL ^
                               (0x2545f4914f6cdd1dULL * (r + 1));
            std::mt19937_64 rng(splitmix64(st));
            std::uint8_t* row = counts.data() + static_cast<std::size_t>(r) * n;
            for (std::size_t i = 0; i < n; ++i) {
                const std::size_t idx = static_cast<std::size_t>(uniform01(rng) * n);
                std::uint8_t& c = row[std::min(idx, n - 1)];
                if (c < 255) ++c;
            }
        }
    }

    std::vector<EcfRow> rows(z_grid.size());
    auto work = [&](std::size_t zi) {
        const auto& z = z_grid[zi];
        std::vector<std::complex<double>> e(n);
        std::complex<double> mean = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            double dot = 0.0;
            for (int c = 0; c < d; ++c) dot += z[static_cast<std::size_t>(c)] * batch.at(i, c);
            e[i] = std::complex<double>(std::cos(dot), std::sin(dot));
            mean += e[i];
        }
        mean /= static_cast<double>(n);
        EcfRow row;
        row.z = z;
        row.ecf = mean;
        if (bootstrap > 0) {
            double sr = 0.0, sr2 = 0.0, si = 0.0, si2 = 0.0;
            for (int r = 0; r < bootstrap; ++r) {
                const std::uint8_t* cr = counts.data() + static_cast<std::size_t>(r) * n;
                std::complex<double> acc = 0.0;
                for (std::size_t i = 0; i < n; ++i)
                    if (cr[i]) acc += static_cast<double>(cr[i]) * e[i];
                acc /= static_cast<double>(n);
                sr += acc.real();
                sr2 += acc.real() * acc.real();
                si += acc.imag();
                si2 += acc.imag() * acc.imag();
            }
            const double vr = std::max(0.0, sr2 / bootstrap - (sr / bootstrap) * (sr / bootstrap));
            const double vi = std::max(0.0, si2 / bootstrap - (si / bootstrap) * (si / bootstrap));
            row.stderr_boot = std::sqrt(vr + vi);
        }
        rows[zi] = std::move(row);
    };
    const int n_threads = std::max(1, batch.config.threads);
    if (n_threads == 1) {
        for (std::size_t zi = 0; zi < z_grid.size(); ++zi) work(zi);
    } else {
        std::vector<std::thread> workers;
        std::atomic<std::size_t> next{0};
        for (int w = 0; w < n_threads; ++w)
            workers.emplace_back([&] {
                for (;;) {
                    const std::size_t zi = next.fetch_add(1);
                    if (zi >= z_grid.size()) return;
                    work(zi);
                }
            });
        for (auto& t : workers) t.join();
    }
    return rows;
}

DiscrepancyReport cf_discrepancy(const MappingKernel& k, const Triplet& rho,
                                 const SimConfig& cfg,
                                 const std::vector<std::vector<double>>& z_grid) {
    SampleBatch batch = sample_mapped(k, rho, cfg);
    std::vector<EcfRow> rows = empirical_cf(batch, z_grid);
    DiscrepancyReport rep;
    std::size_t within = 0;
    for (const auto& row : rows) {
        CumulantResult c = mapped_cumulant(k, rho, row.z);
        const std::complex<double> analytic = std::exp(c.value);
        const double diff = std::abs(row.ecf - analytic);
        rep.sup = std::max(rep.sup, diff);
        if (diff <= 2.0 * row.stderr_boot) ++within;
        rep.rows.push_back({row.z, row.ecf, analytic, row.stderr_boot, diff});
    }
    rep.frac_within_2se = rows.empty() ? 0.0
                                       : static_cast<double>(within) /
                                             static_cast<double>(rows.size());
    return rep;
}

}  // namespace levyconj
