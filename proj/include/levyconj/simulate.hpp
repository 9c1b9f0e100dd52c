#pragma once

#include <complex>
#include <cstdint>
#include <optional>
#include <vector>

#include "levyconj/kernel.hpp"
#include "levyconj/measure_core.hpp"

namespace levyconj {

enum class SmallJumpPolicy { drop_recompensate, gaussian_substitute };

struct SimConfig {
    std::size_t n_samples = 10000;
    double step = 1e-3;                 // uniform step width
    std::optional<double> q_max;        // truncation toward c for int_0^{c-} kernels
    std::optional<double> p_min;        // truncation toward 0 for int_{0+}^c kernels
    double eps = 1e-3;                  // small-jump cutoff
    SmallJumpPolicy policy = SmallJumpPolicy::drop_recompensate;
    std::uint64_t seed = 0;
    int threads = 1;
};

struct SampleBatch {
    std::size_t n = 0;
    int dimension = 1;
    std::vector<double> samples;  // row-major n x d
    SimConfig config;
    double s_lo = 0.0, s_hi = 0.0;  // simulated parameter interval
    std::size_t steps = 0;
    std::string stream_derivation;  // how per-sample RNG streams derive from the seed

    double at(std::size_t i, int c) const {
        return samples[i * static_cast<std::size_t>(dimension) + static_cast<std::size_t>(c)];
    }
};

struct ResourceError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// Monte Carlo draws of the improper stochastic integral int f(s) dX_s with
/// X the Levy process of rho. Steps use f at interval midpoints; the grid is
/// geometric near ends where f blows up. Deterministic in the config
/// (including thread count): each sample owns an RNG stream derived from
/// (seed, sample index).
SampleBatch sample_mapped(const MappingKernel& k, const Triplet& rho, const SimConfig& cfg);

struct EcfRow {
    std::vector<double> z;
    std::complex<double> ecf;
    double stderr_boot = 0.0;
};

/// Empirical characteristic function with bootstrap standard errors
/// (resample seeds derived from the batch seed).
std::vector<EcfRow> empirical_cf(const SampleBatch& batch,
                                 const std::vector<std::vector<double>>& z_grid,
                                 int bootstrap = 200);

struct DiscrepancyReport {
    double sup = 0.0;
    double frac_within_2se = 0.0;
    struct Row {
        std::vector<double> z;
        std::complex<double> ecf;
        std::complex<double> analytic;
        double stderr_boot;
        double abs_diff;
    };
    std::vector<Row> rows;
};

/// Simulates, then compares the empirical characteristic function against
/// exp(mapped_cumulant) over the grid.
DiscrepancyReport cf_discrepancy(const MappingKernel& k, const Triplet& rho,
                                 const SimConfig& cfg,
                                 const std::vector<std::vector<double>>& z_grid);

}  // namespace levyconj
