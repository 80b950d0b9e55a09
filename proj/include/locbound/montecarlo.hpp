#pragma once

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include "locbound/asymptotics.hpp"
#include "locbound/crlb.hpp"
#include "locbound/geometry.hpp"

namespace locbound {

// ----------------------------------------------------------------------------
// Trial batches
// ----------------------------------------------------------------------------

/// Monte Carlo result set. Finite traces are kept in trial order next to
/// their originating trial indices; singular draws are counted, never
/// silently dropped. samples.size() + singular_count == trials always.
struct TrialBatch {
    Modality modality;
    GeometryModel model;
    std::size_t n = 0;
    std::uint64_t trials = 0;
    SeedSpec seed;
    std::vector<double> samples;               // finite traces [m^2]
    std::vector<std::uint64_t> sample_trials;  // trial index per sample
    std::uint64_t singular_count = 0;
};

/**
 * Runs `trials` independent deployments: trial t samples n anchors from the
 * substream (seed, t) and evaluates the closed-form trace.
 *
 * The result is a pure function of (modality, model, n, trials, seed):
 * trials may execute on any number of workers in any order, output is
 * always trial-index ordered and bit-identical. workers = 0 uses the
 * hardware concurrency.
 *
 * Pairing: RSS/bearing require an annulus model; TOA accepts either.
 */
TrialBatch run_batch(const Modality& modality, const GeometryModel& model,
                     std::size_t n, std::uint64_t trials, SeedSpec seed,
                     unsigned workers = 0);

// ----------------------------------------------------------------------------
// Empirical distribution
// ----------------------------------------------------------------------------

/// Right-continuous empirical CDF with steps k/N at the sorted samples.
class Ecdf {
public:
    explicit Ecdf(std::vector<double> samples);

    double operator()(double x) const;
    const std::vector<double>& sorted() const noexcept { return sorted_; }

private:
    std::vector<double> sorted_;
};

/// ECDF over the finite samples of a batch; throws std::invalid_argument
/// when the batch holds none.
Ecdf ecdf(const TrialBatch& batch);

/// sup_x |Ecdf(x) - approx_cdf(x)| evaluated on both sides of every step.
double ks_distance(const Ecdf& empirical, const ApproxDistribution& dist);

// ----------------------------------------------------------------------------
// Reports
// ----------------------------------------------------------------------------

/// Relative errors follow the simulation-first convention:
/// (empirical - formula) / empirical.
struct ErrorReport {
    double empirical_mean = 0.0;
    double empirical_std = 0.0; // unbiased (N-1) estimator
    double formula_mean = 0.0;
    double formula_std = 0.0;
    double relative_error_mean = 0.0;
    double relative_error_std = 0.0;
    double ks_distance = 0.0;
};

/// Requires at least two finite samples.
ErrorReport error_report(const TrialBatch& batch, const ApproxDistribution& dist);

/// Means of the finite samples over `blocks` disjoint equal trial ranges.
/// converged is false when the block means spread more than 10% of the
/// overall mean; small-n heavy tails (where the trace mean may not exist)
/// surface here as non-convergence instead of a bogus point estimate.
struct StabilityReport {
    std::vector<double> block_means;
    double overall_mean = 0.0;
    double max_relative_spread = 0.0;
    bool converged = false;
};

StabilityReport stability_report(const TrialBatch& batch, std::size_t blocks);

/// Fixed-width density histogram, bin width by the Freedman-Diaconis rule.
struct Histogram {
    double lo = 0.0;
    double bin_width = 0.0;
    std::vector<std::uint64_t> counts;
    std::vector<double> density; // counts / (N * bin_width)

    double center(std::size_t bin) const {
        return lo + (static_cast<double>(bin) + 0.5) * bin_width;
    }
};

Histogram density_histogram(const TrialBatch& batch);

// ----------------------------------------------------------------------------
// Serialization
// ----------------------------------------------------------------------------

/// CSV with header "trial,trace"; one row per finite sample, 17 significant
/// digits.
void write_batch_csv(std::ostream& out, const TrialBatch& batch);

/// JSON summary: counts, moments, seed and run parameters.
std::string batch_summary_json(const TrialBatch& batch);

} // namespace locbound
