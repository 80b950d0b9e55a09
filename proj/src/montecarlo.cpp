#include "locbound/montecarlo.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <exception>
#include <limits>
#include <mutex>
#include <ostream>
#include <stdexcept>
#include <thread>

#include <json.hpp>

namespace locbound {

namespace {

constexpr double kSingularMark = std::numeric_limits<double>::quiet_NaN();

void validate_pairing(const Modality& modality, const GeometryModel& model) {
    validate(model);
    if (!std::holds_alternative<ToaModality>(modality) &&
        !std::holds_alternative<Annulus>(model)) {
        throw std::invalid_argument(std::string(modality_name(modality)) +
                                    " requires an annulus deployment model");
    }
}

std::string fmt17(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

nlohmann::json modality_json(const Modality& modality) {
    nlohmann::json j;
    j["kind"] = modality_name(modality);
    if (const auto* rss = std::get_if<RssModality>(&modality)) {
        j["path_loss_exponent"] = rss->path_loss_exponent;
        j["shadowing_sigma_db"] = rss->shadowing_sigma_db;
        j["info_coefficient"] = rss->info_coefficient;
    } else if (const auto* bearing = std::get_if<BearingModality>(&modality)) {
        j["sigma_alpha"] = bearing->sigma_alpha_rad;
    } else {
        j["sigma_tc"] = std::get<ToaModality>(modality).sigma_t_times_c_m;
    }
    return j;
}

nlohmann::json model_json(const GeometryModel& model) {
    nlohmann::json j;
    if (const auto* annulus = std::get_if<Annulus>(&model)) {
        j["kind"] = "annulus";
        j["r_inner"] = annulus->r_inner;
        j["r_outer"] = annulus->r_outer;
    } else {
        j["kind"] = "disk";
        j["radius"] = std::get<Disk>(model).radius;
    }
    return j;
}

} // namespace

TrialBatch run_batch(const Modality& modality, const GeometryModel& model,
                     std::size_t n, std::uint64_t trials, SeedSpec seed,
                     unsigned workers) {
    if (trials < 1) {
        throw std::invalid_argument("trials must be >= 1");
    }
    if (n < min_anchor_count(modality)) {
        throw std::invalid_argument("n below the modality's anchor minimum");
    }
    validate_pairing(modality, model);

    if (workers == 0) {
        workers = std::max(1u, std::thread::hardware_concurrency());
    }
    workers = static_cast<unsigned>(
        std::min<std::uint64_t>(workers, trials));

    // Every trial writes only its own slot, so execution order is free while
    // the assembled output stays canonical.
    std::vector<double> per_trial(trials, kSingularMark);
    std::exception_ptr failure;
    std::mutex failure_mutex;

    auto run_range = [&](std::uint64_t begin, std::uint64_t end) {
        std::vector<double> distances;
        std::vector<double> angles;
        try {
            for (std::uint64_t t = begin; t < end; ++t) {
                sample_anchors_into(model, n, seed, t, distances, angles);
                const TraceResult trace = trace_crlb(modality, distances, angles);
                if (!trace.is_singular()) {
                    per_trial[t] = trace.value_m2();
                }
            }
        } catch (...) {
            const std::lock_guard<std::mutex> lock(failure_mutex);
            if (!failure) {
                failure = std::current_exception();
            }
        }
    };

    if (workers == 1) {
        run_range(0, trials);
    } else {
        std::vector<std::thread> pool;
        pool.reserve(workers);
        const std::uint64_t chunk = (trials + workers - 1) / workers;
        for (unsigned w = 0; w < workers; ++w) {
            const std::uint64_t begin = static_cast<std::uint64_t>(w) * chunk;
            const std::uint64_t end = std::min<std::uint64_t>(begin + chunk, trials);
            if (begin >= end) {
                break;
            }
            pool.emplace_back(run_range, begin, end);
        }
        for (auto& th : pool) {
            th.join();
        }
    }
    if (failure) {
        std::rethrow_exception(failure);
    }

    TrialBatch batch{modality, model, n, trials, seed, {}, {}, 0};
    batch.samples.reserve(trials);
    batch.sample_trials.reserve(trials);
    for (std::uint64_t t = 0; t < trials; ++t) {
        if (std::isnan(per_trial[t])) {
            ++batch.singular_count;
        } else {
            batch.samples.push_back(per_trial[t]);
            batch.sample_trials.push_back(t);
        }
    }
    return batch;
}

Ecdf::Ecdf(std::vector<double> samples) : sorted_(std::move(samples)) {
    if (sorted_.empty()) {
        throw std::invalid_argument("ECDF requires at least one sample");
    }
    std::sort(sorted_.begin(), sorted_.end());
}

double Ecdf::operator()(double x) const {
    const auto it = std::upper_bound(sorted_.begin(), sorted_.end(), x);
    return static_cast<double>(it - sorted_.begin()) /
           static_cast<double>(sorted_.size());
}

Ecdf ecdf(const TrialBatch& batch) {
    if (batch.samples.empty()) {
        throw std::invalid_argument("batch holds no finite samples");
    }
    return Ecdf(batch.samples);
}

double ks_distance(const Ecdf& empirical, const ApproxDistribution& dist) {
    const auto& xs = empirical.sorted();
    const double n = static_cast<double>(xs.size());
    double sup = 0.0;
    for (std::size_t i = 0; i < xs.size(); ++i) {
        const double f = approx_cdf(dist, xs[i]);
        const double hi = static_cast<double>(i + 1) / n - f;
        const double lo = f - static_cast<double>(i) / n;
        sup = std::max({sup, std::abs(hi), std::abs(lo)});
    }
    return sup;
}

ErrorReport error_report(const TrialBatch& batch, const ApproxDistribution& dist) {
    if (batch.samples.size() < 2) {
        throw std::invalid_argument("error report requires >= 2 finite samples");
    }
    const double count = static_cast<double>(batch.samples.size());
    double sum = 0.0;
    for (const double v : batch.samples) {
        sum += v;
    }
    const double mean = sum / count;
    double ss = 0.0;
    for (const double v : batch.samples) {
        const double d = v - mean;
        ss += d * d;
    }
    const double sd = std::sqrt(ss / (count - 1.0));

    ErrorReport report;
    report.empirical_mean = mean;
    report.empirical_std = sd;
    report.formula_mean = approx_mean(dist);
    report.formula_std = approx_std(dist);
    report.relative_error_mean = (mean - report.formula_mean) / mean;
    report.relative_error_std = (sd - report.formula_std) / sd;
    report.ks_distance = locbound::ks_distance(ecdf(batch), dist);
    return report;
}

StabilityReport stability_report(const TrialBatch& batch, std::size_t blocks) {
    if (blocks < 2) {
        throw std::invalid_argument("stability report requires >= 2 blocks");
    }
    if (batch.trials < blocks) {
        throw std::invalid_argument("fewer trials than blocks");
    }
    const std::uint64_t block_size = batch.trials / blocks;

    StabilityReport report;
    report.block_means.assign(blocks, 0.0);
    std::vector<std::uint64_t> block_counts(blocks, 0);
    double total = 0.0;
    for (std::size_t i = 0; i < batch.samples.size(); ++i) {
        std::size_t b = static_cast<std::size_t>(batch.sample_trials[i] / block_size);
        b = std::min(b, blocks - 1); // remainder trials fold into the last block
        report.block_means[b] += batch.samples[i];
        ++block_counts[b];
        total += batch.samples[i];
    }
    for (std::size_t b = 0; b < blocks; ++b) {
        if (block_counts[b] == 0) {
            report.converged = false;
            report.max_relative_spread = std::numeric_limits<double>::infinity();
            return report;
        }
        report.block_means[b] /= static_cast<double>(block_counts[b]);
    }
    report.overall_mean = total / static_cast<double>(batch.samples.size());

    const auto [lo, hi] =
        std::minmax_element(report.block_means.begin(), report.block_means.end());
    report.max_relative_spread = (*hi - *lo) / std::abs(report.overall_mean);
    report.converged = report.max_relative_spread < 0.10;
    return report;
}

Histogram density_histogram(const TrialBatch& batch) {
    if (batch.samples.size() < 2) {
        throw std::invalid_argument("histogram requires >= 2 finite samples");
    }
    std::vector<double> sorted(batch.samples);
    std::sort(sorted.begin(), sorted.end());
    const std::size_t count = sorted.size();
    const double lo = sorted.front();
    const double hi = sorted.back();

    const auto quantile = [&](double p) {
        const double idx = p * static_cast<double>(count - 1);
        const std::size_t i0 = static_cast<std::size_t>(idx);
        const std::size_t i1 = std::min(i0 + 1, count - 1);
        const double frac = idx - static_cast<double>(i0);
        return sorted[i0] * (1.0 - frac) + sorted[i1] * frac;
    };
    const double iqr = quantile(0.75) - quantile(0.25);

    double width = 2.0 * iqr / std::cbrt(static_cast<double>(count));
    if (!(width > 0.0)) {
        width = (hi > lo) ? (hi - lo) : 1.0; // degenerate spread: one bin
    }
    const std::size_t bins = static_cast<std::size_t>(
        std::max(1.0, std::ceil((hi - lo) / width)));

    Histogram h;
    h.lo = lo;
    h.bin_width = width;
    h.counts.assign(bins, 0);
    for (const double v : sorted) {
        std::size_t b = static_cast<std::size_t>((v - lo) / width);
        b = std::min(b, bins - 1);
        ++h.counts[b];
    }
    h.density.resize(bins);
    for (std::size_t b = 0; b < bins; ++b) {
        h.density[b] = static_cast<double>(h.counts[b]) /
                       (static_cast<double>(count) * width);
    }
    return h;
}

void write_batch_csv(std::ostream& out, const TrialBatch& batch) {
    out << "trial,trace\n";
    for (std::size_t i = 0; i < batch.samples.size(); ++i) {
        out << batch.sample_trials[i] << ',' << fmt17(batch.samples[i]) << '\n';
    }
}

std::string batch_summary_json(const TrialBatch& batch) {
    nlohmann::json j;
    j["modality"] = modality_json(batch.modality);
    j["model"] = model_json(batch.model);
    j["n"] = batch.n;
    j["trials"] = batch.trials;
    j["seed"] = batch.seed.master_seed;
    j["finite_count"] = batch.samples.size();
    j["singular_count"] = batch.singular_count;
    if (batch.samples.size() >= 2) {
        const double count = static_cast<double>(batch.samples.size());
        double sum = 0.0;
        for (const double v : batch.samples) {
            sum += v;
        }
        const double mean = sum / count;
        double ss = 0.0;
        for (const double v : batch.samples) {
            const double d = v - mean;
            ss += d * d;
        }
        j["empirical_mean"] = mean;
        j["empirical_std"] = std::sqrt(ss / (count - 1.0));
    }
    return j.dump(2);
}

} // namespace locbound
