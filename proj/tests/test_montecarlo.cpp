#include <doctest.h>

#include <cmath>
#include <numbers>
#include <sstream>
#include <vector>

#include <json.hpp>

#include "locbound/montecarlo.hpp"
#include "locbound/rng.hpp"
#include "oracles.hpp"

using namespace locbound;

namespace {

const GeometryModel kAnnulus{Annulus{1.0, 10.0}};
const GeometryModel kDisk{Disk{10.0}};

TrialBatch synthetic_batch(std::vector<double> samples) {
    TrialBatch batch{make_toa(1.0), kDisk, 4, samples.size(), SeedSpec{0}, {}, {}, 0};
    for (std::size_t i = 0; i < samples.size(); ++i) {
        batch.sample_trials.push_back(i);
    }
    batch.samples = std::move(samples);
    return batch;
}

} // namespace

TEST_CASE("run_batch contracts") {
    const Modality toa = make_toa(1.0);

    SUBCASE("fixed seed reproduces bit-identically") {
        const TrialBatch a = run_batch(toa, kDisk, 4, 1000, SeedSpec{8}, 1);
        const TrialBatch b = run_batch(toa, kDisk, 4, 1000, SeedSpec{8}, 1);
        CHECK(a.samples == b.samples);
        CHECK(a.sample_trials == b.sample_trials);
        CHECK(a.singular_count == b.singular_count);
        CHECK(a.samples.size() + a.singular_count == a.trials);
    }

    SUBCASE("worker count never changes the result") {
        const TrialBatch serial = run_batch(toa, kDisk, 5, 2000, SeedSpec{8}, 1);
        for (const unsigned workers : {2u, 3u, 8u}) {
            const TrialBatch parallel =
                run_batch(toa, kDisk, 5, 2000, SeedSpec{8}, workers);
            CHECK(serial.samples == parallel.samples);
            CHECK(serial.sample_trials == parallel.sample_trials);
            CHECK(serial.singular_count == parallel.singular_count);
        }
    }

    SUBCASE("argument validation") {
        CHECK_THROWS_AS(run_batch(toa, kDisk, 4, 0, SeedSpec{1}, 1),
                        std::invalid_argument);
        CHECK_THROWS_AS(run_batch(toa, kDisk, 2, 10, SeedSpec{1}, 1),
                        std::invalid_argument);
        // RSS over a disk would put anchors on top of the sensor
        CHECK_THROWS_AS(run_batch(make_rss(2.3, 3.92), kDisk, 5, 10, SeedSpec{1}, 1),
                        std::invalid_argument);
        CHECK_THROWS_AS(
            run_batch(make_bearing(0.1), kDisk, 5, 10, SeedSpec{1}, 1),
            std::invalid_argument);
        CHECK_NOTHROW(run_batch(toa, kAnnulus, 5, 10, SeedSpec{1}, 1));
    }
}

TEST_CASE("empirical CDF") {
    const TrialBatch batch = synthetic_batch({3.0, 1.0, 2.0});
    const Ecdf e = ecdf(batch);

    CHECK(e(2.0) == doctest::Approx(2.0 / 3.0).epsilon(1e-15));
    CHECK(e(0.5) == 0.0);
    CHECK(e(3.0) == 1.0);
    CHECK(e(99.0) == 1.0);
    // right-continuity: just below a sample the lower step applies
    CHECK(e(std::nextafter(2.0, 0.0)) == doctest::Approx(1.0 / 3.0).epsilon(1e-15));

    CHECK_THROWS_AS(ecdf(synthetic_batch({})), std::invalid_argument);
}

TEST_CASE("KS distance") {
    const ApproxDistribution chi{ShiftedChiSq2{0.1, 0.8}};

    SUBCASE("single sample at the median scores one half") {
        const double median = 0.8 + 2.0 * std::log(2.0) * 0.1; // shift + 2 ln2 scale
        const Ecdf e(std::vector<double>{median});
        CHECK(ks_distance(e, chi) == doctest::Approx(0.5).epsilon(1e-12));
    }

    SUBCASE("quantile-transformed samples sit on the law") {
        constexpr std::size_t kCount = 100000;
        std::vector<double> samples;
        samples.reserve(kCount);
        for (std::size_t i = 0; i < kCount; ++i) {
            const double p = (static_cast<double>(i) + 0.5) / kCount;
            samples.push_back(0.8 - 2.0 * 0.1 * std::log1p(-p)); // chi2 quantile
        }
        CHECK(ks_distance(Ecdf(samples), chi) < 0.01);
    }

    SUBCASE("normal draws against the normal law") {
        const ApproxDistribution normal{NormalApprox{5.0, 2.0}};
        constexpr std::size_t kCount = 100000;
        RandomStream rng(321, 0);
        std::vector<double> samples;
        samples.reserve(kCount);
        for (std::size_t i = 0; i < kCount; i += 2) {
            // Box-Muller pair
            const double u1 = std::max(rng.next_double(), 1e-300);
            const double u2 = rng.next_double();
            const double r = std::sqrt(-2.0 * std::log(u1));
            samples.push_back(5.0 + 2.0 * r * std::cos(2.0 * std::numbers::pi * u2));
            samples.push_back(5.0 + 2.0 * r * std::sin(2.0 * std::numbers::pi * u2));
        }
        CHECK(ks_distance(Ecdf(samples), normal) < 0.01);
    }
}

TEST_CASE("error report") {
    SUBCASE("relative errors are simulation-first") {
        const TrialBatch batch = synthetic_batch({2.0, 2.0, 2.0, 2.0});
        // formula mean 1, empirical mean 2 -> (2 - 1)/2
        const ErrorReport rep =
            error_report(batch, ApproxDistribution{NormalApprox{1.0, 1.0}});
        CHECK(rep.empirical_mean == 2.0);
        CHECK(rep.empirical_std == 0.0);
        CHECK(rep.relative_error_mean == doctest::Approx(0.5).epsilon(1e-15));
    }

    SUBCASE("a batch drawn from the law itself scores near zero") {
        const ApproxDistribution chi{ShiftedChiSq2{0.25, 1.5}};
        constexpr std::size_t kCount = 200000;
        RandomStream rng(55, 1);
        std::vector<double> samples;
        samples.reserve(kCount);
        for (std::size_t i = 0; i < kCount; ++i) {
            samples.push_back(1.5 - 2.0 * 0.25 * std::log1p(-rng.next_double()));
        }
        const ErrorReport rep = error_report(synthetic_batch(std::move(samples)), chi);
        CHECK(std::abs(rep.relative_error_mean) < 0.01);
        CHECK(std::abs(rep.relative_error_std) < 0.01);
        CHECK(rep.ks_distance < 0.01);
        CHECK(rep.formula_mean == doctest::Approx(2.0).epsilon(1e-14));
        CHECK(rep.formula_std == doctest::Approx(0.5).epsilon(1e-14));
    }

    SUBCASE("needs two finite samples") {
        CHECK_THROWS_AS(error_report(synthetic_batch({1.0}),
                                     ApproxDistribution{NormalApprox{1.0, 1.0}}),
                        std::invalid_argument);
    }
}

TEST_CASE("TOA mean formula is usable from n = 6" * doctest::timeout(120)) {
    const Modality toa = make_toa(1.0);
    const TrialBatch batch = run_batch(toa, kDisk, 6, 100000, SeedSpec{1}, 0);
    const ErrorReport rep =
        error_report(batch, approx_distribution(toa, kDisk, 6));
    INFO("relative error of the mean = ", rep.relative_error_mean);
    CHECK(std::abs(rep.relative_error_mean) < 0.10);
}

TEST_CASE("RSS mean formula lands within 5% at n = 20, R = 10" * doctest::timeout(300)) {
    // 1e6 trials; measured relative error of the mean is about -3.5%
    const Modality rss = make_rss(2.3, 3.92);
    const TrialBatch batch = run_batch(rss, kAnnulus, 20, 1000000, SeedSpec{1}, 0);
    const ErrorReport rep =
        error_report(batch, approx_distribution(rss, kAnnulus, 20));
    INFO("relative error of the mean = ", rep.relative_error_mean);
    CHECK(std::abs(rep.relative_error_mean) < 0.05);
}

TEST_CASE("block stability of the trace mean" * doctest::timeout(300)) {
    const Modality rss = make_rss(2.3, 3.92);

    SUBCASE("n = 5 blocks agree within 10%") {
        const TrialBatch batch = run_batch(rss, kAnnulus, 5, 400000, SeedSpec{3}, 0);
        const StabilityReport rep = stability_report(batch, 4);
        INFO("spread = ", rep.max_relative_spread);
        CHECK(rep.converged);
        CHECK(rep.block_means.size() == 4);
    }

    SUBCASE("n = 3 has no stable mean and must say so") {
        const TrialBatch batch = run_batch(rss, kAnnulus, 3, 400000, SeedSpec{3}, 0);
        const StabilityReport rep = stability_report(batch, 4);
        INFO("spread = ", rep.max_relative_spread);
        CHECK_FALSE(rep.converged);
    }

    SUBCASE("argument validation") {
        const TrialBatch batch = synthetic_batch({1.0, 2.0, 3.0, 4.0});
        CHECK_THROWS_AS(stability_report(batch, 1), std::invalid_argument);
        CHECK_THROWS_AS(stability_report(batch, 5), std::invalid_argument);
    }
}

TEST_CASE("density histogram") {
    // uniform synthetic samples: density must hover near 1/range and
    // integrate to one
    constexpr std::size_t kCount = 100000;
    RandomStream rng(9, 0);
    std::vector<double> samples;
    samples.reserve(kCount);
    for (std::size_t i = 0; i < kCount; ++i) {
        samples.push_back(2.0 + 3.0 * rng.next_double());
    }
    const Histogram h = density_histogram(synthetic_batch(std::move(samples)));
    REQUIRE(h.bin_width > 0.0);
    REQUIRE(h.density.size() > 10);

    double mass = 0.0;
    for (const double d : h.density) {
        mass += d * h.bin_width;
    }
    CHECK(mass == doctest::Approx(1.0).epsilon(1e-12));
    // interior bins approximate the uniform density 1/3
    for (std::size_t b = 1; b + 1 < h.density.size(); ++b) {
        CHECK(h.density[b] == doctest::Approx(1.0 / 3.0).epsilon(0.15));
    }
}

TEST_CASE("batch serialization") {
    TrialBatch batch = synthetic_batch({1.5, 2.5});
    batch.sample_trials = {0, 2};
    batch.trials = 3;
    batch.singular_count = 1;

    std::stringstream csv;
    write_batch_csv(csv, batch);
    CHECK(csv.str() == "trial,trace\n0,1.5\n2,2.5\n");

    const auto j = nlohmann::json::parse(batch_summary_json(batch));
    CHECK(j.at("trials") == 3);
    CHECK(j.at("singular_count") == 1);
    CHECK(j.at("finite_count") == 2);
    CHECK(j.at("modality").at("kind") == "toa");
    CHECK(j.at("model").at("kind") == "disk");
    CHECK(j.at("empirical_mean") == doctest::Approx(2.0));
}
