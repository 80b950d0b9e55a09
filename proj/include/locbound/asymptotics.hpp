#pragma once

#include <cstddef>
#include <stdexcept>
#include <variant>

#include "locbound/crlb.hpp"
#include "locbound/geometry.hpp"

namespace locbound {

// ----------------------------------------------------------------------------
// Annulus moments of X = 1/d^2
// ----------------------------------------------------------------------------

/// Moments of X = 1/d^2 under the annulus law, plus the angular constant
/// m2 = E(sin^2(a_i - a_j)) = 0.5. Units: m1, sigma1 in 1/m^2; nu3 in 1/m^6.
struct AnnulusMoments {
    double m1 = 0.0;     // E(X)
    double sigma1 = 0.0; // Std(X)
    double nu3 = 0.0;    // E((X - m1)^3)
    double m2 = 0.5;
};

/// Closed forms:
///   m1     = 2*ln(R/R0) / (R^2 - R0^2)
///   E(X^2) = 1/(R0^2 R^2)
///   E(X^3) = (R^2 + R0^2) / (2 R0^4 R^4)
///   sigma1 = sqrt(E(X^2) - m1^2),  nu3 = E(X^3) - 3*m1*E(X^2) + 2*m1^3
AnnulusMoments annulus_moments(const Annulus& model);

// ----------------------------------------------------------------------------
// Limiting laws of the trace metric
// ----------------------------------------------------------------------------

/// RSS/bearing limit: Tr approximately N(mean, std^2).
struct NormalApprox {
    double mean_m2 = 0.0;
    double std_m2 = 0.0;
};

/// TOA limit: Tr approximately scale * chi^2_2 + shift, with
/// scale = 2 (sigma_T c)^2 / (n (n-1)) and shift = (2n-2) * scale.
struct ShiftedChiSq2 {
    double scale_m2 = 0.0;
    double shift_m2 = 0.0;
};

using ApproxDistribution = std::variant<NormalApprox, ShiftedChiSq2>;

/**
 * Limiting distribution of Tr(CRLB) for n randomly deployed anchors.
 *
 * RSS: mean = 4/((n-1) b m1) + 8 sigma1^2/(n (n-1) b m1^3),
 *      std  = 4 sigma1 / (sqrt(n) (n-1) b m1^2);
 * bearing: same with b replaced by 1/sigma_alpha^2;
 * TOA: the shifted-scaled chi-square above.
 *
 * Pairing: RSS/bearing require an annulus; TOA accepts annulus or disk
 * (the TOA trace ignores distances). Requires n >= 2.
 */
ApproxDistribution approx_distribution(const Modality& modality,
                                       const GeometryModel& model,
                                       std::size_t n);

double approx_mean(const ApproxDistribution& dist);
double approx_std(const ApproxDistribution& dist);

/// CDF at x; chi-square branch clamps to 0 below the support shift.
double approx_cdf(const ApproxDistribution& dist, double x);

/// Density at x.
double approx_pdf(const ApproxDistribution& dist, double x);

/// std/mean. Equals 1/n exactly for the TOA law.
double coefficient_of_variation(const ApproxDistribution& dist);

/**
 * First-order bound on sup |F_W(x) - Phi(x)| for the standardized RSS trace:
 *
 *   |(nu3 + k*sigma1^4/m1) / (6 sigma1^3)| * |(x^2-1)| e^{-x^2/2} / sqrt(2 pi)
 *     * n^{-1/2}
 *
 * with k = 2 by default; alternate_coefficient selects the k = 6 variant.
 * The O(1/n) remainder is excluded. Depends on (R0, R) only through R/R0.
 */
double berry_esseen_envelope(const Annulus& model, std::size_t n, double x,
                             bool alternate_coefficient = false);

/// Highest anchor count min_anchors will scan before giving up.
inline constexpr std::size_t kPlanScanCap = 1'000'000;

class unsatisfiable_plan_error : public std::runtime_error {
public:
    explicit unsatisfiable_plan_error(std::size_t cap, double threshold_m2,
                                      double confidence);
    std::size_t cap() const noexcept { return cap_; }

private:
    std::size_t cap_;
};

/**
 * Smallest n >= min_anchor_count(modality) whose limiting law puts at least
 * `confidence` probability at or below `threshold_m2`. Linear scan up to
 * kPlanScanCap (monotonicity in n is not assumed); throws
 * unsatisfiable_plan_error when no such n exists within the cap.
 *
 * The scan uses the asymptotic law even at small n, where it is known to
 * under-cover; callers surfacing results for n < 10 should warn.
 */
std::size_t min_anchors(const Modality& modality, const GeometryModel& model,
                        double threshold_m2, double confidence);

} // namespace locbound
