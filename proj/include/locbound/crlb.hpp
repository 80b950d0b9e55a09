#pragma once

#include <cstddef>
#include <span>
#include <stdexcept>
#include <variant>

#include "locbound/geometry.hpp"

namespace locbound {

// ----------------------------------------------------------------------------
// Measurement modalities
// ----------------------------------------------------------------------------

/// Log-normal shadowing RSS ranging. The information coefficient
/// b = (10*path_loss_exponent / (shadowing_sigma_db * ln 10))^2 is derived
/// on construction by make_rss.
struct RssModality {
    double path_loss_exponent = 0.0;
    double shadowing_sigma_db = 0.0;
    double info_coefficient = 0.0; // b
};

/// Gaussian bearing measurements with common standard deviation sigma_alpha.
struct BearingModality {
    double sigma_alpha_rad = 0.0;
};

/// Gaussian time-of-arrival; sigma_t_times_c_m is the ranging accuracy
/// sigma_T * c in meters.
struct ToaModality {
    double sigma_t_times_c_m = 0.0;
};

using Modality = std::variant<RssModality, BearingModality, ToaModality>;

Modality make_rss(double path_loss_exponent, double shadowing_sigma_db);
Modality make_bearing(double sigma_alpha_rad);
Modality make_toa(double sigma_t_times_c_m);

/// Information coefficient multiplying the unit FIM sums:
/// b (RSS), 1/sigma_alpha^2 (bearing), 1/(sigma_T*c)^2 (TOA).
double info_coefficient(const Modality& modality);

/// Minimum anchor count for a well-posed trace: 3 (RSS, TOA), 2 (bearing).
std::size_t min_anchor_count(const Modality& modality);

const char* modality_name(const Modality& modality);

/// RSS/bearing information diverges when an anchor coincides with the sensor.
class degenerate_geometry_error : public std::domain_error {
public:
    using std::domain_error::domain_error;
};

// ----------------------------------------------------------------------------
// Fisher information and the trace metric
// ----------------------------------------------------------------------------

/// Symmetric 2x2 Fisher information matrix.
struct Fim2x2 {
    double xx = 0.0;
    double xy = 0.0;
    double yy = 0.0;

    double det() const noexcept { return xx * yy - xy * xy; }
    double trace() const noexcept { return xx + yy; }
};

/// Tr(CRLB) in m^2, or Singular when the FIM is not invertible.
/// Singularity is a value, not an error: Monte Carlo over random geometries
/// must count singular draws.
class TraceResult {
public:
    static TraceResult finite(double value_m2);
    static TraceResult singular() noexcept { return TraceResult(); }

    bool is_singular() const noexcept { return singular_; }
    /// Throws std::logic_error when singular.
    double value_m2() const;

private:
    TraceResult() = default;
    double value_m2_ = 0.0;
    bool singular_ = true;
};

/// Relative tolerance deciding singularity: the pairwise denominator (or the
/// FIM determinant in matching units) is compared against this factor times
/// its natural scale, n^2 * max_i(1/d_i^4) for distance-weighted modalities
/// and n^2 for TOA.
inline constexpr double kSingularRelTol = 1e-12;

/// Fisher information matrix for the sensor position at the origin.
/// RSS: b * [sum cos^2(a)/d^2, sum cos(a)sin(a)/d^2; ., sum sin^2(a)/d^2].
/// Bearing: coefficient 1/sigma_alpha^2 and negated off-diagonal.
/// TOA: 1/(sigma_T c)^2 * [sum cos^2(a), sum cos(a)sin(a); ., sum sin^2(a)].
/// Throws degenerate_geometry_error for RSS/bearing when any d_i = 0.
Fim2x2 fim(const Modality& modality, const AnchorSet& anchors);

/**
 * Closed-form trace of the CRLB matrix.
 *
 * RSS/bearing: (1/coef) * (sum 1/d_i^2) / (sum_{i<j} sin^2(a_i-a_j)/(d_i^2 d_j^2))
 * TOA:         (sigma_T c)^2 * n / (sum_{i<j} sin^2(a_i-a_j))
 *
 * Requires n >= min_anchor_count(modality) (std::invalid_argument otherwise).
 * Collinear geometry yields Singular.
 */
TraceResult trace_crlb(const Modality& modality, const AnchorSet& anchors);

/// Span overload used by the Monte Carlo engine; identical numerics.
TraceResult trace_crlb(const Modality& modality,
                       std::span<const double> distances_m,
                       std::span<const double> angles_rad);

/// Independent evaluation path: builds the FIM, inverts it when the
/// determinant clears the singularity tolerance, returns the trace of the
/// inverse. Serves as an oracle for trace_crlb.
TraceResult trace_via_inverse(const Modality& modality, const AnchorSet& anchors);

/// sum_{i<j} sin^2(a_i - a_j), direct O(n^2) pairwise evaluation (canonical).
double pairwise_sin_sq_sum(std::span<const double> angles_rad);

/// Same sum via the O(n) identity
/// n^2/4 - ((sum cos 2a)^2 + (sum sin 2a)^2)/4; cross-check only.
double pairwise_sin_sq_sum_identity(std::span<const double> angles_rad);

} // namespace locbound
