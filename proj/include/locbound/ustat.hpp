#pragma once

#include <cstddef>
#include <span>

#include "locbound/asymptotics.hpp"

namespace locbound {

/**
 * Expansion of the ratio T_n/S_n of the two trace U-statistics,
 *
 *   T_n = (1/n) sum_i X1_i,
 *   S_n = (2/(n(n-1))) sum_{i<j} X1_i X1_j sin^2(X2_i - X2_j),
 *
 * into leading + bias_term + m_n + r_n, where
 *
 *   leading   = 1/(m1 m2),
 *   bias_term = 2 sigma1^2 / (n m1^3 m2),
 *   m_n       = (2/n) sum_i g1(X_i) + (2/(n(n-1))) sum_{i<j} g2(X_i, X_j),
 *   g1(X_i)   = (m1 - X1_i) / (2 m1^2 m2),
 *   g2        = 1/(m1 m2) - (X1_i + X1_j)/(m1^2 m2)
 *               + 2 X1_i X1_j/(m1^3 m2)
 *               - X1_i X1_j sin^2(X2_i - X2_j)/(m1^3 m2^2),
 *
 * and r_n is the exact residual t_n/s_n - leading - bias_term - m_n.
 * The decomposition identity therefore holds by construction; what the
 * oracle checks downstream is that |r_n| shrinks like the theory says
 * while m_n carries the fluctuation.
 */
struct ExpansionParts {
    double t_n = 0.0;
    double s_n = 0.0;
    double leading = 0.0;
    double bias_term = 0.0;
    double m_n = 0.0;
    double r_n = 0.0;
};

/// Evaluates the expansion on one sample. x1 holds the kernel weights
/// (1/d_i^2 for the RSS trace, all ones for TOA), x2 the angles in radians;
/// moments supplies m1, sigma1, m2 of the sampling law.
/// Throws std::invalid_argument on length mismatch or n < 2, and
/// std::domain_error when S_n = 0 (singular sample).
ExpansionParts expansion_parts(std::span<const double> x1,
                               std::span<const double> x2,
                               const AnnulusMoments& moments);

/// W_n = (sqrt(n) (n-1) b m1^2 / (4 sigma1)) * trace
///       - sqrt(n) m1/sigma1 - 2 sigma1/(sqrt(n) m1).
/// Standard-normal in the limit for the RSS/bearing trace.
double standardized_rss(double trace_m2, std::size_t n, double b,
                        const AnnulusMoments& moments);

/// V_n = (n(n-1) / (2 (sigma_T c)^2)) * trace - 2n + 2.
/// Chi-square(2) in the limit for the TOA trace.
double standardized_toa(double trace_m2, std::size_t n, double sigma_t_times_c_m);

} // namespace locbound
