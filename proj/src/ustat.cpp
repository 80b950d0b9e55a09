#include "locbound/ustat.hpp"

#include <cmath>
#include <stdexcept>
#include <vector>

namespace locbound {

ExpansionParts expansion_parts(std::span<const double> x1,
                               std::span<const double> x2,
                               const AnnulusMoments& moments) {
    const std::size_t n = x1.size();
    if (n != x2.size()) {
        throw std::invalid_argument("x1 and x2 must have equal length");
    }
    if (n < 2) {
        throw std::invalid_argument("expansion requires n >= 2");
    }

    const double m1 = moments.m1;
    const double m2 = moments.m2;
    const double inv_m1m2 = 1.0 / (m1 * m2);
    const double inv_m1sq_m2 = inv_m1m2 / m1;
    const double inv_m1cb_m2 = inv_m1sq_m2 / m1;
    const double inv_m1cb_m2sq = inv_m1cb_m2 / m2;

    std::vector<double> sin_a(n);
    std::vector<double> cos_a(n);
    for (std::size_t i = 0; i < n; ++i) {
        sin_a[i] = std::sin(x2[i]);
        cos_a[i] = std::cos(x2[i]);
    }

    double x1_sum = 0.0;
    double g1_sum = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        x1_sum += x1[i];
        g1_sum += 0.5 * (m1 - x1[i]) * inv_m1sq_m2;
    }

    double kernel_sum = 0.0;
    double g2_sum = 0.0;
    for (std::size_t i = 0; i + 1 < n; ++i) {
        for (std::size_t j = i + 1; j < n; ++j) {
            const double sd = sin_a[i] * cos_a[j] - cos_a[i] * sin_a[j];
            const double prod = x1[i] * x1[j];
            const double kernel = prod * sd * sd;
            kernel_sum += kernel;
            g2_sum += inv_m1m2 - (x1[i] + x1[j]) * inv_m1sq_m2 +
                      2.0 * prod * inv_m1cb_m2 - kernel * inv_m1cb_m2sq;
        }
    }

    const double nd = static_cast<double>(n);
    const double pairs = nd * (nd - 1.0) / 2.0;

    ExpansionParts parts;
    parts.t_n = x1_sum / nd;
    parts.s_n = kernel_sum / pairs;
    if (parts.s_n == 0.0) {
        throw std::domain_error("singular sample: S_n = 0");
    }
    parts.leading = inv_m1m2;
    parts.bias_term = 2.0 * moments.sigma1 * moments.sigma1 * inv_m1cb_m2 / nd;
    parts.m_n = 2.0 * g1_sum / nd + g2_sum / pairs;
    parts.r_n = parts.t_n / parts.s_n - parts.leading - parts.bias_term - parts.m_n;
    return parts;
}

double standardized_rss(double trace_m2, std::size_t n, double b,
                        const AnnulusMoments& moments) {
    if (!std::isfinite(trace_m2)) {
        throw std::invalid_argument("trace must be finite");
    }
    const double nd = static_cast<double>(n);
    const double root_n = std::sqrt(nd);
    const double m1 = moments.m1;
    const double s1 = moments.sigma1;
    return (root_n * (nd - 1.0) * b * m1 * m1 / (4.0 * s1)) * trace_m2 -
           root_n * m1 / s1 - 2.0 * s1 / (root_n * m1);
}

double standardized_toa(double trace_m2, std::size_t n, double sigma_t_times_c_m) {
    if (!std::isfinite(trace_m2)) {
        throw std::invalid_argument("trace must be finite");
    }
    const double nd = static_cast<double>(n);
    const double var = sigma_t_times_c_m * sigma_t_times_c_m;
    return nd * (nd - 1.0) / (2.0 * var) * trace_m2 - 2.0 * nd + 2.0;
}

} // namespace locbound
