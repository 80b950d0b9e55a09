#include "locbound/crlb.hpp"

#include <cmath>
#include <numbers>
#include <string>
#include <vector>

namespace locbound {

namespace {

template <class... Ts>
struct overloaded : Ts... {
    using Ts::operator()...;
};
template <class... Ts>
overloaded(Ts...) -> overloaded<Ts...>;

void require_positive_finite(double v, const char* what) {
    if (!std::isfinite(v) || !(v > 0.0)) {
        throw std::invalid_argument(std::string(what) + " must be finite and > 0");
    }
}

// Scratch buffers keep the per-trial hot path allocation-free.
thread_local std::vector<double> tl_sin;
thread_local std::vector<double> tl_cos;
thread_local std::vector<double> tl_weight;

void fill_trig(std::span<const double> angles) {
    const std::size_t n = angles.size();
    tl_sin.resize(n);
    tl_cos.resize(n);
    for (std::size_t i = 0; i < n; ++i) {
        tl_sin[i] = std::sin(angles[i]);
        tl_cos[i] = std::cos(angles[i]);
    }
}

// sum_{i<j} w_i w_j sin^2(a_i - a_j) using sin(a_i - a_j) = s_i c_j - c_i s_j.
double weighted_pair_sin_sq(std::span<const double> w) {
    const std::size_t n = w.size();
    double total = 0.0;
    for (std::size_t i = 0; i + 1 < n; ++i) {
        const double si = tl_sin[i];
        const double ci = tl_cos[i];
        const double wi = w[i];
        double row = 0.0;
        for (std::size_t j = i + 1; j < n; ++j) {
            const double sd = si * tl_cos[j] - ci * tl_sin[j];
            row += w[j] * (sd * sd);
        }
        total += wi * row;
    }
    return total;
}

double unweighted_pair_sin_sq(std::size_t n) {
    double total = 0.0;
    for (std::size_t i = 0; i + 1 < n; ++i) {
        const double si = tl_sin[i];
        const double ci = tl_cos[i];
        double row = 0.0;
        for (std::size_t j = i + 1; j < n; ++j) {
            const double sd = si * tl_cos[j] - ci * tl_sin[j];
            row += sd * sd;
        }
        total += row;
    }
    return total;
}

bool uses_distance_weights(const Modality& m) {
    return !std::holds_alternative<ToaModality>(m);
}

} // namespace

Modality make_rss(double path_loss_exponent, double shadowing_sigma_db) {
    require_positive_finite(path_loss_exponent, "path-loss exponent");
    require_positive_finite(shadowing_sigma_db, "shadowing sigma (dB)");
    const double root =
        10.0 * path_loss_exponent / (shadowing_sigma_db * std::numbers::ln10);
    return RssModality{path_loss_exponent, shadowing_sigma_db, root * root};
}

Modality make_bearing(double sigma_alpha_rad) {
    require_positive_finite(sigma_alpha_rad, "sigma_alpha");
    return BearingModality{sigma_alpha_rad};
}

Modality make_toa(double sigma_t_times_c_m) {
    require_positive_finite(sigma_t_times_c_m, "sigma_T * c");
    return ToaModality{sigma_t_times_c_m};
}

double info_coefficient(const Modality& modality) {
    return std::visit(
        overloaded{[](const RssModality& m) { return m.info_coefficient; },
                   [](const BearingModality& m) {
                       return 1.0 / (m.sigma_alpha_rad * m.sigma_alpha_rad);
                   },
                   [](const ToaModality& m) {
                       return 1.0 / (m.sigma_t_times_c_m * m.sigma_t_times_c_m);
                   }},
        modality);
}

std::size_t min_anchor_count(const Modality& modality) {
    return std::holds_alternative<BearingModality>(modality) ? 2u : 3u;
}

const char* modality_name(const Modality& modality) {
    return std::visit(
        overloaded{[](const RssModality&) { return "rss"; },
                   [](const BearingModality&) { return "bearing"; },
                   [](const ToaModality&) { return "toa"; }},
        modality);
}

TraceResult TraceResult::finite(double value_m2) {
    if (!std::isfinite(value_m2) || !(value_m2 > 0.0)) {
        throw std::invalid_argument("finite trace must be > 0");
    }
    TraceResult r;
    r.value_m2_ = value_m2;
    r.singular_ = false;
    return r;
}

double TraceResult::value_m2() const {
    if (singular_) {
        throw std::logic_error("trace is singular");
    }
    return value_m2_;
}

Fim2x2 fim(const Modality& modality, const AnchorSet& anchors) {
    const double coef = info_coefficient(modality);
    const bool weighted = uses_distance_weights(modality);

    double xx = 0.0;
    double xy = 0.0;
    double yy = 0.0;
    for (const auto& a : anchors) {
        double w = 1.0;
        if (weighted) {
            if (a.distance_m == 0.0) {
                throw degenerate_geometry_error(
                    "anchor coincides with the sensor: information diverges");
            }
            w = 1.0 / (a.distance_m * a.distance_m);
        }
        const double c = std::cos(a.angle_rad);
        const double s = std::sin(a.angle_rad);
        xx += w * c * c;
        xy += w * c * s;
        yy += w * s * s;
    }

    const double off = std::holds_alternative<BearingModality>(modality) ? -xy : xy;
    return Fim2x2{coef * xx, coef * off, coef * yy};
}

TraceResult trace_crlb(const Modality& modality,
                       std::span<const double> distances_m,
                       std::span<const double> angles_rad) {
    const std::size_t n = distances_m.size();
    if (n != angles_rad.size()) {
        throw std::invalid_argument("distances and angles must have equal length");
    }
    if (n < min_anchor_count(modality)) {
        throw std::invalid_argument(std::string(modality_name(modality)) +
                                    " trace requires at least " +
                                    std::to_string(min_anchor_count(modality)) +
                                    " anchors");
    }
    const double coef = info_coefficient(modality);
    fill_trig(angles_rad);

    if (uses_distance_weights(modality)) {
        tl_weight.resize(n);
        double numerator = 0.0;
        double w_max = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            const double d = distances_m[i];
            if (!(d > 0.0)) {
                throw degenerate_geometry_error(
                    "anchor coincides with the sensor: information diverges");
            }
            const double w = 1.0 / (d * d);
            tl_weight[i] = w;
            numerator += w;
            w_max = std::max(w_max, w);
        }
        const double denominator = weighted_pair_sin_sq(tl_weight);
        const double scale = static_cast<double>(n) * static_cast<double>(n) *
                             (w_max * w_max);
        if (denominator <= kSingularRelTol * scale) {
            return TraceResult::singular();
        }
        return TraceResult::finite(numerator / (coef * denominator));
    }

    // TOA: the trace never reads the distances.
    const double denominator = unweighted_pair_sin_sq(n);
    const double scale = static_cast<double>(n) * static_cast<double>(n);
    if (denominator <= kSingularRelTol * scale) {
        return TraceResult::singular();
    }
    return TraceResult::finite(static_cast<double>(n) / (coef * denominator));
}

TraceResult trace_crlb(const Modality& modality, const AnchorSet& anchors) {
    const std::size_t n = anchors.size();
    std::vector<double> d(n);
    std::vector<double> a(n);
    for (std::size_t i = 0; i < n; ++i) {
        d[i] = anchors[i].distance_m;
        a[i] = anchors[i].angle_rad;
    }
    return trace_crlb(modality, d, a);
}

TraceResult trace_via_inverse(const Modality& modality, const AnchorSet& anchors) {
    const std::size_t n = anchors.size();
    if (n < min_anchor_count(modality)) {
        throw std::invalid_argument(std::string(modality_name(modality)) +
                                    " trace requires at least " +
                                    std::to_string(min_anchor_count(modality)) +
                                    " anchors");
    }
    const double coef = info_coefficient(modality);
    const Fim2x2 f = fim(modality, anchors);

    // Same singularity scale as the closed form, expressed in determinant
    // units (det = coef^2 * pairwise denominator).
    double scale = static_cast<double>(n) * static_cast<double>(n);
    if (uses_distance_weights(modality)) {
        double w_max = 0.0;
        for (const auto& a : anchors) {
            w_max = std::max(w_max, 1.0 / (a.distance_m * a.distance_m));
        }
        scale *= w_max * w_max;
    }
    const double det = f.det();
    if (det <= kSingularRelTol * scale * coef * coef) {
        return TraceResult::singular();
    }
    return TraceResult::finite(f.trace() / det);
}

double pairwise_sin_sq_sum(std::span<const double> angles_rad) {
    fill_trig(angles_rad);
    return unweighted_pair_sin_sq(angles_rad.size());
}

double pairwise_sin_sq_sum_identity(std::span<const double> angles_rad) {
    const double n = static_cast<double>(angles_rad.size());
    double sum_cos2 = 0.0;
    double sum_sin2 = 0.0;
    for (const double a : angles_rad) {
        sum_cos2 += std::cos(2.0 * a);
        sum_sin2 += std::sin(2.0 * a);
    }
    return 0.25 * (n * n - sum_cos2 * sum_cos2 - sum_sin2 * sum_sin2);
}

} // namespace locbound
