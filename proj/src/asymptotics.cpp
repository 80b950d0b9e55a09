#include "locbound/asymptotics.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <string>

namespace locbound {

namespace {

template <class... Ts>
struct overloaded : Ts... {
    using Ts::operator()...;
};
template <class... Ts>
overloaded(Ts...) -> overloaded<Ts...>;

constexpr double kSqrt2 = std::numbers::sqrt2;
const double kSqrtTwoPi = std::sqrt(2.0 * std::numbers::pi);

double standard_normal_cdf(double z) { return 0.5 * std::erfc(-z / kSqrt2); }

double standard_normal_pdf(double z) {
    return std::exp(-0.5 * z * z) / kSqrtTwoPi;
}

} // namespace

AnnulusMoments annulus_moments(const Annulus& model) {
    validate(GeometryModel{model});
    const double r0_sq = model.r_inner * model.r_inner;
    const double r_sq = model.r_outer * model.r_outer;

    const double m1 = 2.0 * std::log(model.r_outer / model.r_inner) / (r_sq - r0_sq);
    const double ex2 = 1.0 / (r0_sq * r_sq);
    const double ex3 = (r_sq + r0_sq) / (2.0 * r0_sq * r0_sq * r_sq * r_sq);
    // the variance cancellation can dip below zero for near-degenerate annuli
    const double sigma1 = std::sqrt(std::max(0.0, ex2 - m1 * m1));
    const double nu3 = ex3 - 3.0 * m1 * ex2 + 2.0 * m1 * m1 * m1;
    return AnnulusMoments{m1, sigma1, nu3, 0.5};
}

ApproxDistribution approx_distribution(const Modality& modality,
                                       const GeometryModel& model,
                                       std::size_t n) {
    if (n < 2) {
        throw std::invalid_argument("limiting law requires n >= 2");
    }
    validate(model);

    if (std::holds_alternative<ToaModality>(modality)) {
        const double sigma_tc = std::get<ToaModality>(modality).sigma_t_times_c_m;
        const double var_m2 = sigma_tc * sigma_tc;
        const double nd = static_cast<double>(n);
        const double scale = 2.0 * var_m2 / (nd * (nd - 1.0));
        return ShiftedChiSq2{scale, (2.0 * nd - 2.0) * scale};
    }

    if (!std::holds_alternative<Annulus>(model)) {
        throw std::invalid_argument(std::string(modality_name(modality)) +
                                    " requires an annulus deployment model");
    }
    const AnnulusMoments mo = annulus_moments(std::get<Annulus>(model));
    const double coef = info_coefficient(modality);
    const double nd = static_cast<double>(n);
    const double m1 = mo.m1;
    const double s1_sq = mo.sigma1 * mo.sigma1;

    const double mean = 4.0 / ((nd - 1.0) * coef * m1) +
                        8.0 * s1_sq / (nd * (nd - 1.0) * coef * m1 * m1 * m1);
    const double sd =
        4.0 * mo.sigma1 / (std::sqrt(nd) * (nd - 1.0) * coef * m1 * m1);
    return NormalApprox{mean, sd};
}

double approx_mean(const ApproxDistribution& dist) {
    return std::visit(
        overloaded{[](const NormalApprox& d) { return d.mean_m2; },
                   [](const ShiftedChiSq2& d) {
                       return 2.0 * d.scale_m2 + d.shift_m2;
                   }},
        dist);
}

double approx_std(const ApproxDistribution& dist) {
    return std::visit(
        overloaded{[](const NormalApprox& d) { return d.std_m2; },
                   [](const ShiftedChiSq2& d) { return 2.0 * d.scale_m2; }},
        dist);
}

double approx_cdf(const ApproxDistribution& dist, double x) {
    return std::visit(
        overloaded{[x](const NormalApprox& d) {
                       return standard_normal_cdf((x - d.mean_m2) / d.std_m2);
                   },
                   [x](const ShiftedChiSq2& d) {
                       const double y = (x - d.shift_m2) / d.scale_m2;
                       if (y <= 0.0) {
                           return 0.0;
                       }
                       return -std::expm1(-0.5 * y);
                   }},
        dist);
}

double approx_pdf(const ApproxDistribution& dist, double x) {
    return std::visit(
        overloaded{[x](const NormalApprox& d) {
                       return standard_normal_pdf((x - d.mean_m2) / d.std_m2) /
                              d.std_m2;
                   },
                   [x](const ShiftedChiSq2& d) {
                       const double y = (x - d.shift_m2) / d.scale_m2;
                       if (y < 0.0) {
                           return 0.0;
                       }
                       return 0.5 * std::exp(-0.5 * y) / d.scale_m2;
                   }},
        dist);
}

double coefficient_of_variation(const ApproxDistribution& dist) {
    const double mean = approx_mean(dist);
    if (!(mean > 0.0)) {
        throw std::invalid_argument("coefficient of variation requires mean > 0");
    }
    return approx_std(dist) / mean;
}

double berry_esseen_envelope(const Annulus& model, std::size_t n, double x,
                             bool alternate_coefficient) {
    if (n < 2) {
        throw std::invalid_argument("envelope requires n >= 2");
    }
    const AnnulusMoments mo = annulus_moments(model);
    const double s1_sq = mo.sigma1 * mo.sigma1;
    const double quartic_weight = alternate_coefficient ? 6.0 : 2.0;
    const double coef = (mo.nu3 + quartic_weight * s1_sq * s1_sq / mo.m1) /
                        (6.0 * mo.sigma1 * s1_sq);
    const double shape = (x * x - 1.0) * std::exp(-0.5 * x * x) / kSqrtTwoPi;
    return std::abs(coef * shape) / std::sqrt(static_cast<double>(n));
}

unsatisfiable_plan_error::unsatisfiable_plan_error(std::size_t cap,
                                                   double threshold_m2,
                                                   double confidence)
    : std::runtime_error("no anchor count up to the scan cap " +
                         std::to_string(cap) + " reaches P(Tr <= " +
                         std::to_string(threshold_m2) + " m^2) >= " +
                         std::to_string(confidence)),
      cap_(cap) {}

std::size_t min_anchors(const Modality& modality, const GeometryModel& model,
                        double threshold_m2, double confidence) {
    if (!std::isfinite(threshold_m2) || !(threshold_m2 > 0.0)) {
        throw std::invalid_argument("threshold must be finite and > 0");
    }
    if (!(confidence > 0.0 && confidence < 1.0)) {
        throw std::invalid_argument("confidence must lie in (0, 1)");
    }
    const std::size_t start = min_anchor_count(modality);
    for (std::size_t n = start; n <= kPlanScanCap; ++n) {
        const ApproxDistribution dist = approx_distribution(modality, model, n);
        if (approx_cdf(dist, threshold_m2) >= confidence) {
            return n;
        }
    }
    throw unsatisfiable_plan_error(kPlanScanCap, threshold_m2, confidence);
}

} // namespace locbound
