#include "locbound/geometry.hpp"

#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <istream>
#include <numbers>
#include <ostream>
#include <stdexcept>
#include <utility>

#include "locbound/rng.hpp"

#include <json.hpp>

namespace locbound {

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;

template <class... Ts>
struct overloaded : Ts... {
    using Ts::operator()...;
};
template <class... Ts>
overloaded(Ts...) -> overloaded<Ts...>;

std::string fmt17(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

} // namespace

void validate(const GeometryModel& model) {
    std::visit(overloaded{
                   [](const Annulus& a) {
                       if (!std::isfinite(a.r_inner) || !std::isfinite(a.r_outer) ||
                           !(a.r_inner > 0.0) || !(a.r_outer > a.r_inner)) {
                           throw std::invalid_argument(
                               "annulus requires 0 < r_inner < r_outer, both finite");
                       }
                   },
                   [](const Disk& d) {
                       if (!std::isfinite(d.radius) || !(d.radius > 0.0)) {
                           throw std::invalid_argument("disk requires a finite radius > 0");
                       }
                   }},
               model);
}

AnchorSet::AnchorSet(std::vector<Anchor> anchors) : anchors_(std::move(anchors)) {
    if (anchors_.empty()) {
        throw std::invalid_argument("anchor set requires at least one anchor");
    }
    for (auto& a : anchors_) {
        if (!std::isfinite(a.distance_m) || a.distance_m < 0.0) {
            throw std::invalid_argument("anchor distance must be finite and >= 0");
        }
        if (!std::isfinite(a.angle_rad)) {
            throw std::invalid_argument("anchor angle must be finite");
        }
        a.angle_rad = normalize_angle(a.angle_rad);
    }
}

void AnchorSet::push_back(Anchor anchor) {
    if (!std::isfinite(anchor.distance_m) || anchor.distance_m < 0.0) {
        throw std::invalid_argument("anchor distance must be finite and >= 0");
    }
    if (!std::isfinite(anchor.angle_rad)) {
        throw std::invalid_argument("anchor angle must be finite");
    }
    anchor.angle_rad = normalize_angle(anchor.angle_rad);
    anchors_.push_back(anchor);
}

double normalize_angle(double angle_rad) {
    double r = std::fmod(angle_rad, kTwoPi);
    if (r < 0.0) {
        r += kTwoPi;
    }
    if (r >= kTwoPi) { // fmod rounding can land exactly on 2*pi
        r = 0.0;
    }
    return r;
}

double distance_from_uniform(const GeometryModel& model, double u) {
    validate(model);
    if (!(u >= 0.0 && u <= 1.0)) {
        throw std::invalid_argument("u must lie in [0, 1]");
    }
    return std::visit(overloaded{
                          [u](const Annulus& a) {
                              const double lo = a.r_inner * a.r_inner;
                              const double hi = a.r_outer * a.r_outer;
                              return std::sqrt(lo + u * (hi - lo));
                          },
                          [u](const Disk& d) { return d.radius * std::sqrt(u); }},
                      model);
}

double pdf_distance(const GeometryModel& model, double x) {
    validate(model);
    return std::visit(overloaded{
                          [x](const Annulus& a) {
                              if (x < a.r_inner || x > a.r_outer) {
                                  return 0.0;
                              }
                              return 2.0 * x / (a.r_outer * a.r_outer - a.r_inner * a.r_inner);
                          },
                          [x](const Disk& d) {
                              if (x < 0.0 || x > d.radius) {
                                  return 0.0;
                              }
                              return 2.0 * x / (d.radius * d.radius);
                          }},
                      model);
}

double pdf_angle(double x) {
    if (x < 0.0 || x >= kTwoPi) {
        return 0.0;
    }
    return 1.0 / kTwoPi;
}

void sample_anchors_into(const GeometryModel& model, std::size_t n,
                         SeedSpec seed, std::uint64_t trial,
                         std::vector<double>& distances_m,
                         std::vector<double>& angles_rad) {
    validate(model);
    if (n < 1) {
        throw std::invalid_argument("anchor count must be >= 1");
    }
    distances_m.resize(n);
    angles_rad.resize(n);

    RandomStream rng(seed.master_seed, trial);
    const bool annulus = std::holds_alternative<Annulus>(model);
    double lo_sq = 0.0;
    double span_sq = 0.0;
    double disk_radius = 0.0;
    if (annulus) {
        const auto& a = std::get<Annulus>(model);
        lo_sq = a.r_inner * a.r_inner;
        span_sq = a.r_outer * a.r_outer - lo_sq;
    } else {
        disk_radius = std::get<Disk>(model).radius;
    }

    for (std::size_t i = 0; i < n; ++i) {
        const double u_d = rng.next_double();
        const double u_a = rng.next_double();
        distances_m[i] = annulus ? std::sqrt(lo_sq + u_d * span_sq)
                                 : disk_radius * std::sqrt(u_d);
        angles_rad[i] = normalize_angle(kTwoPi * u_a);
    }
}

AnchorSet sample_anchors(const GeometryModel& model, std::size_t n,
                         SeedSpec seed, std::uint64_t trial) {
    std::vector<double> d;
    std::vector<double> a;
    sample_anchors_into(model, n, seed, trial, d, a);
    std::vector<Anchor> anchors(n);
    for (std::size_t i = 0; i < n; ++i) {
        anchors[i] = Anchor{d[i], a[i]};
    }
    return AnchorSet(std::move(anchors));
}

void write_anchor_csv(std::ostream& out, const AnchorSet& anchors) {
    out << "d,alpha\n";
    for (const auto& a : anchors) {
        out << fmt17(a.distance_m) << ',' << fmt17(a.angle_rad) << '\n';
    }
}

std::string anchor_json(const AnchorSet& anchors) {
    nlohmann::json arr = nlohmann::json::array();
    for (const auto& a : anchors) {
        arr.push_back({a.distance_m, a.angle_rad});
    }
    return arr.dump();
}

namespace {

std::string strip(const std::string& s) {
    const auto first = s.find_first_not_of(" \t\r");
    if (first == std::string::npos) {
        return {};
    }
    const auto last = s.find_last_not_of(" \t\r");
    return s.substr(first, last - first + 1);
}

double parse_field(const std::string& field, const std::string& source_name,
                   std::size_t line_no) {
    const std::string t = strip(field);
    if (t.empty()) {
        throw std::runtime_error(source_name + ":" + std::to_string(line_no) +
                                 ": empty numeric field");
    }
    char* end = nullptr;
    const double v = std::strtod(t.c_str(), &end);
    if (end != t.c_str() + t.size()) {
        throw std::runtime_error(source_name + ":" + std::to_string(line_no) +
                                 ": malformed number '" + t + "'");
    }
    return v;
}

} // namespace

AnchorSet read_anchor_csv(std::istream& in, const std::string& source_name) {
    std::string line;
    std::size_t line_no = 0;

    // header
    if (!std::getline(in, line)) {
        throw std::runtime_error(source_name + ":1: empty file, expected header 'd,alpha'");
    }
    ++line_no;
    if (strip(line) != "d,alpha") {
        throw std::runtime_error(source_name + ":1: expected header 'd,alpha'");
    }

    std::vector<Anchor> anchors;
    while (std::getline(in, line)) {
        ++line_no;
        if (strip(line).empty()) {
            continue;
        }
        const auto comma = line.find(',');
        if (comma == std::string::npos) {
            throw std::runtime_error(source_name + ":" + std::to_string(line_no) +
                                     ": expected 'd,alpha' row");
        }
        if (line.find(',', comma + 1) != std::string::npos) {
            throw std::runtime_error(source_name + ":" + std::to_string(line_no) +
                                     ": expected exactly two fields");
        }
        const double d = parse_field(line.substr(0, comma), source_name, line_no);
        const double alpha = parse_field(line.substr(comma + 1), source_name, line_no);
        if (!std::isfinite(d) || d < 0.0) {
            throw std::runtime_error(source_name + ":" + std::to_string(line_no) +
                                     ": distance must be finite and >= 0");
        }
        if (!std::isfinite(alpha)) {
            throw std::runtime_error(source_name + ":" + std::to_string(line_no) +
                                     ": angle must be finite");
        }
        anchors.push_back(Anchor{d, alpha});
    }
    if (anchors.empty()) {
        throw std::runtime_error(source_name + ":" + std::to_string(line_no) +
                                 ": no anchor rows");
    }
    return AnchorSet(std::move(anchors));
}

} // namespace locbound
