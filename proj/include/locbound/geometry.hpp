#pragma once

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <string>
#include <variant>
#include <vector>

namespace locbound {

// ----------------------------------------------------------------------------
// Deployment models
// ----------------------------------------------------------------------------

/// Anchors uniform over the ring r_inner <= d <= r_outer centered at the sensor.
struct Annulus {
    double r_inner = 0.0; // [m]
    double r_outer = 0.0; // [m]
};

/// Anchors uniform over the disk of the given radius centered at the sensor.
struct Disk {
    double radius = 0.0; // [m]
};

using GeometryModel = std::variant<Annulus, Disk>;

/// Throws std::invalid_argument unless 0 < r_inner < r_outer (annulus)
/// or radius > 0 (disk), all finite.
void validate(const GeometryModel& model);

/// Master seed for reproducible sampling. Trial t always draws from the
/// substream (master_seed, t); see RandomStream.
struct SeedSpec {
    std::uint64_t master_seed = 0;
};

// ----------------------------------------------------------------------------
// Anchor sets
// ----------------------------------------------------------------------------

struct Anchor {
    double distance_m = 0.0;
    double angle_rad = 0.0; // normalized to [0, 2*pi)
};

/// Polar coordinates of n >= 1 anchors relative to a sensor at the origin.
/// Angles are normalized on construction; distances must be finite and >= 0.
/// Modality-specific anchor-count minimums are enforced by the CRLB layer,
/// not here.
class AnchorSet {
public:
    explicit AnchorSet(std::vector<Anchor> anchors);

    std::size_t size() const noexcept { return anchors_.size(); }
    const Anchor& operator[](std::size_t i) const noexcept { return anchors_[i]; }
    const std::vector<Anchor>& anchors() const noexcept { return anchors_; }

    auto begin() const noexcept { return anchors_.begin(); }
    auto end() const noexcept { return anchors_.end(); }

    /// Appends one anchor (validated and normalized like the constructor).
    void push_back(Anchor anchor);

private:
    std::vector<Anchor> anchors_;
};

/// Wraps an angle into [0, 2*pi).
double normalize_angle(double angle_rad);

/// Inverse CDF of the anchor-distance law; u in [0, 1].
/// Annulus: sqrt(r_inner^2 + u*(r_outer^2 - r_inner^2)); disk: radius*sqrt(u).
double distance_from_uniform(const GeometryModel& model, double u);

/// Density of the anchor distance at x; zero outside the model's support.
double pdf_distance(const GeometryModel& model, double x);

/// Density of the anchor angle at x: 1/(2*pi) on [0, 2*pi), zero elsewhere.
double pdf_angle(double x);

/**
 * Draws n anchors i.i.d. from the model: distance by inverse transform of
 * the radial law, angle uniform on [0, 2*pi). Per anchor the distance
 * uniform is drawn first, then the angle uniform, each from the half-open
 * interval [0, 1); the measure-zero exclusion of the upper endpoint has no
 * statistical effect.
 *
 * Bit-identical for identical (model, n, seed, trial), on any thread.
 */
AnchorSet sample_anchors(const GeometryModel& model, std::size_t n,
                         SeedSpec seed, std::uint64_t trial);

/// Allocation-free variant of sample_anchors for hot loops; overwrites the
/// output vectors (resized to n). Produces exactly the same draws.
void sample_anchors_into(const GeometryModel& model, std::size_t n,
                         SeedSpec seed, std::uint64_t trial,
                         std::vector<double>& distances_m,
                         std::vector<double>& angles_rad);

// ----------------------------------------------------------------------------
// Serialization
// ----------------------------------------------------------------------------

/// CSV with header "d,alpha"; one anchor per row, 17 significant digits,
/// angles in radians.
void write_anchor_csv(std::ostream& out, const AnchorSet& anchors);

/// JSON array of [d, alpha] pairs (radians).
std::string anchor_json(const AnchorSet& anchors);

/// Parses the CSV format written by write_anchor_csv. Errors report
/// "<source_name>:<line>: <reason>".
AnchorSet read_anchor_csv(std::istream& in, const std::string& source_name);

} // namespace locbound
