#pragma once

#include <array>
#include <span>
#include <utility>

#include "fovcast/common.hpp"

namespace fovcast {

/** Degrees -> radians. */
inline constexpr double deg2rad(double d) { return d * kPi / 180.0; }
/** Radians -> degrees. */
inline constexpr double rad2deg(double r) { return r * 180.0 / kPi; }

/** Wrap an angle into [-pi, pi). */
double wrap_angle(double a);

/**
 * Gaze direction on the sphere: theta is longitude in [-pi, pi), phi is
 * latitude in [-pi/2, pi/2]. Build values through make_angle so the
 * invariants hold.
 */
struct SphericalAngle {
    double theta = 0.0;
    double phi = 0.0;
};

/** Construct a SphericalAngle with theta wrapped and phi clamped to the poles. */
SphericalAngle make_angle(double theta, double phi);

/** Unit direction vector; x = cos(phi)cos(theta), y = cos(phi)sin(theta), z = sin(phi). */
struct UnitVec3 {
    double x = 1.0;
    double y = 0.0;
    double z = 0.0;
};

/**
 * Normalize (x, y, z) to unit length.
 * Throws NumericError when the norm is below 1e-9 (direction undefined).
 */
UnitVec3 unit(double x, double y, double z);

UnitVec3 angles_to_unit(const SphericalAngle& a);

/**
 * Inverse of angles_to_unit. At the poles (|z| = 1, horizontal part
 * numerically zero) theta is defined as 0.
 */
SphericalAngle unit_to_angles(const UnitVec3& v);

/**
 * Weighted circular mean of longitudes: atan2 of the weighted sine/cosine
 * sums. Pass an empty weight span for uniform weights.
 * Throws NumericError when the resultant is shorter than 1e-12 (mean undefined,
 * e.g. two antipodal points).
 */
double circular_mean(std::span<const double> thetas, std::span<const double> weights = {});

/**
 * One second of gaze, reduced to a mean direction and a per-axis spread:
 * mu is the renormalized per-axis mean of the frame vectors, sigma the
 * per-axis standard deviation (divisor n, not n-1).
 */
struct SecondSummary {
    UnitVec3 mu;
    std::array<double, 3> sigma{0.0, 0.0, 0.0};
};

/**
 * Reduce the frames of one second. Requires at least one frame.
 * Throws NumericError when the mean vector's norm is below 1e-9.
 */
SecondSummary second_summary(std::span<const UnitVec3> frames);

/**
 * Axis-aligned region on the sphere, in (theta, phi) offsets from a center;
 * no roll. Spans are full widths in degrees: 0 < span_theta <= 360,
 * 0 < span_phi <= 180.
 */
struct ViewportSpec {
    SphericalAngle center;
    double span_theta_deg = 120.0;
    double span_phi_deg = 120.0;
};

/** Whether a direction falls inside the viewport (longitude wraps; boundaries inclusive). */
bool viewport_contains(const ViewportSpec& vp, const SphericalAngle& dir);

/**
 * Fraction of the fov rectangle covered by vp, integrated on a deterministic
 * grid_deg lattice over the fov with cos(phi) area weights. Lattice rows that
 * fall beyond the poles carry no area and are skipped. grid_deg must be in
 * (0, 1].
 */
double coverage_fraction(const ViewportSpec& vp, const ViewportSpec& fov, double grid_deg = 0.5);

/**
 * Mean coverage of the per-frame FoVs (span fov_span_deg, centered at each
 * ground-truth frame) by the predicted viewport whose spans are
 * alpha * fov_span_deg (clamped to the full sphere). Requires at least one
 * ground-truth frame and alpha > 0.
 */
double hit_rate_for_second(const UnitVec3& pred_center, std::span<const UnitVec3> gt_frames,
                           double alpha, std::pair<double, double> fov_span_deg,
                           double grid_deg = 0.5);

/** Great-circle distance in radians, numerically stable near 0 and pi. */
double great_circle_distance(const UnitVec3& a, const UnitVec3& b);

}  // namespace fovcast
