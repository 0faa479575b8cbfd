#include "fovcast/geometry.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace fovcast {

double wrap_angle(double a) {
    double w = std::fmod(a + kPi, 2.0 * kPi);
    if (w < 0.0) w += 2.0 * kPi;
    return w - kPi;
}

SphericalAngle make_angle(double theta, double phi) {
    SphericalAngle a;
    a.theta = wrap_angle(theta);
    a.phi = std::clamp(phi, -kPi / 2.0, kPi / 2.0);
    return a;
}

UnitVec3 unit(double x, double y, double z) {
    const double n = std::sqrt(x * x + y * y + z * z);
    if (n < 1e-9) throw NumericError("cannot normalize a near-zero vector");
    return UnitVec3{x / n, y / n, z / n};
}

UnitVec3 angles_to_unit(const SphericalAngle& a) {
    const double cp = std::cos(a.phi);
    return UnitVec3{cp * std::cos(a.theta), cp * std::sin(a.theta), std::sin(a.phi)};
}

SphericalAngle unit_to_angles(const UnitVec3& v) {
    SphericalAngle a;
    const double horiz = std::hypot(v.x, v.y);
    // At the poles longitude is arbitrary; define it as 0.
    a.theta = horiz < 1e-15 ? 0.0 : wrap_angle(std::atan2(v.y, v.x));
    a.phi = std::asin(std::clamp(v.z, -1.0, 1.0));
    return a;
}

double circular_mean(std::span<const double> thetas, std::span<const double> weights) {
    if (thetas.empty()) throw NumericError("circular mean of an empty set");
    if (!weights.empty() && weights.size() != thetas.size())
        throw std::invalid_argument("weight count does not match angle count");
    double s = 0.0, c = 0.0;
    for (std::size_t i = 0; i < thetas.size(); ++i) {
        const double w = weights.empty() ? 1.0 : weights[i];
        s += w * std::sin(thetas[i]);
        c += w * std::cos(thetas[i]);
    }
    if (std::hypot(s, c) < 1e-12) throw NumericError("circular mean undefined: zero resultant");
    return wrap_angle(std::atan2(s, c));
}

SecondSummary second_summary(std::span<const UnitVec3> frames) {
    if (frames.empty()) throw std::invalid_argument("second_summary needs at least one frame");
    const double n = static_cast<double>(frames.size());
    double mx = 0.0, my = 0.0, mz = 0.0;
    for (const UnitVec3& f : frames) {
        mx += f.x;
        my += f.y;
        mz += f.z;
    }
    mx /= n;
    my /= n;
    mz /= n;
    const double norm = std::sqrt(mx * mx + my * my + mz * mz);
    if (norm < 1e-9) throw NumericError("second summary undefined: mean direction vanishes");

    SecondSummary out;
    out.mu = UnitVec3{mx / norm, my / norm, mz / norm};
    double vx = 0.0, vy = 0.0, vz = 0.0;
    for (const UnitVec3& f : frames) {
        vx += (f.x - mx) * (f.x - mx);
        vy += (f.y - my) * (f.y - my);
        vz += (f.z - mz) * (f.z - mz);
    }
    out.sigma = {std::sqrt(vx / n), std::sqrt(vy / n), std::sqrt(vz / n)};
    return out;
}

namespace {

void check_viewport(const ViewportSpec& vp) {
    if (!(vp.span_theta_deg > 0.0 && vp.span_theta_deg <= 360.0))
        throw std::invalid_argument("viewport longitude span must be in (0, 360]");
    if (!(vp.span_phi_deg > 0.0 && vp.span_phi_deg <= 180.0))
        throw std::invalid_argument("viewport latitude span must be in (0, 180]");
}

}  // namespace

bool viewport_contains(const ViewportSpec& vp, const SphericalAngle& dir) {
    check_viewport(vp);
    const double dt = std::abs(wrap_angle(dir.theta - vp.center.theta));
    const double dp = std::abs(dir.phi - vp.center.phi);
    return dt <= deg2rad(vp.span_theta_deg) / 2.0 + 1e-15 &&
           dp <= deg2rad(vp.span_phi_deg) / 2.0 + 1e-15;
}

double coverage_fraction(const ViewportSpec& vp, const ViewportSpec& fov, double grid_deg) {
    check_viewport(vp);
    check_viewport(fov);
    if (!(grid_deg > 0.0 && grid_deg <= 1.0))
        throw std::invalid_argument("lattice pitch must be in (0, 1] degrees");

    // The lattice separates: a sample is covered iff its column's longitude
    // offset and its row's latitude both fall inside vp, and the cos(phi)
    // weight only depends on the row. Summing rows and columns independently
    // is therefore exactly the full 2-D lattice sum.
    const int nt = std::max(1, static_cast<int>(std::lround(fov.span_theta_deg / grid_deg)));
    const int np = std::max(1, static_cast<int>(std::lround(fov.span_phi_deg / grid_deg)));
    const double step_t = fov.span_theta_deg / nt;
    const double step_p = fov.span_phi_deg / np;
    const double half_vt = deg2rad(vp.span_theta_deg) / 2.0 + 1e-15;
    const double half_vp = deg2rad(vp.span_phi_deg) / 2.0 + 1e-15;

    int cols_inside = 0;
    for (int i = 0; i < nt; ++i) {
        const double theta =
            fov.center.theta + deg2rad(-fov.span_theta_deg / 2.0 + (i + 0.5) * step_t);
        if (std::abs(wrap_angle(theta - vp.center.theta)) <= half_vt) ++cols_inside;
    }

    double weight_inside = 0.0, weight_total = 0.0;
    const double fov_phi_lo = rad2deg(fov.center.phi) - fov.span_phi_deg / 2.0;
    for (int j = 0; j < np; ++j) {
        const double phi_deg = fov_phi_lo + (j + 0.5) * step_p;
        if (phi_deg < -90.0 || phi_deg > 90.0) continue;  // beyond the poles: no area
        const double w = std::cos(deg2rad(phi_deg));
        weight_total += w;
        if (std::abs(deg2rad(phi_deg) - vp.center.phi) <= half_vp) weight_inside += w;
    }
    if (weight_total <= 0.0) throw NumericError("fov rectangle carries no area on the sphere");
    return (static_cast<double>(cols_inside) / nt) * (weight_inside / weight_total);
}

double hit_rate_for_second(const UnitVec3& pred_center, std::span<const UnitVec3> gt_frames,
                           double alpha, std::pair<double, double> fov_span_deg,
                           double grid_deg) {
    if (gt_frames.empty()) throw std::invalid_argument("hit rate needs at least one frame");
    if (!(alpha > 0.0)) throw std::invalid_argument("alpha must be positive");
    ViewportSpec vp;
    vp.center = unit_to_angles(pred_center);
    vp.span_theta_deg = std::min(360.0, alpha * fov_span_deg.first);
    vp.span_phi_deg = std::min(180.0, alpha * fov_span_deg.second);

    double acc = 0.0;
    for (const UnitVec3& f : gt_frames) {
        ViewportSpec fov{unit_to_angles(f), fov_span_deg.first, fov_span_deg.second};
        acc += coverage_fraction(vp, fov, grid_deg);
    }
    return acc / static_cast<double>(gt_frames.size());
}

double great_circle_distance(const UnitVec3& a, const UnitVec3& b) {
    const double cx = a.y * b.z - a.z * b.y;
    const double cy = a.z * b.x - a.x * b.z;
    const double cz = a.x * b.y - a.y * b.x;
    const double cross = std::sqrt(cx * cx + cy * cy + cz * cz);
    const double dot = a.x * b.x + a.y * b.y + a.z * b.z;
    return std::atan2(cross, dot);
}

}  // namespace fovcast
