#include "fovcast/baselines.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

#include "fovcast/common.hpp"

namespace fovcast {

namespace {

void check_window(const TrajectoryWindow& w, int horizons) {
    if (horizons <= 0) throw std::invalid_argument("horizons must be positive");
    if (w.past_frames.empty()) throw std::invalid_argument("window has no past frames");
    if (w.fps <= 0) throw std::invalid_argument("window frame rate must be positive");
}

/** Simple least squares y = a + b t; returns false when the fit is degenerate. */
struct LineFit {
    double intercept = 0.0;
    double slope = 0.0;
};

bool fit_line(std::span<const double> t, std::span<const double> y, LineFit& out) {
    const double n = static_cast<double>(t.size());
    if (t.size() < 2) return false;
    double st = 0.0, sy = 0.0, stt = 0.0, sty = 0.0;
    for (std::size_t i = 0; i < t.size(); ++i) {
        st += t[i];
        sy += y[i];
        stt += t[i] * t[i];
        sty += t[i] * y[i];
    }
    const double det = n * stt - st * st;
    if (std::abs(det) < 1e-12) return false;
    out.slope = (n * sty - st * sy) / det;
    out.intercept = (sy - out.slope * st) / n;
    return true;
}

/** Timestamp of past frame j: frame centers at (j + 0.5) / fps seconds. */
double frame_time(std::size_t j, int fps) {
    return (static_cast<double>(j) + 0.5) / fps;
}

/** Prediction time for horizon k (1-based): the future second's midpoint. */
double horizon_time(const TrajectoryWindow& w, int k) {
    return static_cast<double>(w.past_frames.size()) / w.fps + k - 0.5;
}

}  // namespace

std::vector<UnitVec3> persistency(const TrajectoryWindow& w, int horizons) {
    check_window(w, horizons);
    return std::vector<UnitVec3>(static_cast<std::size_t>(horizons), w.past_frames.back());
}

std::vector<UnitVec3> linear_regression_predict(const TrajectoryWindow& w, int horizons) {
    check_window(w, horizons);
    if (w.past_frames.size() < 2) throw std::invalid_argument("need at least two past frames");

    const std::size_t total = w.past_frames.size();
    const std::size_t fit_seconds = 10;
    const std::size_t span = std::min(total, fit_seconds * static_cast<std::size_t>(w.fps));
    const std::size_t first = total - span;

    std::vector<double> t(span);
    std::vector<double> axis(span);
    LineFit fits[3];
    bool ok = true;
    for (std::size_t j = 0; j < span; ++j) t[j] = frame_time(first + j, w.fps);
    for (int a = 0; a < 3 && ok; ++a) {
        for (std::size_t j = 0; j < span; ++j) {
            const UnitVec3& v = w.past_frames[first + j];
            axis[j] = a == 0 ? v.x : a == 1 ? v.y : v.z;
        }
        ok = fit_line(t, axis, fits[a]);
    }
    if (!ok) return persistency(w, horizons);

    std::vector<UnitVec3> preds;
    preds.reserve(static_cast<std::size_t>(horizons));
    for (int k = 1; k <= horizons; ++k) {
        const double tk = horizon_time(w, k);
        const double x = fits[0].intercept + fits[0].slope * tk;
        const double y = fits[1].intercept + fits[1].slope * tk;
        const double z = fits[2].intercept + fits[2].slope * tk;
        if (std::sqrt(x * x + y * y + z * z) < 1e-9) {
            preds.push_back(w.past_frames.back());  // extrapolation collapsed
        } else {
            preds.push_back(unit(x, y, z));
        }
    }
    return preds;
}

namespace {

/** Longest suffix of `v` whose consecutive differences keep one sign
 *  (zeros allowed); returns the first index of that suffix. */
std::size_t monotonic_suffix_start(std::span<const double> v) {
    if (v.size() < 2) return 0;
    int sign = 0;
    std::size_t start = v.size() - 1;
    for (std::size_t i = v.size() - 1; i > 0; --i) {
        const double d = v[i] - v[i - 1];
        if (d != 0.0) {
            const int s = d > 0.0 ? 1 : -1;
            if (sign == 0)
                sign = s;
            else if (s != sign)
                break;
        }
        start = i - 1;
    }
    return start;
}

}  // namespace

std::vector<UnitVec3> truncated_linear_predict(const TrajectoryWindow& w, int horizons) {
    check_window(w, horizons);
    if (w.past_frames.size() < 2) throw std::invalid_argument("need at least two past frames");

    const std::size_t n = w.past_frames.size();
    std::vector<double> theta(n), phi(n);
    for (std::size_t j = 0; j < n; ++j) {
        SphericalAngle a = unit_to_angles(w.past_frames[j]);
        phi[j] = a.phi;
        theta[j] = a.theta;
        if (j > 0) {  // unwrap: keep successive longitudes within half a turn
            while (theta[j] - theta[j - 1] > kPi) theta[j] -= 2.0 * kPi;
            while (theta[j] - theta[j - 1] < -kPi) theta[j] += 2.0 * kPi;
        }
    }

    // Per-axis suffix fit; a degenerate axis holds the last observed value.
    auto axis_predictor = [&](std::span<const double> series) {
        const std::size_t start = monotonic_suffix_start(series);
        std::vector<double> t, y;
        for (std::size_t j = start; j < series.size(); ++j) {
            t.push_back(frame_time(j, w.fps));
            y.push_back(series[j]);
        }
        LineFit fit;
        if (t.size() < 2 || !fit_line(t, y, fit)) {
            fit.intercept = series.back();
            fit.slope = 0.0;
        }
        return fit;
    };
    const LineFit theta_fit = axis_predictor(theta);
    const LineFit phi_fit = axis_predictor(phi);

    std::vector<UnitVec3> preds;
    preds.reserve(static_cast<std::size_t>(horizons));
    for (int k = 1; k <= horizons; ++k) {
        const double tk = horizon_time(w, k);
        const double th = theta_fit.intercept + theta_fit.slope * tk;
        const double ph = phi_fit.intercept + phi_fit.slope * tk;
        preds.push_back(angles_to_unit(make_angle(th, ph)));  // wraps theta, clamps phi
    }
    return preds;
}

namespace {

UnitVec3 normalized_mean(std::span<const UnitVec3> vs) {
    double x = 0.0, y = 0.0, z = 0.0;
    for (const UnitVec3& v : vs) {
        x += v.x;
        y += v.y;
        z += v.z;
    }
    const double inv = 1.0 / static_cast<double>(vs.size());
    return unit(x * inv, y * inv, z * inv);  // throws NumericError when cancelled
}

void check_roster(const TrajectoryWindow& w, int horizons) {
    if (w.others_future.empty()) throw DataError("predictor needs at least one other user");
    for (const auto& seq : w.others_future)
        if (seq.size() < static_cast<std::size_t>(horizons))
            throw std::invalid_argument("other users do not cover the requested horizons");
}

}  // namespace

std::vector<UnitVec3> naive_average(const TrajectoryWindow& w, int horizons) {
    check_window(w, horizons);
    check_roster(w, horizons);
    std::vector<UnitVec3> preds;
    preds.reserve(static_cast<std::size_t>(horizons));
    for (int k = 1; k <= horizons; ++k) {
        std::vector<UnitVec3> at_k;
        at_k.reserve(w.others_future.size());
        for (const auto& seq : w.others_future) at_k.push_back(seq[k - 1].mu);
        preds.push_back(normalized_mean(at_k));
    }
    return preds;
}

std::vector<UnitVec3> knn_predict(const TrajectoryWindow& w, int horizons, int k) {
    check_window(w, horizons);
    check_roster(w, horizons);
    if (k <= 0) throw std::invalid_argument("k must be positive");
    const std::size_t take =
        std::min<std::size_t>(static_cast<std::size_t>(k), w.others_future.size());

    std::vector<UnitVec3> preds;
    preds.reserve(static_cast<std::size_t>(horizons));
    UnitVec3 anchor = w.past_frames.back();
    std::vector<std::size_t> idx(w.others_future.size());
    for (int h = 1; h <= horizons; ++h) {
        std::iota(idx.begin(), idx.end(), std::size_t{0});
        std::vector<double> dist(w.others_future.size());
        for (std::size_t i = 0; i < dist.size(); ++i)
            dist[i] = great_circle_distance(anchor, w.others_future[i][h - 1].mu);
        std::sort(idx.begin(), idx.end(), [&](std::size_t a, std::size_t b) {
            if (dist[a] != dist[b]) return dist[a] < dist[b];
            return a < b;
        });
        std::vector<UnitVec3> chosen;
        chosen.reserve(take);
        for (std::size_t i = 0; i < take; ++i)
            chosen.push_back(w.others_future[idx[i]][h - 1].mu);
        anchor = normalized_mean(chosen);
        preds.push_back(anchor);
    }
    return preds;
}

std::vector<SecondSummary> single_lstm_predict(const TrajectoryModel& m,
                                               const TrajectoryWindow& w, int horizons) {
    if (m.config.variant != TrajectoryVariant::single_lstm)
        throw UsageError("this baseline needs a single-cell recurrent model, got " +
                         to_string(m.config.variant));
    if (!m.trained) throw UsageError("model has not been trained");
    return trajectory_predict(m, w, horizons);
}

}  // namespace fovcast
