#include "fovcast/baselines.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <vector>

#include "fovcast/common.hpp"
#include "support/synthetic.hpp"

namespace fovcast {
namespace {

using testsupport::AnglePath;
using testsupport::make_session;

constexpr double kDeg = 3.14159265358979323846 / 180.0;

/** Window whose past follows the given per-frame angles; no other users. */
TrajectoryWindow manual_window(const std::vector<double>& theta_deg,
                               const std::vector<double>& phi_deg, int fps) {
    TrajectoryWindow w;
    w.fps = fps;
    for (std::size_t j = 0; j < theta_deg.size(); ++j)
        w.past_frames.push_back(angles_to_unit(make_angle(theta_deg[j] * kDeg,
                                                          phi_deg[j] * kDeg)));
    return w;
}

void add_other(TrajectoryWindow& w, const std::vector<UnitVec3>& future_mus) {
    std::vector<SecondSummary> seq;
    for (const UnitVec3& v : future_mus) {
        SecondSummary s;
        s.mu = v;
        seq.push_back(s);
    }
    w.others_future.push_back(std::move(seq));
}

double angle_between(const UnitVec3& a, const UnitVec3& b) {
    return great_circle_distance(a, b);
}

/** Ordinary least squares oracle on one axis over chosen frames. */
double ols_extrapolate(const std::vector<double>& t, const std::vector<double>& y, double tk) {
    double st = 0, sy = 0, stt = 0, sty = 0;
    const double n = static_cast<double>(t.size());
    for (std::size_t i = 0; i < t.size(); ++i) {
        st += t[i];
        sy += y[i];
        stt += t[i] * t[i];
        sty += t[i] * y[i];
    }
    const double slope = (n * sty - st * sy) / (n * stt - st * st);
    const double intercept = (sy - slope * st) / n;
    return intercept + slope * tk;
}

// ====================== persistency ======================

TEST(Persistency, RepeatsTheLastFrameExactly) {
    AnglePath p;
    p.theta0 = 25.0;
    p.theta_rate = 13.0;
    p.phi0 = -10.0;
    p.phi_rate = 2.0;
    SessionRecord s = make_session("vid", "u0", p, 7, 5);
    auto windows = build_windows(s, {}, 3, 4, 1);
    ASSERT_EQ(windows.size(), 1u);
    const TrajectoryWindow& w = windows[0];

    std::vector<UnitVec3> preds = persistency(w, 4);
    ASSERT_EQ(preds.size(), 4u);
    for (const UnitVec3& v : preds) {
        EXPECT_EQ(v.x, w.past_frames.back().x);
        EXPECT_EQ(v.y, w.past_frames.back().y);
        EXPECT_EQ(v.z, w.past_frames.back().z);
    }
    TrajectoryWindow empty;
    empty.fps = 5;
    EXPECT_THROW(persistency(empty, 1), std::invalid_argument);
}

// ====================== plain linear regression ======================

TEST(LinearRegression, MatchesClosedFormLeastSquares) {
    AnglePath p;
    p.theta0 = 0.0;
    p.theta_rate = 10.0;
    SessionRecord s = make_session("vid", "u0", p, 5, 30);
    auto windows = build_windows(s, {}, 3, 2, 1);
    ASSERT_EQ(windows.size(), 1u);
    const TrajectoryWindow& w = windows[0];

    std::vector<double> t, xs, ys, zs;
    for (std::size_t j = 0; j < w.past_frames.size(); ++j) {
        t.push_back((j + 0.5) / w.fps);
        xs.push_back(w.past_frames[j].x);
        ys.push_back(w.past_frames[j].y);
        zs.push_back(w.past_frames[j].z);
    }
    std::vector<UnitVec3> preds = linear_regression_predict(w, 2);
    for (int k = 1; k <= 2; ++k) {
        const double tk = 3.0 + k - 0.5;
        const UnitVec3 want = unit(ols_extrapolate(t, xs, tk), ols_extrapolate(t, ys, tk),
                                   ols_extrapolate(t, zs, tk));
        EXPECT_LT(angle_between(preds[k - 1], want), 1e-9);
        const double norm = preds[k - 1].x * preds[k - 1].x +
                            preds[k - 1].y * preds[k - 1].y +
                            preds[k - 1].z * preds[k - 1].z;
        EXPECT_NEAR(norm, 1.0, 1e-12);
    }
}

TEST(LinearRegression, RecoversSteadyEquatorPan) {
    // 10 deg/s eastward at the equator with a short 2 s history: horizon-1
    // and horizon-2 predictions land within 2 degrees of the continued pan
    // evaluated at each future second's midpoint. (Longer fit windows bend
    // the per-axis chord fit away from the circle and widen the error.)
    AnglePath p;
    p.theta0 = 0.0;
    p.theta_rate = 10.0;
    SessionRecord s = make_session("vid", "u0", p, 4, 30);
    auto windows = build_windows(s, {}, 2, 2, 1);
    ASSERT_EQ(windows.size(), 1u);

    std::vector<UnitVec3> preds = linear_regression_predict(windows[0], 2);
    for (int k = 1; k <= 2; ++k) {
        const double want_theta = 10.0 * (2.0 + k - 0.5) * kDeg;
        const UnitVec3 want = angles_to_unit(make_angle(want_theta, 0.0));
        EXPECT_LT(angle_between(preds[k - 1], want), 2.0 * kDeg)
            << "horizon " << k << " off by "
            << angle_between(preds[k - 1], want) / kDeg << " deg";
    }
}

TEST(LinearRegression, StaticPastEqualsPersistency) {
    AnglePath p;
    p.theta0 = 40.0;
    p.phi0 = 15.0;
    SessionRecord s = make_session("vid", "u0", p, 5, 10);
    auto windows = build_windows(s, {}, 3, 2, 1);
    std::vector<UnitVec3> lr = linear_regression_predict(windows[0], 2);
    std::vector<UnitVec3> pe = persistency(windows[0], 2);
    for (int k = 0; k < 2; ++k) EXPECT_LT(angle_between(lr[k], pe[k]), 1e-9);
}

TEST(LinearRegression, FitsOnlyTheLastTenSeconds) {
    // 12 s of past: the first 2 s sweep hard westward, the last 10 s pan
    // gently eastward. The fit must ignore the early sweep.
    const int fps = 5;
    std::vector<double> theta, phi;
    for (int j = 0; j < 12 * fps; ++j) {
        const double t = (j + 0.5) / fps;
        theta.push_back(t < 2.0 ? -50.0 * (2.0 - t) : 4.0 * (t - 2.0));
        phi.push_back(0.0);
    }
    TrajectoryWindow w = manual_window(theta, phi, fps);
    std::vector<UnitVec3> preds = linear_regression_predict(w, 2);

    for (int k = 1; k <= 2; ++k) {
        const double tk = 12.0 + k - 0.5;
        std::vector<double> t10, x10, y10;
        for (int j = 2 * fps; j < 12 * fps; ++j) {
            t10.push_back((j + 0.5) / fps);
            x10.push_back(w.past_frames[j].x);
            y10.push_back(w.past_frames[j].y);
        }
        const double ox = ols_extrapolate(t10, x10, tk);
        const double oy = ols_extrapolate(t10, y10, tk);
        const UnitVec3 want = unit(ox, oy, 0.0);
        EXPECT_LT(angle_between(preds[k - 1], want), 1e-9);

        // A whole-window fit would land measurably elsewhere.
        std::vector<double> tall, xall, yall;
        for (int j = 0; j < 12 * fps; ++j) {
            tall.push_back((j + 0.5) / fps);
            xall.push_back(w.past_frames[j].x);
            yall.push_back(w.past_frames[j].y);
        }
        const UnitVec3 whole =
            unit(ols_extrapolate(tall, xall, tk), ols_extrapolate(tall, yall, tk), 0.0);
        EXPECT_GT(angle_between(preds[k - 1], whole), 1.0 * kDeg);
    }
}

// ====================== truncated linear regression ======================

TEST(TruncatedLinear, FitsOnlyTheFallingSuffix) {
    // Longitude rises 5 deg/frame for 4 frames, then falls 3 deg/frame for 6
    // frames at 2 fps. The fitted segment is the exactly linear falling tail,
    // so the extrapolation continues it exactly: -6 deg/s from the peak.
    std::vector<double> theta, phi;
    for (int j = 0; j < 4; ++j) theta.push_back(5.0 * j);
    for (int j = 1; j <= 6; ++j) theta.push_back(15.0 - 3.0 * j);
    phi.assign(theta.size(), 0.0);
    TrajectoryWindow w = manual_window(theta, phi, 2);

    std::vector<UnitVec3> preds = truncated_linear_predict(w, 3);
    // Falling line through frame 3 (t=1.75 s, 15 deg) with slope -6 deg/s.
    for (int k = 1; k <= 3; ++k) {
        const double tk = 5.0 + k - 0.5;
        const double want_theta = (15.0 - 6.0 * (tk - 1.75)) * kDeg;
        const UnitVec3 want = angles_to_unit(make_angle(want_theta, 0.0));
        EXPECT_LT(angle_between(preds[k - 1], want), 1e-9) << "horizon " << k;
    }
}

TEST(TruncatedLinear, StaticPastEqualsPersistency) {
    std::vector<double> theta(8, 33.0), phi(8, -12.0);
    TrajectoryWindow w = manual_window(theta, phi, 2);
    std::vector<UnitVec3> tr = truncated_linear_predict(w, 3);
    std::vector<UnitVec3> pe = persistency(w, 3);
    for (int k = 0; k < 3; ++k) EXPECT_LT(angle_between(tr[k], pe[k]), 1e-9);
}

TEST(TruncatedLinear, MonotonicWindowMatchesPlainRegression) {
    // A gentle monotonic pan in both axes: the suffix is the whole window,
    // and in this small-angle regime the angle-domain and vector-domain fits
    // coincide to a fraction of a degree.
    AnglePath p;
    p.theta0 = 10.0;
    p.theta_rate = 3.0;
    p.phi0 = -6.0;
    p.phi_rate = 1.0;
    SessionRecord s = make_session("vid", "u0", p, 5, 30);
    auto windows = build_windows(s, {}, 3, 2, 1);
    std::vector<UnitVec3> tr = truncated_linear_predict(windows[0], 2);
    std::vector<UnitVec3> lr = linear_regression_predict(windows[0], 2);
    for (int k = 0; k < 2; ++k) EXPECT_LT(angle_between(tr[k], lr[k]), 0.5 * kDeg);
}

TEST(TruncatedLinear, UnwrapsAcrossTheDateline) {
    // Steady eastward pan crossing theta = 180: without unwrapping the
    // series would look non-monotonic and the fit would break.
    std::vector<double> theta, phi;
    for (int j = 0; j < 8; ++j) theta.push_back(170.0 + 4.0 * j);  // wraps at j >= 3
    phi.assign(theta.size(), 0.0);
    TrajectoryWindow w = manual_window(theta, phi, 2);
    std::vector<UnitVec3> preds = truncated_linear_predict(w, 2);
    for (int k = 1; k <= 2; ++k) {
        const double tk = 4.0 + k - 0.5;
        const double want_theta = (170.0 + 8.0 * (tk - 0.25)) * kDeg;  // 8 deg/s from t=0.25
        const UnitVec3 want = angles_to_unit(make_angle(want_theta, 0.0));
        EXPECT_LT(angle_between(preds[k - 1], want), 1e-9) << "horizon " << k;
    }
}

// ====================== naive average ======================

TEST(NaiveAverage, NormalizedMeanOfOthers) {
    TrajectoryWindow w = manual_window({0.0, 0.0}, {0.0, 0.0}, 2);
    add_other(w, {unit(1, 0, 0), unit(0, 0, 1)});
    add_other(w, {unit(0, 1, 0), unit(0, 0, 1)});
    std::vector<UnitVec3> preds = naive_average(w, 2);
    const double r = std::sqrt(0.5);
    EXPECT_NEAR(preds[0].x, r, 1e-12);
    EXPECT_NEAR(preds[0].y, r, 1e-12);
    EXPECT_NEAR(preds[0].z, 0.0, 1e-12);
    EXPECT_NEAR(preds[1].z, 1.0, 1e-12);
}

TEST(NaiveAverage, SymmetricClusterRecoversItsCenter) {
    TrajectoryWindow w = manual_window({0.0, 0.0}, {0.0, 0.0}, 2);
    const double d = 20.0 * kDeg;
    add_other(w, {angles_to_unit(make_angle(d, 0.0))});
    add_other(w, {angles_to_unit(make_angle(-d, 0.0))});
    add_other(w, {angles_to_unit(make_angle(0.0, d))});
    add_other(w, {angles_to_unit(make_angle(0.0, -d))});
    std::vector<UnitVec3> preds = naive_average(w, 1);
    EXPECT_LT(angle_between(preds[0], unit(1, 0, 0)), 1e-12);
}

TEST(NaiveAverage, RejectsEmptyRosterAndCancellation) {
    TrajectoryWindow w = manual_window({0.0, 0.0}, {0.0, 0.0}, 2);
    EXPECT_THROW(naive_average(w, 1), DataError);
    add_other(w, {unit(1, 0, 0)});
    add_other(w, {unit(-1, 0, 0)});
    EXPECT_THROW(naive_average(w, 1), NumericError);
}

// ====================== nearest-neighbour chain ======================

TEST(Knn, SingleTrackingOtherIsFollowedExactly) {
    TrajectoryWindow w = manual_window({0.0, 0.0}, {0.0, 0.0}, 2);
    std::vector<UnitVec3> track;
    for (int k = 1; k <= 4; ++k)
        track.push_back(angles_to_unit(make_angle(12.0 * k * kDeg, 3.0 * k * kDeg)));
    add_other(w, track);
    std::vector<UnitVec3> preds = knn_predict(w, 4, 1);
    for (int k = 0; k < 4; ++k) EXPECT_LT(angle_between(preds[k], track[k]), 1e-12);
}

TEST(Knn, ChainAnchorsOnThePreviousPrediction) {
    // Horizon 1: A sits near the viewer's last frame, B far away -> pick A.
    // Horizon 2: B moves onto A's old position while A jumps away -> pick B.
    TrajectoryWindow w = manual_window({0.0}, {0.0}, 1);
    const UnitVec3 a1 = angles_to_unit(make_angle(10.0 * kDeg, 0.0));
    const UnitVec3 a2 = angles_to_unit(make_angle(130.0 * kDeg, 0.0));
    const UnitVec3 b1 = angles_to_unit(make_angle(90.0 * kDeg, 0.0));
    const UnitVec3 b2 = a1;
    add_other(w, {a1, a2});
    add_other(w, {b1, b2});
    std::vector<UnitVec3> preds = knn_predict(w, 2, 1);
    EXPECT_LT(angle_between(preds[0], a1), 1e-12);
    EXPECT_LT(angle_between(preds[1], b2), 1e-12);  // followed B, not A
}

TEST(Knn, CapsAtRosterSizeAndMatchesNaiveAverage) {
    TrajectoryWindow w = manual_window({0.0, 0.0}, {0.0, 0.0}, 2);
    add_other(w, {angles_to_unit(make_angle(30.0 * kDeg, 10.0 * kDeg)),
                  angles_to_unit(make_angle(35.0 * kDeg, 5.0 * kDeg))});
    add_other(w, {angles_to_unit(make_angle(-20.0 * kDeg, 0.0)),
                  angles_to_unit(make_angle(-25.0 * kDeg, -5.0 * kDeg))});
    std::vector<UnitVec3> knn = knn_predict(w, 2, 5);
    std::vector<UnitVec3> avg = naive_average(w, 2);
    for (int k = 0; k < 2; ++k) EXPECT_LT(angle_between(knn[k], avg[k]), 1e-15);
    EXPECT_THROW(knn_predict(w, 2, 0), std::invalid_argument);
}

// ====================== recurrent baseline ======================

TEST(SingleLstm, GuardsVariantAndTrainingState) {
    AnglePath p;
    p.theta0 = 5.0;
    p.theta_rate = 4.0;
    SessionRecord s = make_session("vid", "u0", p, 7, 2);
    auto windows = build_windows(s, {}, 3, 4, 1);

    TrajectoryModelConfig wrong;
    wrong.variant = TrajectoryVariant::target_only;
    wrong.fps = 2;
    wrong.hidden = 8;
    Rng rng(9);
    TrajectoryModel t = make_trajectory_model(wrong, rng);
    t.trained = true;
    EXPECT_THROW(single_lstm_predict(t, windows[0], 4), UsageError);

    TrajectoryModelConfig cfg;
    cfg.variant = TrajectoryVariant::single_lstm;
    cfg.fps = 2;
    cfg.hidden = 8;
    Rng rng2(9);
    TrajectoryModel m = make_trajectory_model(cfg, rng2);
    EXPECT_THROW(single_lstm_predict(m, windows[0], 4), UsageError);  // untrained

    m.trained = true;
    std::vector<SecondSummary> preds = single_lstm_predict(m, windows[0], 4);
    std::vector<SecondSummary> direct = trajectory_predict(m, windows[0], 4);
    ASSERT_EQ(preds.size(), 4u);
    for (int k = 0; k < 4; ++k) {
        EXPECT_EQ(preds[k].mu.x, direct[k].mu.x);
        EXPECT_EQ(preds[k].sigma, direct[k].sigma);
        EXPECT_GE(preds[k].sigma[0], 0.0);
    }
}

}  // namespace
}  // namespace fovcast
