#include "fovcast/train.hpp"

#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <vector>

#include "fovcast/common.hpp"
#include "fovcast/dataset.hpp"
#include "support/synthetic.hpp"

namespace fovcast {
namespace {

using nn::Tensor;
using testsupport::AnglePath;
using testsupport::make_session;

constexpr int kFps = 2;
constexpr int kPast = 3;
constexpr int kFuture = 4;

/** Eight smooth panning sessions with distinct phases, one window each. */
std::vector<TrajectoryWindow> make_cohort_windows() {
    std::vector<TrajectoryWindow> all;
    for (int i = 0; i < 8; ++i) {
        AnglePath p;
        p.theta0 = -60.0 + 15.0 * i;
        p.theta_rate = 6.0;
        p.theta_amp = 25.0;
        p.theta_period = 6.0;
        p.theta_phase = 0.7 * i;
        p.phi0 = 8.0 - 2.0 * i;
        p.phi_rate = 0.5;
        SessionRecord s = make_session("vid", "u" + std::to_string(i), p, kPast + kFuture, kFps);
        auto ws = build_windows(s, {}, kPast, kFuture, 1);
        EXPECT_EQ(ws.size(), 1u);
        all.push_back(ws.at(0));
    }
    return all;
}

TrajectoryModelConfig toy_config() {
    TrajectoryModelConfig cfg;
    cfg.variant = TrajectoryVariant::target_only;
    cfg.fps = kFps;
    cfg.hidden = 16;
    return cfg;
}

/** The documented window loss: per-horizon mean squared error over the
 *  packed (mean, spread) prediction, averaged across horizons. */
double window_loss_reference(const TrajectoryModel& m, const TrajectoryWindow& w, int horizons) {
    std::vector<SummaryOut> outs = trajectory_forward(m, w, horizons);
    double total = 0.0;
    for (int k = 0; k < horizons; ++k) {
        const SecondSummary& gt = w.future_summaries[k];
        const double want[6] = {gt.mu.x,     gt.mu.y,     gt.mu.z,
                                gt.sigma[0], gt.sigma[1], gt.sigma[2]};
        Tensor mu = outs[k].mu, sigma = outs[k].sigma;
        double sq = 0.0;
        for (int j = 0; j < 3; ++j) {
            sq += (mu.value_at(j) - want[j]) * (mu.value_at(j) - want[j]);
            sq += (sigma.value_at(j) - want[j + 3]) * (sigma.value_at(j) - want[j + 3]);
        }
        total += sq / 6.0;
    }
    return total / horizons;
}

// ====================== optimizer mechanics ======================

TEST(Adam, DescendsToQuadraticMinimum) {
    Tensor p = Tensor::from({3}, {4.0, -2.0, 0.5}, /*requires_grad=*/true);
    Tensor target = Tensor::from({3}, {1.0, 2.0, -1.0});
    TrainConfig cfg;
    cfg.learning_rate = 0.05;
    AdamOptimizer opt({p}, cfg);
    for (int i = 0; i < 400; ++i) {
        Tensor loss = nn::mse(p, target);
        loss.backward();
        opt.step();
    }
    for (int j = 0; j < 3; ++j) EXPECT_NEAR(p.value_at(j), target.value_at(j), 1e-3);
    EXPECT_EQ(opt.clip_events(), 0);  // default ceiling never fires on this bowl
}

TEST(Adam, ClipFiresOnlyAboveTheCeiling) {
    Tensor p = Tensor::from({2}, {0.0, 0.0}, /*requires_grad=*/true);
    TrainConfig cfg;
    cfg.clip_norm = 1.0;
    AdamOptimizer opt({p}, cfg);

    Tensor small = nn::scale(nn::sum(p), 0.01);  // gradient norm ~0.014
    small.backward();
    EXPECT_FALSE(opt.step());

    Tensor large = nn::scale(nn::sum(p), 100.0);  // gradient norm ~141
    large.backward();
    EXPECT_TRUE(opt.step());
    EXPECT_EQ(opt.clip_events(), 1);
    for (int j = 0; j < 2; ++j) EXPECT_TRUE(std::isfinite(p.value_at(j)));
}

TEST(Adam, RejectsBadHyperparameters) {
    Tensor p = Tensor::from({1}, {0.0}, /*requires_grad=*/true);
    TrainConfig bad_lr;
    bad_lr.learning_rate = 0.0;
    EXPECT_THROW(AdamOptimizer({p}, bad_lr), std::invalid_argument);
    TrainConfig bad_beta;
    bad_beta.beta2 = 1.0;
    EXPECT_THROW(AdamOptimizer({p}, bad_beta), std::invalid_argument);
    EXPECT_THROW(AdamOptimizer({}, TrainConfig{}), std::invalid_argument);
}

// ====================== trajectory training ======================

TEST(TrainTrajectory, LossDropsOnSmoothCohort) {
    std::vector<TrajectoryWindow> windows = make_cohort_windows();
    Rng rng(17);
    TrajectoryModel m = make_trajectory_model(toy_config(), rng);
    TrainConfig cfg;
    cfg.epochs = 30;
    cfg.batch_size = 4;
    cfg.horizons = kFuture;
    cfg.seed = 5;
    TrainReport rep = train_trajectory(m, windows, cfg);
    ASSERT_EQ(rep.epochs.size(), 30u);
    EXPECT_TRUE(m.trained);
    EXPECT_LT(rep.epochs.back().train_loss, 0.5 * rep.epochs.front().train_loss);
    for (const EpochStats& e : rep.epochs) EXPECT_TRUE(std::isfinite(e.train_loss));
}

TEST(TrainTrajectory, EqualSeedsGiveBitwiseEqualLossCurves) {
    std::vector<TrajectoryWindow> windows = make_cohort_windows();
    auto run = [&] {
        Rng rng(17);
        TrajectoryModel m = make_trajectory_model(toy_config(), rng);
        TrainConfig cfg;
        cfg.epochs = 6;
        cfg.batch_size = 3;  // ragged final batch exercises per-batch scaling
        cfg.horizons = kFuture;
        cfg.seed = 99;
        return train_trajectory(m, windows, cfg);
    };
    TrainReport a = run();
    TrainReport b = run();
    ASSERT_EQ(a.epochs.size(), b.epochs.size());
    for (std::size_t i = 0; i < a.epochs.size(); ++i) {
        EXPECT_EQ(a.epochs[i].train_loss, b.epochs[i].train_loss);
        EXPECT_EQ(a.epochs[i].clip_events, b.epochs[i].clip_events);
    }
}

TEST(TrainTrajectory, OverfitsSmallCohortToTargetLoss) {
    std::vector<TrajectoryWindow> windows = make_cohort_windows();
    Rng rng(23);
    TrajectoryModel m = make_trajectory_model(toy_config(), rng);
    TrainConfig cfg;
    cfg.epochs = 3000;
    cfg.batch_size = 8;
    cfg.horizons = kFuture;
    cfg.learning_rate = 3e-3;
    cfg.seed = 11;
    cfg.stop_at_train_loss = 1e-3;
    TrainReport rep = train_trajectory(m, windows, cfg);
    EXPECT_TRUE(rep.stopped_early);
    EXPECT_LE(rep.epochs.back().train_loss, 1e-3);
}

TEST(TrainTrajectory, ValidationSplitTracksAndRestoresBestEpoch) {
    std::vector<TrajectoryWindow> windows = make_cohort_windows();
    Rng rng(31);
    TrajectoryModel m = make_trajectory_model(toy_config(), rng);
    TrainConfig cfg;
    cfg.epochs = 12;
    cfg.batch_size = 3;
    cfg.horizons = kFuture;
    cfg.seed = 7;
    cfg.val_fraction = 0.25;  // last 2 of 8 windows held out
    TrainReport rep = train_trajectory(m, windows, cfg);

    ASSERT_EQ(rep.epochs.size(), 12u);
    std::size_t argmin = 0;
    for (std::size_t i = 1; i < rep.epochs.size(); ++i)
        if (rep.epochs[i].val_loss < rep.epochs[argmin].val_loss) argmin = i;
    EXPECT_EQ(rep.best_epoch, static_cast<int>(argmin));
    EXPECT_EQ(rep.best_loss, rep.epochs[argmin].val_loss);

    // The returned parameters reproduce the best epoch's validation loss.
    const double recomputed = 0.5 * (window_loss_reference(m, windows[6], kFuture) +
                                     window_loss_reference(m, windows[7], kFuture));
    EXPECT_NEAR(recomputed, rep.best_loss, 1e-12);
}

TEST(TrainTrajectory, AggressiveStepsStayFiniteUnderClipping) {
    std::vector<TrajectoryWindow> windows = make_cohort_windows();
    Rng rng(41);
    TrajectoryModel m = make_trajectory_model(toy_config(), rng);
    TrainConfig cfg;
    cfg.epochs = 8;
    cfg.batch_size = 2;
    cfg.horizons = kFuture;
    cfg.learning_rate = 0.2;
    cfg.clip_norm = 0.05;
    cfg.seed = 13;
    TrainReport rep = train_trajectory(m, windows, cfg);
    EXPECT_GT(rep.clip_events, 0);
    for (const EpochStats& e : rep.epochs) EXPECT_TRUE(std::isfinite(e.train_loss));
    for (const Tensor& p : m.parameters())
        for (double v : p.values()) EXPECT_TRUE(std::isfinite(v));
}

TEST(TrainTrajectory, NonFiniteForwardRaisesNumericError) {
    std::vector<TrajectoryWindow> windows = make_cohort_windows();
    Rng rng(47);
    TrajectoryModel m = make_trajectory_model(toy_config(), rng);
    for (double& v : m.encoder.w_input.mutable_values()) v = 1e308;  // sums overflow
    TrainConfig cfg;
    cfg.epochs = 1;
    cfg.horizons = kFuture;
    EXPECT_THROW(train_trajectory(m, windows, cfg), NumericError);
}

TEST(TrainTrajectory, RejectsBadSetups) {
    std::vector<TrajectoryWindow> windows = make_cohort_windows();
    Rng rng(3);
    TrajectoryModel m = make_trajectory_model(toy_config(), rng);
    TrainConfig cfg;
    EXPECT_THROW(train_trajectory(m, {}, cfg), DataError);
    cfg.val_fraction = 1.0;
    EXPECT_THROW(train_trajectory(m, windows, cfg), std::invalid_argument);
    cfg.val_fraction = 0.0;
    cfg.epochs = 0;
    EXPECT_THROW(train_trajectory(m, windows, cfg), std::invalid_argument);
}

// ====================== heatmap training ======================

TEST(TrainHeatmap, OverfitsSingleWindow) {
    AnglePath p;
    p.theta0 = 30.0;
    p.theta_rate = 10.0;
    p.phi0 = -5.0;
    SessionRecord s = make_session("vid", "u0", p, 4, kFps);
    auto windows = build_heatmap_windows(s, {}, HeatmapConfig{}, 2, 2, 1);
    ASSERT_EQ(windows.size(), 1u);

    HeatmapModelConfig mc;
    mc.fusion = FusionMode::none;
    mc.fps = kFps;
    mc.channels = {3};
    mc.head_mid_channels = 3;
    Rng rng(53);
    HeatmapModel m = make_heatmap_model(mc, rng);

    TrainConfig cfg;
    cfg.epochs = 1500;
    cfg.batch_size = 1;
    cfg.horizons = 2;
    cfg.learning_rate = 5e-3;
    cfg.seed = 29;
    cfg.stop_at_train_loss = 3e-7;
    TrainReport rep = train_heatmap(m, windows, cfg);
    EXPECT_TRUE(m.trained);
    EXPECT_TRUE(rep.stopped_early);
    EXPECT_LE(rep.epochs.back().train_loss, 3e-7)
        << "final loss " << rep.epochs.back().train_loss << " after "
        << rep.epochs.size() << " epochs";

    // The fitted grids put their mass where the viewer actually looked.
    std::vector<HeatGrid> preds = heatmap_predict(m, windows[0], 2);
    for (int k = 0; k < 2; ++k) {
        double overlap = 0.0, mass = 0.0;
        for (int r = 0; r < HeatGrid::kRows; ++r)
            for (int c = 0; c < HeatGrid::kCols; ++c) {
                const double want = windows[0].future[k].at(r, c);
                overlap += std::min(want, preds[k].at(r, c));
                mass += want;
            }
        EXPECT_GT(overlap / mass, 0.9);
    }
}

TEST(TrainHeatmap, EqualSeedsGiveBitwiseEqualLossCurves) {
    AnglePath p;
    p.theta0 = -20.0;
    p.theta_rate = 14.0;
    SessionRecord s = make_session("vid", "u0", p, 5, kFps);
    auto windows = build_heatmap_windows(s, {}, HeatmapConfig{}, 2, 2, 1);
    ASSERT_EQ(windows.size(), 2u);
    auto run = [&] {
        HeatmapModelConfig mc;
        mc.fusion = FusionMode::none;
        mc.fps = kFps;
        mc.channels = {3};
        mc.head_mid_channels = 3;
        Rng rng(53);
        HeatmapModel m = make_heatmap_model(mc, rng);
        TrainConfig cfg;
        cfg.epochs = 4;
        cfg.batch_size = 1;
        cfg.horizons = 2;
        cfg.seed = 71;
        return train_heatmap(m, windows, cfg);
    };
    TrainReport a = run();
    TrainReport b = run();
    for (std::size_t i = 0; i < a.epochs.size(); ++i)
        EXPECT_EQ(a.epochs[i].train_loss, b.epochs[i].train_loss);
}

}  // namespace
}  // namespace fovcast
