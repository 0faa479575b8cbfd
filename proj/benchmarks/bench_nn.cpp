#include <benchmark/benchmark.h>

#include <cmath>
#include <vector>

#include "fovcast/models.hpp"
#include "fovcast/nn.hpp"

using namespace fovcast;

namespace {

/** A ten-seconds-past / ten-ahead window at 30 fps with one other viewer. */
TrajectoryWindow full_scale_window() {
    TrajectoryWindow w;
    w.fps = 30;
    const auto dir = [](double t) {
        return angles_to_unit(make_angle(deg2rad(12.0 * t), deg2rad(8.0 * std::sin(t))));
    };
    for (int sec = 0; sec < 20; ++sec) {
        std::vector<UnitVec3> frames;
        for (int j = 0; j < 30; ++j) frames.push_back(dir(sec + (j + 0.5) / 30.0));
        const SecondSummary summary = second_summary(frames);
        if (sec < 10) {
            w.past_frames.insert(w.past_frames.end(), frames.begin(), frames.end());
            w.past_summaries.push_back(summary);
        } else {
            w.future_frames.insert(w.future_frames.end(), frames.begin(), frames.end());
            w.future_summaries.push_back(summary);
        }
    }
    w.others_past.push_back(w.past_summaries);
    w.others_future.push_back(w.future_summaries);
    return w;
}

}  // namespace

static void BM_LstmStepForward(benchmark::State& state) {
    Rng rng(1);
    const nn::LstmParams p = nn::make_lstm(rng, 90, 128);
    std::vector<double> xs(90, 0.1);
    const nn::Tensor x = nn::Tensor::from({90}, std::move(xs));
    const nn::LstmState s0 = nn::lstm_zero_state(128);
    for (auto _ : state) {
        benchmark::DoNotOptimize(nn::lstm_step(p, x, s0));
    }
}
BENCHMARK(BM_LstmStepForward);

static void BM_LstmStepBackward(benchmark::State& state) {
    Rng rng(1);
    const nn::LstmParams p = nn::make_lstm(rng, 90, 128);
    std::vector<double> xs(90, 0.1);
    const nn::Tensor x = nn::Tensor::from({90}, std::move(xs));
    const nn::Tensor target = nn::Tensor::constant({128});
    const nn::LstmState s0 = nn::lstm_zero_state(128);
    for (auto _ : state) {
        nn::LstmState s = nn::lstm_step(p, x, s0);
        nn::Tensor loss = nn::mse(s.h, target);
        loss.backward();
        benchmark::DoNotOptimize(loss);
    }
}
BENCHMARK(BM_LstmStepBackward);

static void BM_ConvLstmStep32Channels(benchmark::State& state) {
    Rng rng(2);
    const int channels[] = {32};
    const nn::ConvLstmParams p = nn::make_convlstm(rng, 1, channels, 3);
    std::vector<double> grid(18 * 36, 1.0 / 648.0);
    const nn::Tensor x = nn::Tensor::from({1, 18, 36}, std::move(grid));
    auto states = nn::convlstm_zero_states(p, 18, 36);
    for (auto _ : state) {
        auto current = states;
        benchmark::DoNotOptimize(nn::convlstm_step(p, x, current));
    }
}
BENCHMARK(BM_ConvLstmStep32Channels)->Unit(benchmark::kMillisecond);

static void BM_TrajectoryForwardBackward(benchmark::State& state) {
    TrajectoryModelConfig cfg;
    cfg.variant = TrajectoryVariant::ame_location;
    cfg.fps = 30;
    cfg.hidden = 64;
    Rng rng(3);
    const TrajectoryModel model = make_trajectory_model(cfg, rng);
    const TrajectoryWindow w = full_scale_window();
    const nn::Tensor target = nn::Tensor::constant({6});
    for (auto _ : state) {
        std::vector<SummaryOut> out = trajectory_forward(model, w, 10);
        nn::Tensor sum = nn::mse(nn::concat(std::vector<nn::Tensor>{out[9].mu, out[9].sigma}),
                                 target);
        sum.backward();
        benchmark::DoNotOptimize(sum);
    }
}
BENCHMARK(BM_TrajectoryForwardBackward)->Unit(benchmark::kMillisecond);
