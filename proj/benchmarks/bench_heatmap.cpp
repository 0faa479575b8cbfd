#include <benchmark/benchmark.h>

#include <vector>

#include "fovcast/heatmap.hpp"

using namespace fovcast;

static void BM_FrameHeatmap(benchmark::State& state) {
    const SphericalAngle center = make_angle(deg2rad(37.0), deg2rad(22.0));
    for (auto _ : state) {
        benchmark::DoNotOptimize(frame_heatmap(center));
    }
}
BENCHMARK(BM_FrameHeatmap);

static void BM_SecondHeatmap30Fps(benchmark::State& state) {
    std::vector<UnitVec3> frames;
    for (int i = 0; i < 30; ++i)
        frames.push_back(angles_to_unit(make_angle(deg2rad(i * 0.4), deg2rad(10.0))));
    for (auto _ : state) {
        benchmark::DoNotOptimize(second_heatmap(frames));
    }
}
BENCHMARK(BM_SecondHeatmap30Fps);

static void BM_TileOverlapRatio(benchmark::State& state) {
    const HeatGrid a = frame_heatmap(make_angle(deg2rad(12.0), deg2rad(5.0)));
    const HeatGrid b = frame_heatmap(make_angle(deg2rad(40.0), deg2rad(-8.0)));
    for (auto _ : state) {
        benchmark::DoNotOptimize(tile_overlap_ratio(a, b));
    }
}
BENCHMARK(BM_TileOverlapRatio);

static void BM_EstimateCenter(benchmark::State& state) {
    const HeatGrid g = frame_heatmap(make_angle(deg2rad(-150.0), deg2rad(30.0)));
    for (auto _ : state) {
        benchmark::DoNotOptimize(estimate_center(g));
    }
}
BENCHMARK(BM_EstimateCenter);
