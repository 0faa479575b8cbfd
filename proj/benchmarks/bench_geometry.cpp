#include <benchmark/benchmark.h>

#include <vector>

#include "fovcast/geometry.hpp"

using namespace fovcast;

static void BM_CoverageFraction(benchmark::State& state) {
    const ViewportSpec vp{make_angle(deg2rad(30.0), deg2rad(10.0)), 150.0, 150.0};
    const ViewportSpec fov{make_angle(deg2rad(-11.0), deg2rad(4.0)), 120.0, 120.0};
    for (auto _ : state) {
        benchmark::DoNotOptimize(coverage_fraction(vp, fov, 0.5));
    }
}
BENCHMARK(BM_CoverageFraction);

static void BM_HitRateForSecond(benchmark::State& state) {
    std::vector<UnitVec3> gt;
    for (int i = 0; i < 30; ++i)
        gt.push_back(angles_to_unit(make_angle(deg2rad(i * 0.5), deg2rad(5.0))));
    const UnitVec3 pred = angles_to_unit(make_angle(deg2rad(20.0), 0.0));
    for (auto _ : state) {
        benchmark::DoNotOptimize(hit_rate_for_second(pred, gt, 1.25, {120.0, 120.0}));
    }
}
BENCHMARK(BM_HitRateForSecond);

static void BM_SecondSummary(benchmark::State& state) {
    std::vector<UnitVec3> frames;
    for (int i = 0; i < 30; ++i)
        frames.push_back(angles_to_unit(make_angle(deg2rad(i * 1.0), deg2rad(-3.0))));
    for (auto _ : state) {
        benchmark::DoNotOptimize(second_summary(frames));
    }
}
BENCHMARK(BM_SecondSummary);
