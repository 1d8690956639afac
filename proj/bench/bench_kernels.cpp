// Serial reference kernels against their OpenMP versions.
// Run: build/bench/lmcf_bench --benchmark_counters_tabular=true

#include <benchmark/benchmark.h>

#include "lmcf/flow.hpp"
#include "lmcf/parallel.hpp"
#include "lmcf/surfaces.hpp"

namespace {

using namespace lmcf;

ProfileCurve neck(int nodes_scale) {
    BridgeOptions bo;
    bo.h = 0.02 / nodes_scale;
    bo.grading = 0.0;
    return connect_sum_profile(0.1, 0.05, 0.5, bo);
}

void BM_velocity_serial(benchmark::State& st) {
    const ProfileCurve c = neck(static_cast<int>(st.range(0)));
    for (auto _ : st) benchmark::DoNotOptimize(velocity_serial(c));
    st.counters["nodes"] = static_cast<double>(c.total_samples());
}

void BM_velocity_parallel(benchmark::State& st) {
    const ProfileCurve c = neck(static_cast<int>(st.range(0)));
    par::set_threads(static_cast<int>(st.range(1)));
    for (auto _ : st) benchmark::DoNotOptimize(velocity(c));
    st.counters["nodes"] = static_cast<double>(c.total_samples());
    st.counters["threads"] = par::threads();
}

void BM_gaussian_area_serial(benchmark::State& st) {
    const ProfileCurve c = neck(static_cast<int>(st.range(0)));
    for (auto _ : st) benchmark::DoNotOptimize(gaussian_area_serial(c, Point4{}, 0.5));
    st.counters["nodes"] = static_cast<double>(c.total_samples());
}

void BM_gaussian_area_parallel(benchmark::State& st) {
    const ProfileCurve c = neck(static_cast<int>(st.range(0)));
    par::set_threads(static_cast<int>(st.range(1)));
    for (auto _ : st) benchmark::DoNotOptimize(gaussian_area(c, Point4{}, 0.5));
    st.counters["nodes"] = static_cast<double>(c.total_samples());
    st.counters["threads"] = par::threads();
}

} // namespace

BENCHMARK(BM_velocity_serial)->Arg(1)->Arg(8);
BENCHMARK(BM_velocity_parallel)->ArgsProduct({{1, 8}, {1, 2, 4, 8}});
BENCHMARK(BM_gaussian_area_serial)->Arg(1)->Arg(8);
BENCHMARK(BM_gaussian_area_parallel)->ArgsProduct({{1, 8}, {1, 2, 4, 8}});

BENCHMARK_MAIN();
