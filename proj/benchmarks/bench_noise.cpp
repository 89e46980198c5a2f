#include "fbmavg/averaging.hpp"
#include "fbmavg/fbm.hpp"
#include "fbmavg/ou.hpp"
#include "fbmavg/young.hpp"

#include <benchmark/benchmark.h>

using namespace fbmavg;

static void BM_SampleFbm(benchmark::State& state)
{
    const std::size_t n = std::size_t(state.range(0));
    const CovarianceSpectrum Q({1.0, 0.25, 1.0 / 9, 1.0 / 16});
    std::uint64_t seed = 1;
    for (auto _ : state) benchmark::DoNotOptimize(sample_trace_class_fbm(Q, 0.75, UniformGrid::one_sided(1.0, n), seed++));
    state.SetComplexityN(state.range(0));
}
BENCHMARK(BM_SampleFbm)->RangeMultiplier(4)->Range(1024, 65536)->Complexity();

static void BM_ZahleIntegral(benchmark::State& state)
{
    const std::size_t n = std::size_t(state.range(0));
    const FbmPath w = sample_trace_class_fbm(CovarianceSpectrum({1.0, 0.5}), 0.75, UniformGrid::one_sided(1.0, n), 3);
    std::vector<double> grid(w.size());
    for (std::size_t k = 0; k < grid.size(); ++k) grid[k] = w.time(k);
    const GridFunction om(grid, w.values);
    Matrix m(2, 2);
    m << 1.0, 0.2, -0.1, 0.7;
    const OperatorPath psi = OperatorPath::constant(grid, m);
    const FracParams p = FracParams::with_default_alpha(0.7, 0.55);
    for (auto _ : state) benchmark::DoNotOptimize(zahle_integral(psi, om, p, 0.0, 1.0));
}
BENCHMARK(BM_ZahleIntegral)->Arg(256)->Arg(512)->Arg(1024)->Unit(benchmark::kMillisecond);

static void BM_OuStationary(benchmark::State& state)
{
    const SystemSpec s = benchmark_system(0.1);
    const OuSpec ou{s.B, s.Q2, 0.1, s.hurst.H2};
    const FbmPath w = scale_time(sample_fast_path(s, 1.0, 5), 0.1);
    for (auto _ : state) benchmark::DoNotOptimize(ou_stationary(ou, w, 0.0));
}
BENCHMARK(BM_OuStationary);

BENCHMARK_MAIN();
