#include "fbmavg/averaging.hpp"
#include "fbmavg/fixed_point.hpp"
#include "fbmavg/mild.hpp"

#include <benchmark/benchmark.h>

using namespace fbmavg;

static void BM_PullbackFixedPoint(benchmark::State& state)
{
    const SystemSpec s = benchmark_system(0.1);
    const FbmPath w = sample_fast_path(s, 1.0, 11);
    const FrozenFastSpec fs{s, SpectralVector::Constant(4, 0.5)};
    FixedPointOptions opt;
    opt.with_radius = state.range(0) != 0;
    for (auto _ : state) benchmark::DoNotOptimize(pullback_fixed_point(fs, w, 0.0, opt));
}
BENCHMARK(BM_PullbackFixedPoint)->Arg(0)->Arg(1);

static void BM_ErgodicDrift(benchmark::State& state)
{
    const SystemSpec s = benchmark_system(1.0);
    const double T = double(state.range(0));
    const FbmPath w = sample_fast_path(s, T, 5);
    for (auto _ : state) benchmark::DoNotOptimize(average_drift_ergodic(s, SpectralVector::Constant(4, 0.5), w, T));
}
BENCHMARK(BM_ErgodicDrift)->Arg(100)->Arg(1000)->Unit(benchmark::kMillisecond);

static void BM_SolveCoupled(benchmark::State& state)
{
    const SystemSpec s = benchmark_system(0.05);
    SolverConfig cfg;
    cfg.dt = 1.0 / 6400.0;
    const NoisePair np = sample_noise_pair(s, 1.0, cfg.dt, 0.05, 1.0 / 1280.0, 40.0, 9);
    const SpectralVector X0 = SpectralVector::Constant(4, 0.5), Y0 = SpectralVector::Ones(4);
    for (auto _ : state) benchmark::DoNotOptimize(solve_coupled(s, np.omega1, np.omega2, X0, Y0, 1.0, cfg));
}
BENCHMARK(BM_SolveCoupled)->Unit(benchmark::kMillisecond);

BENCHMARK_MAIN();
