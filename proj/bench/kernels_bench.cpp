#include <benchmark/benchmark.h>

#include "fdsc/bench.hpp"

using namespace fdsc;

namespace {

const bench::ScenarioConfig& config() {
    static const auto c = bench::builtin_benchmark();
    return c;
}

void BM_SigmaSweep(benchmark::State& state) {
    const auto sys = close_loop(config().plant, config().controller("K_f1").K);
    const auto grid = log_grid(1e-3, 1e4, static_cast<int>(state.range(0)));
    for (auto _ : state) benchmark::DoNotOptimize(sigma_max_sweep(sys, grid));
}

void BM_SigmaSweepSerial(benchmark::State& state) {
    const auto sys = close_loop(config().plant, config().controller("K_f1").K);
    const auto grid = log_grid(1e-3, 1e4, static_cast<int>(state.range(0)));
    for (auto _ : state) benchmark::DoNotOptimize(sigma_max_sweep_serial(sys, grid));
}

void BM_Gap(benchmark::State& state) {
    const auto grid = log_grid(1e-3, 1e4, static_cast<int>(state.range(0)));
    for (auto _ : state) {
        benchmark::DoNotOptimize(gap_function(config().plant, config().controller("K_f3").K, config().controller("K_f1").K, grid));
    }
}

void BM_GapSerial(benchmark::State& state) {
    const auto grid = log_grid(1e-3, 1e4, static_cast<int>(state.range(0)));
    for (auto _ : state) {
        benchmark::DoNotOptimize(
            gap_function_serial(config().plant, config().controller("K_f3").K, config().controller("K_f1").K, grid));
    }
}

bench::ScenarioConfig short_sweep() {
    auto c = bench::preset("mixed-sweep");
    c.t1 = 20.0;
    return c;
}

void BM_ScenarioSweep(benchmark::State& state) {
    const auto c = short_sweep();
    const auto bank = bench::make_bank(c);
    for (auto _ : state) benchmark::DoNotOptimize(bench::run_sweep(c, bank));
}

void BM_ScenarioSweepSerial(benchmark::State& state) {
    const auto c = short_sweep();
    const auto bank = bench::make_bank(c);
    for (auto _ : state) benchmark::DoNotOptimize(bench::run_sweep_serial(c, bank));
}

void BM_GainBound(benchmark::State& state) {
    const auto sys = close_loop(config().plant, config().controller("K_f2").K);
    for (auto _ : state) benchmark::DoNotOptimize(finite_frequency_gain(sys, config().controller("K_f2").band));
}

}  // namespace

BENCHMARK(BM_SigmaSweep)->Arg(1000)->Arg(10000);
BENCHMARK(BM_SigmaSweepSerial)->Arg(1000)->Arg(10000);
BENCHMARK(BM_Gap)->Arg(1000)->Arg(10000);
BENCHMARK(BM_GapSerial)->Arg(1000)->Arg(10000);
BENCHMARK(BM_ScenarioSweep)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_ScenarioSweepSerial)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_GainBound)->Unit(benchmark::kMillisecond);

BENCHMARK_MAIN();
