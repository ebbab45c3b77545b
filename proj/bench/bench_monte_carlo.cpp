#include <benchmark/benchmark.h>

#include "delayrec/examples.hpp"
#include "delayrec/montecarlo.hpp"

using namespace delayrec;

namespace {

struct Fixture {
    filter::DelayedFilter filter;
    sim::MonteCarloSetup setup;
};

Fixture compartmental(int trials) {
    const auto ex = sim::reference_example("compartmental-25");
    filter::FilterConfig c;
    c.delay = 1;
    sim::MonteCarloSetup s;
    s.signals = ex.signals;
    s.trials = trials;
    s.T = 200;
    s.sample_times = {50, 100, 200};
    return {filter::DelayedFilter(ex.model, ex.noise, c), s};
}

void BM_BiasSerial(benchmark::State& state) {
    const auto f = compartmental(static_cast<int>(state.range(0)));
    for (auto _ : state) {
        benchmark::DoNotOptimize(sim::monte_carlo_bias_serial(f.filter, f.setup));
    }
    state.SetItemsProcessed(state.iterations() * state.range(0));
}

void BM_BiasOpenMP(benchmark::State& state) {
    const auto f = compartmental(static_cast<int>(state.range(0)));
    const int threads = static_cast<int>(state.range(1));
    for (auto _ : state) {
        benchmark::DoNotOptimize(sim::monte_carlo_bias(f.filter, f.setup, threads));
    }
    state.SetItemsProcessed(state.iterations() * state.range(0));
}

} // namespace

BENCHMARK(BM_BiasSerial)->Arg(200)->Arg(1000)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_BiasOpenMP)->Args({200, 0})->Args({1000, 0})->Args({1000, 1})->Args({1000, 4})->Unit(benchmark::kMillisecond);

BENCHMARK_MAIN();
