#include <benchmark/benchmark.h>

#include "gearsim/adaptive.hpp"

using namespace gearsim;

static void BM_AdaptiveProtocol(benchmark::State& state) {
    const ProtocolConfig config;
    std::uint64_t seed = 0;
    for (auto _ : state) {
        benchmark::DoNotOptimize(run_protocol(1.234, config, seed++));
    }
}
BENCHMARK(BM_AdaptiveProtocol)->Unit(benchmark::kMillisecond);

BENCHMARK_MAIN();
