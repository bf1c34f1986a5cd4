#include <benchmark/benchmark.h>

#include <vector>

#include "gearsim/angles.hpp"
#include "gearsim/bayes.hpp"
#include "gearsim/fringe_fit.hpp"
#include "gearsim/probe_models.hpp"
#include "gearsim/sampler.hpp"

using namespace gearsim;

static void BM_SampleSinglePhotons(benchmark::State& state) {
    const ProbeSpec s = gear_probe(21, 0.0, 0.9, 0.8);
    const auto n      = static_cast<std::uint64_t>(state.range(0));
    std::uint64_t seed = 0;
    for (auto _ : state) {
        benchmark::DoNotOptimize(sample_single_photons(s, 0.3, n, seed++));
    }
    state.SetItemsProcessed(state.iterations() * state.range(0));
}
BENCHMARK(BM_SampleSinglePhotons)->Arg(1000)->Arg(10000);

static void BM_SampleCoherent(benchmark::State& state) {
    ProbeSpec s    = gear_probe(21, 0.0, 0.95);
    s.strategy     = Strategy::CoherentGear;
    s.mean_photons = static_cast<double>(state.range(0));
    std::uint64_t seed = 0;
    for (auto _ : state) {
        benchmark::DoNotOptimize(sample_coherent(s, 0.3, 1000, seed++));
    }
}
BENCHMARK(BM_SampleCoherent)->Arg(5)->Arg(50);

static void BM_Posterior(benchmark::State& state) {
    const ProbeSpec s = gear_probe(7, 0.0, 0.9);
    const auto grid   = static_cast<std::size_t>(state.range(0));
    for (auto _ : state) {
        const PosteriorGrid g = posterior_from_counts(s, 5200, 4800, {0.0, kPi / 14.0}, grid);
        benchmark::DoNotOptimize(estimate(g));
    }
}
BENCHMARK(BM_Posterior)->Arg(1024)->Arg(4096);

static void BM_FringeFit(benchmark::State& state) {
    std::vector<Dataset> points;
    for (int i = 0; i < 100; ++i) {
        points.push_back(sample_single_photons(gear_probe(18, 0.0, 0.826), (kPi / 9.0) * i / 99.0,
                                               1000, static_cast<std::uint64_t>(i)));
    }
    const FringeScan scan = scan_from_datasets(points, Label::H);
    std::vector<int> candidates(static_cast<std::size_t>(state.range(0)));
    for (std::size_t m = 0; m < candidates.size(); ++m) {
        candidates[m] = static_cast<int>(m) + 1;
    }
    for (auto _ : state) {
        benchmark::DoNotOptimize(fit_fringe(scan, std::nullopt, candidates));
    }
}
BENCHMARK(BM_FringeFit)->Arg(1)->Arg(40);
