#include <benchmark/benchmark.h>

#include "pathvar/pathvar.hpp"

#include <cmath>

using namespace pathvar;

namespace {

MeasureSpec family(int64_t which) {
    switch (which) {
    case 0: return WienerSpec{1};
    case 1: return BridgeSpec{{0.5}};
    case 2: return LoopSpec{{{{-1.0}, 0.5}, {{1.0}, 0.5}}};
    case 3: {
        ParticlesSpec p;
        p.start = {0.0, 1.0};
        return p;
    }
    default:
        return DiffusionSpec{Coefficient::constant_value(1.0),
                             Coefficient{[](double x) { return -std::tanh(x); }, {}}, 0.0};
    }
}

void BM_sample_base(benchmark::State& state) {
    const auto spec = family(state.range(0));
    const TimeGrid grid(static_cast<std::size_t>(state.range(1)));
    state.SetLabel(family_name(spec));
    std::uint64_t i = 0;
    for (auto _ : state) benchmark::DoNotOptimize(sample_base(spec, grid, RandomSource(1).derive(i++)));
    state.SetItemsProcessed(state.iterations() * state.range(1));
}

void BM_perturb(benchmark::State& state) {
    const auto spec = family(state.range(0));
    const TimeGrid grid(256);
    const auto base = sample_base(spec, grid, RandomSource(2));
    const auto u = clip_drift(affine_feedback(noise_dim(spec), -0.5, 0.5), 1.0);
    state.SetLabel(family_name(spec));
    for (auto _ : state) benchmark::DoNotOptimize(perturb(spec, base, u, RandomSource(3)));
}

void BM_loop_kernel(benchmark::State& state) {
    std::vector<LoopAtom> atoms;
    const auto k = static_cast<std::size_t>(state.range(0));
    for (std::size_t i = 0; i < k; ++i)
        atoms.push_back({{static_cast<double>(i) - 0.5 * static_cast<double>(k)}, 1.0 / static_cast<double>(k)});
    const double x = 0.3;
    for (auto _ : state)
        benchmark::DoNotOptimize(loop_kernel(0.4, std::span<const double>(&x, 1), atoms));
}

void BM_foellmer_gradient(benchmark::State& state) {
    const auto g = [](double y) { return 0.5 * y * y; };
    double x = -1.0;
    for (auto _ : state) {
        benchmark::DoNotOptimize(foellmer_gradient(g, 0.5, x));
        x += 1e-6;
    }
}

void BM_gauss_hermite(benchmark::State& state) {
    for (auto _ : state) benchmark::DoNotOptimize(gauss_hermite(static_cast<std::size_t>(state.range(0))));
}

void BM_reweighted(benchmark::State& state) {
    const auto stats = standard_statistics();
    const TimeGrid grid(256);
    for (auto _ : state)
        benchmark::DoNotOptimize(reweighted_expectations(stats, WienerSpec{1}, DriftSpec::constant(1, 0.5),
                                                         grid, 1000, RandomSource(4)));
    state.SetItemsProcessed(state.iterations() * 1000);
}

}  // namespace

BENCHMARK(BM_sample_base)->ArgsProduct({{0, 1, 2, 3, 4}, {256}});
BENCHMARK(BM_sample_base)->Args({0, 1024})->Args({2, 1024});
BENCHMARK(BM_perturb)->DenseRange(0, 4);
BENCHMARK(BM_loop_kernel)->RangeMultiplier(4)->Range(1, 64);
BENCHMARK(BM_foellmer_gradient);
BENCHMARK(BM_gauss_hermite)->Arg(16)->Arg(64);
BENCHMARK(BM_reweighted)->Unit(benchmark::kMillisecond);
BENCHMARK_MAIN();
