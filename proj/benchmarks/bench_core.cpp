#include <benchmark/benchmark.h>

#include <vector>

#include "entanglekit/data_tensor.hpp"
#include "entanglekit/dataset.hpp"
#include "entanglekit/rearrange.hpp"
#include "entanglekit/rng.hpp"
#include "entanglekit/surrogate.hpp"
#include "entanglekit/synth.hpp"
#include "entanglekit/tree_tn.hpp"

namespace ek = entanglekit;

namespace {

ek::Dataset embedded_pairs(std::size_t n, std::size_t m) {
    auto r = ek::synth_block_pairs(n, m, 0.9, 7);
    return ek::embed_dataset_sincos(r.dataset);
}

void BM_entanglement_gram(benchmark::State& state) {
    const auto m = static_cast<std::size_t>(state.range(0));
    const auto ds = embedded_pairs(16, m);
    std::vector<std::size_t> subset{0, 1, 2, 3, 4, 5, 6, 7};
    for (auto _ : state)
        benchmark::DoNotOptimize(ek::entanglement_gram(ds, subset));
    state.SetComplexityN(state.range(0));
}
BENCHMARK(BM_entanglement_gram)->RangeMultiplier(2)->Range(64, 512)->Complexity();

void BM_correlation_graph(benchmark::State& state) {
    const auto n = static_cast<std::size_t>(state.range(0));
    const auto ds = embedded_pairs(n, 200);
    for (auto _ : state)
        benchmark::DoNotOptimize(ek::build_correlation_graph(ds));
    state.SetComplexityN(state.range(0));
}
BENCHMARK(BM_correlation_graph)->RangeMultiplier(2)->Range(8, 64)->Complexity();

void BM_min_balanced_cut(benchmark::State& state) {
    const auto n = static_cast<std::size_t>(state.range(0));
    const auto ds = embedded_pairs(n, 200);
    const auto graph = ek::build_correlation_graph(ds);
    std::vector<std::size_t> vertices(n);
    for (std::size_t i = 0; i < n; ++i)
        vertices[i] = i;
    for (auto _ : state)
        benchmark::DoNotOptimize(ek::min_balanced_cut(graph, vertices, 3));
    state.SetComplexityN(state.range(0));
}
BENCHMARK(BM_min_balanced_cut)->RangeMultiplier(2)->Range(8, 64)->Complexity();

void BM_ttn_forward(benchmark::State& state) {
    const auto n = static_cast<std::size_t>(state.range(0));
    const auto tn =
        ek::TreeTensorNetwork::random(std::vector<std::size_t>(n, 2), 4, 1, 11);
    ek::rng_engine gen(5);
    std::vector<ek::Vector> instance(n);
    for (auto& x : instance) {
        x.resize(2);
        x << ek::normal(gen), ek::normal(gen);
    }
    for (auto _ : state)
        benchmark::DoNotOptimize(tn.forward(instance));
}
BENCHMARK(BM_ttn_forward)->RangeMultiplier(2)->Range(4, 64);

void BM_fit_hierarchical(benchmark::State& state) {
    const auto n = static_cast<std::size_t>(state.range(0));
    const auto tn =
        ek::TreeTensorNetwork::random(std::vector<std::size_t>(n, 2), 2, 1, 13);
    const auto target = tn.contract_full();
    for (auto _ : state)
        benchmark::DoNotOptimize(ek::fit_hierarchical(target, 2, std::size_t{2}));
}
BENCHMARK(BM_fit_hierarchical)->RangeMultiplier(2)->Range(4, 16);

} // namespace
