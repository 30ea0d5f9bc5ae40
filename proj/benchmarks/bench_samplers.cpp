#include <benchmark/benchmark.h>

#include <vector>

#include "lorentzfk/cdlt_graph.hpp"
#include "lorentzfk/fk_gibbs.hpp"
#include "lorentzfk/gw_forest.hpp"
#include "lorentzfk/interaction.hpp"
#include "lorentzfk/torus_kernel.hpp"

namespace {

using namespace lfk;

void BM_SbTree(benchmark::State& state) {
  const auto dist = OffspringDistribution::geometric();
  Stream rng(1);
  for (auto _ : state) benchmark::DoNotOptimize(sample_sb_tree(dist, static_cast<std::uint32_t>(state.range(0)), rng));
}
BENCHMARK(BM_SbTree)->Arg(64)->Arg(512);

void BM_SbLayers(benchmark::State& state) {
  const auto dist = OffspringDistribution::geometric();
  Stream rng(2);
  for (auto _ : state) benchmark::DoNotOptimize(sample_sb_layers(dist, static_cast<std::uint32_t>(state.range(0)), rng));
}
BENCHMARK(BM_SbLayers)->Arg(1000)->Arg(10000);

void BM_Distances(benchmark::State& state) {
  Stream rng(3);
  const auto tree = sample_sb_tree(OffspringDistribution::geometric(), static_cast<std::uint32_t>(state.range(0)), rng);
  const auto tri = tree_to_triangulation(tree);
  for (auto _ : state) {
    DistanceOracle oracle(tri, 1);
    benchmark::DoNotOptimize(oracle.distances_from(0));
  }
}
BENCHMARK(BM_Distances)->Arg(64)->Arg(256);

void BM_Bridge(benchmark::State& state) {
  Stream rng(4);
  const auto x = TorusPoint::from_coords(std::vector<double>{0.1, 0.2});
  const auto y = TorusPoint::from_coords(std::vector<double>{0.7, 0.4});
  for (auto _ : state) benchmark::DoNotOptimize(sample_bridge(x, y, 1.0, static_cast<std::size_t>(state.range(0)), rng));
}
BENCHMARK(BM_Bridge)->Arg(8)->Arg(64);

void BM_GibbsSweep(benchmark::State& state) {
  std::vector<std::uint32_t> counts(static_cast<std::size_t>(state.range(0)) + 1, 1);
  counts.back() = 0;
  const DistanceOracle geometry(tree_to_triangulation(RootedPlanarTree(counts)));
  const InteractionSpec spec(1, PotentialU::cosine(0.3, {1}), PotentialV::cosine_difference(0.5, {1}),
                             Decay::nearest_neighbour(1.0));
  std::vector<std::uint32_t> vertices;
  for (std::uint32_t v = 0; v < counts.size(); ++v) vertices.push_back(v);
  Stream init(5);
  GibbsSampler chain(geometry, spec, LoopConfiguration::sample_free(vertices, 1.0, 8, 1, init), Stream(6));
  for (auto _ : state) chain.sweep();
}
BENCHMARK(BM_GibbsSweep)->Arg(8)->Arg(32);

}  // namespace
BENCHMARK_MAIN();
