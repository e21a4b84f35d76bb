// Licensed under the Apache License, Version 2.0 (the "License"); you
// may not use this file except in compliance with the License.  You
// may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or
// implied.  See the License for the specific language governing
// permissions and limitations under the License.

#include <benchmark/benchmark.h>

#include "egmmg/graph_features.hpp"
#include "egmmg/rng.hpp"

namespace {

using egmmg::features::Digraph;

Digraph random_graph(std::size_t n, double density, std::uint64_t seed) {
  egmmg::Rng rng(seed);
  Digraph g;
  g.node_count = n;
  for (std::size_t u = 0; u < n; ++u)
    for (std::size_t v = 0; v < n; ++v)
      if (u != v && rng.uniform01() < density) g.edges.emplace_back(u, v);
  return g;
}

void BM_PageRank(benchmark::State& state) {
  const auto g = random_graph(static_cast<std::size_t>(state.range(0)), 0.1, 1);
  for (auto _ : state) benchmark::DoNotOptimize(egmmg::features::pagerank(g));
  state.SetComplexityN(state.range(0));
}
BENCHMARK(BM_PageRank)->RangeMultiplier(2)->Range(8, 256);

void BM_EdgeBetweenness(benchmark::State& state) {
  const auto g = random_graph(static_cast<std::size_t>(state.range(0)), 0.1, 2);
  for (auto _ : state) benchmark::DoNotOptimize(egmmg::features::edge_betweenness(g));
}
BENCHMARK(BM_EdgeBetweenness)->RangeMultiplier(2)->Range(8, 128);

// Full 7-wide rows, path lengths included.
void BM_AllEdgeFeatures(benchmark::State& state) {
  const auto g = random_graph(static_cast<std::size_t>(state.range(0)), 0.1, 3);
  for (auto _ : state) benchmark::DoNotOptimize(egmmg::features::all_edge_features(g));
  state.counters["edges"] = static_cast<double>(g.edges.size());
}
BENCHMARK(BM_AllEdgeFeatures)->RangeMultiplier(2)->Range(8, 64);

}  // namespace
