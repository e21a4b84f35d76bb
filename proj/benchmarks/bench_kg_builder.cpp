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

#include "egmmg/conllu.hpp"
#include "egmmg/kg_builder.hpp"
#include "egmmg/knowledge_graph.hpp"
#include "egmmg/synthetic.hpp"

namespace {

void BM_BuildGraph(benchmark::State& state) {
  const auto examples = egmmg::train::make_synthetic_dataset(64, 5);
  std::size_t i = 0;
  for (auto _ : state) {
    benchmark::DoNotOptimize(egmmg::kg::build_graph(examples[i++ % examples.size()].evidence));
  }
}
BENCHMARK(BM_BuildGraph);

void BM_ParseAndBuild(benchmark::State& state) {
  const auto examples = egmmg::train::make_synthetic_dataset(64, 6);
  std::vector<std::string> texts;
  for (const auto& e : examples) texts.push_back(egmmg::ingest::to_conllu(e.evidence));
  std::size_t i = 0;
  for (auto _ : state) {
    const auto doc = egmmg::ingest::parse_conllu(texts[i++ % texts.size()]);
    benchmark::DoNotOptimize(egmmg::kg::to_json(egmmg::kg::build_graph(doc)));
  }
}
BENCHMARK(BM_ParseAndBuild);

}  // namespace
