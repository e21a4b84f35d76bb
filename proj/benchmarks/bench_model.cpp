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

#include "egmmg/autodiff.hpp"
#include "egmmg/model.hpp"
#include "egmmg/synthetic.hpp"
#include "egmmg/trainer.hpp"

namespace {

using namespace egmmg;

std::vector<train::Sample> samples(std::size_t n) {
  return train::make_samples(train::make_synthetic_dataset(n, 0),
                             features::NodeEmbedder::fallback(768), false);
}

void BM_Forward(benchmark::State& state) {
  model::ModelConfig mc;
  mc.variant = static_cast<model::ConvVariant>(state.range(1));
  model::Model m(mc, 1);
  const auto data = samples(static_cast<std::size_t>(state.range(0)));
  std::vector<model::GraphPair> batch;
  for (const auto& s : data) batch.push_back(s.pair());
  for (auto _ : state) benchmark::DoNotOptimize(m.predict(batch));
  state.SetItemsProcessed(state.iterations() * state.range(0));
}
BENCHMARK(BM_Forward)
    ->ArgsProduct({{1, 64}, {0, 1, 2}})
    ->Unit(benchmark::kMillisecond);

void BM_ForwardBackward(benchmark::State& state) {
  model::Model m(model::ModelConfig{}, 1);
  m.randomize_head(2);
  const auto data = samples(static_cast<std::size_t>(state.range(0)));
  std::vector<model::GraphPair> batch;
  std::vector<double> labels;
  for (const auto& s : data) {
    batch.push_back(s.pair());
    labels.push_back(s.label);
  }
  for (auto _ : state) {
    ad::Tape t;
    auto loss = ad::bce_loss(m.forward(t, batch), labels);
    t.backward(loss);
    for (auto* p : m.parameters()) p->grad.setZero();
  }
}
BENCHMARK(BM_ForwardBackward)->Arg(1)->Arg(64)->Unit(benchmark::kMillisecond);

}  // namespace
