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

#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <functional>
#include <span>
#include <string>
#include <vector>

#include "egmmg/conllu.hpp"
#include "egmmg/featurize.hpp"
#include "egmmg/metrics.hpp"
#include "egmmg/model.hpp"
#include "egmmg/synthetic.hpp"

namespace egmmg::train {

struct Sample {
  std::string id;
  features::FeaturedGraph evidence;
  features::FeaturedGraph claim;
  int label = 0;

  /// Samples with an empty graph on either side are skipped.
  bool usable() const noexcept { return !evidence.empty() && !claim.empty(); }
  model::GraphPair pair() const { return {&evidence, &claim}; }
};

Sample make_sample(std::string id, const ingest::ParsedDocument& claim,
                   const ingest::ParsedDocument& evidence, int label,
                   const features::NodeEmbedder& embedder, bool with_edge_features);

std::vector<Sample> make_samples(std::span<const SyntheticExample> examples,
                                 const features::NodeEmbedder& embedder, bool with_edge_features);

struct TrainConfig {
  double learning_rate = 3e-4;
  std::size_t batch_size = 64;
  std::size_t epochs = 30;
  std::uint64_t seed = 0;
  model::ConvVariant variant = model::ConvVariant::Transformer;
  std::size_t embedding_dim = 768;
  bool use_edge_features = false;
  bool weighted_node_embeddings = true;
  double train_fraction = 0.85;
  std::size_t hidden_dim = 1024;
  std::array<std::size_t, 2> heads = {4, 2};
  double threshold = 0.5;
  double adam_beta1 = 0.9;
  double adam_beta2 = 0.999;
  double adam_eps = 1e-8;
  /// Step size ramps linearly from learning_rate / warmup_steps to
  /// learning_rate over the first warmup_steps optimizer steps. 0 disables.
  std::size_t warmup_steps = 30;

  model::ModelConfig model_config() const;
  void validate() const;
};

struct Split {
  std::vector<std::size_t> train;
  std::vector<std::size_t> test;
};

/// Stratified split of positions 0..labels.size()-1. Each class contributes
/// floor(n_c * test share) test items; leftover test slots, up to
/// round(n * test share) in total, go to the classes with the largest
/// fractional remainder (ties to the lower label). Members of each class are
/// shuffled by `seed` first.
Split split_dataset(std::span<const int> labels, double train_fraction, std::uint64_t seed);

/// Seeds drawn from the single harness generator seeded with `seed`.
struct SeedPlan {
  std::uint64_t model = 0;
  std::uint64_t split = 0;
  std::uint64_t shuffle = 0;
};
SeedPlan seed_plan(std::uint64_t seed);

/// Split used by train(): usable samples only, indices into `samples`.
Split training_split(const TrainConfig& config, std::span<const Sample> samples);

struct EpochRecord {
  std::size_t epoch = 0;
  double train_loss = 0.0;
  /// Accuracy of the predictions made while fitting the epoch's batches.
  double train_acc = 0.0;
  double test_acc = 0.0;
  double test_f1 = 0.0;
  std::size_t skipped = 0;
};

/// One JSON object, no trailing newline.
std::string to_json_line(const EpochRecord& r);

struct EvalResult {
  Metrics metrics;
  std::vector<double> scores;
  std::size_t skipped = 0;
};

/// Scores the usable samples among `indices` in batches. Throws DataError
/// when nothing is left to evaluate.
EvalResult evaluate(model::Model& model, std::span<const Sample> samples,
                    std::span<const std::size_t> indices, double threshold = 0.5,
                    std::size_t batch_size = 64);
EvalResult evaluate(model::Model& model, std::span<const Sample> samples,
                    double threshold = 0.5, std::size_t batch_size = 64);

struct TrainResult {
  /// Parameters of the epoch with the best test accuracy (earliest on ties),
  /// rounded to checkpoint precision. The initialization when epochs == 0.
  model::Model model;
  std::size_t best_epoch = 0;
  std::vector<EpochRecord> log;
  Split split;
  std::size_t skipped = 0;
  Metrics train_metrics;
  Metrics test_metrics;
};

using EpochCallback = std::function<void(const EpochRecord&)>;

TrainResult train(const TrainConfig& config, std::span<const Sample> samples,
                  const EpochCallback& on_epoch = {});

}  // namespace egmmg::train
