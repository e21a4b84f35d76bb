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
#include <deque>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "egmmg/autodiff.hpp"
#include "egmmg/featurize.hpp"
#include "egmmg/graph_features.hpp"

namespace egmmg::model {

enum class ConvVariant { Gat, GatV2, Transformer };

std::string_view to_string(ConvVariant v);
/// Accepts GAT, GATV2, TRANSFORMER in any case (and the PyG class names
/// GATConv / GATv2Conv / TransformerConv).
ConvVariant parse_conv_variant(std::string_view s);

/// Parameter count of the reference architecture; ours is reported against it.
inline constexpr std::size_t kReferenceParameterCount = 10'724'391;

struct ModelConfig {
  std::size_t text_dim = 768;
  std::size_t hidden_dim = 1024;
  std::array<std::size_t, 2> heads = {4, 2};
  ConvVariant variant = ConvVariant::Transformer;
  bool use_edge_features = false;
  /// When false, alpha and beta stay frozen at 1.
  bool weighted_node_embeddings = true;

  std::size_t common_dim() const { return text_dim + features::kNodeFeatureDim; }
  std::size_t classifier_input_dim() const {
    return 3 * hidden_dim + (use_edge_features ? 2 * features::kEdgeFeatureDim : 0);
  }
  void validate() const;
};

/// Edge list for message passing over `node_count` rows, self-loops included.
/// Messages flow src -> dst; attention normalizes over equal dst.
struct EdgeIndex {
  std::vector<std::size_t> src;
  std::vector<std::size_t> dst;
  std::size_t node_count = 0;

  /// Unique (src, dst) pairs of g shifted by offset, plus one self-loop per node.
  void append_graph(const kg::KnowledgeGraph& g, std::size_t offset);
};

/// One classifier input: the evidence graph and the claim graph of a sample.
struct GraphPair {
  const features::FeaturedGraph* evidence = nullptr;
  const features::FeaturedGraph* claim = nullptr;
};

/// Attention weights captured during a forward pass. Rows of a weight matrix
/// are edges; columns are heads. Rows sharing a segment id form one softmax.
struct AttentionRecord {
  std::string where;
  Matrix weights;
  std::vector<std::size_t> segment;
  std::size_t segment_count = 0;
};

struct NodeScores {
  ad::Var weighted;  // h_v * s_v
  ad::Var scores;    // s_v, n x 1
};

/// The evidence/claim graph classifier. Parameters live in the model; every
/// forward pass records onto a caller-provided tape.
class Model {
 public:
  explicit Model(const ModelConfig& config, std::uint64_t seed = 0);
  Model(Model&&) = default;
  Model& operator=(Model&&) = default;
  Model(const Model&) = delete;
  Model& operator=(const Model&) = delete;

  const ModelConfig& config() const noexcept { return config_; }

  /// Parameters in a fixed order (the checkpoint order).
  std::vector<ad::Parameter*> parameters();
  std::vector<const ad::Parameter*> parameters() const;
  ad::Parameter& parameter(std::string_view name);
  const ad::Parameter& parameter(std::string_view name) const;

  /// Sum of element counts of all trainable tensors.
  std::size_t count_parameters() const;
  std::size_t count_parameters(std::string_view prefix) const;

  void zero_grad();
  /// Re-draws the classifier head (zero by default) from a Glorot range.
  void randomize_head(std::uint64_t seed);

  // Stages of the forward pass, usable on their own.
  ad::Var project_nodes(ad::Tape& tape, ad::Var text, ad::Var structs);
  ad::Var conv_forward(ad::Tape& tape, std::size_t layer, ad::Var h, const EdgeIndex& edges,
                       std::vector<AttentionRecord>* trace = nullptr);
  NodeScores score_nodes(ad::Tape& tape, ad::Var h);
  /// Single-sample cross-attention, softmax(Q K^T / sqrt(d)) V with claim rows
  /// as queries.
  ad::Var cross_attention(ad::Tape& tape, ad::Var h_claim, ad::Var h_evidence,
                          std::vector<AttentionRecord>* trace = nullptr);
  /// Single-sample head: mean-pool each input, concatenate, sigmoid(W f + b).
  /// `edge_pool` (1 x 14) is required iff edge features are enabled.
  ad::Var pool_and_classify(ad::Tape& tape, ad::Var h_evidence, ad::Var h_claim,
                            ad::Var attended, std::optional<ad::Var> edge_pool = std::nullopt);

  /// Batched forward over block-diagonal graphs; returns scores (batch x 1).
  /// Throws DataError if any graph is empty or lacks edge features when they
  /// are enabled.
  ad::Var forward(ad::Tape& tape, std::span<const GraphPair> batch,
                  std::vector<AttentionRecord>* trace = nullptr);

  double predict(const GraphPair& pair);
  std::vector<double> predict(std::span<const GraphPair> batch);

 private:
  struct ConvParams {
    std::vector<ad::Parameter*> weights;  // variant-specific, see model.cpp
  };

  ad::Parameter& add_param(std::string name, Matrix value, bool trainable = true);

  ModelConfig config_;
  std::deque<ad::Parameter> params_;
  std::array<ConvParams, 2> conv_;
};

/// Pooled edge features of one graph: column means of its edge-feature rows
/// (zeros when the graph has no edges).
Matrix pooled_edge_features(const features::FeaturedGraph& g);

}  // namespace egmmg::model
