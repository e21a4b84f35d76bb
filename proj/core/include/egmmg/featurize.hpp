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

#include <cstddef>
#include <memory>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "egmmg/embedding_table.hpp"
#include "egmmg/knowledge_graph.hpp"
#include "egmmg/matrix.hpp"

namespace egmmg::features {

/// Source of node-label embeddings: either an EGTB table keyed by label, or
/// the deterministic fallback embedder.
class NodeEmbedder {
 public:
  static NodeEmbedder fallback(std::size_t dim);
  static NodeEmbedder from_table(std::shared_ptr<const ingest::EmbeddingTable> table);

  std::size_t dim() const noexcept { return dim_; }
  bool uses_table() const noexcept { return table_ != nullptr; }

  /// Throws DataError when a table is in use and the label is missing.
  std::vector<float> embed(std::string_view label) const;

 private:
  std::size_t dim_ = 0;
  std::shared_ptr<const ingest::EmbeddingTable> table_;
};

/// A knowledge graph plus everything the classifier consumes: one embedding
/// row and one 5-wide structural row per node, and optionally a 7-wide row
/// per edge.
struct FeaturedGraph {
  kg::KnowledgeGraph graph;
  Matrix node_embeddings;
  Matrix node_struct;
  std::optional<Matrix> edge_features;

  std::size_t node_count() const noexcept { return graph.node_count(); }
  bool empty() const noexcept { return graph.empty(); }
};

FeaturedGraph featurize(kg::KnowledgeGraph graph, const NodeEmbedder& embedder,
                        bool with_edge_features);

/// Writes `<stem>.json` (graph), `<stem>.emb.egtb` (node embeddings keyed by
/// node id) and `<stem>.feat.bin`:
///   "EGFT" | u32 version=1 | u32 nodes | u32 edges | u32 has_edge_features |
///   nodes x 5 f32 | (has_edge_features ? edges x 7 f32 : nothing)
void write_featured_graph(const FeaturedGraph& fg, const std::string& stem);
FeaturedGraph read_featured_graph(const std::string& stem);

}  // namespace egmmg::features
