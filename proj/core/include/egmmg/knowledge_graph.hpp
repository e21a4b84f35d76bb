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
#include <optional>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

namespace egmmg::kg {

enum class NodeType { Entity, Event, State, Location, Time, Attribute };
enum class EdgeType { Performs, Experiences, Targets, LocatedIn, HasState, SameAs };

std::string_view to_string(NodeType t);
std::string_view to_string(EdgeType t);
NodeType parse_node_type(std::string_view s);
EdgeType parse_edge_type(std::string_view s);

/// Maps an NER label (without BIO prefix) onto a node type. Unknown labels
/// fall back to Entity.
NodeType node_type_for_ner(std::string_view ner_label);

struct Node {
  std::string id;
  std::string label;
  NodeType type = NodeType::Entity;

  bool operator==(const Node&) const = default;
};

/// Edge endpoints are node positions in KnowledgeGraph::nodes(). `rule`
/// names the construction rule that produced the edge.
struct Edge {
  std::size_t src = 0;
  std::size_t dst = 0;
  EdgeType type = EdgeType::Performs;
  std::string rule;

  bool operator==(const Edge&) const = default;
};

/// Directed multigraph with unique node ids. Parallel edges must differ in
/// type; identical (src, dst, type) triples are collapsed on insertion.
class KnowledgeGraph {
 public:
  /// Returns the position of the node with this id, inserting it if absent.
  /// An existing node keeps its original label and type.
  std::size_t add_node(std::string id, std::string label, NodeType type);

  /// Returns false when the edge was already present. Throws on dangling
  /// endpoints or a SAME_AS self-loop.
  bool add_edge(std::size_t src, std::size_t dst, EdgeType type, std::string rule);

  std::optional<std::size_t> find(std::string_view id) const;

  const std::vector<Node>& nodes() const noexcept { return nodes_; }
  const std::vector<Edge>& edges() const noexcept { return edges_; }
  std::size_t node_count() const noexcept { return nodes_.size(); }
  std::size_t edge_count() const noexcept { return edges_.size(); }
  bool empty() const noexcept { return nodes_.empty(); }

  bool operator==(const KnowledgeGraph& o) const {
    return nodes_ == o.nodes_ && edges_ == o.edges_;
  }

 private:
  std::vector<Node> nodes_;
  std::vector<Edge> edges_;
  std::unordered_map<std::string, std::size_t> index_;
};

/// Lowercases, collapses whitespace runs to one space, trims, and strips one
/// leading "the " so that "The White House" and "white house" share an id.
std::string canonical_id(std::string_view label);

/// Serialized form: {"nodes":[{"id","label","type"}],"edges":[{"src","dst","type","rule"}]}
/// with src/dst given as node ids. Output is byte-stable for equal graphs.
std::string to_json(const KnowledgeGraph& g);
KnowledgeGraph graph_from_json(std::string_view text);
KnowledgeGraph read_graph_file(const std::string& path);
void write_graph_file(const KnowledgeGraph& g, const std::string& path);

}  // namespace egmmg::kg
