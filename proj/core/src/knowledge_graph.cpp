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

#include "egmmg/knowledge_graph.hpp"

#include <algorithm>
#include <array>
#include <cctype>

#include "egmmg/error.hpp"

namespace egmmg::kg {
namespace {

constexpr std::array<std::string_view, 6> kNodeNames = {"ENTITY",   "EVENT", "STATE",
                                                        "LOCATION", "TIME",  "ATTRIBUTE"};
constexpr std::array<std::string_view, 6> kEdgeNames = {
    "PERFORMS", "EXPERIENCES", "TARGETS", "LOCATED_IN", "HAS_STATE", "SAME_AS"};

}  // namespace

std::string_view to_string(NodeType t) { return kNodeNames[static_cast<std::size_t>(t)]; }
std::string_view to_string(EdgeType t) { return kEdgeNames[static_cast<std::size_t>(t)]; }

NodeType parse_node_type(std::string_view s) {
  for (std::size_t i = 0; i < kNodeNames.size(); ++i) {
    if (kNodeNames[i] == s) return static_cast<NodeType>(i);
  }
  throw DataError("unknown node type '" + std::string(s) + "'");
}

EdgeType parse_edge_type(std::string_view s) {
  for (std::size_t i = 0; i < kEdgeNames.size(); ++i) {
    if (kEdgeNames[i] == s) return static_cast<EdgeType>(i);
  }
  throw DataError("unknown edge type '" + std::string(s) + "'");
}

NodeType node_type_for_ner(std::string_view ner) {
  if (ner == "GPE" || ner == "LOC" || ner == "FAC") return NodeType::Location;
  if (ner == "DATE" || ner == "TIME") return NodeType::Time;
  if (ner == "EVENT") return NodeType::Event;
  if (ner == "PERCENT" || ner == "MONEY" || ner == "QUANTITY" || ner == "ORDINAL" ||
      ner == "CARDINAL") {
    return NodeType::Attribute;
  }
  return NodeType::Entity;
}

std::size_t KnowledgeGraph::add_node(std::string id, std::string label, NodeType type) {
  if (auto it = index_.find(id); it != index_.end()) return it->second;
  const std::size_t pos = nodes_.size();
  index_.emplace(id, pos);
  nodes_.push_back(Node{std::move(id), std::move(label), type});
  return pos;
}

bool KnowledgeGraph::add_edge(std::size_t src, std::size_t dst, EdgeType type, std::string rule) {
  if (src >= nodes_.size() || dst >= nodes_.size()) {
    throw DataError("edge endpoint out of range");
  }
  if (type == EdgeType::SameAs && src == dst) throw DataError("SAME_AS self-loop");
  const bool dup = std::any_of(edges_.begin(), edges_.end(), [&](const Edge& e) {
    return e.src == src && e.dst == dst && e.type == type;
  });
  if (dup) return false;
  edges_.push_back(Edge{src, dst, type, std::move(rule)});
  return true;
}

std::optional<std::size_t> KnowledgeGraph::find(std::string_view id) const {
  if (auto it = index_.find(std::string(id)); it != index_.end()) return it->second;
  return std::nullopt;
}

std::string canonical_id(std::string_view label) {
  std::string out;
  out.reserve(label.size());
  bool pending_space = false;
  for (char c : label) {
    if (std::isspace(static_cast<unsigned char>(c))) {
      pending_space = !out.empty();
      continue;
    }
    if (pending_space) out += ' ';
    pending_space = false;
    out += static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  }
  if (out.starts_with("the ") && out.size() > 4) out.erase(0, 4);
  return out;
}

}  // namespace egmmg::kg
