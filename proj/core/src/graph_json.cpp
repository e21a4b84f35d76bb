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

#include <fstream>
#include <sstream>

#include <json.hpp>

#include "egmmg/error.hpp"
#include "egmmg/knowledge_graph.hpp"

namespace egmmg::kg {

using ordered_json = nlohmann::ordered_json;

std::string to_json(const KnowledgeGraph& g) {
  ordered_json j;
  j["nodes"] = ordered_json::array();
  for (const auto& n : g.nodes()) {
    ordered_json node;
    node["id"] = n.id;
    node["label"] = n.label;
    node["type"] = to_string(n.type);
    j["nodes"].push_back(std::move(node));
  }
  j["edges"] = ordered_json::array();
  for (const auto& e : g.edges()) {
    ordered_json edge;
    edge["src"] = g.nodes()[e.src].id;
    edge["dst"] = g.nodes()[e.dst].id;
    edge["type"] = to_string(e.type);
    edge["rule"] = e.rule;
    j["edges"].push_back(std::move(edge));
  }
  return j.dump(2) + "\n";
}

KnowledgeGraph graph_from_json(std::string_view text) {
  ordered_json j;
  try {
    j = ordered_json::parse(text);
  } catch (const nlohmann::json::exception& e) {
    throw DataError(std::string("graph JSON: ") + e.what());
  }
  KnowledgeGraph g;
  try {
    for (const auto& n : j.at("nodes")) {
      const auto id = n.at("id").get<std::string>();
      if (g.find(id)) throw DataError("graph JSON: duplicate node id '" + id + "'");
      g.add_node(id, n.at("label").get<std::string>(),
                 parse_node_type(n.at("type").get<std::string>()));
    }
    for (const auto& e : j.at("edges")) {
      const auto src = g.find(e.at("src").get<std::string>());
      const auto dst = g.find(e.at("dst").get<std::string>());
      if (!src || !dst) throw DataError("graph JSON: edge references an unknown node");
      g.add_edge(*src, *dst, parse_edge_type(e.at("type").get<std::string>()),
                 e.value("rule", std::string{}));
    }
  } catch (const nlohmann::json::exception& e) {
    throw DataError(std::string("graph JSON: ") + e.what());
  }
  return g;
}

KnowledgeGraph read_graph_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open graph file: " + path);
  std::ostringstream buf;
  buf << in.rdbuf();
  try {
    return graph_from_json(buf.str());
  } catch (const DataError& e) {
    throw DataError(path + ": " + e.what());
  }
}

void write_graph_file(const KnowledgeGraph& g, const std::string& path) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw DataError("cannot write graph file: " + path);
  out << to_json(g);
}

}  // namespace egmmg::kg
