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

#include <gtest/gtest.h>

#include "egmmg/error.hpp"
#include "egmmg/knowledge_graph.hpp"
#include "test_support.hpp"

namespace egmmg::kg {
namespace {

TEST(CanonicalId, LowercasesCollapsesAndStripsLeadingThe) {
  EXPECT_EQ(canonical_id("The White House"), "white house");
  EXPECT_EQ(canonical_id("  white   House "), "white house");
  EXPECT_EQ(canonical_id("Theatre"), "theatre");
  EXPECT_EQ(canonical_id("the"), "the");
  EXPECT_EQ(canonical_id("THE  Hague"), "hague");
  EXPECT_EQ(canonical_id(""), "");
  EXPECT_EQ(canonical_id("the the end"), "the end");
}

TEST(CanonicalId, Idempotent) {
  for (const char* s : {"The White House", "New\tYork", "The  Hague", "Bob"}) {
    EXPECT_EQ(canonical_id(canonical_id(s)), canonical_id(s)) << s;
  }
}

TEST(NodeTypes, NerMapping) {
  EXPECT_EQ(node_type_for_ner("GPE"), NodeType::Location);
  EXPECT_EQ(node_type_for_ner("FAC"), NodeType::Location);
  EXPECT_EQ(node_type_for_ner("DATE"), NodeType::Time);
  EXPECT_EQ(node_type_for_ner("MONEY"), NodeType::Attribute);
  EXPECT_EQ(node_type_for_ner("EVENT"), NodeType::Event);
  EXPECT_EQ(node_type_for_ner("PERSON"), NodeType::Entity);
  EXPECT_EQ(node_type_for_ner("SOMETHING_NEW"), NodeType::Entity);
}

TEST(NodeTypes, NamesRoundTrip) {
  for (int i = 0; i < 6; ++i) {
    const auto n = static_cast<NodeType>(i);
    EXPECT_EQ(parse_node_type(to_string(n)), n);
    const auto e = static_cast<EdgeType>(i);
    EXPECT_EQ(parse_edge_type(to_string(e)), e);
  }
  EXPECT_EQ(to_string(EdgeType::LocatedIn), "LOCATED_IN");
  EXPECT_THROW(parse_node_type("PLACE"), DataError);
  EXPECT_THROW(parse_edge_type("KNOWS"), DataError);
}

TEST(KnowledgeGraph, AddNodeDeduplicatesById) {
  KnowledgeGraph g;
  EXPECT_EQ(g.add_node("bob", "Bob", NodeType::Entity), 0u);
  EXPECT_EQ(g.add_node("paris", "Paris", NodeType::Location), 1u);
  EXPECT_EQ(g.add_node("bob", "BOB", NodeType::Location), 0u);
  EXPECT_EQ(g.node_count(), 2u);
  EXPECT_EQ(g.nodes()[0].label, "Bob");
  EXPECT_EQ(g.nodes()[0].type, NodeType::Entity);
  EXPECT_EQ(g.find("paris"), 1u);
  EXPECT_FALSE(g.find("rome").has_value());
}

TEST(KnowledgeGraph, EdgesCollapseOnlyIdenticalTriples) {
  KnowledgeGraph g;
  g.add_node("a", "a", NodeType::Entity);
  g.add_node("b", "b", NodeType::Event);
  EXPECT_TRUE(g.add_edge(0, 1, EdgeType::Performs, "r1"));
  EXPECT_FALSE(g.add_edge(0, 1, EdgeType::Performs, "r2"));
  EXPECT_TRUE(g.add_edge(0, 1, EdgeType::Targets, "r3"));
  EXPECT_TRUE(g.add_edge(1, 0, EdgeType::Performs, "r4"));
  EXPECT_EQ(g.edge_count(), 3u);
  EXPECT_EQ(g.edges()[0].rule, "r1");
}

TEST(KnowledgeGraph, RejectsDanglingEndpointsAndSameAsSelfLoop) {
  KnowledgeGraph g;
  g.add_node("a", "a", NodeType::Entity);
  g.add_node("b", "b", NodeType::Entity);
  EXPECT_THROW(g.add_edge(0, 2, EdgeType::Performs, "r"), DataError);
  EXPECT_THROW(g.add_edge(0, 0, EdgeType::SameAs, "r"), DataError);
  EXPECT_TRUE(g.add_edge(0, 1, EdgeType::SameAs, "r"));
  EXPECT_TRUE(g.add_edge(0, 0, EdgeType::HasState, "r"));
}

KnowledgeGraph sample_graph() {
  KnowledgeGraph g;
  g.add_node("alice", "Alice", NodeType::Entity);
  g.add_node("greet", "greet", NodeType::Event);
  g.add_node("paris", "Paris \"the\" city", NodeType::Location);
  g.add_node("noon", "noon", NodeType::Time);
  g.add_edge(0, 1, EdgeType::Performs, "nsubj_performs");
  g.add_edge(1, 2, EdgeType::LocatedIn, "verb_prep_located_in");
  g.add_edge(0, 3, EdgeType::SameAs, "manual");
  return g;
}

TEST(GraphJson, RoundTripPreservesOrderAndTypes) {
  const auto g = sample_graph();
  const auto text = to_json(g);
  EXPECT_EQ(graph_from_json(text), g);
  EXPECT_EQ(to_json(graph_from_json(text)), text);
  EXPECT_EQ(text.back(), '\n');
  EXPECT_NE(text.find("\"type\": \"SAME_AS\""), std::string::npos);
}

TEST(GraphJson, EmptyGraph) {
  const KnowledgeGraph g;
  EXPECT_EQ(to_json(g), "{\n  \"nodes\": [],\n  \"edges\": []\n}\n");
  EXPECT_TRUE(graph_from_json(to_json(g)).empty());
}

TEST(GraphJson, FileRoundTrip) {
  testing::TempDir dir;
  const auto g = sample_graph();
  write_graph_file(g, dir.str("g.json"));
  EXPECT_EQ(read_graph_file(dir.str("g.json")), g);
  EXPECT_THROW(read_graph_file(dir.str("absent.json")), DataError);
}

TEST(GraphJson, MalformedInputs) {
  EXPECT_THROW(graph_from_json("{"), DataError);
  EXPECT_THROW(graph_from_json(R"({"nodes":[{"id":"a","label":"a","type":"ENTITY"},
      {"id":"a","label":"a","type":"ENTITY"}],"edges":[]})"),
               DataError);
  EXPECT_THROW(graph_from_json(R"({"nodes":[{"id":"a","label":"a","type":"ENTITY"}],
      "edges":[{"src":"a","dst":"z","type":"PERFORMS","rule":"r"}]})"),
               DataError);
  EXPECT_THROW(graph_from_json(R"({"nodes":[{"id":"a","label":"a","type":"PLACE"}],"edges":[]})"),
               DataError);
  EXPECT_THROW(graph_from_json(R"({"nodes":[{"id":"a","label":"a","type":"ENTITY"}],
      "edges":[{"src":"a","dst":"a","type":"SAME_AS","rule":"r"}]})"),
               DataError);
}

}  // namespace
}  // namespace egmmg::kg
