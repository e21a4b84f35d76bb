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

#include <filesystem>

#include "egmmg/conllu.hpp"
#include "egmmg/error.hpp"
#include "egmmg/fallback_embed.hpp"
#include "egmmg/featurize.hpp"
#include "egmmg/kg_builder.hpp"
#include "test_support.hpp"

namespace egmmg::features {
namespace {

kg::KnowledgeGraph fixture_graph(const std::string& name) {
  return kg::build_graph(ingest::read_conllu_file(testing::fixture_path("graphs/" + name)));
}

TEST(Featurize, RowsFollowNodesAndStructure) {
  const auto g = fixture_graph("05_head_prep_in.conllu");
  const auto fg = featurize(g, NodeEmbedder::fallback(384), true);
  ASSERT_EQ(fg.node_embeddings.rows(), 3);
  ASSERT_EQ(fg.node_embeddings.cols(), 384);
  ASSERT_EQ(fg.node_struct.cols(), 5);
  ASSERT_TRUE(fg.edge_features.has_value());
  ASSERT_EQ(fg.edge_features->rows(), 2);
  ASSERT_EQ(fg.edge_features->cols(), 7);

  const auto dg = Digraph::from(g);
  const auto ns = node_struct_features(dg);
  const auto ef = all_edge_features(dg);
  for (std::size_t i = 0; i < g.node_count(); ++i) {
    const auto e = ingest::fallback_embed(g.nodes()[i].label, 384);
    for (std::size_t k = 0; k < 384; ++k) {
      EXPECT_EQ(fg.node_embeddings(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(k)),
                static_cast<double>(e[k]));
    }
    const auto row = ns[i].to_array();
    for (std::size_t k = 0; k < 5; ++k) {
      EXPECT_EQ(fg.node_struct(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(k)), row[k]);
    }
  }
  for (std::size_t e = 0; e < ef.size(); ++e) {
    const auto row = ef[e].to_array();
    for (std::size_t k = 0; k < 7; ++k) {
      EXPECT_EQ((*fg.edge_features)(static_cast<Eigen::Index>(e), static_cast<Eigen::Index>(k)),
                row[k]);
    }
  }
}

TEST(Featurize, EdgeFeaturesOnlyWhenAsked) {
  const auto fg = featurize(fixture_graph("01_nsubj_dobj.conllu"), NodeEmbedder::fallback(768),
                            false);
  EXPECT_FALSE(fg.edge_features.has_value());
}

TEST(Featurize, EmptyGraphHasEmptyMatrices) {
  const auto fg = featurize(kg::KnowledgeGraph{}, NodeEmbedder::fallback(384), true);
  EXPECT_TRUE(fg.empty());
  EXPECT_EQ(fg.node_embeddings.rows(), 0);
}

TEST(NodeEmbedder, TableLookupAndMissingLabel) {
  auto table = std::make_shared<ingest::EmbeddingTable>(384);
  std::vector<float> v(384, 0.0f);
  v[7] = 1.0f;
  table->insert("Alice", v);
  const auto e = NodeEmbedder::from_table(table);
  EXPECT_TRUE(e.uses_table());
  EXPECT_EQ(e.dim(), 384u);
  EXPECT_EQ(e.embed("Alice"), v);
  EXPECT_THROW(e.embed("Bob"), DataError);
  EXPECT_THROW(NodeEmbedder::from_table(nullptr), ConfigError);
}

TEST(FeaturedGraphFile, RoundTripAtFloatPrecision) {
  testing::TempDir dir;
  for (bool with_edges : {false, true}) {
    const auto fg =
        featurize(fixture_graph("08_event_suffix.conllu"), NodeEmbedder::fallback(384), with_edges);
    const auto stem = dir.str(with_edges ? "with" : "without");
    write_featured_graph(fg, stem);
    EXPECT_TRUE(std::filesystem::exists(stem + ".json"));
    EXPECT_TRUE(std::filesystem::exists(stem + ".emb.egtb"));
    EXPECT_TRUE(std::filesystem::exists(stem + ".feat.bin"));
    const auto back = read_featured_graph(stem);
    EXPECT_EQ(back.graph, fg.graph);
    EXPECT_EQ(back.node_embeddings, fg.node_embeddings);
    EXPECT_EQ(back.node_struct, fg.node_struct.cast<float>().cast<double>());
    ASSERT_EQ(back.edge_features.has_value(), with_edges);
    if (with_edges) {
      EXPECT_EQ(*back.edge_features, fg.edge_features->cast<float>().cast<double>());
    }
  }
}

TEST(FeaturedGraphFile, CorruptFeatureFileIsADataError) {
  testing::TempDir dir;
  const auto fg = featurize(fixture_graph("01_nsubj_dobj.conllu"), NodeEmbedder::fallback(384),
                            false);
  const auto stem = dir.str("g");
  write_featured_graph(fg, stem);
  auto raw = testing::slurp(stem + ".feat.bin");
  testing::spit(stem + ".feat.bin", raw.substr(0, raw.size() - 3));
  EXPECT_THROW(read_featured_graph(stem), DataError);
  raw[0] = 'X';
  testing::spit(stem + ".feat.bin", raw);
  EXPECT_THROW(read_featured_graph(stem), DataError);
  EXPECT_THROW(read_featured_graph(dir.str("absent")), DataError);
}

}  // namespace
}  // namespace egmmg::features
