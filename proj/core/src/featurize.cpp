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

#include "egmmg/featurize.hpp"

#include <bit>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <iterator>

#include "egmmg/error.hpp"
#include "egmmg/fallback_embed.hpp"
#include "egmmg/graph_features.hpp"

namespace egmmg::features {

NodeEmbedder NodeEmbedder::fallback(std::size_t dim) {
  if (dim != 384 && dim != 768) {
    throw ConfigError("embedding dim must be 384 or 768, got " + std::to_string(dim));
  }
  NodeEmbedder e;
  e.dim_ = dim;
  return e;
}

NodeEmbedder NodeEmbedder::from_table(std::shared_ptr<const ingest::EmbeddingTable> table) {
  if (!table) throw ConfigError("null embedding table");
  NodeEmbedder e;
  e.dim_ = table->dim();
  e.table_ = std::move(table);
  return e;
}

std::vector<float> NodeEmbedder::embed(std::string_view label) const {
  if (table_) {
    const auto v = table_->at(label);
    return {v.begin(), v.end()};
  }
  return ingest::fallback_embed(label, dim_);
}

FeaturedGraph featurize(kg::KnowledgeGraph graph, const NodeEmbedder& embedder,
                        bool with_edge_features) {
  FeaturedGraph fg;
  const std::size_t n = graph.node_count();
  fg.node_embeddings = Matrix::Zero(static_cast<Eigen::Index>(n),
                                    static_cast<Eigen::Index>(embedder.dim()));
  fg.node_struct = Matrix::Zero(static_cast<Eigen::Index>(n), kNodeFeatureDim);
  if (n > 0) {
    for (std::size_t i = 0; i < n; ++i) {
      const auto v = embedder.embed(graph.nodes()[i].label);
      for (std::size_t k = 0; k < v.size(); ++k) {
        fg.node_embeddings(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(k)) = v[k];
      }
    }
    const auto digraph = Digraph::from(graph);
    const auto structs = node_struct_features(digraph);
    for (std::size_t i = 0; i < n; ++i) {
      const auto row = structs[i].to_array();
      for (std::size_t k = 0; k < kNodeFeatureDim; ++k) {
        fg.node_struct(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(k)) = row[k];
      }
    }
    if (with_edge_features) {
      const auto ef = all_edge_features(digraph);
      Matrix m(static_cast<Eigen::Index>(ef.size()), kEdgeFeatureDim);
      for (std::size_t e = 0; e < ef.size(); ++e) {
        const auto row = ef[e].to_array();
        for (std::size_t k = 0; k < kEdgeFeatureDim; ++k) {
          m(static_cast<Eigen::Index>(e), static_cast<Eigen::Index>(k)) = row[k];
        }
      }
      fg.edge_features = std::move(m);
    }
  } else if (with_edge_features) {
    fg.edge_features = Matrix::Zero(0, kEdgeFeatureDim);
  }
  fg.graph = std::move(graph);
  return fg;
}

namespace {

constexpr char kFeatMagic[4] = {'E', 'G', 'F', 'T'};

template <typename T>
void put(std::ofstream& out, T v) {
  out.write(reinterpret_cast<const char*>(&v), sizeof(T));
}

void put_rows(std::ofstream& out, const Matrix& m) {
  for (Eigen::Index r = 0; r < m.rows(); ++r) {
    for (Eigen::Index c = 0; c < m.cols(); ++c) put<float>(out, static_cast<float>(m(r, c)));
  }
}

}  // namespace

void write_featured_graph(const FeaturedGraph& fg, const std::string& stem) {
  kg::write_graph_file(fg.graph, stem + ".json");

  ingest::EmbeddingTable table(static_cast<std::size_t>(fg.node_embeddings.cols()));
  std::vector<float> row(static_cast<std::size_t>(fg.node_embeddings.cols()));
  for (std::size_t i = 0; i < fg.node_count(); ++i) {
    for (std::size_t k = 0; k < row.size(); ++k) {
      row[k] = static_cast<float>(
          fg.node_embeddings(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(k)));
    }
    table.insert(fg.graph.nodes()[i].id, row);
  }
  table.write(stem + ".emb.egtb");

  std::ofstream out(stem + ".feat.bin", std::ios::binary | std::ios::trunc);
  if (!out) throw DataError("cannot write " + stem + ".feat.bin");
  out.write(kFeatMagic, 4);
  put<std::uint32_t>(out, 1);
  put<std::uint32_t>(out, static_cast<std::uint32_t>(fg.node_count()));
  put<std::uint32_t>(out, static_cast<std::uint32_t>(fg.graph.edge_count()));
  put<std::uint32_t>(out, fg.edge_features ? 1u : 0u);
  put_rows(out, fg.node_struct);
  if (fg.edge_features) put_rows(out, *fg.edge_features);
}

FeaturedGraph read_featured_graph(const std::string& stem) {
  FeaturedGraph fg;
  fg.graph = kg::read_graph_file(stem + ".json");
  const auto table = ingest::EmbeddingTable::read(stem + ".emb.egtb");
  const auto n = fg.graph.node_count();
  if (table.size() != n) throw DataError(stem + ": embedding count does not match node count");
  fg.node_embeddings.resize(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(table.dim()));
  for (std::size_t i = 0; i < n; ++i) {
    const auto v = table.at(fg.graph.nodes()[i].id);
    for (std::size_t k = 0; k < v.size(); ++k) {
      fg.node_embeddings(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(k)) = v[k];
    }
  }

  std::ifstream in(stem + ".feat.bin", std::ios::binary);
  if (!in) throw DataError("cannot open " + stem + ".feat.bin");
  std::vector<char> raw((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  std::size_t pos = 0;
  auto get = [&](void* dst, std::size_t bytes) {
    if (raw.size() - pos < bytes) throw DataError(stem + ".feat.bin: truncated");
    std::memcpy(dst, raw.data() + pos, bytes);
    pos += bytes;
  };
  char magic[4];
  get(magic, 4);
  if (std::memcmp(magic, kFeatMagic, 4) != 0) throw DataError(stem + ".feat.bin: bad magic");
  std::uint32_t version, nodes, edges, has_edges;
  get(&version, 4);
  get(&nodes, 4);
  get(&edges, 4);
  get(&has_edges, 4);
  if (version != 1 || nodes != n || edges != fg.graph.edge_count()) {
    throw DataError(stem + ".feat.bin: header does not match graph");
  }
  auto read_rows = [&](Eigen::Index rows, Eigen::Index cols) {
    Matrix m(rows, cols);
    for (Eigen::Index r = 0; r < rows; ++r) {
      for (Eigen::Index c = 0; c < cols; ++c) {
        float v;
        get(&v, sizeof v);
        m(r, c) = v;
      }
    }
    return m;
  };
  fg.node_struct = read_rows(nodes, kNodeFeatureDim);
  if (has_edges) fg.edge_features = read_rows(edges, kEdgeFeatureDim);
  if (pos != raw.size()) throw DataError(stem + ".feat.bin: trailing bytes");
  return fg;
}

}  // namespace egmmg::features
