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
#include <utility>
#include <vector>

#include "egmmg/knowledge_graph.hpp"

namespace egmmg::features {

/// Plain directed multigraph over node positions; the structural feature code
/// works on this view so it can be exercised without a KnowledgeGraph.
struct Digraph {
  std::size_t node_count = 0;
  std::vector<std::pair<std::size_t, std::size_t>> edges;

  static Digraph from(const kg::KnowledgeGraph& g);
  Digraph reversed() const;
};

struct PageRankOptions {
  double damping = 0.85;
  double tol = 1e-10;
  int max_iters = 200;
};

/// Power iteration with uniform teleport; the mass of dangling nodes is spread
/// uniformly. Parallel edges count with multiplicity. Throws DataError on an
/// empty graph.
std::vector<double> pagerank(const Digraph& g, const PageRankOptions& opts = {});

/// PageRank of the edge-reversed graph.
std::vector<double> reverse_pagerank(const Digraph& g, const PageRankOptions& opts = {});

inline constexpr std::size_t kNodeFeatureDim = 5;
inline constexpr std::size_t kEdgeFeatureDim = 7;
inline constexpr double kUnreachablePathLength = 10.0;

struct NodeStructFeatures {
  double in_degree = 0;
  double out_degree = 0;
  double total_degree = 0;
  double pagerank = 0;
  double reverse_pagerank = 0;

  /// (in, out, total, pagerank, reverse pagerank)
  std::array<double, kNodeFeatureDim> to_array() const {
    return {in_degree, out_degree, total_degree, pagerank, reverse_pagerank};
  }
};

std::vector<NodeStructFeatures> node_struct_features(const Digraph& g,
                                                     const PageRankOptions& opts = {});

struct EdgeFeatures {
  double centrality = 0;
  double common_predecessors = 0;
  double common_successors = 0;
  double in_jaccard = 0;
  double out_jaccard = 0;
  double forward_path_len = kUnreachablePathLength;
  double backward_path_len = kUnreachablePathLength;

  std::array<double, kEdgeFeatureDim> to_array() const {
    return {centrality,  common_predecessors, common_successors, in_jaccard,
            out_jaccard, forward_path_len,    backward_path_len};
  }
};

/// Directed, unnormalized edge betweenness per edge (Brandes accumulation over
/// the simple digraph underlying g; parallel edges share their pair's value).
std::vector<double> edge_betweenness(const Digraph& g);

/// Features of edge number `edge_index`. Throws DataError if out of range.
EdgeFeatures edge_features(const Digraph& g, std::size_t edge_index);

/// Features for every edge; betweenness is computed once.
std::vector<EdgeFeatures> all_edge_features(const Digraph& g);

}  // namespace egmmg::features
