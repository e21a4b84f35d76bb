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

#include "egmmg/graph_features.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <optional>
#include <queue>
#include <set>

#include "egmmg/error.hpp"

namespace egmmg::features {
namespace {

// Unique successor lists of the simple digraph underlying g (self-loops kept).
std::vector<std::vector<std::size_t>> simple_successors(const Digraph& g) {
  std::vector<std::set<std::size_t>> sets(g.node_count);
  for (const auto& [u, v] : g.edges) sets[u].insert(v);
  std::vector<std::vector<std::size_t>> out(g.node_count);
  for (std::size_t u = 0; u < g.node_count; ++u) out[u].assign(sets[u].begin(), sets[u].end());
  return out;
}

std::vector<std::set<std::size_t>> predecessor_sets(const Digraph& g) {
  std::vector<std::set<std::size_t>> preds(g.node_count);
  for (const auto& [u, v] : g.edges) preds[v].insert(u);
  return preds;
}

std::vector<std::set<std::size_t>> successor_sets(const Digraph& g) {
  std::vector<std::set<std::size_t>> succs(g.node_count);
  for (const auto& [u, v] : g.edges) succs[u].insert(v);
  return succs;
}

std::size_t intersection_size(const std::set<std::size_t>& a, const std::set<std::size_t>& b) {
  std::size_t n = 0;
  for (auto x : a) n += b.count(x);
  return n;
}

// BFS distance from `from` to `to`, skipping one instance of the edge
// (skip_u -> skip_v) if requested. Multiplicities decide whether a pair stays
// connected after the removal.
double path_length(const Digraph& g, std::size_t from, std::size_t to,
                   std::optional<std::pair<std::size_t, std::size_t>> skip) {
  std::map<std::pair<std::size_t, std::size_t>, int> mult;
  for (const auto& e : g.edges) ++mult[e];
  if (skip) --mult[*skip];
  std::vector<std::vector<std::size_t>> adj(g.node_count);
  for (const auto& [e, m] : mult) {
    if (m > 0) adj[e.first].push_back(e.second);
  }
  std::vector<int> dist(g.node_count, -1);
  std::queue<std::size_t> q;
  dist[from] = 0;
  q.push(from);
  while (!q.empty()) {
    const auto x = q.front();
    q.pop();
    if (x == to) return dist[x];
    for (auto y : adj[x]) {
      if (dist[y] < 0) {
        dist[y] = dist[x] + 1;
        q.push(y);
      }
    }
  }
  return kUnreachablePathLength;
}

}  // namespace

Digraph Digraph::from(const kg::KnowledgeGraph& g) {
  Digraph d;
  d.node_count = g.node_count();
  d.edges.reserve(g.edge_count());
  for (const auto& e : g.edges()) d.edges.emplace_back(e.src, e.dst);
  return d;
}

Digraph Digraph::reversed() const {
  Digraph r;
  r.node_count = node_count;
  r.edges.reserve(edges.size());
  for (const auto& [u, v] : edges) r.edges.emplace_back(v, u);
  return r;
}

std::vector<double> pagerank(const Digraph& g, const PageRankOptions& opts) {
  const std::size_t n = g.node_count;
  if (n == 0) throw DataError("pagerank: empty graph");
  std::vector<double> out_degree(n, 0.0);
  for (const auto& [u, v] : g.edges) out_degree[u] += 1.0;

  const double inv_n = 1.0 / static_cast<double>(n);
  std::vector<double> rank(n, inv_n), next(n);
  for (int iter = 0; iter < opts.max_iters; ++iter) {
    double dangling = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      if (out_degree[i] == 0.0) dangling += rank[i];
    }
    const double base = (1.0 - opts.damping) * inv_n + opts.damping * dangling * inv_n;
    std::fill(next.begin(), next.end(), base);
    for (const auto& [u, v] : g.edges) next[v] += opts.damping * rank[u] / out_degree[u];
    double change = 0.0;
    for (std::size_t i = 0; i < n; ++i) change += std::abs(next[i] - rank[i]);
    rank.swap(next);
    if (change < opts.tol) break;
  }
  double total = 0.0;
  for (double r : rank) total += r;
  for (double& r : rank) r /= total;
  return rank;
}

std::vector<double> reverse_pagerank(const Digraph& g, const PageRankOptions& opts) {
  return pagerank(g.reversed(), opts);
}

std::vector<NodeStructFeatures> node_struct_features(const Digraph& g,
                                                     const PageRankOptions& opts) {
  std::vector<NodeStructFeatures> feats(g.node_count);
  for (const auto& [u, v] : g.edges) {
    feats[u].out_degree += 1;
    feats[v].in_degree += 1;
  }
  const auto pr = pagerank(g, opts);
  const auto rpr = reverse_pagerank(g, opts);
  for (std::size_t i = 0; i < g.node_count; ++i) {
    feats[i].total_degree = feats[i].in_degree + feats[i].out_degree;
    feats[i].pagerank = pr[i];
    feats[i].reverse_pagerank = rpr[i];
  }
  return feats;
}

std::vector<double> edge_betweenness(const Digraph& g) {
  const std::size_t n = g.node_count;
  const auto succ = simple_successors(g);
  std::map<std::pair<std::size_t, std::size_t>, double> pair_score;

  std::vector<std::size_t> order;
  std::vector<std::vector<std::size_t>> preds(n);
  std::vector<double> sigma(n), delta(n);
  std::vector<int> dist(n);
  for (std::size_t s = 0; s < n; ++s) {
    order.clear();
    for (auto& p : preds) p.clear();
    std::fill(sigma.begin(), sigma.end(), 0.0);
    std::fill(delta.begin(), delta.end(), 0.0);
    std::fill(dist.begin(), dist.end(), -1);
    sigma[s] = 1.0;
    dist[s] = 0;
    std::queue<std::size_t> q;
    q.push(s);
    while (!q.empty()) {
      const auto v = q.front();
      q.pop();
      order.push_back(v);
      for (auto w : succ[v]) {
        if (dist[w] < 0) {
          dist[w] = dist[v] + 1;
          q.push(w);
        }
        if (dist[w] == dist[v] + 1) {
          sigma[w] += sigma[v];
          preds[w].push_back(v);
        }
      }
    }
    for (auto it = order.rbegin(); it != order.rend(); ++it) {
      const auto w = *it;
      for (auto v : preds[w]) {
        const double c = sigma[v] / sigma[w] * (1.0 + delta[w]);
        pair_score[{v, w}] += c;
        delta[v] += c;
      }
    }
  }
  std::vector<double> out;
  out.reserve(g.edges.size());
  for (const auto& e : g.edges) {
    const auto it = pair_score.find(e);
    out.push_back(it == pair_score.end() ? 0.0 : it->second);
  }
  return out;
}

namespace {

EdgeFeatures edge_features_with(const Digraph& g, std::size_t edge_index, double centrality,
                                const std::vector<std::set<std::size_t>>& preds,
                                const std::vector<std::set<std::size_t>>& succs) {
  const auto [u, v] = g.edges[edge_index];
  EdgeFeatures f;
  f.centrality = centrality;
  const auto cp = intersection_size(preds[u], preds[v]);
  const auto cs = intersection_size(succs[u], succs[v]);
  f.common_predecessors = static_cast<double>(cp);
  f.common_successors = static_cast<double>(cs);
  const auto in_union = preds[u].size() + preds[v].size() - cp;
  const auto out_union = succs[u].size() + succs[v].size() - cs;
  f.in_jaccard = in_union ? static_cast<double>(cp) / static_cast<double>(in_union) : 0.0;
  f.out_jaccard = out_union ? static_cast<double>(cs) / static_cast<double>(out_union) : 0.0;
  if (u != v) {
    f.forward_path_len = path_length(g, u, v, std::make_pair(u, v));
    f.backward_path_len = path_length(g, v, u, std::nullopt);
  }
  return f;
}

}  // namespace

EdgeFeatures edge_features(const Digraph& g, std::size_t edge_index) {
  if (edge_index >= g.edges.size()) throw DataError("edge_features: edge not in graph");
  const auto bc = edge_betweenness(g);
  return edge_features_with(g, edge_index, bc[edge_index], predecessor_sets(g), successor_sets(g));
}

std::vector<EdgeFeatures> all_edge_features(const Digraph& g) {
  const auto bc = edge_betweenness(g);
  const auto preds = predecessor_sets(g);
  const auto succs = successor_sets(g);
  std::vector<EdgeFeatures> out;
  out.reserve(g.edges.size());
  for (std::size_t i = 0; i < g.edges.size(); ++i) {
    out.push_back(edge_features_with(g, i, bc[i], preds, succs));
  }
  return out;
}

}  // namespace egmmg::features
