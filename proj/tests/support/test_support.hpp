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

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <functional>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include <unistd.h>

#include "egmmg/autodiff.hpp"
#include "egmmg/featurize.hpp"
#include "egmmg/graph_features.hpp"
#include "egmmg/matrix.hpp"
#include "egmmg/model.hpp"
#include "egmmg/rng.hpp"

namespace egmmg::testing {

inline std::string fixture_path(const std::string& rel) {
  return std::string(EGMMG_FIXTURE_DIR) + "/" + rel;
}

inline std::string slurp(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

inline void spit(const std::filesystem::path& p, const std::string& text) {
  std::ofstream out(p, std::ios::binary);
  out << text;
}

class TempDir {
 public:
  explicit TempDir(const std::string& tag = "egmmg") {
    static std::atomic<int> counter{0};
    path_ = std::filesystem::temp_directory_path() /
            (tag + "_" + std::to_string(::getpid()) + "_" + std::to_string(counter++));
    std::filesystem::remove_all(path_);
    std::filesystem::create_directories(path_);
  }
  ~TempDir() {
    std::error_code ec;
    std::filesystem::remove_all(path_, ec);
  }
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;

  const std::filesystem::path& path() const { return path_; }
  std::string str(const std::string& rel = {}) const {
    return rel.empty() ? path_.string() : (path_ / rel).string();
  }

 private:
  std::filesystem::path path_;
};

inline Matrix random_matrix(Rng& rng, Eigen::Index rows, Eigen::Index cols, double lo = -1.0,
                            double hi = 1.0) {
  Matrix m(rows, cols);
  for (Eigen::Index i = 0; i < m.size(); ++i) m.data()[i] = rng.uniform(lo, hi);
  return m;
}

/// Values in [-1, -margin] U [margin, 1]; keeps kinked ops away from the kink.
inline Matrix random_away_from_zero(Rng& rng, Eigen::Index rows, Eigen::Index cols,
                                    double margin = 0.05) {
  Matrix m(rows, cols);
  for (Eigen::Index i = 0; i < m.size(); ++i) {
    const double mag = rng.uniform(margin, 1.0);
    m.data()[i] = rng.uniform01() < 0.5 ? -mag : mag;
  }
  return m;
}

inline double rel_error(double a, double n) {
  return std::abs(a - n) / std::max(1e-8, std::abs(a) + std::abs(n));
}

/// Finite-difference oracle for one op. `build` maps the input vars to an
/// output; the scalar checked is sum(out .* R) for a fixed random R, so every
/// output entry contributes with its own weight. Every input coordinate is
/// perturbed (central differences). Returns the max relative error.
inline double op_fd_error(const std::function<ad::Var(ad::Tape&, std::vector<ad::Var>&)>& build,
                          std::vector<Matrix> inputs, std::uint64_t seed, double h = 1e-5) {
  std::vector<ad::Parameter> params;
  params.reserve(inputs.size());
  for (std::size_t i = 0; i < inputs.size(); ++i) {
    params.emplace_back("in" + std::to_string(i), std::move(inputs[i]));
  }
  Matrix weights;
  auto forward = [&](bool with_backward) {
    ad::Tape tape;
    std::vector<ad::Var> vars;
    for (auto& p : params) vars.push_back(tape.parameter(p));
    ad::Var out = build(tape, vars);
    if (weights.size() == 0) {
      Rng rng(seed ^ 0x9e3779b97f4a7c15ULL);
      weights = random_matrix(rng, out.rows(), out.cols(), 0.5, 1.5);
    }
    ad::Var loss = ad::sum(ad::mul(out, tape.constant(weights)));
    if (with_backward) tape.backward(loss);
    return loss.item();
  };
  forward(true);
  double worst = 0.0;
  for (auto& p : params) {
    for (Eigen::Index i = 0; i < p.value.size(); ++i) {
      const double saved = p.value.data()[i];
      p.value.data()[i] = saved + h;
      const double up = forward(false);
      p.value.data()[i] = saved - h;
      const double down = forward(false);
      p.value.data()[i] = saved;
      worst = std::max(worst, rel_error(p.grad.data()[i], (up - down) / (2.0 * h)));
    }
  }
  return worst;
}

/// Dense power iteration written independently of the library: column
/// stochastic transition with multiplicity, dangling mass spread uniformly,
/// iterated until the L1 change drops below 1e-15.
inline std::vector<double> oracle_pagerank(std::size_t n,
                                           const std::vector<std::pair<std::size_t, std::size_t>>& edges,
                                           double damping = 0.85) {
  std::vector<std::vector<double>> t(n, std::vector<double>(n, 0.0));
  std::vector<double> out_deg(n, 0.0);
  for (const auto& [u, v] : edges) out_deg[u] += 1.0;
  for (const auto& [u, v] : edges) t[v][u] += 1.0 / out_deg[u];
  std::vector<double> r(n, 1.0 / static_cast<double>(n));
  for (int it = 0; it < 100000; ++it) {
    double dangling = 0.0;
    for (std::size_t u = 0; u < n; ++u) {
      if (out_deg[u] == 0.0) dangling += r[u];
    }
    std::vector<double> next(n);
    double change = 0.0;
    for (std::size_t v = 0; v < n; ++v) {
      double s = 0.0;
      for (std::size_t u = 0; u < n; ++u) s += t[v][u] * r[u];
      next[v] = (1.0 - damping) / static_cast<double>(n) +
                damping * (s + dangling / static_cast<double>(n));
      change += std::abs(next[v] - r[v]);
    }
    r = std::move(next);
    if (change < 1e-15) break;
  }
  return r;
}

inline features::Digraph random_digraph(Rng& rng, std::size_t max_nodes, double density) {
  features::Digraph g;
  g.node_count = 1 + rng.index(max_nodes);
  for (std::size_t u = 0; u < g.node_count; ++u) {
    for (std::size_t v = 0; v < g.node_count; ++v) {
      if (u != v && rng.uniform01() < density) g.edges.emplace_back(u, v);
    }
  }
  return g;
}

/// Random typed graph with random embeddings and structural rows; enough to
/// drive the model without going through text.
inline features::FeaturedGraph random_featured_graph(Rng& rng, std::size_t nodes,
                                                     std::size_t text_dim, double density,
                                                     bool edge_features = false) {
  features::FeaturedGraph fg;
  for (std::size_t i = 0; i < nodes; ++i) {
    fg.graph.add_node("n" + std::to_string(i), "n" + std::to_string(i), kg::NodeType::Entity);
  }
  for (std::size_t u = 0; u < nodes; ++u) {
    for (std::size_t v = 0; v < nodes; ++v) {
      if (u != v && rng.uniform01() < density) {
        fg.graph.add_edge(u, v, kg::EdgeType::Performs, "random");
      }
    }
  }
  fg.node_embeddings = random_matrix(rng, static_cast<Eigen::Index>(nodes),
                                     static_cast<Eigen::Index>(text_dim));
  fg.node_struct = random_matrix(rng, static_cast<Eigen::Index>(nodes), 5, 0.0, 3.0);
  if (edge_features) {
    fg.edge_features = random_matrix(rng, static_cast<Eigen::Index>(fg.graph.edge_count()), 7,
                                     0.0, 3.0);
  }
  return fg;
}

/// The same graph with node i moved to position perm[i]; edges and feature
/// rows follow their nodes, and edges are listed in a rotated order.
inline features::FeaturedGraph permute_graph(const features::FeaturedGraph& g,
                                             const std::vector<std::size_t>& perm) {
  const std::size_t n = g.node_count();
  std::vector<std::size_t> inv(n);
  for (std::size_t i = 0; i < n; ++i) inv[perm[i]] = i;
  features::FeaturedGraph out;
  for (std::size_t p = 0; p < n; ++p) {
    const auto& node = g.graph.nodes()[inv[p]];
    out.graph.add_node(node.id, node.label, node.type);
  }
  const auto& edges = g.graph.edges();
  const std::size_t m = edges.size();
  std::vector<std::size_t> edge_order(m);
  for (std::size_t k = 0; k < m; ++k) edge_order[k] = (k + m / 2 + 1) % std::max<std::size_t>(m, 1);
  for (std::size_t k : edge_order) {
    const auto& e = edges[k];
    out.graph.add_edge(perm[e.src], perm[e.dst], e.type, e.rule);
  }
  out.node_embeddings.resize(g.node_embeddings.rows(), g.node_embeddings.cols());
  out.node_struct.resize(g.node_struct.rows(), g.node_struct.cols());
  for (std::size_t i = 0; i < n; ++i) {
    out.node_embeddings.row(static_cast<Eigen::Index>(perm[i])) =
        g.node_embeddings.row(static_cast<Eigen::Index>(i));
    out.node_struct.row(static_cast<Eigen::Index>(perm[i])) =
        g.node_struct.row(static_cast<Eigen::Index>(i));
  }
  if (g.edge_features) {
    Matrix ef(static_cast<Eigen::Index>(m), g.edge_features->cols());
    for (std::size_t k = 0; k < m; ++k) {
      ef.row(static_cast<Eigen::Index>(k)) =
          g.edge_features->row(static_cast<Eigen::Index>(edge_order[k]));
    }
    out.edge_features = ef;
  }
  return out;
}

inline std::vector<std::size_t> random_permutation(Rng& rng, std::size_t n) {
  std::vector<std::size_t> p(n);
  for (std::size_t i = 0; i < n; ++i) p[i] = i;
  rng.shuffle(p);
  return p;
}

inline model::ModelConfig small_model_config(model::ConvVariant v, std::size_t text_dim = 6) {
  model::ModelConfig c;
  c.text_dim = text_dim;
  c.hidden_dim = 8;
  c.heads = {2, 2};
  c.variant = v;
  return c;
}

inline constexpr model::ConvVariant kAllVariants[] = {
    model::ConvVariant::Gat, model::ConvVariant::GatV2, model::ConvVariant::Transformer};

}  // namespace egmmg::testing
