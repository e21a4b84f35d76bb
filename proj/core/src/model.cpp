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

#include "egmmg/model.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <set>
#include <utility>

#include "egmmg/error.hpp"
#include "egmmg/rng.hpp"

namespace egmmg::model {

using ad::Parameter;
using ad::Tape;
using ad::Var;

std::string_view to_string(ConvVariant v) {
  switch (v) {
    case ConvVariant::Gat: return "GAT";
    case ConvVariant::GatV2: return "GATv2";
    case ConvVariant::Transformer: return "TRANSFORMER";
  }
  return "?";
}

ConvVariant parse_conv_variant(std::string_view s) {
  std::string u;
  for (char c : s) u.push_back(static_cast<char>(std::toupper(static_cast<unsigned char>(c))));
  if (u == "GAT" || u == "GATCONV") return ConvVariant::Gat;
  if (u == "GATV2" || u == "GATV2CONV") return ConvVariant::GatV2;
  if (u == "TRANSFORMER" || u == "TRANSFORMERCONV") return ConvVariant::Transformer;
  throw ConfigError("unknown conv variant '" + std::string(s) + "' (GAT, GATv2, TRANSFORMER)");
}

void ModelConfig::validate() const {
  if (text_dim == 0 || hidden_dim == 0) throw ConfigError("model dims must be positive");
  for (auto h : heads) {
    if (h == 0 || hidden_dim % h != 0) {
      throw ConfigError("hidden dim " + std::to_string(hidden_dim) +
                        " is not divisible by head count " + std::to_string(h));
    }
  }
}

void EdgeIndex::append_graph(const kg::KnowledgeGraph& g, std::size_t offset) {
  const std::size_t n = g.node_count();
  for (std::size_t v = 0; v < n; ++v) {
    src.push_back(offset + v);
    dst.push_back(offset + v);
  }
  std::set<std::pair<std::size_t, std::size_t>> seen;
  for (const auto& e : g.edges()) {
    if (e.src == e.dst) continue;
    if (!seen.emplace(e.src, e.dst).second) continue;
    src.push_back(offset + e.src);
    dst.push_back(offset + e.dst);
  }
  node_count = std::max(node_count, offset + n);
}

Matrix pooled_edge_features(const features::FeaturedGraph& g) {
  Matrix out = Matrix::Zero(1, features::kEdgeFeatureDim);
  if (!g.edge_features) throw DataError("graph has no edge features");
  const auto& ef = *g.edge_features;
  if (ef.rows() > 0) out = ef.colwise().mean();
  return out;
}

namespace {

Matrix glorot(Rng& rng, Eigen::Index rows, Eigen::Index cols, double fan_in, double fan_out) {
  const double a = std::sqrt(6.0 / (fan_in + fan_out));
  Matrix m(rows, cols);
  for (Eigen::Index i = 0; i < m.size(); ++i) m.data()[i] = rng.uniform(-a, a);
  return m;
}

Matrix glorot(Rng& rng, Eigen::Index rows, Eigen::Index cols) {
  return glorot(rng, rows, cols, static_cast<double>(rows), static_cast<double>(cols));
}

Matrix zeros(Eigen::Index rows, Eigen::Index cols) { return Matrix::Zero(rows, cols); }

Var linear(Tape& t, Var x, Parameter& w, Parameter& b) {
  return ad::add_row(ad::matmul(x, t.parameter(w)), t.parameter(b));
}

}  // namespace

Parameter& Model::add_param(std::string name, Matrix value, bool trainable) {
  return params_.emplace_back(std::move(name), std::move(value), trainable);
}

Model::Model(const ModelConfig& config, std::uint64_t seed) : config_(config) {
  config_.validate();
  Rng rng(seed);
  const auto d_text = static_cast<Eigen::Index>(config_.text_dim);
  const auto d_common = static_cast<Eigen::Index>(config_.common_dim());
  const auto hidden = static_cast<Eigen::Index>(config_.hidden_dim);
  const auto d_struct = static_cast<Eigen::Index>(features::kNodeFeatureDim);

  add_param("projector.text.weight", glorot(rng, d_text, d_common));
  add_param("projector.text.bias", zeros(1, d_common));
  add_param("projector.struct.weight", glorot(rng, d_struct, d_common));
  add_param("projector.struct.bias", zeros(1, d_common));
  const bool weighted = config_.weighted_node_embeddings;
  add_param("projector.alpha", Matrix::Ones(1, 1), weighted);
  add_param("projector.beta", Matrix::Ones(1, 1), weighted);

  for (std::size_t l = 0; l < 2; ++l) {
    const Eigen::Index in = l == 0 ? d_common : hidden;
    const auto heads = static_cast<Eigen::Index>(config_.heads[l]);
    const double c = static_cast<double>(hidden / heads);
    const std::string p = "conv" + std::to_string(l + 1) + ".";
    auto& w = conv_[l].weights;
    switch (config_.variant) {
      case ConvVariant::Transformer:
        for (const char* part : {"query", "key", "value", "skip"}) {
          w.push_back(&add_param(p + part + ".weight", glorot(rng, in, hidden)));
          w.push_back(&add_param(p + part + ".bias", zeros(1, hidden)));
        }
        break;
      case ConvVariant::Gat:
        w.push_back(&add_param(p + "weight", glorot(rng, in, hidden)));
        w.push_back(&add_param(p + "att_src", glorot(rng, 1, hidden, c, 1.0)));
        w.push_back(&add_param(p + "att_dst", glorot(rng, 1, hidden, c, 1.0)));
        w.push_back(&add_param(p + "bias", zeros(1, hidden)));
        break;
      case ConvVariant::GatV2:
        w.push_back(&add_param(p + "lin_l.weight", glorot(rng, in, hidden)));
        w.push_back(&add_param(p + "lin_l.bias", zeros(1, hidden)));
        w.push_back(&add_param(p + "lin_r.weight", glorot(rng, in, hidden)));
        w.push_back(&add_param(p + "lin_r.bias", zeros(1, hidden)));
        w.push_back(&add_param(p + "att", glorot(rng, 1, hidden, c, 1.0)));
        w.push_back(&add_param(p + "bias", zeros(1, hidden)));
        break;
    }
  }

  add_param("scorer.weight", glorot(rng, hidden, 1));
  add_param("scorer.bias", zeros(1, 1));
  add_param("cross.query", glorot(rng, hidden, hidden));
  add_param("cross.key", glorot(rng, hidden, hidden));
  add_param("cross.value", glorot(rng, hidden, hidden));
  const auto f = static_cast<Eigen::Index>(config_.classifier_input_dim());
  add_param("classifier.weight", zeros(f, 1));
  add_param("classifier.bias", zeros(1, 1));
}

std::vector<Parameter*> Model::parameters() {
  std::vector<Parameter*> out;
  for (auto& p : params_) out.push_back(&p);
  return out;
}

std::vector<const Parameter*> Model::parameters() const {
  std::vector<const Parameter*> out;
  for (const auto& p : params_) out.push_back(&p);
  return out;
}

Parameter& Model::parameter(std::string_view name) {
  for (auto& p : params_) {
    if (p.name == name) return p;
  }
  throw ConfigError("no parameter named '" + std::string(name) + "'");
}

const Parameter& Model::parameter(std::string_view name) const {
  return const_cast<Model*>(this)->parameter(name);
}

std::size_t Model::count_parameters() const { return count_parameters(""); }

std::size_t Model::count_parameters(std::string_view prefix) const {
  std::size_t n = 0;
  for (const auto& p : params_) {
    if (p.trainable && p.name.starts_with(prefix)) n += p.size();
  }
  return n;
}

void Model::zero_grad() {
  for (auto& p : params_) p.zero_grad();
}

void Model::randomize_head(std::uint64_t seed) {
  Rng rng(seed);
  auto& w = parameter("classifier.weight");
  w.value = glorot(rng, w.value.rows(), 1);
  parameter("classifier.bias").value(0, 0) = rng.uniform(-0.1, 0.1);
}

Var Model::project_nodes(Tape& t, Var text, Var structs) {
  if (text.cols() != static_cast<Eigen::Index>(config_.text_dim) ||
      structs.cols() != static_cast<Eigen::Index>(features::kNodeFeatureDim) ||
      text.rows() != structs.rows()) {
    throw DataError("project_nodes: expected n x " + std::to_string(config_.text_dim) +
                    " text and n x 5 structural rows");
  }
  Var ht = linear(t, text, parameter("projector.text.weight"), parameter("projector.text.bias"));
  Var hs = linear(t, structs, parameter("projector.struct.weight"),
                  parameter("projector.struct.bias"));
  return ad::add(ad::scale_by(ht, t.parameter(parameter("projector.alpha"))),
                 ad::scale_by(hs, t.parameter(parameter("projector.beta"))));
}

Var Model::conv_forward(Tape& t, std::size_t layer, Var h, const EdgeIndex& edges,
                        std::vector<AttentionRecord>* trace) {
  if (layer >= 2) throw ConfigError("conv layer index must be 0 or 1");
  if (static_cast<std::size_t>(h.rows()) != edges.node_count) {
    throw DataError("conv_forward: edge index covers " + std::to_string(edges.node_count) +
                    " nodes, input has " + std::to_string(h.rows()));
  }
  const std::size_t heads = config_.heads[layer];
  const std::size_t n = edges.node_count;
  const auto& w = conv_[layer].weights;
  Var alpha;
  Var out;
  switch (config_.variant) {
    case ConvVariant::Transformer: {
      Var q = linear(t, h, *w[0], *w[1]);
      Var k = linear(t, h, *w[2], *w[3]);
      Var v = linear(t, h, *w[4], *w[5]);
      Var skip = linear(t, h, *w[6], *w[7]);
      const double c = static_cast<double>(config_.hidden_dim / heads);
      Var s = ad::scale(ad::edge_dot(q, k, edges.src, edges.dst, heads), 1.0 / std::sqrt(c));
      alpha = ad::segment_softmax(s, edges.dst, n);
      out = ad::add(ad::edge_aggregate(alpha, v, edges.src, edges.dst, n, heads), skip);
      break;
    }
    case ConvVariant::Gat: {
      Var z = ad::matmul(h, t.parameter(*w[0]));
      Var a_src = ad::head_sum(ad::mul_row(z, t.parameter(*w[1])), heads);
      Var a_dst = ad::head_sum(ad::mul_row(z, t.parameter(*w[2])), heads);
      Var e = ad::leaky_relu(
          ad::add(ad::gather_rows(a_src, edges.src), ad::gather_rows(a_dst, edges.dst)), 0.2);
      alpha = ad::segment_softmax(e, edges.dst, n);
      out = ad::add_row(ad::edge_aggregate(alpha, z, edges.src, edges.dst, n, heads),
                        t.parameter(*w[3]));
      break;
    }
    case ConvVariant::GatV2: {
      Var xl = linear(t, h, *w[0], *w[1]);
      Var xr = linear(t, h, *w[2], *w[3]);
      Var z = ad::leaky_relu(
          ad::add(ad::gather_rows(xl, edges.src), ad::gather_rows(xr, edges.dst)), 0.2);
      Var e = ad::head_sum(ad::mul_row(z, t.parameter(*w[4])), heads);
      alpha = ad::segment_softmax(e, edges.dst, n);
      out = ad::add_row(ad::edge_aggregate(alpha, xl, edges.src, edges.dst, n, heads),
                        t.parameter(*w[5]));
      break;
    }
  }
  if (trace) {
    trace->push_back({"conv" + std::to_string(layer + 1), alpha.value(), edges.dst, n});
  }
  return out;
}

NodeScores Model::score_nodes(Tape& t, Var h) {
  Var s = ad::sigmoid(linear(t, h, parameter("scorer.weight"), parameter("scorer.bias")));
  return {ad::mul_col(h, s), s};
}

Var Model::cross_attention(Tape& t, Var h_claim, Var h_evidence,
                           std::vector<AttentionRecord>* trace) {
  Var q = ad::matmul(h_claim, t.parameter(parameter("cross.query")));
  Var k = ad::matmul(h_evidence, t.parameter(parameter("cross.key")));
  Var v = ad::matmul(h_evidence, t.parameter(parameter("cross.value")));
  const double scale = 1.0 / std::sqrt(static_cast<double>(config_.hidden_dim));
  Var a = ad::row_softmax(ad::scale(ad::matmul(q, ad::transpose(k)), scale));
  if (trace) {
    // Flatten to one row per (claim, evidence) pair, grouped by claim row.
    const auto& m = a.value();
    AttentionRecord r{"cross", Matrix(m.size(), 1), {}, static_cast<std::size_t>(m.rows())};
    for (Eigen::Index i = 0; i < m.rows(); ++i) {
      for (Eigen::Index j = 0; j < m.cols(); ++j) {
        r.weights(i * m.cols() + j, 0) = m(i, j);
        r.segment.push_back(static_cast<std::size_t>(i));
      }
    }
    trace->push_back(std::move(r));
  }
  return ad::matmul(a, v);
}

Var Model::pool_and_classify(Tape& t, Var h_evidence, Var h_claim, Var attended,
                             std::optional<Var> edge_pool) {
  if (edge_pool.has_value() != config_.use_edge_features) {
    throw DataError(config_.use_edge_features ? "pool_and_classify: edge features required"
                                              : "pool_and_classify: edge features not enabled");
  }
  auto pool = [](Var x) {
    const std::vector<std::size_t> seg(static_cast<std::size_t>(x.rows()), 0);
    return ad::mean_rows(x, seg, 1);
  };
  std::vector<Var> parts{pool(h_evidence), pool(h_claim), pool(attended)};
  if (edge_pool) parts.push_back(*edge_pool);
  Var f = ad::concat(parts, 1);
  return ad::sigmoid(
      linear(t, f, parameter("classifier.weight"), parameter("classifier.bias")));
}

Var Model::forward(Tape& t, std::span<const GraphPair> batch,
                   std::vector<AttentionRecord>* trace) {
  if (batch.empty()) throw DataError("forward: empty batch");
  const std::size_t b_count = batch.size();
  const auto d_text = static_cast<Eigen::Index>(config_.text_dim);

  std::size_t n = 0;
  for (const auto& p : batch) {
    if (!p.evidence || !p.claim) throw DataError("forward: missing graph");
    if (p.evidence->empty() || p.claim->empty()) throw DataError("forward: empty graph");
    for (const auto* g : {p.evidence, p.claim}) {
      if (g->node_embeddings.cols() != d_text) {
        throw DataError("forward: node embeddings have " +
                        std::to_string(g->node_embeddings.cols()) + " columns, model expects " +
                        std::to_string(config_.text_dim));
      }
      if (config_.use_edge_features && !g->edge_features) {
        throw DataError("forward: edge features enabled but graph has none");
      }
    }
    n += p.evidence->node_count() + p.claim->node_count();
  }

  Matrix text(static_cast<Eigen::Index>(n), d_text);
  Matrix structs(static_cast<Eigen::Index>(n), features::kNodeFeatureDim);
  EdgeIndex edges;
  std::vector<std::size_t> evid_rows, evid_seg, claim_rows, claim_seg;
  // Claim-row / evidence-row ranges per sample, in positions of the gathered blocks.
  std::vector<std::pair<std::size_t, std::size_t>> evid_range(b_count), claim_range(b_count);
  std::size_t offset = 0;
  for (std::size_t b = 0; b < b_count; ++b) {
    for (int which = 0; which < 2; ++which) {
      const auto& g = which == 0 ? *batch[b].evidence : *batch[b].claim;
      const auto rows = static_cast<Eigen::Index>(g.node_count());
      text.middleRows(static_cast<Eigen::Index>(offset), rows) = g.node_embeddings;
      structs.middleRows(static_cast<Eigen::Index>(offset), rows) = g.node_struct;
      edges.append_graph(g.graph, offset);
      auto& out_rows = which == 0 ? evid_rows : claim_rows;
      auto& out_seg = which == 0 ? evid_seg : claim_seg;
      auto& range = which == 0 ? evid_range[b] : claim_range[b];
      range.first = out_rows.size();
      for (std::size_t i = 0; i < g.node_count(); ++i) {
        out_rows.push_back(offset + i);
        out_seg.push_back(b);
      }
      range.second = out_rows.size();
      offset += g.node_count();
    }
  }

  Var h = project_nodes(t, t.constant(std::move(text)), t.constant(std::move(structs)));
  h = ad::elu(conv_forward(t, 0, h, edges, trace));
  h = conv_forward(t, 1, h, edges, trace);
  Var weighted = score_nodes(t, h).weighted;

  Var he = ad::gather_rows(weighted, evid_rows);
  Var hc = ad::gather_rows(weighted, claim_rows);

  // Cross-attention as a bipartite edge list: every evidence row of a sample
  // sends to every claim row of the same sample.
  std::vector<std::size_t> x_src, x_dst;
  for (std::size_t b = 0; b < b_count; ++b) {
    for (std::size_t i = claim_range[b].first; i < claim_range[b].second; ++i) {
      for (std::size_t j = evid_range[b].first; j < evid_range[b].second; ++j) {
        x_src.push_back(j);
        x_dst.push_back(i);
      }
    }
  }
  Var q = ad::matmul(hc, t.parameter(parameter("cross.query")));
  Var k = ad::matmul(he, t.parameter(parameter("cross.key")));
  Var v = ad::matmul(he, t.parameter(parameter("cross.value")));
  const double scale = 1.0 / std::sqrt(static_cast<double>(config_.hidden_dim));
  Var s = ad::scale(ad::edge_dot(q, k, x_src, x_dst, 1), scale);
  Var a = ad::segment_softmax(s, x_dst, claim_rows.size());
  if (trace) trace->push_back({"cross", a.value(), x_dst, claim_rows.size()});
  Var attended = ad::edge_aggregate(a, v, x_src, x_dst, claim_rows.size(), 1);

  std::vector<Var> parts{ad::mean_rows(he, evid_seg, b_count), ad::mean_rows(hc, claim_seg, b_count),
                         ad::mean_rows(attended, claim_seg, b_count)};
  if (config_.use_edge_features) {
    Matrix ef(static_cast<Eigen::Index>(b_count), 2 * features::kEdgeFeatureDim);
    for (std::size_t b = 0; b < b_count; ++b) {
      const auto r = static_cast<Eigen::Index>(b);
      ef.block(r, 0, 1, features::kEdgeFeatureDim) = pooled_edge_features(*batch[b].evidence);
      ef.block(r, features::kEdgeFeatureDim, 1, features::kEdgeFeatureDim) =
          pooled_edge_features(*batch[b].claim);
    }
    parts.push_back(t.constant(std::move(ef)));
  }
  Var f = ad::concat(parts, 1);
  return ad::sigmoid(
      linear(t, f, parameter("classifier.weight"), parameter("classifier.bias")));
}

double Model::predict(const GraphPair& pair) {
  return predict(std::span<const GraphPair>(&pair, 1)).front();
}

std::vector<double> Model::predict(std::span<const GraphPair> batch) {
  Tape t;
  Var s = forward(t, batch);
  std::vector<double> out(batch.size());
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = s.value()(static_cast<Eigen::Index>(i), 0);
  return out;
}

}  // namespace egmmg::model
