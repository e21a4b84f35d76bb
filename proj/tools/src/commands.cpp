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

#include "commands.hpp"

#include <chrono>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <map>
#include <memory>
#include <ostream>
#include <sstream>

#include "egmmg/ablation.hpp"
#include "egmmg/checkpoint.hpp"
#include "egmmg/conllu.hpp"
#include "egmmg/embedding_table.hpp"
#include "egmmg/error.hpp"
#include "egmmg/fallback_embed.hpp"
#include "egmmg/featurize.hpp"
#include "egmmg/grad_check.hpp"
#include "egmmg/kg_builder.hpp"
#include "egmmg/manifest.hpp"
#include "egmmg/ranking.hpp"
#include "egmmg/synthetic.hpp"
#include "egmmg/trainer.hpp"
#include "egmmg_cli/cli.hpp"

namespace egmmg::cli {
namespace {

namespace fs = std::filesystem;
using nlohmann::json;
using nlohmann::ordered_json;

constexpr std::size_t kRankingDim = 768;

void require(bool ok, const std::string& msg) {
  if (!ok) throw ConfigError(msg);
}

fs::path output_dir(const RunConfig& cfg) {
  require(!cfg.out.empty(), cfg.command + " needs --out");
  std::error_code ec;
  fs::create_directories(cfg.out, ec);
  if (ec) throw DataError("cannot create " + cfg.out + ": " + ec.message());
  return fs::path(cfg.out);
}

void write_text(const fs::path& path, const std::string& text) {
  std::ofstream f(path, std::ios::binary | std::ios::trunc);
  if (!f) throw DataError("cannot write " + path.string());
  f << text;
}

std::string fixed(double v, int digits) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*f", digits, v);
  return buf;
}

std::string signed_delta(std::size_t count) {
  const auto d = static_cast<long long>(count) -
                 static_cast<long long>(model::kReferenceParameterCount);
  return (d >= 0 ? "+" : "") + std::to_string(d);
}

void check_sample_id(const std::string& id) {
  if (id.empty() || id.find('/') != std::string::npos || id.find('\\') != std::string::npos ||
      id.front() == '.') {
    throw DataError("sample id '" + id + "' cannot be used as a file name");
  }
}

// ---- ranking ---------------------------------------------------------------

struct RankingInputs {
  std::shared_ptr<const ingest::EmbeddingTable> text;
  std::shared_ptr<const ingest::EmbeddingTable> image;
};

RankingInputs ranking_inputs(const RunConfig& cfg) {
  require(cfg.text_table.empty() == cfg.image_table.empty(),
          "--text-table and --image-table must be given together");
  RankingInputs in;
  if (!cfg.text_table.empty()) {
    in.text = std::make_shared<ingest::EmbeddingTable>(ingest::load_embedding_table(cfg.text_table));
    in.image =
        std::make_shared<ingest::EmbeddingTable>(ingest::load_embedding_table(cfg.image_table));
    if (in.text->dim() != in.image->dim()) {
      throw DataError("text table dim " + std::to_string(in.text->dim()) +
                      " differs from image table dim " + std::to_string(in.image->dim()));
    }
  }
  return in;
}

class DocumentCache {
 public:
  const ingest::ParsedDocument& get(const std::string& path, const std::string& doc_id) {
    auto it = docs_.find(path);
    if (it == docs_.end()) {
      auto doc = ingest::read_conllu_file(path);
      doc.doc_id = doc_id;
      it = docs_.emplace(path, std::move(doc)).first;
    }
    return it->second;
  }

 private:
  std::map<std::string, ingest::ParsedDocument> docs_;
};

// Without tables the claim text stands in for the image.
ranking::RankedEvidence rank_record(const ingest::ManifestRecord& rec, DocumentCache& docs,
                                    const RankingInputs& tables, std::size_t top_k) {
  std::vector<ranking::EvidenceCandidate> candidates;
  std::vector<float> image;
  if (tables.text) {
    const auto key = rec.image_key.value_or(rec.id);
    const auto v = tables.image->at(key);
    image.assign(v.begin(), v.end());
  } else {
    image = ingest::fallback_embed(docs.get(rec.claim_path, rec.claim_doc).text(), kRankingDim);
  }
  for (std::size_t i = 0; i < rec.evidence_docs.size(); ++i) {
    ranking::EvidenceCandidate c;
    c.doc_id = rec.evidence_docs[i];
    if (tables.text) {
      const auto v = tables.text->at(c.doc_id);
      c.embedding.assign(v.begin(), v.end());
    } else {
      c.embedding =
          ingest::fallback_embed(docs.get(rec.evidence_paths[i], c.doc_id).text(), kRankingDim);
    }
    candidates.push_back(std::move(c));
  }
  return ranking::rank_evidence(image, std::move(candidates), top_k);
}

ordered_json ranked_json(const ranking::RankedEvidence& r) {
  ordered_json arr = ordered_json::array();
  for (const auto& c : r.ranked) arr.push_back({{"doc", c.doc_id}, {"similarity", c.similarity}});
  return arr;
}

// ---- datasets --------------------------------------------------------------

struct IndexEntry {
  std::string id;
  int label = 0;
  std::string claim;
  std::string evidence;
};

std::vector<IndexEntry> read_index(const fs::path& dir) {
  const auto path = dir / "index.jsonl";
  std::ifstream in(path);
  if (!in) throw DataError("no index.jsonl in " + dir.string());
  std::vector<IndexEntry> out;
  std::string line;
  std::size_t n = 0;
  while (std::getline(in, line)) {
    ++n;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    try {
      const auto j = json::parse(line);
      out.push_back({j.at("id").get<std::string>(), j.at("label").get<int>(),
                     j.at("claim").get<std::string>(), j.at("evidence").get<std::string>()});
    } catch (const json::exception& e) {
      throw ParseError(path.string() + ": " + e.what(), n);
    }
  }
  if (out.empty()) throw DataError(path.string() + " lists no samples");
  return out;
}

features::NodeEmbedder embedder_for(const RunConfig& cfg, std::size_t dim) {
  if (!cfg.label_table.empty()) {
    auto table =
        std::make_shared<ingest::EmbeddingTable>(ingest::load_embedding_table(cfg.label_table));
    if (table->dim() == dim) return features::NodeEmbedder::from_table(std::move(table));
  }
  return features::NodeEmbedder::fallback(dim);
}

std::vector<train::Sample> load_samples(const RunConfig& cfg, std::size_t dim, bool edges) {
  require(cfg.synthetic > 0 || !cfg.data.empty(), cfg.command + " needs --data or --synthetic");
  require(cfg.synthetic == 0 || cfg.data.empty(), "--data and --synthetic are exclusive");
  const auto embedder = embedder_for(cfg, dim);
  if (cfg.synthetic > 0) {
    const auto examples = train::make_synthetic_dataset(cfg.synthetic, cfg.synthetic_seed);
    return train::make_samples(examples, embedder, edges);
  }

  const fs::path dir(cfg.data);
  const auto index = read_index(dir);
  bool featured = false;
  if (fs::exists(dir / "features.json")) {
    std::ifstream in(dir / "features.json");
    const auto meta = json::parse(in, nullptr, false);
    featured = meta.is_object() && meta.value("embedding_dim", std::size_t{0}) == dim &&
               (!edges || meta.value("edge_features", false)) &&
               meta.value("label_table", std::string()) == cfg.label_table;
  }
  std::vector<train::Sample> out;
  for (const auto& e : index) {
    train::Sample s;
    s.id = e.id;
    s.label = e.label;
    if (featured) {
      s.claim = features::read_featured_graph((dir / e.claim).string());
      s.evidence = features::read_featured_graph((dir / e.evidence).string());
    } else {
      s.claim = features::featurize(kg::read_graph_file((dir / e.claim).string() + ".json"),
                                    embedder, edges);
      s.evidence = features::featurize(
          kg::read_graph_file((dir / e.evidence).string() + ".json"), embedder, edges);
    }
    out.push_back(std::move(s));
  }
  return out;
}

ordered_json metrics_json(const train::Metrics& m, std::size_t skipped) {
  ordered_json j;
  j["n"] = m.n;
  j["accuracy"] = m.accuracy;
  j["f1"] = m.f1;
  j["precision"] = m.precision;
  j["recall"] = m.recall;
  j["tp"] = m.tp;
  j["fp"] = m.fp;
  j["tn"] = m.tn;
  j["fn"] = m.fn;
  j["skipped"] = skipped;
  return j;
}

}  // namespace

int cmd_ingest(const RunConfig& cfg, std::ostream& out, std::ostream&) {
  std::vector<std::pair<std::string, std::string>> docs;  // path, id
  if (!cfg.manifest.empty()) {
    const auto m = ingest::load_manifest(cfg.manifest);
    for (const auto& r : m.records) {
      docs.emplace_back(r.claim_path, r.claim_doc);
      for (std::size_t i = 0; i < r.evidence_docs.size(); ++i) {
        docs.emplace_back(r.evidence_paths[i], r.evidence_docs[i]);
      }
    }
  }
  for (const auto& p : cfg.inputs) docs.emplace_back(p, p);
  require(!docs.empty(), "ingest needs CoNLL-U files or --manifest");

  std::optional<fs::path> dir;
  if (!cfg.out.empty()) dir = output_dir(cfg);
  std::size_t sentences = 0, tokens = 0, spans = 0;
  std::map<std::string, bool> seen;
  for (const auto& [path, id] : docs) {
    if (!seen.emplace(path, true).second) continue;
    const auto doc = ingest::read_conllu_file(path);
    out << id << "\tsentences=" << doc.sentences.size() << "\ttokens=" << doc.token_count()
        << "\tentities=" << doc.entity_spans.size() << "\n";
    sentences += doc.sentences.size();
    tokens += doc.token_count();
    spans += doc.entity_spans.size();
    if (dir) write_text(*dir / fs::path(path).filename(), ingest::to_conllu(doc));
  }
  out << "documents=" << seen.size() << " sentences=" << sentences << " tokens=" << tokens
      << " entities=" << spans << "\n";
  return kExitOk;
}

int cmd_rank(const RunConfig& cfg, std::ostream& out, std::ostream&) {
  require(!cfg.manifest.empty(), "rank needs --manifest");
  const auto m = ingest::load_manifest(cfg.manifest);
  const auto tables = ranking_inputs(cfg);
  DocumentCache docs;
  std::string text;
  for (const auto& r : m.records) {
    ordered_json j;
    j["id"] = r.id;
    j["ranked"] = ranked_json(rank_record(r, docs, tables, cfg.top_k));
    text += j.dump() + "\n";
  }
  if (cfg.out.empty()) {
    out << text;
  } else {
    write_text(cfg.out, text);
  }
  return kExitOk;
}

int cmd_build_graphs(const RunConfig& cfg, std::ostream& out, std::ostream& err) {
  require(!cfg.manifest.empty(), "build-graphs needs --manifest");
  const auto m = ingest::load_manifest(cfg.manifest);
  const auto tables = ranking_inputs(cfg);
  const auto dir = output_dir(cfg);
  for (const auto& r : m.records) check_sample_id(r.id);

  DocumentCache docs;
  std::string index;
  std::size_t skipped = 0, nodes = 0, edges = 0;
  for (const auto& r : m.records) {
    const auto ranked = rank_record(r, docs, tables, cfg.top_k);
    std::vector<ingest::ParsedDocument> chosen;
    for (const auto& c : ranked.ranked) {
      for (std::size_t i = 0; i < r.evidence_docs.size(); ++i) {
        if (r.evidence_docs[i] == c.doc_id) {
          chosen.push_back(docs.get(r.evidence_paths[i], c.doc_id));
          break;
        }
      }
    }
    const auto claim = kg::build_graph(docs.get(r.claim_path, r.claim_doc));
    const auto evidence = kg::build_graph(ranking::concatenate_evidence(chosen));
    kg::write_graph_file(claim, (dir / (r.id + ".claim.json")).string());
    kg::write_graph_file(evidence, (dir / (r.id + ".evidence.json")).string());
    const bool usable = !claim.empty() && !evidence.empty();
    if (!usable) {
      ++skipped;
      err << "egmmg: sample " << r.id << " has an empty "
          << (claim.empty() ? "claim" : "evidence") << " graph\n";
    }
    nodes += claim.node_count() + evidence.node_count();
    edges += claim.edge_count() + evidence.edge_count();

    ordered_json j;
    j["id"] = r.id;
    j["label"] = r.label;
    j["claim"] = r.id + ".claim";
    j["evidence"] = r.id + ".evidence";
    j["usable"] = usable;
    j["ranked"] = ranked.doc_ids();
    index += j.dump() + "\n";
  }
  write_text(dir / "index.jsonl", index);
  out << "samples=" << m.records.size() << " skipped=" << skipped << " nodes=" << nodes
      << " edges=" << edges << "\n";
  return kExitOk;
}

int cmd_features(const RunConfig& cfg, std::ostream& out, std::ostream&) {
  require(!cfg.data.empty(), "features needs --data (a build-graphs directory)");
  const fs::path src(cfg.data);
  const auto index = read_index(src);
  const auto dir = output_dir(cfg);
  const auto dim = cfg.train.embedding_dim;
  const bool edges = cfg.train.use_edge_features;
  const auto embedder = embedder_for(cfg, dim);
  require(cfg.label_table.empty() || embedder.uses_table(),
          "label table dim does not match --embedding-dim");

  std::string new_index;
  std::size_t graphs = 0;
  for (const auto& e : index) {
    check_sample_id(e.id);
    for (const auto* stem : {&e.claim, &e.evidence}) {
      auto fg = features::featurize(kg::read_graph_file((src / *stem).string() + ".json"),
                                    embedder, edges);
      features::write_featured_graph(fg, (dir / *stem).string());
      ++graphs;
    }
    ordered_json j;
    j["id"] = e.id;
    j["label"] = e.label;
    j["claim"] = e.claim;
    j["evidence"] = e.evidence;
    new_index += j.dump() + "\n";
  }
  write_text(dir / "index.jsonl", new_index);
  ordered_json meta;
  meta["embedding_dim"] = dim;
  meta["edge_features"] = edges;
  meta["label_table"] = cfg.label_table;
  write_text(dir / "features.json", meta.dump(2) + "\n");
  out << "samples=" << index.size() << " graphs=" << graphs << " dim=" << dim
      << " edge_features=" << (edges ? "true" : "false") << "\n";
  return kExitOk;
}

int cmd_train(const RunConfig& cfg, std::ostream& out, std::ostream& err) {
  const auto dir = output_dir(cfg);
  const auto samples = load_samples(cfg, cfg.train.embedding_dim, cfg.train.use_edge_features);

  std::string log;
  auto result = train::train(cfg.train, samples, [&](const train::EpochRecord& r) {
    const auto line = train::to_json_line(r);
    log += line + "\n";
    err << line << "\n";
  });
  write_text(dir / "metrics.jsonl", log);
  model::save_checkpoint(result.model, cfg.train.seed, dir / "checkpoint.json");

  ordered_json split;
  split["train"] = ordered_json::array();
  split["test"] = ordered_json::array();
  for (auto i : result.split.train) split["train"].push_back(samples[i].id);
  for (auto i : result.split.test) split["test"].push_back(samples[i].id);
  write_text(dir / "split.json", split.dump(2) + "\n");

  const auto count = result.model.count_parameters();
  out << "parameters=" << count << " reference=" << model::kReferenceParameterCount
      << " delta=" << signed_delta(count) << "\n";
  out << "samples=" << samples.size() << " skipped=" << result.skipped
      << " train=" << result.split.train.size() << " test=" << result.split.test.size() << "\n";
  out << "best_epoch=" << result.best_epoch
      << " train_accuracy=" << fixed(result.train_metrics.accuracy, 6)
      << " test_accuracy=" << fixed(result.test_metrics.accuracy, 6)
      << " test_f1=" << fixed(result.test_metrics.f1, 6) << "\n";
  return kExitOk;
}

int cmd_eval(const RunConfig& cfg, std::ostream& out, std::ostream& err) {
  require(!cfg.checkpoint.empty(), "eval needs --checkpoint");
  auto ck = model::load_checkpoint(cfg.checkpoint);
  const auto& mc = ck.model.config();
  const auto samples = load_samples(cfg, mc.text_dim, mc.use_edge_features);

  std::vector<std::size_t> indices;
  if (cfg.split == "all") {
    for (std::size_t i = 0; i < samples.size(); ++i) indices.push_back(i);
  } else {
    auto tc = cfg.train;
    tc.seed = ck.seed;
    const auto split = train::training_split(tc, samples);
    indices = cfg.split == "test" ? split.test : split.train;
  }
  err << "egmmg: evaluating " << indices.size() << " samples (" << cfg.split
      << " split, checkpoint seed " << ck.seed << ")\n";
  const auto r = train::evaluate(ck.model, samples, indices, cfg.train.threshold,
                                 cfg.train.batch_size);
  const auto text = metrics_json(r.metrics, r.skipped).dump();
  out << text << "\n";
  if (!cfg.out.empty()) write_text(cfg.out, text + "\n");
  return kExitOk;
}

int cmd_predict(const RunConfig& cfg, std::ostream& out, std::ostream&) {
  require(!cfg.checkpoint.empty() && !cfg.claim.empty() && !cfg.evidence.empty(),
          "predict needs --checkpoint, --claim and --evidence");
  auto ck = model::load_checkpoint(cfg.checkpoint);
  const auto& mc = ck.model.config();
  const auto embedder = embedder_for(cfg, mc.text_dim);
  const auto claim = features::featurize(kg::read_graph_file(cfg.claim), embedder,
                                         mc.use_edge_features);
  const auto evidence = features::featurize(kg::read_graph_file(cfg.evidence), embedder,
                                            mc.use_edge_features);
  if (claim.empty() || evidence.empty()) throw DataError("predict: empty graph");
  out << fixed(ck.model.predict({&evidence, &claim}), 6) << "\n";
  return kExitOk;
}

int cmd_ablate(const RunConfig& cfg, std::ostream& out, std::ostream& err) {
  const auto dir = output_dir(cfg);
  const auto rows = train::run_ablation(cfg.train, [&](std::size_t dim, bool edges) {
    err << "egmmg: preparing samples (dim " << dim << ", edge features "
        << (edges ? "on" : "off") << ")\n";
    return load_samples(cfg, dim, edges);
  });
  write_text(dir / "ablation.csv", train::ablation_csv(rows));
  out << train::ablation_table(rows);
  return kExitOk;
}

int cmd_gradcheck(const RunConfig& cfg, std::ostream& out, std::ostream&) {
  const auto start = std::chrono::steady_clock::now();
  auto mc = cfg.train.model_config();
  model::Model m(mc, cfg.seed);
  // The default head is zero, which would make every upstream gradient zero.
  m.randomize_head(cfg.seed + 1);

  const auto ex = train::tiny_example();
  const auto embedder = features::NodeEmbedder::fallback(mc.text_dim);
  const auto sample = train::make_sample(ex.id, ex.claim, ex.evidence, ex.label, embedder,
                                         mc.use_edge_features);
  const auto pair = sample.pair();
  const std::vector<double> label{static_cast<double>(sample.label)};
  auto loss = [&](ad::Tape& t) {
    return ad::bce_loss(m.forward(t, std::span<const model::GraphPair>(&pair, 1)), label);
  };
  auto params = m.parameters();
  ad::GradCheckOptions opts;
  opts.max_coords = cfg.max_coords;
  opts.seed = cfg.seed;
  opts.h = cfg.fd_step;
  opts.order = 4;
  const auto r = ad::grad_check(loss, params, opts);
  const double secs =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();

  char err_buf[32];
  std::snprintf(err_buf, sizeof err_buf, "%.3e", r.max_rel_error);
  out << "evidence_nodes=" << sample.evidence.node_count()
      << " claim_nodes=" << sample.claim.node_count() << " conv=" << model::to_string(mc.variant)
      << " parameters=" << m.count_parameters() << "\n";
  out << "max_rel_error=" << err_buf << " coords=" << r.coords_checked
      << " worst=" << r.worst_param << "[" << r.worst_index << "]"
      << " analytic=" << r.worst_analytic << " numeric=" << r.worst_numeric
      << " seconds=" << fixed(secs, 2) << "\n";
  const bool ok = r.max_rel_error < 1e-4;
  out << (ok ? "gradcheck passed" : "gradcheck FAILED") << "\n";
  return ok ? kExitOk : kExitNumeric;
}

int cmd_params(const RunConfig& cfg, std::ostream& out, std::ostream&) {
  cfg.train.validate();
  model::Model m(cfg.train.model_config(), cfg.seed);
  const auto count = m.count_parameters();
  out << "conv=" << model::to_string(m.config().variant) << " hidden=" << m.config().hidden_dim
      << " heads=" << m.config().heads[0] << "," << m.config().heads[1]
      << " layers=2 lr=" << cfg.train.learning_rate << " batch=" << cfg.train.batch_size << "\n";
  out << "parameters=" << count << " reference=" << model::kReferenceParameterCount
      << " delta=" << signed_delta(count) << "\n";
  for (const char* part : {"projector.", "conv1.", "conv2.", "scorer.", "cross.", "classifier."}) {
    out << "  " << part << " " << m.count_parameters(part) << "\n";
  }
  return kExitOk;
}

}  // namespace egmmg::cli
