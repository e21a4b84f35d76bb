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

// Acceptance gate: one PASS/FAIL line per criterion, exit 1 if any fails.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <functional>
#include <sstream>
#include <string>
#include <vector>

#include "egmmg/ablation.hpp"
#include "egmmg/conllu.hpp"
#include "egmmg/graph_features.hpp"
#include "egmmg/kg_builder.hpp"
#include "egmmg/model.hpp"
#include "egmmg/synthetic.hpp"
#include "egmmg/trainer.hpp"
#include "egmmg_cli/cli.hpp"
#include "op_cases.hpp"
#include "test_support.hpp"

namespace {

using namespace egmmg;
namespace fs = std::filesystem;
using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

struct Outcome {
  bool pass;
  std::string detail;
};

std::string fmt(const char* f, double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, f, v);
  return buf;
}

struct CliRun {
  int code;
  std::string out;
};

CliRun cli(std::vector<std::string> args) {
  args.insert(args.begin(), "egmmg");
  std::ostringstream out, err;
  const int code = cli::run(args, out, err);
  return {code, out.str()};
}

std::vector<train::Sample> synthetic_samples(std::size_t n, std::size_t dim, bool edges) {
  return train::make_samples(train::make_synthetic_dataset(n, 0),
                             features::NodeEmbedder::fallback(dim), edges);
}

Outcome gradient_integrity() {
  const auto t0 = Clock::now();
  const auto r = cli({"gradcheck"});
  const double secs = seconds_since(t0);
  const auto at = r.out.find("max_rel_error=");
  if (at == std::string::npos) return {false, "no gradcheck report (exit " + std::to_string(r.code) + ")"};
  const double err = std::stod(r.out.substr(at + 14));
  return {r.code == 0 && err < 1e-4 && secs < 60.0,
          "max_rel_error=" + fmt("%.3e", err) + " (< 1e-4) seconds=" + fmt("%.1f", secs) +
              " (< 60)"};
}

Outcome autodiff_suite() {
  double worst = 0.0;
  std::string worst_op;
  std::size_t n = 0;
  for (const auto& c : testing::op_cases()) {
    const double e = testing::op_case_error(c, 25, 1000 + n++);
    if (e > worst) {
      worst = e;
      worst_op = c.name;
    }
  }
  return {worst < 1e-6, "ops=" + std::to_string(n) + " reps=25 max_rel_error=" +
                            fmt("%.3e", worst) + " (" + worst_op + ", < 1e-6)"};
}

Outcome pagerank_properties() {
  Rng rng(2024);
  double sum_dev = 0.0, oracle_dev = 0.0;
  bool reverse_exact = true;
  for (int i = 0; i < 50; ++i) {
    const auto g = testing::random_digraph(rng, 30, rng.uniform(0.02, 0.3));
    const auto pr = features::pagerank(g);
    double s = 0.0;
    for (double v : pr) s += v;
    sum_dev = std::max(sum_dev, std::abs(s - 1.0));
    const auto ref = testing::oracle_pagerank(g.node_count, g.edges);
    for (std::size_t k = 0; k < pr.size(); ++k) oracle_dev = std::max(oracle_dev, std::abs(pr[k] - ref[k]));
    reverse_exact = reverse_exact && features::reverse_pagerank(g) == features::pagerank(g.reversed());
  }
  return {sum_dev <= 1e-9 && oracle_dev <= 1e-8 && reverse_exact,
          "graphs=50 sum_dev=" + fmt("%.2e", sum_dev) + " oracle_dev=" + fmt("%.2e", oracle_dev) +
              " reverse_exact=" + (reverse_exact ? "yes" : "no")};
}

Outcome graph_fixtures() {
  std::vector<fs::path> docs;
  for (const auto& e : fs::directory_iterator(testing::fixture_path("graphs"))) {
    if (e.path().extension() == ".conllu") docs.push_back(e.path());
  }
  std::sort(docs.begin(), docs.end());
  std::size_t matched = 0, stable = 0;
  for (const auto& p : docs) {
    auto expected = p;
    expected.replace_extension(".expected.json");
    const auto doc = ingest::read_conllu_file(p.string());
    const auto first = kg::to_json(kg::build_graph(doc));
    if (first == testing::slurp(expected)) ++matched;
    if (first == kg::to_json(kg::build_graph(ingest::read_conllu_file(p.string())))) ++stable;
  }
  const auto n = docs.size();
  return {n >= 12 && matched == n && stable == n,
          "fixtures=" + std::to_string(n) + " matched=" + std::to_string(matched) +
              " rerun_identical=" + std::to_string(stable)};
}

Outcome attention_normalization() {
  Rng rng(77);
  double row_dev = 0.0, perm_dev = 0.0;
  std::size_t records = 0;
  for (auto v : testing::kAllVariants) {
    model::ModelConfig mc;
    mc.variant = v;
    model::Model m(mc, 11);
    m.randomize_head(12);
    for (int i = 0; i < 20; ++i) {
      const auto ev = testing::random_featured_graph(rng, 1 + rng.index(12), mc.text_dim, 0.25);
      const auto cl = testing::random_featured_graph(rng, 1 + rng.index(8), mc.text_dim, 0.25);
      const model::GraphPair pair{&ev, &cl};
      std::vector<model::AttentionRecord> trace;
      ad::Tape t;
      const double score = m.forward(t, std::span<const model::GraphPair>(&pair, 1), &trace).value()(0, 0);
      for (const auto& r : trace) {
        Matrix sums = Matrix::Zero(static_cast<Eigen::Index>(r.segment_count), r.weights.cols());
        for (std::size_t e = 0; e < r.segment.size(); ++e) {
          sums.row(static_cast<Eigen::Index>(r.segment[e])) += r.weights.row(static_cast<Eigen::Index>(e));
        }
        row_dev = std::max(row_dev, (sums.array() - 1.0).abs().maxCoeff());
        ++records;
      }
      const auto pev = testing::permute_graph(ev, testing::random_permutation(rng, ev.node_count()));
      const auto pcl = testing::permute_graph(cl, testing::random_permutation(rng, cl.node_count()));
      perm_dev = std::max(perm_dev, std::abs(score - m.predict(model::GraphPair{&pev, &pcl})));
    }
  }
  return {records == 180 && row_dev <= 1e-6 && perm_dev < 1e-6,
          "samples=20 variants=3 softmax_records=" + std::to_string(records) +
              " row_sum_dev=" + fmt("%.2e", row_dev) + " permutation_dev=" + fmt("%.2e", perm_dev)};
}

Outcome training_smoke() {
  const auto t0 = Clock::now();
  train::TrainConfig c;
  c.epochs = 50;
  const auto samples = synthetic_samples(200, c.embedding_dim, false);
  const auto r = train::train(c, samples);
  const double secs = seconds_since(t0);
  return {r.train_metrics.accuracy >= 0.95 && r.test_metrics.accuracy >= 0.90 && secs < 600.0,
          "best_epoch=" + std::to_string(r.best_epoch) + " train_accuracy=" +
              fmt("%.4f", r.train_metrics.accuracy) + " (>= 0.95) test_accuracy=" +
              fmt("%.4f", r.test_metrics.accuracy) + " (>= 0.90) seconds=" + fmt("%.0f", secs) +
              " (< 600)"};
}

Outcome ablation_harness() {
  // Narrower than default so all seven rows train past chance in about a minute.
  train::TrainConfig base;
  base.hidden_dim = 64;
  base.epochs = 20;
  const auto rows = train::run_ablation(base, [](std::size_t dim, bool edges) {
    return synthetic_samples(200, dim, edges);
  });
  const char* names[] = {"Full Model", "+ edge features", "unweighted node embeddings",
                         "384-dim node embeddings", "GAT", "GATv2", "TRANSFORMER"};
  bool named = rows.size() == 7;
  for (std::size_t i = 0; named && i < 7; ++i) named = rows[i].name == names[i];
  const auto standalone = train::train(base, synthetic_samples(200, base.embedding_dim, false));
  const bool same = named && rows[0].accuracy == standalone.test_metrics.accuracy &&
                    rows[0].f1 == standalone.test_metrics.f1;
  return {named && same, "rows=" + std::to_string(rows.size()) + " hidden=64 epochs=20 full_model_accuracy=" +
                             fmt("%.6f", rows.empty() ? 0.0 : rows[0].accuracy) +
                             " standalone_accuracy=" + fmt("%.6f", standalone.test_metrics.accuracy) +
                             (same ? " identical" : " differ")};
}

Outcome hyperparameters() {
  const train::TrainConfig c;
  const model::Model m(c.model_config(), 0);
  const auto& mc = m.config();
  const auto count = m.count_parameters();
  const bool shape = mc.hidden_dim == 1024 && mc.heads[0] == 4 && mc.heads[1] == 2 &&
                     c.learning_rate == 3e-4 && c.batch_size == 64;
  const auto r = cli({"params"});
  const bool reported =
      r.code == 0 && r.out.find("parameters=" + std::to_string(count) + " reference=10724391 delta=") !=
                         std::string::npos;
  const long long delta = static_cast<long long>(count) - 10'724'391LL;
  return {shape && reported, "layers=2 hidden=1024 heads=4,2 lr=3e-4 batch=64 parameters=" +
                                 std::to_string(count) + " delta=" + (delta >= 0 ? "+" : "") +
                                 std::to_string(delta)};
}

Outcome determinism() {
  testing::TempDir dir("egmmg_accept");
  for (const char* run : {"a", "b"}) {
    if (cli({"train", "--synthetic", "200", "--epochs", "2", "--out", dir.str(run)}).code != 0) {
      return {false, "train failed"};
    }
  }
  std::size_t same = 0;
  const char* files[] = {"metrics.jsonl", "checkpoint.json", "checkpoint.bin", "split.json"};
  for (const char* f : files) {
    const auto a = testing::slurp(dir.path() / "a" / f);
    if (!a.empty() && a == testing::slurp(dir.path() / "b" / f)) ++same;
  }
  return {same == 4, "epochs=2 identical_files=" + std::to_string(same) + "/4"};
}

}  // namespace

int main() {
  const std::vector<std::pair<const char*, std::function<Outcome()>>> criteria = {
      {"gradient_integrity", gradient_integrity},
      {"autodiff_suite", autodiff_suite},
      {"pagerank_properties", pagerank_properties},
      {"graph_fixtures", graph_fixtures},
      {"attention_normalization", attention_normalization},
      {"training_smoke", training_smoke},
      {"ablation_harness", ablation_harness},
      {"hyperparameters", hyperparameters},
      {"determinism", determinism},
  };
  int failed = 0;
  for (const auto& [name, check] : criteria) {
    Outcome o;
    try {
      o = check();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    if (!o.pass) ++failed;
    std::printf("%s %s: %s\n", o.pass ? "PASS" : "FAIL", name, o.detail.c_str());
    std::fflush(stdout);
  }
  return failed == 0 ? 0 : 1;
}
