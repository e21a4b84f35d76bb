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

#include "egmmg_cli/cli.hpp"

#include <algorithm>
#include <exception>
#include <map>
#include <ostream>

#include "CLI11.hpp"
#include "commands.hpp"
#include "egmmg/error.hpp"
#include "run_config.hpp"

namespace egmmg::cli {
namespace {

struct Flag {
  const char* flag;
  const char* key;
  const char* help;
};

constexpr Flag kTrainFlags[] = {
    {"--learning-rate", "learning_rate", "Adam learning rate"},
    {"--warmup-steps", "warmup_steps", "steps of linear learning-rate warmup (0 disables)"},
    {"--batch-size", "batch_size", "samples per batch"},
    {"--epochs", "epochs", "training epochs"},
    {"--conv", "conv", "GAT, GATv2 or TRANSFORMER"},
    {"--embedding-dim", "embedding_dim", "node embedding width (384 or 768)"},
    {"--train-fraction", "train_fraction", "train share of the split"},
    {"--hidden-dim", "hidden_dim", "hidden width"},
    {"--threshold", "threshold", "decision threshold"},
};

constexpr Flag kDataFlags[] = {
    {"--data", "data", "graph or feature directory"},
    {"--synthetic", "synthetic", "use N generated samples instead of --data"},
    {"--synthetic-seed", "synthetic_seed", "generator seed for --synthetic"},
    {"--label-table", "label_table", "EGTB table of node-label embeddings"},
};

constexpr Flag kRankFlags[] = {
    {"--manifest", "manifest", "dataset manifest (JSON Lines)"},
    {"--text-table", "text_table", "EGTB evidence-document embeddings"},
    {"--image-table", "image_table", "EGTB claim-image embeddings"},
    {"--top-k", "top_k", "evidence documents kept per sample"},
};

using nlohmann::json;

json flag_value(const ConfigKey& key, const std::string& text) {
  try {
    std::size_t used = 0;
    switch (key.kind) {
      case KeyKind::Unsigned: {
        if (text.empty() || text[0] == '-') throw std::invalid_argument(text);
        const auto v = std::stoull(text, &used);
        if (used != text.size()) throw std::invalid_argument(text);
        return json(static_cast<std::uint64_t>(v));
      }
      case KeyKind::Double: {
        const auto v = std::stod(text, &used);
        if (used != text.size()) throw std::invalid_argument(text);
        return json(v);
      }
      case KeyKind::String: return json(text);
      case KeyKind::Bool: return json(text == "true" || text == "1");
      case KeyKind::Heads: break;
    }
  } catch (const std::logic_error&) {
  }
  throw ConfigError("invalid value '" + text + "' for " + key.name);
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Evidence/claim graph misinformation classifier", "egmmg"};
  app.require_subcommand(1);
  app.fallthrough();

  std::string config_path;
  std::map<std::string, std::string> raw;
  struct Bound {
    CLI::Option* opt;
    const std::string* text;
    std::string key;
  };
  std::vector<Bound> bound;
  auto value = [&](CLI::App* sub, const Flag& f) {
    auto& slot = raw[sub->get_name() + "/" + f.key];
    bound.push_back({sub->add_option(f.flag, slot, f.help), &slot, f.key});
  };

  app.add_option("--config", config_path, "flat JSON config; flags take precedence");
  value(&app, {"--seed", "seed", "random seed"});
  value(&app, {"--jobs", "jobs", "worker thread cap"});
  value(&app, {"--out", "out", "output path"});

  RunConfig cfg;
  bool edge_features = false;
  bool unweighted = false;
  std::vector<std::pair<CLI::App*, Command>> commands;
  auto command = [&](const char* name, const char* help, Command fn) {
    auto* sub = app.add_subcommand(name, help);
    commands.emplace_back(sub, fn);
    return sub;
  };
  auto train_flags = [&](CLI::App* sub) {
    for (const auto& f : kTrainFlags) value(sub, f);
    sub->add_flag("--edge-features", edge_features, "append pooled edge features");
    sub->add_flag("--unweighted", unweighted, "freeze the projector coefficients at 1");
  };

  {
    auto* sub = command("ingest", "validate CoNLL-U documents", cmd_ingest);
    sub->add_option("files", cfg.inputs, "CoNLL-U files");
    value(sub, kRankFlags[0]);
  }
  {
    auto* sub = command("rank", "rank evidence documents per sample", cmd_rank);
    for (const auto& f : kRankFlags) value(sub, f);
  }
  {
    auto* sub = command("build-graphs", "build claim and evidence graphs", cmd_build_graphs);
    for (const auto& f : kRankFlags) value(sub, f);
  }
  {
    auto* sub = command("features", "compute node and edge features", cmd_features);
    value(sub, kDataFlags[0]);
    value(sub, kDataFlags[3]);
    value(sub, {"--embedding-dim", "embedding_dim", "node embedding width (384 or 768)"});
    sub->add_flag("--edge-features", edge_features, "also compute edge features");
  }
  {
    auto* sub = command("train", "train the classifier", cmd_train);
    for (const auto& f : kDataFlags) value(sub, f);
    train_flags(sub);
  }
  {
    auto* sub = command("eval", "evaluate a checkpoint", cmd_eval);
    value(sub, {"--checkpoint", "checkpoint", "checkpoint manifest"});
    for (const auto& f : kDataFlags) value(sub, f);
    value(sub, {"--split", "split", "test, train or all"});
    value(sub, {"--train-fraction", "train_fraction", "train share of the split"});
    value(sub, {"--threshold", "threshold", "decision threshold"});
  }
  {
    auto* sub = command("predict", "score one claim/evidence graph pair", cmd_predict);
    value(sub, {"--checkpoint", "checkpoint", "checkpoint manifest"});
    value(sub, {"--claim", "claim", "claim graph JSON"});
    value(sub, {"--evidence", "evidence", "evidence graph JSON"});
    value(sub, kDataFlags[3]);
  }
  {
    auto* sub = command("ablate", "run the ablation and conv-variant sweep", cmd_ablate);
    for (const auto& f : kDataFlags) value(sub, f);
    train_flags(sub);
  }
  {
    auto* sub = command("gradcheck", "finite-difference check of the full model", cmd_gradcheck);
    value(sub, {"--conv", "conv", "GAT, GATv2 or TRANSFORMER"});
    value(sub, {"--max-coords", "max_coords", "coordinates to check"});
    value(sub, {"--fd-step", "fd_step", "finite-difference step"});
  }
  {
    auto* sub = command("params", "print the parameter count of a configuration", cmd_params);
    train_flags(sub);
  }

  std::vector<const char*> argv;
  for (const auto& a : args) argv.push_back(a.c_str());
  try {
    app.parse(static_cast<int>(argv.size()), argv.data());
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kExitOk : kExitConfig;
  }

  try {
    const auto it = std::find_if(commands.begin(), commands.end(),
                                 [](const auto& c) { return c.first->parsed(); });
    cfg.command = it->first->get_name();
    if (!config_path.empty()) apply_config_file(cfg, config_path);
    for (const auto& b : bound) {
      if (b.opt->count() == 0) continue;
      const auto* k = find_key(b.key);
      k->apply(cfg, flag_value(*k, *b.text));
    }
    if (edge_features) cfg.train.use_edge_features = true;
    if (unweighted) cfg.train.weighted_node_embeddings = false;

    err << "egmmg: config " << cfg.to_json().dump() << "\n";
    return it->second(cfg, out, err);
  } catch (const ConfigError& e) {
    err << "egmmg: config error: " << e.what() << "\n";
    return kExitConfig;
  } catch (const DataError& e) {
    err << "egmmg: data error: " << e.what() << "\n";
    return kExitData;
  } catch (const NumericError& e) {
    err << "egmmg: numeric error: " << e.what() << "\n";
    return kExitNumeric;
  } catch (const std::exception& e) {
    err << "egmmg: error: " << e.what() << "\n";
    return kExitFailure;
  }
}

}  // namespace egmmg::cli
