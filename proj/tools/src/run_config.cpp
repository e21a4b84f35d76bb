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

#include "run_config.hpp"

#include <fstream>

#include "egmmg/error.hpp"

namespace egmmg::cli {
namespace {

using nlohmann::json;

std::uint64_t as_unsigned(const json& v, const std::string& key) {
  if (v.is_number_unsigned()) return v.get<std::uint64_t>();
  if (v.is_number_integer() && v.get<std::int64_t>() >= 0) return v.get<std::uint64_t>();
  throw ConfigError("config key '" + key + "' expects a non-negative integer");
}

double as_double(const json& v, const std::string& key) {
  if (!v.is_number()) throw ConfigError("config key '" + key + "' expects a number");
  return v.get<double>();
}

bool as_bool(const json& v, const std::string& key) {
  if (!v.is_boolean()) throw ConfigError("config key '" + key + "' expects true or false");
  return v.get<bool>();
}

std::string as_string(const json& v, const std::string& key) {
  if (!v.is_string()) throw ConfigError("config key '" + key + "' expects a string");
  return v.get<std::string>();
}

template <typename Fn>
ConfigKey key(std::string name, KeyKind kind, Fn fn) {
  return {std::move(name), kind, std::move(fn)};
}

std::vector<ConfigKey> make_keys() {
  std::vector<ConfigKey> k;
  k.push_back(key("seed", KeyKind::Unsigned, [](RunConfig& c, const json& v) {
    c.seed = as_unsigned(v, "seed");
    c.train.seed = c.seed;
  }));
  k.push_back(key("jobs", KeyKind::Unsigned, [](RunConfig& c, const json& v) {
    c.jobs = as_unsigned(v, "jobs");
    if (c.jobs == 0) throw ConfigError("jobs must be at least 1");
  }));
  k.push_back(key("out", KeyKind::String,
                  [](RunConfig& c, const json& v) { c.out = as_string(v, "out"); }));
  k.push_back(key("learning_rate", KeyKind::Double, [](RunConfig& c, const json& v) {
    c.train.learning_rate = as_double(v, "learning_rate");
  }));
  k.push_back(key("warmup_steps", KeyKind::Unsigned, [](RunConfig& c, const json& v) {
    c.train.warmup_steps = as_unsigned(v, "warmup_steps");
  }));
  k.push_back(key("batch_size", KeyKind::Unsigned, [](RunConfig& c, const json& v) {
    c.train.batch_size = as_unsigned(v, "batch_size");
  }));
  k.push_back(key("epochs", KeyKind::Unsigned,
                  [](RunConfig& c, const json& v) { c.train.epochs = as_unsigned(v, "epochs"); }));
  k.push_back(key("conv", KeyKind::String, [](RunConfig& c, const json& v) {
    c.train.variant = model::parse_conv_variant(as_string(v, "conv"));
  }));
  k.push_back(key("embedding_dim", KeyKind::Unsigned, [](RunConfig& c, const json& v) {
    c.train.embedding_dim = as_unsigned(v, "embedding_dim");
  }));
  k.push_back(key("use_edge_features", KeyKind::Bool, [](RunConfig& c, const json& v) {
    c.train.use_edge_features = as_bool(v, "use_edge_features");
  }));
  k.push_back(key("weighted_node_embeddings", KeyKind::Bool, [](RunConfig& c, const json& v) {
    c.train.weighted_node_embeddings = as_bool(v, "weighted_node_embeddings");
  }));
  k.push_back(key("train_fraction", KeyKind::Double, [](RunConfig& c, const json& v) {
    c.train.train_fraction = as_double(v, "train_fraction");
  }));
  k.push_back(key("hidden_dim", KeyKind::Unsigned, [](RunConfig& c, const json& v) {
    c.train.hidden_dim = as_unsigned(v, "hidden_dim");
  }));
  k.push_back(key("heads", KeyKind::Heads, [](RunConfig& c, const json& v) {
    if (!v.is_array() || v.size() != 2) throw ConfigError("config key 'heads' expects [h1, h2]");
    c.train.heads = {as_unsigned(v[0], "heads"), as_unsigned(v[1], "heads")};
  }));
  k.push_back(key("threshold", KeyKind::Double, [](RunConfig& c, const json& v) {
    c.train.threshold = as_double(v, "threshold");
  }));
  k.push_back(key("top_k", KeyKind::Unsigned, [](RunConfig& c, const json& v) {
    c.top_k = as_unsigned(v, "top_k");
    if (c.top_k == 0) throw ConfigError("top_k must be at least 1");
  }));
  auto str = [&](const char* name, std::string RunConfig::*member) {
    k.push_back(key(name, KeyKind::String, [name, member](RunConfig& c, const json& v) {
      c.*member = as_string(v, name);
    }));
  };
  str("manifest", &RunConfig::manifest);
  str("text_table", &RunConfig::text_table);
  str("image_table", &RunConfig::image_table);
  str("label_table", &RunConfig::label_table);
  str("data", &RunConfig::data);
  str("checkpoint", &RunConfig::checkpoint);
  str("claim", &RunConfig::claim);
  str("evidence", &RunConfig::evidence);
  k.push_back(key("synthetic", KeyKind::Unsigned, [](RunConfig& c, const json& v) {
    c.synthetic = as_unsigned(v, "synthetic");
  }));
  k.push_back(key("synthetic_seed", KeyKind::Unsigned, [](RunConfig& c, const json& v) {
    c.synthetic_seed = as_unsigned(v, "synthetic_seed");
  }));
  k.push_back(key("split", KeyKind::String, [](RunConfig& c, const json& v) {
    c.split = as_string(v, "split");
    if (c.split != "test" && c.split != "train" && c.split != "all") {
      throw ConfigError("split must be test, train or all");
    }
  }));
  k.push_back(key("max_coords", KeyKind::Unsigned, [](RunConfig& c, const json& v) {
    c.max_coords = as_unsigned(v, "max_coords");
  }));
  k.push_back(key("fd_step", KeyKind::Double, [](RunConfig& c, const json& v) {
    c.fd_step = as_double(v, "fd_step");
    if (!(c.fd_step > 0.0)) throw ConfigError("fd_step must be positive");
  }));
  return k;
}

}  // namespace

const std::vector<ConfigKey>& config_keys() {
  static const std::vector<ConfigKey> keys = make_keys();
  return keys;
}

const ConfigKey* find_key(const std::string& name) {
  for (const auto& k : config_keys()) {
    if (k.name == name) return &k;
  }
  return nullptr;
}

void apply_config_object(RunConfig& cfg, const json& obj, const std::string& origin) {
  if (!obj.is_object()) throw ConfigError(origin + ": config must be a JSON object");
  for (const auto& [name, value] : obj.items()) {
    const auto* k = find_key(name);
    if (!k) throw ConfigError(origin + ": unknown config key '" + name + "'");
    k->apply(cfg, value);
  }
}

void apply_config_file(RunConfig& cfg, const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file " + path);
  json obj;
  try {
    obj = json::parse(in);
  } catch (const json::parse_error& e) {
    throw ConfigError(path + ": " + e.what());
  }
  apply_config_object(cfg, obj, path);
}

nlohmann::ordered_json RunConfig::to_json() const {
  nlohmann::ordered_json j;
  j["command"] = command;
  j["seed"] = seed;
  j["jobs"] = jobs;
  j["out"] = out;
  j["learning_rate"] = train.learning_rate;
  j["warmup_steps"] = train.warmup_steps;
  j["batch_size"] = train.batch_size;
  j["epochs"] = train.epochs;
  j["conv"] = std::string(model::to_string(train.variant));
  j["embedding_dim"] = train.embedding_dim;
  j["use_edge_features"] = train.use_edge_features;
  j["weighted_node_embeddings"] = train.weighted_node_embeddings;
  j["train_fraction"] = train.train_fraction;
  j["hidden_dim"] = train.hidden_dim;
  j["heads"] = {train.heads[0], train.heads[1]};
  j["threshold"] = train.threshold;
  j["adam"] = {{"beta1", train.adam_beta1}, {"beta2", train.adam_beta2}, {"eps", train.adam_eps}};
  j["top_k"] = top_k;
  j["manifest"] = manifest;
  j["text_table"] = text_table;
  j["image_table"] = image_table;
  j["label_table"] = label_table;
  j["data"] = data;
  j["checkpoint"] = checkpoint;
  j["claim"] = claim;
  j["evidence"] = evidence;
  j["synthetic"] = synthetic;
  j["synthetic_seed"] = synthetic_seed;
  j["split"] = split;
  j["max_coords"] = max_coords;
  j["fd_step"] = fd_step;
  if (!inputs.empty()) j["inputs"] = inputs;
  return j;
}

}  // namespace egmmg::cli
