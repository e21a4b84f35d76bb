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

#include "egmmg/checkpoint.hpp"

#include <cstring>
#include <fstream>
#include <iterator>
#include <map>
#include <vector>

#include "egmmg/error.hpp"
#include "json.hpp"

namespace egmmg::model {
namespace {

using nlohmann::ordered_json;

ordered_json config_json(const ModelConfig& c) {
  ordered_json j;
  j["text_dim"] = c.text_dim;
  j["hidden_dim"] = c.hidden_dim;
  j["heads"] = {c.heads[0], c.heads[1]};
  j["conv"] = std::string(to_string(c.variant));
  j["use_edge_features"] = c.use_edge_features;
  j["weighted_node_embeddings"] = c.weighted_node_embeddings;
  return j;
}

ModelConfig config_of(const ordered_json& j) {
  try {
    ModelConfig c;
    c.text_dim = j.at("text_dim").get<std::size_t>();
    c.hidden_dim = j.at("hidden_dim").get<std::size_t>();
    const auto& h = j.at("heads");
    if (!h.is_array() || h.size() != 2) throw DataError("checkpoint: heads must have two entries");
    c.heads = {h[0].get<std::size_t>(), h[1].get<std::size_t>()};
    c.variant = parse_conv_variant(j.at("conv").get<std::string>());
    c.use_edge_features = j.at("use_edge_features").get<bool>();
    c.weighted_node_embeddings = j.at("weighted_node_embeddings").get<bool>();
    c.validate();
    return c;
  } catch (const nlohmann::json::exception& e) {
    throw DataError(std::string("checkpoint config: ") + e.what());
  }
}

template <typename T>
void put(std::ofstream& out, T v) {
  out.write(reinterpret_cast<const char*>(&v), sizeof(T));
}

std::filesystem::path blob_path(const std::filesystem::path& manifest) {
  auto p = manifest;
  p.replace_extension(".bin");
  return p;
}

}  // namespace

std::string config_to_json(const ModelConfig& config) { return config_json(config).dump(); }

ModelConfig config_from_json(const std::string& text) {
  try {
    return config_of(ordered_json::parse(text));
  } catch (const nlohmann::json::parse_error& e) {
    throw DataError(std::string("checkpoint config: ") + e.what());
  }
}

void round_to_float(Model& model) {
  for (auto* p : model.parameters()) {
    for (Eigen::Index i = 0; i < p->value.size(); ++i) {
      p->value.data()[i] = static_cast<double>(static_cast<float>(p->value.data()[i]));
    }
  }
}

void save_checkpoint(const Model& model, std::uint64_t seed, const std::filesystem::path& path) {
  const auto blob = blob_path(path);
  if (blob == path) throw ConfigError("checkpoint path must not end in .bin");
  const auto count = model.count_parameters();

  ordered_json j;
  j["format"] = "egmmg-checkpoint";
  j["version"] = 1;
  j["config"] = config_json(model.config());
  j["parameter_count"] = count;
  j["reference_parameter_count"] = kReferenceParameterCount;
  j["parameter_count_delta"] =
      static_cast<long long>(count) - static_cast<long long>(kReferenceParameterCount);
  j["seed"] = seed;
  j["blob"] = blob.filename().string();
  ordered_json tensors = ordered_json::array();
  for (const auto* p : model.parameters()) {
    tensors.push_back({{"name", p->name},
                       {"shape", {p->value.rows(), p->value.cols()}},
                       {"trainable", p->trainable}});
  }
  j["tensors"] = std::move(tensors);

  std::ofstream m(path, std::ios::trunc);
  if (!m) throw DataError("cannot write " + path.string());
  m << j.dump(2) << "\n";

  std::ofstream out(blob, std::ios::binary | std::ios::trunc);
  if (!out) throw DataError("cannot write " + blob.string());
  for (const auto* p : model.parameters()) {
    put<std::uint32_t>(out, static_cast<std::uint32_t>(p->name.size()));
    out.write(p->name.data(), static_cast<std::streamsize>(p->name.size()));
    put<std::uint32_t>(out, 2);
    put<std::uint32_t>(out, static_cast<std::uint32_t>(p->value.rows()));
    put<std::uint32_t>(out, static_cast<std::uint32_t>(p->value.cols()));
    for (Eigen::Index i = 0; i < p->value.size(); ++i) {
      put<float>(out, static_cast<float>(p->value.data()[i]));
    }
  }
  if (!out) throw DataError("failed writing " + blob.string());
}

Checkpoint load_checkpoint(const std::filesystem::path& path) {
  std::ifstream m(path);
  if (!m) throw DataError("cannot open checkpoint " + path.string());
  ordered_json j;
  try {
    j = ordered_json::parse(m);
  } catch (const nlohmann::json::parse_error& e) {
    throw DataError(path.string() + ": " + e.what());
  }
  if (j.value("format", "") != "egmmg-checkpoint" || j.value("version", 0) != 1) {
    throw DataError(path.string() + ": not an egmmg checkpoint manifest");
  }
  const auto config = config_of(j.at("config"));
  const auto seed = j.at("seed").get<std::uint64_t>();
  const auto blob = path.parent_path() / j.at("blob").get<std::string>();

  std::ifstream in(blob, std::ios::binary);
  if (!in) throw DataError("cannot open checkpoint blob " + blob.string());
  std::vector<char> raw((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  std::size_t pos = 0;
  auto get = [&](void* dst, std::size_t bytes) {
    if (raw.size() - pos < bytes) throw DataError(blob.string() + ": truncated");
    std::memcpy(dst, raw.data() + pos, bytes);
    pos += bytes;
  };

  Checkpoint ck{Model(config, seed), seed};
  std::map<std::string, bool> loaded;
  while (pos < raw.size()) {
    std::uint32_t len = 0, rank = 0;
    get(&len, 4);
    std::string name(len, '\0');
    get(name.data(), len);
    get(&rank, 4);
    if (rank != 2) throw DataError(blob.string() + ": tensor " + name + " has rank " +
                                   std::to_string(rank));
    std::uint32_t rows = 0, cols = 0;
    get(&rows, 4);
    get(&cols, 4);
    ad::Parameter* found = nullptr;
    for (auto* q : ck.model.parameters()) {
      if (q->name == name) found = q;
    }
    if (!found) throw DataError(blob.string() + ": unknown tensor " + name);
    auto& p = *found;
    if (p.value.rows() != rows || p.value.cols() != cols) {
      throw DataError(blob.string() + ": tensor " + name + " shape does not match config");
    }
    if (!loaded.emplace(name, true).second) {
      throw DataError(blob.string() + ": duplicate tensor " + name);
    }
    for (Eigen::Index i = 0; i < p.value.size(); ++i) {
      float v;
      get(&v, sizeof v);
      p.value.data()[i] = v;
    }
  }
  if (loaded.size() != ck.model.parameters().size()) {
    throw DataError(blob.string() + ": missing tensors");
  }
  return ck;
}

}  // namespace egmmg::model
