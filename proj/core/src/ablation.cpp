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

#include "egmmg/ablation.hpp"

#include <algorithm>
#include <cstdio>
#include <map>
#include <utility>

namespace egmmg::train {

std::vector<AblationRow> run_ablation(const TrainConfig& base, const DatasetProvider& data) {
  std::vector<std::pair<std::string, TrainConfig>> plan;
  plan.emplace_back("Full Model", base);
  {
    auto c = base;
    c.use_edge_features = true;
    plan.emplace_back("+ edge features", c);
  }
  {
    auto c = base;
    c.weighted_node_embeddings = false;
    plan.emplace_back("unweighted node embeddings", c);
  }
  {
    auto c = base;
    c.embedding_dim = 384;
    plan.emplace_back("384-dim node embeddings", c);
  }
  for (auto v : {model::ConvVariant::Gat, model::ConvVariant::GatV2,
                 model::ConvVariant::Transformer}) {
    auto c = base;
    c.variant = v;
    plan.emplace_back(std::string(model::to_string(v)), c);
  }

  std::map<std::pair<std::size_t, bool>, std::vector<Sample>> datasets;
  std::vector<AblationRow> rows;
  for (auto& [name, config] : plan) {
    const auto key = std::make_pair(config.embedding_dim, config.use_edge_features);
    auto it = datasets.find(key);
    if (it == datasets.end()) it = datasets.emplace(key, data(key.first, key.second)).first;
    auto result = train(config, it->second);
    AblationRow row;
    row.name = name;
    row.config = config;
    row.accuracy = result.test_metrics.accuracy;
    row.f1 = result.test_metrics.f1;
    row.params = result.model.count_parameters();
    rows.push_back(std::move(row));
  }
  return rows;
}

namespace {

std::string fixed(double v, int digits) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.*f", digits, v);
  return buf;
}

}  // namespace

std::string ablation_csv(const std::vector<AblationRow>& rows) {
  std::string out = "config,accuracy,f1,params,seed\n";
  for (const auto& r : rows) {
    out += "\"" + r.name + "\"," + fixed(r.accuracy, 6) + "," + fixed(r.f1, 6) + "," +
           std::to_string(r.params) + "," + std::to_string(r.config.seed) + "\n";
  }
  return out;
}

std::string ablation_table(const std::vector<AblationRow>& rows) {
  std::size_t width = 6;
  for (const auto& r : rows) width = std::max(width, r.name.size());
  auto pad = [&](std::string s) {
    s.resize(width, ' ');
    return s;
  };
  std::string out = pad("config") + "  accuracy      f1      params\n";
  for (const auto& r : rows) {
    char buf[96];
    std::snprintf(buf, sizeof buf, "  %8.4f  %6.4f  %10zu\n", r.accuracy, r.f1, r.params);
    out += pad(r.name) + buf;
  }
  return out;
}

}  // namespace egmmg::train
