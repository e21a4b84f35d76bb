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

#include <cstddef>
#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "egmmg/trainer.hpp"

namespace egmmg::train {

struct AblationRow {
  std::string name;
  TrainConfig config;
  double accuracy = 0.0;
  double f1 = 0.0;
  std::size_t params = 0;
};

/// Builds the samples a configuration trains on; called once per distinct
/// (embedding dim, edge-feature flag) pair.
using DatasetProvider =
    std::function<std::vector<Sample>(std::size_t embedding_dim, bool with_edge_features)>;

/// Trains and evaluates "Full Model", "+ edge features", "unweighted node
/// embeddings", "384-dim node embeddings", then the base configuration with
/// each conv variant (rows "GAT", "GATv2", "TRANSFORMER"). Accuracy and F1
/// are those train() reports on the held-out split.
std::vector<AblationRow> run_ablation(const TrainConfig& base, const DatasetProvider& data);

/// `config,accuracy,f1,params,seed` with a header line.
std::string ablation_csv(const std::vector<AblationRow>& rows);
/// Aligned plain-text table.
std::string ablation_table(const std::vector<AblationRow>& rows);

}  // namespace egmmg::train
