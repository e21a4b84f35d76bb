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
#include "json.hpp"

namespace egmmg::cli {

/// Everything a command may read. Filled from defaults, then the --config
/// file, then command-line flags.
struct RunConfig {
  std::string command;
  std::uint64_t seed = 0;
  std::size_t jobs = 1;
  std::string out;

  train::TrainConfig train;
  std::size_t top_k = 7;
  std::string manifest;
  std::string text_table;
  std::string image_table;
  std::string label_table;
  std::string data;
  std::string checkpoint;
  std::string claim;
  std::string evidence;
  std::size_t synthetic = 0;
  std::uint64_t synthetic_seed = 0;
  std::string split = "test";
  std::size_t max_coords = 256;
  double fd_step = 1e-3;
  std::vector<std::string> inputs;

  nlohmann::ordered_json to_json() const;
};

enum class KeyKind { Bool, Unsigned, Double, String, Heads };

struct ConfigKey {
  std::string name;
  KeyKind kind;
  std::function<void(RunConfig&, const nlohmann::json&)> apply;
};

const std::vector<ConfigKey>& config_keys();
const ConfigKey* find_key(const std::string& name);

/// Applies a flat JSON object; unknown keys or wrongly typed values throw
/// ConfigError.
void apply_config_object(RunConfig& cfg, const nlohmann::json& obj, const std::string& origin);
void apply_config_file(RunConfig& cfg, const std::string& path);

}  // namespace egmmg::cli
