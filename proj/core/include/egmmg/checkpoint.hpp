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

#include <cstdint>
#include <filesystem>
#include <string>

#include "egmmg/model.hpp"

namespace egmmg::model {

struct Checkpoint {
  Model model;
  std::uint64_t seed = 0;
};

/// Writes the JSON manifest at `path` and the parameter blob next to it (same
/// stem, ".bin"). Blob layout, repeated per tensor in parameter order:
///   u32 name length | name bytes | u32 rank | rank x u32 dims | f32 data (row-major)
void save_checkpoint(const Model& model, std::uint64_t seed, const std::filesystem::path& path);
Checkpoint load_checkpoint(const std::filesystem::path& path);

std::string config_to_json(const ModelConfig& config);
ModelConfig config_from_json(const std::string& text);

/// Rounds every parameter to the nearest float, the precision checkpoints
/// store.
void round_to_float(Model& model);

}  // namespace egmmg::model
