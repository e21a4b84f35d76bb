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
#include <string_view>
#include <vector>

namespace egmmg::ingest {

/// Deterministic text embedding used when no encoder-produced table is
/// available. Character trigrams of the lowercased text (padded with '^' and
/// '$' boundary marks) are hashed with FNV-1a into `dim` signed buckets and the
/// result is L2-normalized. A text with no trigram mass maps to e0.
///
/// `dim` must be 384 or 768.
std::vector<float> fallback_embed(std::string_view text, std::size_t dim);

}  // namespace egmmg::ingest
