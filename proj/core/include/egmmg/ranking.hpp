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
#include <span>
#include <string>
#include <vector>

#include "egmmg/conllu.hpp"

namespace egmmg::ranking {

/// dot(a,b) / (|a| |b|). Throws DataError on length mismatch or a zero-norm
/// input.
double cosine_similarity(std::span<const float> a, std::span<const float> b);

struct EvidenceCandidate {
  std::string doc_id;
  std::vector<float> embedding;
  double similarity = 0.0;
};

struct RankedEvidence {
  /// Descending similarity; ties by ascending doc_id.
  std::vector<EvidenceCandidate> ranked;

  std::vector<std::string> doc_ids() const;
};

inline constexpr std::size_t kDefaultTopK = 7;

RankedEvidence rank_evidence(std::span<const float> image_embedding,
                             std::vector<EvidenceCandidate> candidates,
                             std::size_t k = kDefaultTopK);

/// Appends sentences (and re-indexed entity spans) in the given order. The
/// result's doc_id joins the constituent ids with '+'.
ingest::ParsedDocument concatenate_evidence(std::span<const ingest::ParsedDocument> docs);

}  // namespace egmmg::ranking
