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

#include "egmmg/ranking.hpp"

#include <algorithm>
#include <cmath>

#include "egmmg/error.hpp"

namespace egmmg::ranking {

double cosine_similarity(std::span<const float> a, std::span<const float> b) {
  if (a.size() != b.size()) {
    throw DataError("cosine_similarity: length mismatch " + std::to_string(a.size()) + " vs " +
                    std::to_string(b.size()));
  }
  double dot = 0.0, na = 0.0, nb = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    dot += double{a[i]} * b[i];
    na += double{a[i]} * a[i];
    nb += double{b[i]} * b[i];
  }
  if (na == 0.0 || nb == 0.0) throw DataError("cosine_similarity: zero-norm vector");
  return std::clamp(dot / (std::sqrt(na) * std::sqrt(nb)), -1.0, 1.0);
}

std::vector<std::string> RankedEvidence::doc_ids() const {
  std::vector<std::string> ids;
  ids.reserve(ranked.size());
  for (const auto& c : ranked) ids.push_back(c.doc_id);
  return ids;
}

RankedEvidence rank_evidence(std::span<const float> image_embedding,
                             std::vector<EvidenceCandidate> candidates, std::size_t k) {
  if (candidates.empty()) throw DataError("rank_evidence: no candidates");
  if (k == 0) throw ConfigError("rank_evidence: k must be >= 1");
  for (auto& c : candidates) {
    if (c.embedding.size() != image_embedding.size()) {
      throw DataError("rank_evidence: candidate '" + c.doc_id + "' has dim " +
                      std::to_string(c.embedding.size()) + ", image embedding has dim " +
                      std::to_string(image_embedding.size()));
    }
    c.similarity = cosine_similarity(image_embedding, c.embedding);
  }
  std::stable_sort(candidates.begin(), candidates.end(), [](const auto& x, const auto& y) {
    if (x.similarity != y.similarity) return x.similarity > y.similarity;
    return x.doc_id < y.doc_id;
  });
  candidates.resize(std::min(k, candidates.size()));
  return RankedEvidence{std::move(candidates)};
}

ingest::ParsedDocument concatenate_evidence(std::span<const ingest::ParsedDocument> docs) {
  ingest::ParsedDocument out;
  for (const auto& d : docs) {
    if (!out.doc_id.empty()) out.doc_id += '+';
    out.doc_id += d.doc_id;
    const std::size_t offset = out.sentences.size();
    out.sentences.insert(out.sentences.end(), d.sentences.begin(), d.sentences.end());
    for (auto span : d.entity_spans) {
      span.sentence += offset;
      out.entity_spans.push_back(std::move(span));
    }
  }
  return out;
}

}  // namespace egmmg::ranking
