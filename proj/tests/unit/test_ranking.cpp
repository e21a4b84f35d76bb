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

#include <gtest/gtest.h>

#include <cmath>
#include <algorithm>
#include <numeric>

#include "egmmg/conllu.hpp"
#include "egmmg/error.hpp"
#include "egmmg/ranking.hpp"
#include "egmmg/rng.hpp"

namespace egmmg::ranking {
namespace {

std::vector<float> v2(float x, float y) { return {x, y}; }

TEST(Cosine, IdenticalOrthogonalAntipodal) {
  const std::vector<float> e{1, 0, 0};
  EXPECT_DOUBLE_EQ(cosine_similarity(e, e), 1.0);
  EXPECT_DOUBLE_EQ(cosine_similarity(v2(1, 0), v2(0, 1)), 0.0);
  EXPECT_DOUBLE_EQ(cosine_similarity(v2(1, 0), v2(-1, 0)), -1.0);
}

TEST(Cosine, SymmetricAndErrors) {
  EXPECT_DOUBLE_EQ(cosine_similarity(v2(1, 2), v2(3, -1)), cosine_similarity(v2(3, -1), v2(1, 2)));
  EXPECT_THROW(cosine_similarity(v2(0, 0), v2(1, 0)), DataError);
  const std::vector<float> three{1, 2, 3};
  EXPECT_THROW(cosine_similarity(v2(1, 0), three), DataError);
}

// Image (1, 0). Candidate vectors chosen so the cosines are 0.9, 0.1 and 0.5:
// (0.9, sqrt(1 - 0.81)), (0.1, sqrt(0.99)), (0.5, sqrt(0.75)).
TEST(Rank, TopTwoByHandComputedCosines) {
  std::vector<EvidenceCandidate> c{
      {"first", v2(0.9f, std::sqrt(0.19f)), 0},
      {"second", v2(0.1f, std::sqrt(0.99f)), 0},
      {"third", v2(0.5f, std::sqrt(0.75f)), 0}};
  const auto r = rank_evidence(v2(1, 0), c, 2);
  EXPECT_EQ(r.doc_ids(), (std::vector<std::string>{"first", "third"}));
  EXPECT_NEAR(r.ranked[0].similarity, 0.9, 1e-6);
  EXPECT_NEAR(r.ranked[1].similarity, 0.5, 1e-6);
}

TEST(Rank, KLargerThanPoolReturnsAllInOrder) {
  std::vector<EvidenceCandidate> c{{"a", v2(0, 1), 0}, {"b", v2(1, 1), 0},
                                   {"c", v2(1, 0), 0}, {"d", v2(-1, 0), 0}};
  const auto r = rank_evidence(v2(1, 0), c, 7);
  EXPECT_EQ(r.doc_ids(), (std::vector<std::string>{"c", "b", "a", "d"}));
}

TEST(Rank, TiesBrokenByDocId) {
  std::vector<EvidenceCandidate> c{{"zeta", v2(1, 1), 0}, {"alpha", v2(1, 1), 0}};
  EXPECT_EQ(rank_evidence(v2(1, 0), c, 2).doc_ids(),
            (std::vector<std::string>{"alpha", "zeta"}));
}

TEST(Rank, ErrorsOnDimMismatchEmptyPoolAndZeroK) {
  std::vector<EvidenceCandidate> bad{{"a", {1, 0, 0}, 0}};
  EXPECT_THROW(rank_evidence(v2(1, 0), bad, 1), DataError);
  EXPECT_THROW(rank_evidence(v2(1, 0), {}, 1), DataError);
  std::vector<EvidenceCandidate> ok{{"a", v2(1, 0), 0}};
  EXPECT_THROW(rank_evidence(v2(1, 0), ok, 0), ConfigError);
}

TEST(Rank, PropertiesOnRandomPools) {
  Rng rng(11);
  for (int rep = 0; rep < 50; ++rep) {
    const std::size_t n = 1 + rng.index(12);
    std::vector<EvidenceCandidate> c;
    for (std::size_t i = 0; i < n; ++i) {
      std::vector<float> e(4);
      for (auto& x : e) x = static_cast<float>(rng.uniform(-1, 1));
      c.push_back({"d" + std::to_string(rng.index(100)) + "_" + std::to_string(i), e, 0});
    }
    std::vector<float> img(4);
    for (auto& x : img) x = static_cast<float>(rng.uniform(-1, 1));
    const auto full = rank_evidence(img, c, n);
    ASSERT_EQ(full.ranked.size(), n);
    for (std::size_t i = 1; i < n; ++i) {
      EXPECT_GE(full.ranked[i - 1].similarity, full.ranked[i].similarity);
    }
    auto ids = full.doc_ids();
    std::vector<std::string> in_ids;
    for (const auto& x : c) in_ids.push_back(x.doc_id);
    std::sort(ids.begin(), ids.end());
    std::sort(in_ids.begin(), in_ids.end());
    EXPECT_EQ(ids, in_ids);

    std::vector<float> scaled = img;
    for (auto& x : scaled) x *= 3.5f;
    EXPECT_EQ(rank_evidence(scaled, c, 7).doc_ids(), rank_evidence(img, c, 7).doc_ids());
    EXPECT_LE(rank_evidence(img, c, 7).ranked.size(), 7u);
  }
}

ingest::ParsedDocument doc_with_sentences(const std::string& id, int n) {
  std::string text;
  for (int i = 0; i < n; ++i) {
    text += "1\tw" + std::to_string(i) + "\tw\tNOUN\t_\t_\t0\troot\t_\tNER=B-ORG\n\n";
  }
  return ingest::parse_conllu(text, id);
}

TEST(Concatenate, SentencesAppendInRankOrder) {
  const std::vector<ingest::ParsedDocument> docs{doc_with_sentences("a", 2),
                                                 doc_with_sentences("b", 3)};
  const auto out = concatenate_evidence(docs);
  ASSERT_EQ(out.sentences.size(), 5u);
  EXPECT_EQ(out.sentences[1], docs[0].sentences[1]);
  EXPECT_EQ(out.sentences[4], docs[1].sentences[2]);
  EXPECT_EQ(out.doc_id, "a+b");
  ASSERT_EQ(out.entity_spans.size(), 5u);
  EXPECT_EQ(out.entity_spans[3].sentence, 3u);
}

TEST(Concatenate, SingleDocumentIsUnchangedAndEmptyListIsEmpty) {
  const std::vector<ingest::ParsedDocument> one{doc_with_sentences("a", 2)};
  EXPECT_EQ(concatenate_evidence(one), one[0]);
  EXPECT_TRUE(concatenate_evidence({}).sentences.empty());
}

}  // namespace
}  // namespace egmmg::ranking
