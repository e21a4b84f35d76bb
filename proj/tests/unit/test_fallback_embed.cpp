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

#include <bit>
#include <cmath>
#include <cstdint>
#include <utility>
#include <vector>

#include "egmmg/error.hpp"
#include "egmmg/fallback_embed.hpp"
#include "egmmg/ranking.hpp"

namespace egmmg::ingest {
namespace {

using Sparse = std::vector<std::pair<std::size_t, float>>;

// Expected buckets come from an independent Python rendering of the hashing
// scheme (FNV-1a over the four little-endian bytes of each code point, sign
// from the top hash bit, bucket = hash mod dim, then L2 normalization).
void expect_sparse(const std::vector<float>& v, const Sparse& expected) {
  std::vector<float> dense(v.size(), 0.0f);
  for (const auto& [i, x] : expected) dense[i] = x;
  for (std::size_t i = 0; i < v.size(); ++i) {
    EXPECT_FLOAT_EQ(v[i], dense[i]) << "bucket " << i;
  }
}

TEST(FallbackEmbed, MatchesIndependentOracle) {
  expect_sparse(fallback_embed("abc", 384),
                {{176, -0.577350259f}, {245, 0.577350259f}, {264, 0.577350259f}});
  expect_sparse(fallback_embed("aaaa", 384),
                {{20, 0.816496611f}, {33, 0.408248305f}, {187, 0.408248305f}});
  expect_sparse(fallback_embed("The White House", 768),
                {{23, 0.258198887f},  {64, -0.258198887f},  {87, 0.258198887f},
                 {130, -0.258198887f}, {151, 0.258198887f}, {316, -0.258198887f},
                 {387, 0.258198887f},  {444, -0.258198887f}, {472, -0.258198887f},
                 {493, -0.258198887f}, {519, 0.258198887f},  {534, -0.258198887f},
                 {548, 0.258198887f},  {586, -0.258198887f}, {648, 0.258198887f}});
  expect_sparse(fallback_embed("Naïve café", 384),
                {{51, -0.316227764f}, {61, 0.316227764f},  {180, 0.316227764f},
                 {198, 0.316227764f}, {201, 0.316227764f}, {254, 0.316227764f},
                 {283, 0.316227764f}, {293, -0.316227764f}, {353, 0.316227764f},
                 {359, -0.316227764f}});
}

TEST(FallbackEmbed, DeterministicBitForBit) {
  const auto a = fallback_embed("abc", 384);
  const auto b = fallback_embed("abc", 384);
  ASSERT_EQ(a.size(), 384u);
  for (std::size_t i = 0; i < a.size(); ++i) {
    EXPECT_EQ(std::bit_cast<std::uint32_t>(a[i]), std::bit_cast<std::uint32_t>(b[i]));
  }
}

TEST(FallbackEmbed, SelfSimilarityIsOne) {
  const auto a = fallback_embed("abc", 384);
  EXPECT_NEAR(ranking::cosine_similarity(a, a), 1.0, 1e-12);
}

TEST(FallbackEmbed, EmptyTextIsFirstBasisVector) {
  for (std::size_t dim : {384u, 768u}) {
    const auto v = fallback_embed("", dim);
    ASSERT_EQ(v.size(), dim);
    EXPECT_EQ(v[0], 1.0f);
    for (std::size_t i = 1; i < dim; ++i) EXPECT_EQ(v[i], 0.0f);
  }
}

TEST(FallbackEmbed, UnitNormAndCaseInsensitive) {
  for (const char* text : {"Paris", "a", "Sonia Gandhi cast her vote", "x y z"}) {
    const auto v = fallback_embed(text, 768);
    double n2 = 0.0;
    for (float x : v) n2 += static_cast<double>(x) * x;
    EXPECT_NEAR(std::sqrt(n2), 1.0, 1e-6) << text;
  }
  EXPECT_EQ(fallback_embed("PARIS", 384), fallback_embed("paris", 384));
}

TEST(FallbackEmbed, RejectsOtherDims) {
  EXPECT_THROW(fallback_embed("abc", 100), ConfigError);
}

}  // namespace
}  // namespace egmmg::ingest
