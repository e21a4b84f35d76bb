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

#include <algorithm>
#include <cmath>
#include <cstring>
#include <limits>
#include <vector>

#include "egmmg/embedding_table.hpp"
#include "egmmg/error.hpp"
#include "test_support.hpp"

namespace egmmg::ingest {
namespace {

using testing::fixture_path;

// Fixtures are written by tests/fixtures/tables/make_tables.py with Python's
// struct module, not by the C++ writer.
TEST(EmbeddingTable, LoadsPythonWrittenTable) {
  const auto t = load_embedding_table(fixture_path("tables/two_entries_384.egtb"));
  EXPECT_EQ(t.dim(), 384u);
  ASSERT_EQ(t.size(), 2u);
  EXPECT_EQ(t.keys()[0], "alpha");
  EXPECT_EQ(t.keys()[1], "béta");
  const auto a = t.at("alpha");
  const auto b = t.at("béta");
  for (std::size_t i = 0; i < 384; ++i) {
    EXPECT_EQ(a[i], static_cast<float>(static_cast<double>(i) / 384.0));
    EXPECT_EQ(b[i], static_cast<float>(-static_cast<double>(i % 7) * 0.25));
  }
}

TEST(EmbeddingTable, EmptyTableIsValid) {
  const auto t = load_embedding_table(fixture_path("tables/empty_768.egtb"));
  EXPECT_EQ(t.dim(), 768u);
  EXPECT_TRUE(t.empty());
}

TEST(EmbeddingTable, TruncatedPayloadIsRejected) {
  try {
    load_embedding_table(fixture_path("tables/truncated_384.egtb"));
    FAIL() << "expected DataError";
  } catch (const DataError& e) {
    EXPECT_NE(std::string(e.what()).find("truncated"), std::string::npos) << e.what();
  }
}

TEST(EmbeddingTable, BadMagicIsRejected) {
  EXPECT_THROW(load_embedding_table(fixture_path("tables/bad_magic.egtb")), DataError);
}

TEST(EmbeddingTable, DuplicateKeyIsRejected) {
  EXPECT_THROW(load_embedding_table(fixture_path("tables/duplicate_key_384.egtb")), DataError);
}

TEST(EmbeddingTable, WriterReproducesPythonBytes) {
  const auto bytes = testing::slurp(fixture_path("tables/two_entries_384.egtb"));
  const auto t = load_embedding_table(fixture_path("tables/two_entries_384.egtb"));
  const auto encoded = t.encode();
  ASSERT_EQ(encoded.size(), bytes.size());
  EXPECT_EQ(std::memcmp(encoded.data(), bytes.data(), bytes.size()), 0);
}

TEST(EmbeddingTable, WriteReadRoundTrip) {
  testing::TempDir dir;
  EmbeddingTable t(3);
  const std::vector<float> x{1.0f, -2.5f, 0.125f};
  const std::vector<float> y{0.0f, 0.0f, 1.0f};
  t.insert("x", x);
  t.insert("", y);
  t.write(dir.str("t.egtb"));
  const auto back = EmbeddingTable::read(dir.str("t.egtb"));
  EXPECT_EQ(back.dim(), 3u);
  EXPECT_EQ(back.keys(), t.keys());
  EXPECT_TRUE(std::equal(x.begin(), x.end(), back.at("x").begin()));
  EXPECT_TRUE(std::equal(y.begin(), y.end(), back.at("").begin()));
}

TEST(EmbeddingTable, InsertValidatesLengthFinitenessAndUniqueness) {
  EmbeddingTable t(2);
  const std::vector<float> ok{1.0f, 2.0f};
  const std::vector<float> short_row{1.0f};
  const std::vector<float> nan_row{1.0f, std::numeric_limits<float>::quiet_NaN()};
  t.insert("a", ok);
  EXPECT_THROW(t.insert("b", short_row), DataError);
  EXPECT_THROW(t.insert("c", nan_row), DataError);
  EXPECT_THROW(t.insert("a", ok), DataError);
  EXPECT_THROW(t.at("missing"), DataError);
  EXPECT_TRUE(t.contains("a"));
  EXPECT_FALSE(t.contains("b"));
}

TEST(EmbeddingTable, DecodeRejectsTrailingBytes) {
  EmbeddingTable t(1);
  const std::vector<float> v{1.0f};
  t.insert("k", v);
  auto bytes = t.encode();
  bytes.push_back(std::byte{0});
  EXPECT_THROW(EmbeddingTable::decode(bytes), DataError);
}

TEST(EmbeddingTable, MissingFileIsADataError) {
  EXPECT_THROW(load_embedding_table("/nonexistent/table.egtb"), DataError);
}

}  // namespace
}  // namespace egmmg::ingest
