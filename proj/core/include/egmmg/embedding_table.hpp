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
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

namespace egmmg::ingest {

/// Keyed table of fixed-length f32 vectors, stored in the EGTB binary format:
///
///   "EGTB" | u32 version=1 | u32 dim | u64 count |
///   count x ( u32 key_len | key bytes | dim x f32 )
///
/// All integers and floats little-endian. Keys keep insertion order.
class EmbeddingTable {
 public:
  static constexpr std::uint32_t kVersion = 1;

  EmbeddingTable() = default;
  explicit EmbeddingTable(std::size_t dim) : dim_(dim) {}

  std::size_t dim() const noexcept { return dim_; }
  std::size_t size() const noexcept { return keys_.size(); }
  bool empty() const noexcept { return keys_.empty(); }

  bool contains(std::string_view key) const;
  std::span<const float> at(std::string_view key) const;
  const std::vector<std::string>& keys() const noexcept { return keys_; }

  /// Throws DataError on wrong length, non-finite values, or a duplicate key.
  void insert(std::string key, std::span<const float> values);

  static EmbeddingTable read(const std::string& path);
  static EmbeddingTable decode(std::span<const std::byte> bytes);
  std::vector<std::byte> encode() const;
  void write(const std::string& path) const;

 private:
  std::size_t dim_ = 0;
  std::vector<std::string> keys_;
  std::unordered_map<std::string, std::size_t> index_;
  std::vector<float> data_;
};

inline EmbeddingTable load_embedding_table(const std::string& path) {
  return EmbeddingTable::read(path);
}

}  // namespace egmmg::ingest
