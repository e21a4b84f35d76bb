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

#include "egmmg/embedding_table.hpp"

#include <bit>
#include <cmath>
#include <cstring>
#include <fstream>
#include <iterator>

#include "egmmg/error.hpp"

namespace egmmg::ingest {
namespace {

static_assert(std::endian::native == std::endian::little,
              "EGTB I/O assumes a little-endian host");

constexpr char kMagic[4] = {'E', 'G', 'T', 'B'};

class Reader {
 public:
  explicit Reader(std::span<const std::byte> bytes) : bytes_(bytes) {}

  template <typename T>
  T get(const char* what) {
    T value;
    need(sizeof(T), what);
    std::memcpy(&value, bytes_.data() + pos_, sizeof(T));
    pos_ += sizeof(T);
    return value;
  }

  std::span<const std::byte> take(std::size_t n, const char* what) {
    need(n, what);
    auto out = bytes_.subspan(pos_, n);
    pos_ += n;
    return out;
  }

  bool at_end() const { return pos_ == bytes_.size(); }

 private:
  void need(std::size_t n, const char* what) const {
    if (bytes_.size() - pos_ < n) {
      throw DataError(std::string("EGTB truncated while reading ") + what + " at byte " +
                      std::to_string(pos_));
    }
  }

  std::span<const std::byte> bytes_;
  std::size_t pos_ = 0;
};

template <typename T>
void put(std::vector<std::byte>& out, T value) {
  const auto* p = reinterpret_cast<const std::byte*>(&value);
  out.insert(out.end(), p, p + sizeof(T));
}

}  // namespace

bool EmbeddingTable::contains(std::string_view key) const {
  return index_.contains(std::string(key));
}

std::span<const float> EmbeddingTable::at(std::string_view key) const {
  const auto it = index_.find(std::string(key));
  if (it == index_.end()) throw DataError("embedding key not found: " + std::string(key));
  return {data_.data() + it->second * dim_, dim_};
}

void EmbeddingTable::insert(std::string key, std::span<const float> values) {
  if (values.size() != dim_) {
    throw DataError("embedding '" + key + "' has " + std::to_string(values.size()) +
                    " entries, table dim is " + std::to_string(dim_));
  }
  for (float v : values) {
    if (!std::isfinite(v)) throw DataError("embedding '" + key + "' has a non-finite entry");
  }
  if (index_.contains(key)) throw DataError("duplicate embedding key: " + key);
  index_.emplace(key, keys_.size());
  keys_.push_back(std::move(key));
  data_.insert(data_.end(), values.begin(), values.end());
}

EmbeddingTable EmbeddingTable::decode(std::span<const std::byte> bytes) {
  Reader r(bytes);
  const auto magic = r.take(4, "magic");
  if (std::memcmp(magic.data(), kMagic, 4) != 0) throw DataError("EGTB magic mismatch");
  const auto version = r.get<std::uint32_t>("version");
  if (version != kVersion) throw DataError("unsupported EGTB version " + std::to_string(version));
  const auto dim = r.get<std::uint32_t>("dim");
  const auto count = r.get<std::uint64_t>("entry count");
  if (dim == 0 && count > 0) throw DataError("EGTB dim is zero");

  EmbeddingTable table(dim);
  std::vector<float> values(dim);
  for (std::uint64_t i = 0; i < count; ++i) {
    const auto key_len = r.get<std::uint32_t>("key length");
    const auto key_bytes = r.take(key_len, "key");
    std::string key(reinterpret_cast<const char*>(key_bytes.data()), key_len);
    const auto payload = r.take(std::size_t{dim} * sizeof(float), "vector payload");
    std::memcpy(values.data(), payload.data(), payload.size());
    table.insert(std::move(key), values);
  }
  if (!r.at_end()) throw DataError("EGTB has trailing bytes after the declared entries");
  return table;
}

std::vector<std::byte> EmbeddingTable::encode() const {
  std::vector<std::byte> out;
  out.reserve(20 + keys_.size() * (8 + dim_ * sizeof(float)));
  for (char c : kMagic) out.push_back(static_cast<std::byte>(c));
  put<std::uint32_t>(out, kVersion);
  put<std::uint32_t>(out, static_cast<std::uint32_t>(dim_));
  put<std::uint64_t>(out, keys_.size());
  for (std::size_t i = 0; i < keys_.size(); ++i) {
    put<std::uint32_t>(out, static_cast<std::uint32_t>(keys_[i].size()));
    const auto* k = reinterpret_cast<const std::byte*>(keys_[i].data());
    out.insert(out.end(), k, k + keys_[i].size());
    const auto* v = reinterpret_cast<const std::byte*>(data_.data() + i * dim_);
    out.insert(out.end(), v, v + dim_ * sizeof(float));
  }
  return out;
}

EmbeddingTable EmbeddingTable::read(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open embedding table: " + path);
  std::vector<char> raw((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  try {
    return decode(std::as_bytes(std::span(raw)));
  } catch (const DataError& e) {
    throw DataError(path + ": " + e.what());
  }
}

void EmbeddingTable::write(const std::string& path) const {
  const auto bytes = encode();
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw DataError("cannot write embedding table: " + path);
  out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
}

}  // namespace egmmg::ingest
