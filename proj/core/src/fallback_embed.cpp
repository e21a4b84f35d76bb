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

#include "egmmg/fallback_embed.hpp"

#include <cmath>
#include <cstdint>

#include "egmmg/error.hpp"

namespace egmmg::ingest {
namespace {

constexpr std::uint64_t kFnvOffset = 14695981039346656037ULL;
constexpr std::uint64_t kFnvPrime = 1099511628211ULL;

// Lenient UTF-8 decoder: invalid bytes are passed through as single units.
std::vector<char32_t> decode_lowercase(std::string_view text) {
  std::vector<char32_t> out;
  out.reserve(text.size() + 2);
  out.push_back(U'^');
  std::size_t i = 0;
  while (i < text.size()) {
    const auto c = static_cast<unsigned char>(text[i]);
    char32_t cp = c;
    std::size_t len = 1;
    if (c >= 0xF0) {
      len = 4;
      cp = c & 0x07;
    } else if (c >= 0xE0) {
      len = 3;
      cp = c & 0x0F;
    } else if (c >= 0xC0) {
      len = 2;
      cp = c & 0x1F;
    }
    if (len > 1) {
      if (i + len > text.size()) {
        len = 1;
        cp = c;
      } else {
        for (std::size_t k = 1; k < len; ++k) {
          cp = (cp << 6) | (static_cast<unsigned char>(text[i + k]) & 0x3F);
        }
      }
    }
    if (cp >= U'A' && cp <= U'Z') cp += U'a' - U'A';
    out.push_back(cp);
    i += len;
  }
  out.push_back(U'$');
  return out;
}

std::uint64_t hash_trigram(const char32_t* cps) {
  std::uint64_t h = kFnvOffset;
  for (int k = 0; k < 3; ++k) {
    auto v = static_cast<std::uint32_t>(cps[k]);
    for (int b = 0; b < 4; ++b) {
      h ^= (v >> (8 * b)) & 0xFF;
      h *= kFnvPrime;
    }
  }
  return h;
}

}  // namespace

std::vector<float> fallback_embed(std::string_view text, std::size_t dim) {
  if (dim != 384 && dim != 768) {
    throw ConfigError("fallback_embed dim must be 384 or 768, got " + std::to_string(dim));
  }
  const auto cps = decode_lowercase(text);
  std::vector<double> acc(dim, 0.0);
  for (std::size_t i = 0; i + 3 <= cps.size(); ++i) {
    const auto h = hash_trigram(cps.data() + i);
    const double sign = (h >> 63) ? -1.0 : 1.0;
    acc[h % dim] += sign;
  }
  double norm2 = 0.0;
  for (double v : acc) norm2 += v * v;

  std::vector<float> out(dim, 0.0f);
  if (norm2 == 0.0) {
    out[0] = 1.0f;
    return out;
  }
  const double inv = 1.0 / std::sqrt(norm2);
  for (std::size_t i = 0; i < dim; ++i) out[i] = static_cast<float>(acc[i] * inv);
  return out;
}

}  // namespace egmmg::ingest
