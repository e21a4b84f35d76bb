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
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace egmmg::ingest {

/// One syntactic word of a CoNLL-U sentence. `ner` holds the BIO-tagged label
/// read from `NER=` in the MISC column; remaining MISC attributes are kept
/// verbatim in `misc`.
struct Token {
  int index = 0;
  std::string form;
  std::string lemma;
  std::string upos;
  std::string xpos = "_";
  std::string feats = "_";
  int head = 0;
  std::string deprel;
  std::string deps = "_";
  std::string misc = "_";
  std::optional<std::string> ner;

  bool operator==(const Token&) const = default;
};

using Sentence = std::vector<Token>;

/// Token range [begin, end) over 0-based token positions of one sentence.
struct EntitySpan {
  std::size_t sentence = 0;
  std::size_t begin = 0;
  std::size_t end = 0;
  std::string label;

  bool operator==(const EntitySpan&) const = default;
};

struct ParsedDocument {
  std::string doc_id;
  std::vector<Sentence> sentences;
  std::vector<EntitySpan> entity_spans;

  std::size_t token_count() const;
  /// Surface text of a span, forms joined by single spaces.
  std::string span_text(const EntitySpan& span) const;
  /// Whole document as plain text, one sentence per line.
  std::string text() const;

  bool operator==(const ParsedDocument&) const = default;
};

/// Parses CoNLL-U content. Multiword-token and empty-node lines are skipped.
/// Throws ParseError carrying the 1-based line number on malformed input.
ParsedDocument parse_conllu(std::string_view text, std::string doc_id = {});

ParsedDocument read_conllu_file(const std::string& path);

/// Inverse of parse_conllu: writes ten-column lines with `NER=` re-inserted
/// at the front of MISC.
std::string to_conllu(const ParsedDocument& doc);

/// Recomputes entity spans from the per-token BIO labels.
std::vector<EntitySpan> entity_spans_from_bio(const std::vector<Sentence>& sentences);

}  // namespace egmmg::ingest
