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

#include "egmmg/conllu.hpp"

#include <charconv>
#include <fstream>
#include <sstream>
#include <tuple>

#include "egmmg/error.hpp"

namespace egmmg::ingest {
namespace {

std::vector<std::string_view> split_tabs(std::string_view line) {
  std::vector<std::string_view> cols;
  std::size_t start = 0;
  while (true) {
    const auto tab = line.find('\t', start);
    if (tab == std::string_view::npos) {
      cols.push_back(line.substr(start));
      return cols;
    }
    cols.push_back(line.substr(start, tab - start));
    start = tab + 1;
  }
}

int parse_int(std::string_view s, std::size_t line_no, const char* what) {
  int value = 0;
  const auto* end = s.data() + s.size();
  auto [ptr, ec] = std::from_chars(s.data(), end, value);
  if (ec != std::errc{} || ptr != end) {
    throw ParseError(std::string("invalid ") + what + " '" + std::string(s) + "'", line_no);
  }
  return value;
}

// Splits MISC into the NER label (if any) and the remaining attributes.
std::pair<std::optional<std::string>, std::string> split_misc(std::string_view misc) {
  if (misc == "_") return {std::nullopt, "_"};
  std::optional<std::string> ner;
  std::string rest;
  std::size_t start = 0;
  while (start <= misc.size()) {
    auto bar = misc.find('|', start);
    if (bar == std::string_view::npos) bar = misc.size();
    const auto item = misc.substr(start, bar - start);
    if (item.starts_with("NER=")) {
      ner = std::string(item.substr(4));
    } else if (!item.empty()) {
      if (!rest.empty()) rest += '|';
      rest += item;
    }
    start = bar + 1;
  }
  if (ner && *ner == "O") ner.reset();
  return {ner, rest.empty() ? "_" : rest};
}

struct PendingSentence {
  Sentence tokens;
  std::vector<std::size_t> lines;
};

class BioTracker {
 public:
  // Returns an error message on an invalid transition, empty on success.
  std::string feed(std::size_t sentence, std::size_t pos, const std::optional<std::string>& ner,
                   std::vector<EntitySpan>& out) {
    if (!ner) {
      close(out);
      return {};
    }
    const std::string& tag = *ner;
    if (tag.size() < 3 || tag[1] != '-' || (tag[0] != 'B' && tag[0] != 'I')) {
      return "NER label '" + tag + "' is not BIO-tagged";
    }
    const std::string label = tag.substr(2);
    if (tag[0] == 'B') {
      close(out);
      open_ = EntitySpan{sentence, pos, pos + 1, label};
      return {};
    }
    if (!open_ || open_->label != label || open_->end != pos) {
      return "non-contiguous BIO span: I-" + label + " without a preceding B-/I-" + label;
    }
    open_->end = pos + 1;
    return {};
  }

  void close(std::vector<EntitySpan>& out) {
    if (open_) out.push_back(*open_);
    open_.reset();
  }

 private:
  std::optional<EntitySpan> open_;
};

void finish_sentence(PendingSentence& pending, ParsedDocument& doc) {
  if (pending.tokens.empty()) return;
  const auto n = static_cast<int>(pending.tokens.size());
  const std::size_t sentence_index = doc.sentences.size();
  BioTracker bio;
  for (std::size_t i = 0; i < pending.tokens.size(); ++i) {
    const Token& tok = pending.tokens[i];
    const std::size_t line = pending.lines[i];
    if (tok.index != static_cast<int>(i) + 1) {
      throw ParseError("token id " + std::to_string(tok.index) + " out of sequence", line);
    }
    if (tok.head < 0 || tok.head > n) {
      throw ParseError("head " + std::to_string(tok.head) + " out of range [0, " +
                           std::to_string(n) + "]",
                       line);
    }
    if (tok.head == tok.index) throw ParseError("token is its own head", line);
    if (auto err = bio.feed(sentence_index, i, tok.ner, doc.entity_spans); !err.empty()) {
      throw ParseError(err, line);
    }
  }
  bio.close(doc.entity_spans);
  doc.sentences.push_back(std::move(pending.tokens));
  pending = {};
}

}  // namespace

std::size_t ParsedDocument::token_count() const {
  std::size_t n = 0;
  for (const auto& s : sentences) n += s.size();
  return n;
}

std::string ParsedDocument::span_text(const EntitySpan& span) const {
  std::string out;
  const auto& sent = sentences.at(span.sentence);
  for (std::size_t i = span.begin; i < span.end; ++i) {
    if (!out.empty()) out += ' ';
    out += sent.at(i).form;
  }
  return out;
}

std::string ParsedDocument::text() const {
  std::string out;
  for (const auto& sent : sentences) {
    for (std::size_t i = 0; i < sent.size(); ++i) {
      if (i) out += ' ';
      out += sent[i].form;
    }
    out += '\n';
  }
  return out;
}

ParsedDocument parse_conllu(std::string_view text, std::string doc_id) {
  ParsedDocument doc;
  doc.doc_id = std::move(doc_id);
  PendingSentence pending;
  std::size_t line_no = 0;
  std::size_t start = 0;
  while (start < text.size()) {
    auto nl = text.find('\n', start);
    if (nl == std::string_view::npos) nl = text.size();
    std::string_view line = text.substr(start, nl - start);
    start = nl + 1;
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);

    if (line.empty()) {
      finish_sentence(pending, doc);
      continue;
    }
    if (line.front() == '#') {
      constexpr std::string_view kNewDoc = "# newdoc id = ";
      if (line.starts_with(kNewDoc) && doc.doc_id.empty()) {
        doc.doc_id = std::string(line.substr(kNewDoc.size()));
      }
      continue;
    }
    const auto cols = split_tabs(line);
    if (cols.size() != 10) {
      throw ParseError("expected 10 tab-separated columns, found " + std::to_string(cols.size()),
                       line_no);
    }
    if (cols[0].find_first_of("-.") != std::string_view::npos) continue;

    Token tok;
    tok.index = parse_int(cols[0], line_no, "token id");
    tok.form = cols[1];
    tok.lemma = cols[2];
    tok.upos = cols[3];
    tok.xpos = cols[4];
    tok.feats = cols[5];
    tok.head = parse_int(cols[6], line_no, "head");
    tok.deprel = cols[7];
    tok.deps = cols[8];
    std::tie(tok.ner, tok.misc) = split_misc(cols[9]);
    pending.tokens.push_back(std::move(tok));
    pending.lines.push_back(line_no);
  }
  finish_sentence(pending, doc);
  return doc;
}

ParsedDocument read_conllu_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open CoNLL-U file: " + path);
  std::ostringstream buf;
  buf << in.rdbuf();
  try {
    return parse_conllu(buf.str(), path);
  } catch (const ParseError& e) {
    throw DataError(path + ": " + e.what());
  }
}

std::string to_conllu(const ParsedDocument& doc) {
  std::string out;
  if (!doc.doc_id.empty()) out += "# newdoc id = " + doc.doc_id + "\n";
  for (const auto& sent : doc.sentences) {
    for (const auto& t : sent) {
      std::string misc;
      if (t.ner) misc = "NER=" + *t.ner;
      if (t.misc != "_") {
        if (!misc.empty()) misc += '|';
        misc += t.misc;
      }
      if (misc.empty()) misc = "_";
      out += std::to_string(t.index) + '\t' + t.form + '\t' + t.lemma + '\t' + t.upos + '\t' +
             t.xpos + '\t' + t.feats + '\t' + std::to_string(t.head) + '\t' + t.deprel + '\t' +
             t.deps + '\t' + misc + '\n';
    }
    out += '\n';
  }
  return out;
}

std::vector<EntitySpan> entity_spans_from_bio(const std::vector<Sentence>& sentences) {
  std::vector<EntitySpan> spans;
  for (std::size_t s = 0; s < sentences.size(); ++s) {
    BioTracker bio;
    for (std::size_t i = 0; i < sentences[s].size(); ++i) {
      if (auto err = bio.feed(s, i, sentences[s][i].ner, spans); !err.empty()) {
        throw DataError("sentence " + std::to_string(s) + ": " + err);
      }
    }
    bio.close(spans);
  }
  return spans;
}

}  // namespace egmmg::ingest
