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

#include "egmmg/kg_builder.hpp"

#include <algorithm>
#include <cctype>
#include <map>
#include <set>
#include <string>

namespace egmmg::kg {
namespace {

using ingest::ParsedDocument;
using ingest::Sentence;
using ingest::Token;

std::string lower(std::string_view s) {
  std::string out(s);
  for (auto& c : out) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  return out;
}

std::string_view ner_label(const std::string& bio) {
  return bio.size() > 2 && bio[1] == '-' ? std::string_view(bio).substr(2) : std::string_view(bio);
}

const std::string& event_lemma(const Token& t) { return t.lemma == "_" ? t.form : t.lemma; }

// Children of every token, in token order. Index by 0-based head position.
std::vector<std::vector<std::size_t>> children_of(const Sentence& sent) {
  std::vector<std::vector<std::size_t>> kids(sent.size());
  for (std::size_t i = 0; i < sent.size(); ++i) {
    if (sent[i].head > 0) kids[static_cast<std::size_t>(sent[i].head - 1)].push_back(i);
  }
  return kids;
}

std::optional<std::size_t> first_child(const std::vector<std::size_t>& kids, const Sentence& sent,
                                       std::string_view deprel) {
  for (auto k : kids) {
    if (sent[k].deprel == deprel) return k;
  }
  return std::nullopt;
}

bool is_location_prep(const Token& t) {
  const auto f = lower(t.form);
  return f == "in" || f == "at" || f == "on";
}

}  // namespace

GraphDraft extract_nodes(const ParsedDocument& doc) {
  GraphDraft draft;
  draft.token_nodes.resize(doc.sentences.size());
  for (std::size_t s = 0; s < doc.sentences.size(); ++s) {
    draft.token_nodes[s].assign(doc.sentences[s].size(), std::nullopt);
  }
  for (const auto& span : doc.entity_spans) {
    const auto text = doc.span_text(span);
    const auto node = draft.graph.add_node(canonical_id(text), text,
                                           node_type_for_ner(ner_label(span.label)));
    for (std::size_t t = span.begin; t < span.end; ++t) draft.token_nodes[span.sentence][t] = node;
  }
  return draft;
}

void extract_edges(const ParsedDocument& doc, GraphDraft& draft) {
  KnowledgeGraph& g = draft.graph;

  // Sentences in which each event lemma occurs, to decide on the "#s" suffix.
  std::map<std::string, std::set<std::size_t>> lemma_sentences;
  for (std::size_t s = 0; s < doc.sentences.size(); ++s) {
    for (std::size_t t = 0; t < doc.sentences[s].size(); ++t) {
      const auto& tok = doc.sentences[s][t];
      if (tok.upos == "VERB" && !draft.token_nodes[s][t]) {
        lemma_sentences[canonical_id(event_lemma(tok))].insert(s);
      }
    }
  }

  for (std::size_t s = 0; s < doc.sentences.size(); ++s) {
    const Sentence& sent = doc.sentences[s];
    auto& nodes = draft.token_nodes[s];
    std::vector<bool> is_event(sent.size(), false);

    // A VERB inside an entity span is part of a name, not an event.
    for (std::size_t t = 0; t < sent.size(); ++t) {
      if (sent[t].upos != "VERB" || nodes[t]) continue;
      auto id = canonical_id(event_lemma(sent[t]));
      if (lemma_sentences[id].size() > 1) id += "#" + std::to_string(s);
      nodes[t] = g.add_node(std::move(id), event_lemma(sent[t]), NodeType::Event);
      is_event[t] = true;
    }

    const auto kids = children_of(sent);
    for (std::size_t t = 0; t < sent.size(); ++t) {
      const Token& tok = sent[t];

      if (is_event[t]) {
        const std::size_t ev = *nodes[t];
        for (auto c : kids[t]) {
          const Token& child = sent[c];
          if (child.deprel == "nsubj") {
            if (nodes[c]) g.add_edge(*nodes[c], ev, EdgeType::Performs, rules::kSubjectPerforms);
          } else if (child.deprel == "nsubjpass") {
            if (nodes[c]) {
              g.add_edge(ev, *nodes[c], EdgeType::Experiences, rules::kPassiveExperiences);
            }
          } else if (child.deprel == "dobj") {
            if (nodes[c]) g.add_edge(ev, *nodes[c], EdgeType::Targets, rules::kDirectObjectTargets);
          } else if (child.deprel == "prep") {
            const auto pobj = first_child(kids[c], sent, "pobj");
            if (!pobj || !nodes[*pobj] || *nodes[*pobj] == ev) continue;
            if (is_location_prep(child)) {
              g.add_edge(ev, *nodes[*pobj], EdgeType::LocatedIn, rules::kVerbPrepLocatedIn);
            } else {
              g.add_edge(ev, *nodes[*pobj], EdgeType::Targets, rules::kPrepObjectTargets);
            }
          }
        }
      }

      if (tok.head == 0) continue;
      const auto head = static_cast<std::size_t>(tok.head - 1);

      if (tok.deprel == "prep" && lower(tok.form) == "in" && sent[head].upos != "VERB" &&
          nodes[head]) {
        const auto pobj = first_child(kids[t], sent, "pobj");
        if (pobj && nodes[*pobj] && *nodes[*pobj] != *nodes[head]) {
          g.add_edge(*nodes[head], *nodes[*pobj], EdgeType::LocatedIn,
                     rules::kHeadPrepInLocatedIn);
        }
      }

      if (tok.deprel == "compound" && nodes[t] && nodes[head] && *nodes[t] != *nodes[head]) {
        g.add_edge(*nodes[t], *nodes[head], EdgeType::HasState, rules::kCompoundHasState);
      }
    }
  }
}

KnowledgeGraph build_graph(const ParsedDocument& doc) {
  auto draft = extract_nodes(doc);
  extract_edges(doc, draft);
  return std::move(draft.graph);
}

}  // namespace egmmg::kg
