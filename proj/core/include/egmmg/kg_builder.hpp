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
#include <vector>

#include "egmmg/conllu.hpp"
#include "egmmg/knowledge_graph.hpp"

namespace egmmg::kg {

/// Rule identifiers recorded on every edge.
namespace rules {
inline constexpr const char* kSubjectPerforms = "nsubj_performs";
inline constexpr const char* kPassiveExperiences = "nsubjpass_experiences";
inline constexpr const char* kDirectObjectTargets = "dobj_targets";
inline constexpr const char* kPrepObjectTargets = "pobj_targets";
inline constexpr const char* kVerbPrepLocatedIn = "verb_prep_located_in";
inline constexpr const char* kHeadPrepInLocatedIn = "head_prep_in_located_in";
inline constexpr const char* kCompoundHasState = "compound_has_state";
}  // namespace rules

/// Graph under construction together with the token -> node assignment the
/// edge rules consult. token_nodes[s][t] is the node covering token t of
/// sentence s, if any.
struct GraphDraft {
  KnowledgeGraph graph;
  std::vector<std::vector<std::optional<std::size_t>>> token_nodes;
};

/// One node per deduplicated entity span, typed from its NER label.
GraphDraft extract_nodes(const ingest::ParsedDocument& doc);

/// Adds an EVENT node per VERB token outside entity spans and applies the
/// relation rules. Event ids are the lowercased lemma, suffixed with
/// "#<sentence>" when the lemma heads events in more than one sentence.
void extract_edges(const ingest::ParsedDocument& doc, GraphDraft& draft);

/// extract_nodes followed by extract_edges. Claim and evidence graphs share
/// this path.
KnowledgeGraph build_graph(const ingest::ParsedDocument& doc);

}  // namespace egmmg::kg
