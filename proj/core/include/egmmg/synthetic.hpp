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
#include <string>
#include <vector>

#include "egmmg/conllu.hpp"
#include "egmmg/knowledge_graph.hpp"

namespace egmmg::train {

struct SyntheticExample {
  std::string id;
  ingest::ParsedDocument claim;
  ingest::ParsedDocument evidence;
  int label = 0;
};

/// Small separable claim/evidence corpus. Every evidence document holds two or
/// three "S V O in L ." sentences drawn from a fixed vocabulary. A positive
/// claim recombines the subject, verb, object and place of its evidence; a
/// negative claim swaps one or two of them for words that never occur in any
/// evidence. Labels alternate 0, 1, 0, ... and always satisfy
/// label == claim_supported(build_graph(claim), build_graph(evidence)).
std::vector<SyntheticExample> make_synthetic_dataset(std::size_t count, std::uint64_t seed);

/// Fixed pair with a 5-node evidence graph ("Alice visited Acme in Paris
/// with Bruno .") and a 4-node claim graph ("Alice visited Acme in Lima ."),
/// label 0.
SyntheticExample tiny_example();

/// True iff every claim node label also labels some evidence node.
bool claim_supported(const kg::KnowledgeGraph& claim, const kg::KnowledgeGraph& evidence);

}  // namespace egmmg::train
