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

#include "egmmg/synthetic.hpp"

#include <array>
#include <set>
#include <string_view>

#include "egmmg/error.hpp"
#include "egmmg/kg_builder.hpp"
#include "egmmg/rng.hpp"

namespace egmmg::train {
namespace {

struct Verb {
  std::string_view form;
  std::string_view lemma;
};

constexpr std::array<std::string_view, 24> kPeople = {
    "Alice",  "Bruno",  "Chen",   "Dalia",  "Emeka",  "Farah",  "Goran",   "Hana",
    "Ivan",   "Jonas",  "Keiko",  "Lars",   "Maren",  "Nadia",  "Omar",    "Priya",
    "Quentin", "Rosa",  "Sven",   "Tariq",  "Ursula", "Viktor", "Wanjiru", "Yusuf"};
constexpr std::array<std::string_view, 12> kOrgs = {
    "Acme", "Borealis", "Cobalt", "Dynamo", "Everest", "Falcon",
    "Granite", "Helix", "Ion", "Juniper", "Kestrel", "Lumen"};
constexpr std::array<std::string_view, 16> kPlaces = {
    "Paris", "Lagos", "Lima", "Oslo", "Hanoi", "Quito", "Cairo", "Dublin",
    "Kyoto", "Accra", "Perth", "Riga", "Tunis", "Sofia", "Delhi", "Bogota"};
constexpr std::array<Verb, 16> kVerbs = {{{"visited", "visit"},   {"funded", "fund"},
                                          {"praised", "praise"},  {"sued", "sue"},
                                          {"hired", "hire"},      {"joined", "join"},
                                          {"founded", "found"},   {"left", "leave"},
                                          {"met", "meet"},        {"led", "lead"},
                                          {"bought", "buy"},      {"sold", "sell"},
                                          {"built", "build"},     {"opened", "open"},
                                          {"closed", "close"},    {"audited", "audit"}}};

constexpr std::array<std::string_view, 12> kDistractorPeople = {
    "Zoltan", "Xenia", "Wolfgang", "Valentina", "Thaddeus", "Seraphina",
    "Rasmus", "Philippa", "Octavio", "Nikolai", "Mirela", "Leopold"};
constexpr std::array<std::string_view, 8> kDistractorOrgs = {
    "Zenith", "Xylo", "Vortex", "Umbra", "Tundra", "Sable", "Quasar", "Nimbus"};
constexpr std::array<std::string_view, 8> kDistractorPlaces = {
    "Zurich", "Valletta", "Tbilisi", "Reykjavik", "Montevideo", "Kigali", "Jakarta", "Harare"};
constexpr std::array<Verb, 8> kDistractorVerbs = {{{"denied", "deny"},
                                                   {"banned", "ban"},
                                                   {"mocked", "mock"},
                                                   {"robbed", "rob"},
                                                   {"fired", "fire"},
                                                   {"blamed", "blame"},
                                                   {"evicted", "evict"},
                                                   {"shunned", "shun"}}};

struct Triple {
  std::string_view subject;
  Verb verb;
  std::string_view object;
  std::string_view place;
};

template <typename T, std::size_t N>
const T& pick(Rng& rng, const std::array<T, N>& pool) {
  return pool[rng.index(N)];
}

// "S V O in L ." with NER tags on the three names.
std::string sentence_conllu(const Triple& t) {
  std::string out;
  auto line = [&](int id, std::string_view form, std::string_view lemma, std::string_view upos,
                  int head, std::string_view deprel, std::string_view misc) {
    out += std::to_string(id) + "\t" + std::string(form) + "\t" + std::string(lemma) + "\t" +
           std::string(upos) + "\t_\t_\t" + std::to_string(head) + "\t" + std::string(deprel) +
           "\t_\t" + std::string(misc) + "\n";
  };
  line(1, t.subject, t.subject, "PROPN", 2, "nsubj", "NER=B-PER");
  line(2, t.verb.form, t.verb.lemma, "VERB", 0, "root", "_");
  line(3, t.object, t.object, "PROPN", 2, "dobj", "NER=B-ORG");
  line(4, "in", "in", "ADP", 2, "prep", "_");
  line(5, t.place, t.place, "PROPN", 4, "pobj", "NER=B-GPE");
  line(6, ".", ".", "PUNCT", 2, "punct", "_");
  return out + "\n";
}

ingest::ParsedDocument document(const std::vector<Triple>& triples, const std::string& id) {
  std::string text;
  for (const auto& t : triples) text += sentence_conllu(t);
  return ingest::parse_conllu(text, id);
}

}  // namespace

SyntheticExample tiny_example() {
  SyntheticExample ex;
  ex.id = "tiny";
  ex.label = 0;
  ex.claim = document({{"Alice", {"visited", "visit"}, "Acme", "Lima"}}, "tiny.claim");
  ex.evidence = ingest::parse_conllu(
      "1\tAlice\tAlice\tPROPN\t_\t_\t2\tnsubj\t_\tNER=B-PER\n"
      "2\tvisited\tvisit\tVERB\t_\t_\t0\troot\t_\t_\n"
      "3\tAcme\tAcme\tPROPN\t_\t_\t2\tdobj\t_\tNER=B-ORG\n"
      "4\tin\tin\tADP\t_\t_\t2\tprep\t_\t_\n"
      "5\tParis\tParis\tPROPN\t_\t_\t4\tpobj\t_\tNER=B-GPE\n"
      "6\twith\twith\tADP\t_\t_\t2\tprep\t_\t_\n"
      "7\tBruno\tBruno\tPROPN\t_\t_\t6\tpobj\t_\tNER=B-PER\n"
      "8\t.\t.\tPUNCT\t_\t_\t2\tpunct\t_\t_\n\n",
      "tiny.evidence");
  return ex;
}

bool claim_supported(const kg::KnowledgeGraph& claim, const kg::KnowledgeGraph& evidence) {
  std::set<std::string> labels;
  for (const auto& n : evidence.nodes()) labels.insert(n.label);
  for (const auto& n : claim.nodes()) {
    if (!labels.contains(n.label)) return false;
  }
  return true;
}

std::vector<SyntheticExample> make_synthetic_dataset(std::size_t count, std::uint64_t seed) {
  Rng rng(seed);
  std::vector<SyntheticExample> out;
  out.reserve(count);
  for (std::size_t i = 0; i < count; ++i) {
    SyntheticExample ex;
    ex.id = "syn" + std::to_string(i);
    ex.label = static_cast<int>(i % 2);

    std::vector<Triple> evidence(2 + rng.index(2));
    for (auto& t : evidence) {
      t = {pick(rng, kPeople), pick(rng, kVerbs), pick(rng, kOrgs), pick(rng, kPlaces)};
    }
    Triple claim{evidence[rng.index(evidence.size())].subject,
                 evidence[rng.index(evidence.size())].verb,
                 evidence[rng.index(evidence.size())].object,
                 evidence[rng.index(evidence.size())].place};
    if (ex.label == 0) {
      std::array<int, 4> slots = {0, 1, 2, 3};
      for (std::size_t k = slots.size(); k > 1; --k) std::swap(slots[k - 1], slots[rng.index(k)]);
      const std::size_t swaps = 1 + rng.index(2);
      for (std::size_t k = 0; k < swaps; ++k) {
        switch (slots[k]) {
          case 0: claim.subject = pick(rng, kDistractorPeople); break;
          case 1: claim.verb = pick(rng, kDistractorVerbs); break;
          case 2: claim.object = pick(rng, kDistractorOrgs); break;
          default: claim.place = pick(rng, kDistractorPlaces); break;
        }
      }
    }
    ex.claim = document({claim}, ex.id + ".claim");
    ex.evidence = document(evidence, ex.id + ".evidence");
    const bool supported =
        claim_supported(kg::build_graph(ex.claim), kg::build_graph(ex.evidence));
    if (supported != (ex.label == 1)) {
      throw Error("synthetic generator produced an inconsistent label for " + ex.id);
    }
    out.push_back(std::move(ex));
  }
  return out;
}

}  // namespace egmmg::train
