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

#include "egmmg/manifest.hpp"

#include <filesystem>
#include <fstream>
#include <set>

#include <json.hpp>

#include "egmmg/error.hpp"

namespace egmmg::ingest {
namespace fs = std::filesystem;

namespace {

std::string resolve(const fs::path& base, const std::string& ref) {
  fs::path p(ref);
  if (p.is_relative()) p = base / p;
  return p.lexically_normal().string();
}

ManifestRecord parse_record(const nlohmann::json& j, const fs::path& base, std::size_t line) {
  auto fail = [line](const std::string& msg) -> DataError {
    return DataError("manifest line " + std::to_string(line) + ": " + msg);
  };
  if (!j.is_object()) throw fail("record is not a JSON object");
  for (const auto& [key, _] : j.items()) {
    if (key != "id" && key != "claim_doc" && key != "evidence_docs" && key != "label" &&
        key != "image_key") {
      throw fail("unknown field '" + key + "'");
    }
  }
  ManifestRecord r;
  if (!j.contains("id") || !j["id"].is_string()) throw fail("missing string field 'id'");
  if (!j.contains("claim_doc") || !j["claim_doc"].is_string()) {
    throw fail("missing string field 'claim_doc'");
  }
  if (!j.contains("evidence_docs") || !j["evidence_docs"].is_array()) {
    throw fail("missing array field 'evidence_docs'");
  }
  if (!j.contains("label") || !j["label"].is_number_integer()) {
    throw fail("missing integer field 'label'");
  }
  r.id = j["id"].get<std::string>();
  r.claim_doc = j["claim_doc"].get<std::string>();
  for (const auto& e : j["evidence_docs"]) {
    if (!e.is_string()) throw fail("evidence_docs entries must be strings");
    r.evidence_docs.push_back(e.get<std::string>());
  }
  r.label = j["label"].get<int>();
  if (r.label != 0 && r.label != 1) throw fail("label must be 0 or 1");
  if (j.contains("image_key") && !j["image_key"].is_null()) {
    if (!j["image_key"].is_string()) throw fail("image_key must be a string");
    r.image_key = j["image_key"].get<std::string>();
  }
  r.claim_path = resolve(base, r.claim_doc);
  for (const auto& e : r.evidence_docs) r.evidence_paths.push_back(resolve(base, e));
  return r;
}

}  // namespace

DatasetManifest load_manifest(const std::string& path, bool check_files) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open manifest: " + path);
  const fs::path base = fs::path(path).parent_path();

  DatasetManifest manifest;
  manifest.path = path;
  std::set<std::string> ids;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    nlohmann::json j;
    try {
      j = nlohmann::json::parse(line);
    } catch (const nlohmann::json::parse_error& e) {
      throw DataError("manifest line " + std::to_string(line_no) + ": " + e.what());
    }
    auto record = parse_record(j, base, line_no);
    if (!ids.insert(record.id).second) {
      throw DataError("manifest line " + std::to_string(line_no) + ": duplicate id '" +
                      record.id + "'");
    }
    manifest.records.push_back(std::move(record));
  }

  if (check_files) {
    std::vector<std::string> missing;
    for (const auto& r : manifest.records) {
      if (!fs::exists(r.claim_path)) missing.push_back(r.claim_path);
      for (const auto& e : r.evidence_paths) {
        if (!fs::exists(e)) missing.push_back(e);
      }
    }
    if (!missing.empty()) {
      std::string msg = "manifest references " + std::to_string(missing.size()) +
                        " missing file(s):";
      for (const auto& m : missing) msg += "\n  " + m;
      throw DataError(msg);
    }
  }
  return manifest;
}

}  // namespace egmmg::ingest
