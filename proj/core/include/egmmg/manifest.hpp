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

#include <optional>
#include <string>
#include <vector>

namespace egmmg::ingest {

/// One line of a dataset manifest. Document references are stored as written
/// in the manifest (they double as document ids); `*_path` members hold the
/// paths resolved against the manifest's directory.
struct ManifestRecord {
  std::string id;
  std::string claim_doc;
  std::vector<std::string> evidence_docs;
  int label = 0;
  std::optional<std::string> image_key;

  std::string claim_path;
  std::vector<std::string> evidence_paths;
};

struct DatasetManifest {
  std::string path;
  std::vector<ManifestRecord> records;
};

/// Loads a JSON Lines manifest (`id`, `claim_doc`, `evidence_docs`, `label`,
/// optional `image_key`). With `check_files`, every referenced document must
/// exist; all missing files are reported together in one DataError.
DatasetManifest load_manifest(const std::string& path, bool check_files = true);

}  // namespace egmmg::ingest
