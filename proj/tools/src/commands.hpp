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

#include <iosfwd>

#include "run_config.hpp"

namespace egmmg::cli {

using Command = int (*)(const RunConfig& cfg, std::ostream& out, std::ostream& err);

int cmd_ingest(const RunConfig& cfg, std::ostream& out, std::ostream& err);
int cmd_rank(const RunConfig& cfg, std::ostream& out, std::ostream& err);
int cmd_build_graphs(const RunConfig& cfg, std::ostream& out, std::ostream& err);
int cmd_features(const RunConfig& cfg, std::ostream& out, std::ostream& err);
int cmd_train(const RunConfig& cfg, std::ostream& out, std::ostream& err);
int cmd_eval(const RunConfig& cfg, std::ostream& out, std::ostream& err);
int cmd_predict(const RunConfig& cfg, std::ostream& out, std::ostream& err);
int cmd_ablate(const RunConfig& cfg, std::ostream& out, std::ostream& err);
int cmd_gradcheck(const RunConfig& cfg, std::ostream& out, std::ostream& err);
int cmd_params(const RunConfig& cfg, std::ostream& out, std::ostream& err);

}  // namespace egmmg::cli
