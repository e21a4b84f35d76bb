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
#include <functional>
#include <span>
#include <string>

#include "egmmg/autodiff.hpp"

namespace egmmg::ad {

struct GradCheckOptions {
  double h = 1e-5;
  /// 2: (f(x+h) - f(x-h)) / 2h.  4: the five-point stencil, error O(h^4).
  int order = 2;
  /// Upper bound on checked coordinates across all parameters. Small tensors
  /// are checked in full; the remaining budget is split evenly over the rest.
  std::size_t max_coords = 2000;
  std::uint64_t seed = 0;
};

struct GradCheckResult {
  double max_rel_error = 0.0;
  std::size_t coords_checked = 0;
  std::string worst_param;
  std::size_t worst_index = 0;
  double worst_analytic = 0.0;
  double worst_numeric = 0.0;
};

/// Builds the scalar loss on a fresh tape.
using LossBuilder = std::function<Var(Tape&)>;

/// Compares backward() gradients against central differences,
/// |a - n| / max(1e-8, |a| + |n|), maximized over the sampled coordinates.
/// Parameter grads are zeroed on entry and left holding the analytic gradient.
GradCheckResult grad_check(const LossBuilder& loss, std::span<Parameter* const> params,
                           const GradCheckOptions& opts = {});

}  // namespace egmmg::ad
