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

#include "egmmg/grad_check.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "egmmg/error.hpp"
#include "egmmg/rng.hpp"

namespace egmmg::ad {
namespace {

double evaluate(const LossBuilder& loss) {
  Tape tape;
  const double v = loss(tape).item();
  if (!std::isfinite(v)) throw NumericError("grad_check: loss is not finite");
  return v;
}

// Per-parameter coordinate quotas: smallest tensors first, each taking at most
// an even share of what is left of the budget.
std::vector<std::size_t> quotas(std::span<Parameter* const> params, std::size_t budget) {
  std::vector<std::size_t> order(params.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&](auto a, auto b) { return params[a]->size() < params[b]->size(); });
  std::vector<std::size_t> quota(params.size(), 0);
  std::size_t left = 0;
  for (auto* p : params) left += p->trainable ? 1 : 0;
  for (auto i : order) {
    if (!params[i]->trainable) continue;
    const std::size_t share = std::max<std::size_t>(1, budget / left);
    quota[i] = std::min(params[i]->size(), share);
    budget -= std::min(budget, quota[i]);
    --left;
  }
  return quota;
}

}  // namespace

GradCheckResult grad_check(const LossBuilder& loss, std::span<Parameter* const> params,
                           const GradCheckOptions& opts) {
  for (auto* p : params) p->zero_grad();
  {
    Tape tape;
    const Var l = loss(tape);
    if (!std::isfinite(l.item())) throw NumericError("grad_check: loss is not finite");
    tape.backward(l);
  }

  if (opts.order != 2 && opts.order != 4) throw ConfigError("grad_check: order must be 2 or 4");
  Rng rng(opts.seed);
  const auto quota = quotas(params, opts.max_coords);
  GradCheckResult result;
  for (std::size_t pi = 0; pi < params.size(); ++pi) {
    Parameter& p = *params[pi];
    if (!p.trainable) continue;
    const std::size_t n = p.size();
    std::vector<std::size_t> coords(n);
    std::iota(coords.begin(), coords.end(), 0);
    if (quota[pi] < n) {
      // Partial Fisher-Yates: the first quota entries are a uniform sample.
      for (std::size_t k = 0; k < quota[pi]; ++k) std::swap(coords[k], coords[k + rng.index(n - k)]);
      coords.resize(quota[pi]);
    }
    for (auto c : coords) {
      double& x = p.value.data()[c];
      const double saved = x;
      auto at = [&](double offset) {
        x = saved + offset;
        const double v = evaluate(loss);
        x = saved;
        return v;
      };
      const double h = opts.h;
      const double d1 = at(h) - at(-h);
      const double numeric =
          opts.order == 4 ? (8.0 * d1 - (at(2.0 * h) - at(-2.0 * h))) / (12.0 * h) : d1 / (2.0 * h);
      const double analytic = p.grad.data()[c];
      const double err =
          std::abs(analytic - numeric) / std::max(1e-8, std::abs(analytic) + std::abs(numeric));
      ++result.coords_checked;
      if (err > result.max_rel_error || result.coords_checked == 1) {
        result.max_rel_error = std::max(result.max_rel_error, err);
        result.worst_param = p.name;
        result.worst_index = c;
        result.worst_analytic = analytic;
        result.worst_numeric = numeric;
      }
    }
  }
  return result;
}

}  // namespace egmmg::ad
