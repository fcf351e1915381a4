// Copyright 2026 The Compex Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "compex/numcore/grad_check.h"

#include <algorithm>
#include <cmath>

#include "compex/error.h"

namespace compex::numcore {

GradCheckResult grad_check(const ScalarFn& fn, const ParamStore& point,
                           double step, Stencil stencil) {
  if (!(step > 0.0)) throw InvalidArgument("grad_check step must be positive");
  Tape tape;
  ParamBinding bound(tape, point);
  const Var out = fn(tape, bound);
  if (out.value().size() != 1) {
    throw ShapeError("grad_check needs a scalar-valued function");
  }
  const std::string kOut = "__grad_check_out";
  tape.mark_output(out.id, kOut);
  const std::map<std::string, Tensor> analytic = bound.gradients(out);
  const std::uint64_t base_selection = tape.selection_signature();

  std::map<std::string, Tensor> leaves = point.entries();
  GradCheckResult result;
  for (const auto& [name, grad] : analytic) {
    Tensor& slot = leaves.at(name);
    for (std::size_t i = 0; i < slot.size(); ++i) {
      const double saved = slot[i];
      bool kinked = false;
      auto at = [&](double offset) {
        slot[i] = saved + offset;
        const double v = tape.forward(leaves).at(kOut).item();
        slot[i] = saved;
        kinked = kinked || tape.selection_signature() != base_selection;
        return v;
      };
      const double central = at(step) - at(-step);
      const double numeric =
          stencil == Stencil::kCentral
              ? central / (2.0 * step)
              : (8.0 * central - (at(2.0 * step) - at(-2.0 * step))) / (12.0 * step);
      if (kinked) {
        ++result.kinked;
        continue;
      }
      const double a = grad[i];
      const double err =
          std::abs(a - numeric) / std::max(1e-8, std::abs(a) + std::abs(numeric));
      ++result.coordinates;
      if (err > result.max_rel_error) {
        result.max_rel_error = err;
        result.worst_param = name;
        result.worst_index = i;
      }
    }
  }
  return result;
}

}  // namespace compex::numcore
