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

#ifndef COMPEX_NUMCORE_GRAD_CHECK_H_
#define COMPEX_NUMCORE_GRAD_CHECK_H_

#include <functional>
#include <string>

#include "compex/numcore/param_store.h"

namespace compex::numcore {

/// Builds a scalar on `tape` from the bound parameters.
using ScalarFn = std::function<Var(Tape&, const ParamBinding&)>;

struct GradCheckResult {
  double max_rel_error = 0.0;
  std::string worst_param;
  std::size_t worst_index = 0;
  std::size_t coordinates = 0;  // compared coordinates
  std::size_t kinked = 0;       // skipped: the stencil crossed a max/relu switch
};

enum class Stencil {
  kCentral,    // (f(x+h) - f(x-h)) / 2h
  kFivePoint,  // (8(f(x+h) - f(x-h)) - (f(x+2h) - f(x-2h))) / 12h
};

/// Compares reverse-mode gradients with finite differences at `point`.
/// Per coordinate the error is |analytic - numeric| /
/// max(1e-8, |analytic| + |numeric|); the maximum is reported. Perturbed
/// evaluations replay the recorded tape, so a non-finite value at any
/// perturbation raises NonFiniteError. A coordinate whose stencil changes
/// the winner of any max (relu included) is not differentiable inside the
/// window; it is counted in `kinked` and left out of the maximum.
///
/// The central stencil bottoms out near 1e-11 absolute error, which is above
/// 1e-4 relative for gradients smaller than about 1e-7; the five-point
/// stencil reaches about 1e-12 with a step near 1e-4.
GradCheckResult grad_check(const ScalarFn& fn, const ParamStore& point,
                           double step = 1e-5, Stencil stencil = Stencil::kCentral);

}  // namespace compex::numcore

#endif  // COMPEX_NUMCORE_GRAD_CHECK_H_
