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

#ifndef COMPEX_SRC_NUMCORE_KERNELS_H_
#define COMPEX_SRC_NUMCORE_KERNELS_H_

#include <vector>

#include "compex/numcore/tape.h"

namespace compex::numcore::internal {

/// Computes `node.value` from its inputs. Throws ShapeError on incompatible
/// inputs; finiteness is checked by the caller.
void evaluate(Node& node, const std::vector<Node>& nodes, NodeId id);

/// Adds the contribution of `grad` (d output / d node) to every input slot.
void backprop(const Node& node, const Tensor& grad,
              const std::vector<Node>& nodes, Gradients& grads);

}  // namespace compex::numcore::internal

#endif  // COMPEX_SRC_NUMCORE_KERNELS_H_
