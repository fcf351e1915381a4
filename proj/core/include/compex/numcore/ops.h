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

#ifndef COMPEX_NUMCORE_OPS_H_
#define COMPEX_NUMCORE_OPS_H_

#include <cstddef>
#include <span>
#include <vector>

#include "compex/numcore/tape.h"
#include "compex/numcore/tensor.h"

namespace compex::numcore {

/// Handle to a node on a tape.
struct Var {
  Tape* tape = nullptr;
  NodeId id = 0;

  const Tensor& value() const { return tape->value(id); }
  std::size_t rows() const { return value().rows(); }
  std::size_t cols() const { return value().cols(); }
};

Var leaf(Tape& tape, std::string name, Tensor value);
Var constant(Tape& tape, Tensor value);

Var matmul(Var a, Var b);

// add and mul broadcast: each dimension must match or be 1 on one side.
Var add(Var a, Var b);
Var mul(Var a, Var b);

/// axis 1 joins columns (rows must agree), axis 0 stacks rows.
Var concat(std::span<const Var> parts, std::size_t axis = 1);

Var sigmoid(Var x);
Var tanh(Var x);

/// Softmax across the columns of each row.
Var softmax_rows(Var x);
/// Softmax down each column within each row segment
/// [offsets[g], offsets[g+1]).
Var softmax_segments(Var x, std::vector<std::size_t> offsets);

/// Elementwise max / mean across same-shaped tensors.
Var max_over_set(std::span<const Var> members);
Var mean_over_set(std::span<const Var> members);
/// Per-column max / mean over each row segment; output has one row per
/// segment. Segments must be non-empty.
Var max_over_segments(Var x, std::vector<std::size_t> offsets);
Var mean_over_segments(Var x, std::vector<std::size_t> offsets);

/// Gathers rows of `table`.
Var embedding_lookup(Var table, std::vector<std::size_t> ids);

/// sum_i w_i * ( -t_i log p_i - (1 - t_i) log(1 - p_i) ), p clamped into
/// [kProbEpsilon, 1 - kProbEpsilon]. Targets must lie in [0, 1].
Var bce_soft(Var prediction, Tensor target, Tensor weight);
Var bce_soft(Var prediction, Tensor target);

/// Scalar closed form of bce_soft for one prediction.
double bce_soft_value(double prediction, double target);

// Convenience helpers that record one primitive with a constant operand.
Var scale(Var x, double factor);
Var add_scalar(Var x, double offset);
Var sub(Var a, Var b);

/// Equal-length segment offsets: {0, n, 2n, ..., groups*n}.
std::vector<std::size_t> uniform_offsets(std::size_t groups, std::size_t n);

}  // namespace compex::numcore

#endif  // COMPEX_NUMCORE_OPS_H_
