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

// Composite layers built only from the tape primitives.

#ifndef COMPEX_NUMCORE_LAYERS_H_
#define COMPEX_NUMCORE_LAYERS_H_

#include <string>
#include <vector>

#include "compex/numcore/ops.h"
#include "compex/numcore/param_store.h"
#include "compex/numcore/rng.h"

namespace compex::numcore {

/// Default uniform init range.
inline constexpr double kInitRange = 0.08;

using TokenSeq = std::vector<int>;

/// `<prefix>.w` (in x out) and `<prefix>.b` (1 x out).
void add_linear(ParamStore& store, const std::string& prefix, std::size_t in,
                std::size_t out, Rng& rng, double range = kInitRange);

struct Linear {
  Var w;
  Var b;

  static Linear bind(const ParamBinding& params, const std::string& prefix);
  Var operator()(Var x) const { return add(matmul(x, w), b); }
};

/// max(x, 0), as a max over the set {x, 0}.
Var relu(Var x);

/// Single-layer GRU, parameters `<prefix>.{w,u,b}_{r,z,n}`.
void add_gru(ParamStore& store, const std::string& prefix, std::size_t in,
             std::size_t hidden, Rng& rng, double range = kInitRange);

struct Gru {
  Var w_r, w_z, w_n;
  Var u_r, u_z, u_n;
  Var b_r, b_z, b_n;

  static Gru bind(const ParamBinding& params, const std::string& prefix);
  std::size_t hidden() const { return u_r.cols(); }

  /// r = s(x W_r + h U_r + b_r), z = s(x W_z + h U_z + b_z),
  /// n = tanh(x W_n + r * (h U_n) + b_n), h' = n + z * (h - n).
  Var step(Var x, Var h) const;

  /// Runs every sequence through the cell starting from a zero state and
  /// returns the last hidden state of each (one row per sequence). Token ids
  /// index rows of `embedding`. Empty sequences are rejected.
  Var encode(Var embedding, const std::vector<TokenSeq>& seqs) const;
};

}  // namespace compex::numcore

#endif  // COMPEX_NUMCORE_LAYERS_H_
