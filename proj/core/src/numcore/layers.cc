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

#include "compex/numcore/layers.h"

#include <algorithm>

#include "compex/error.h"

namespace compex::numcore {

void add_linear(ParamStore& store, const std::string& prefix, std::size_t in,
                std::size_t out, Rng& rng, double range) {
  store.add_uniform(prefix + ".w", {in, out}, range, rng);
  store.add_uniform(prefix + ".b", {1, out}, range, rng);
}

Linear Linear::bind(const ParamBinding& params, const std::string& prefix) {
  return {params[prefix + ".w"], params[prefix + ".b"]};
}

Var relu(Var x) {
  const Var members[] = {x, constant(*x.tape, Tensor({x.rows(), x.cols()}, 0.0))};
  return max_over_set(members);
}

void add_gru(ParamStore& store, const std::string& prefix, std::size_t in,
             std::size_t hidden, Rng& rng, double range) {
  for (const char* gate : {"r", "z", "n"}) {
    store.add_uniform(prefix + ".w_" + gate, {in, hidden}, range, rng);
    store.add_uniform(prefix + ".u_" + gate, {hidden, hidden}, range, rng);
    store.add_uniform(prefix + ".b_" + gate, {1, hidden}, range, rng);
  }
}

Gru Gru::bind(const ParamBinding& p, const std::string& prefix) {
  return {p[prefix + ".w_r"], p[prefix + ".w_z"], p[prefix + ".w_n"],
          p[prefix + ".u_r"], p[prefix + ".u_z"], p[prefix + ".u_n"],
          p[prefix + ".b_r"], p[prefix + ".b_z"], p[prefix + ".b_n"]};
}

Var Gru::step(Var x, Var h) const {
  const Var r = sigmoid(add(add(matmul(x, w_r), matmul(h, u_r)), b_r));
  const Var z = sigmoid(add(add(matmul(x, w_z), matmul(h, u_z)), b_z));
  const Var n = tanh(add(add(matmul(x, w_n), mul(r, matmul(h, u_n))), b_n));
  return add(n, mul(z, sub(h, n)));
}

Var Gru::encode(Var embedding, const std::vector<TokenSeq>& seqs) const {
  if (seqs.empty()) throw InvalidArgument("GRU encode over an empty batch");
  std::size_t longest = 0;
  for (const TokenSeq& s : seqs) {
    if (s.empty()) throw InvalidArgument("GRU encode over an empty sequence");
    longest = std::max(longest, s.size());
  }
  Tape& tape = *embedding.tape;
  const std::size_t batch = seqs.size();
  Var h = constant(tape, Tensor({batch, hidden()}, 0.0));
  for (std::size_t t = 0; t < longest; ++t) {
    std::vector<std::size_t> ids(batch);
    Tensor mask({batch, 1}, 0.0);
    bool ragged = false;
    for (std::size_t b = 0; b < batch; ++b) {
      if (t < seqs[b].size()) {
        ids[b] = static_cast<std::size_t>(seqs[b][t]);
        mask[b] = 1.0;
      } else {
        ids[b] = static_cast<std::size_t>(seqs[b].back());
        ragged = true;
      }
    }
    const Var next = step(embedding_lookup(embedding, std::move(ids)), h);
    // Finished sequences carry their state forward unchanged; the select
    // form m*next + (1-m)*h keeps both branches bit-exact.
    if (ragged) {
      Tensor keep({batch, 1}, 0.0);
      for (std::size_t b = 0; b < batch; ++b) keep[b] = 1.0 - mask[b];
      h = add(mul(constant(tape, std::move(mask)), next),
              mul(constant(tape, std::move(keep)), h));
    } else {
      h = next;
    }
  }
  return h;
}

}  // namespace compex::numcore
