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

#include "compex/encoders/encoders.h"

#include <algorithm>

#include "compex/error.h"

namespace compex::encoders {

using numcore::Tape;

void add_text_encoder(ParamStore& store, const std::string& prefix,
                      std::size_t vocab, std::size_t embed, std::size_t hidden,
                      numcore::Rng& rng, double range) {
  store.add_uniform(prefix + ".embed", {vocab, embed}, range, rng);
  numcore::add_gru(store, prefix + ".gru", embed, hidden, rng, range);
}

TextEncoder TextEncoder::bind(const ParamBinding& params,
                              const std::string& prefix) {
  return {params[prefix + ".embed"],
          numcore::Gru::bind(params, prefix + ".gru")};
}

Var TextEncoder::encode(const std::vector<TokenSeq>& seqs) const {
  const std::size_t vocab = embed.rows();
  for (const TokenSeq& s : seqs) {
    for (int id : s) {
      if (id < 0 || static_cast<std::size_t>(id) >= vocab) {
        throw InvalidArgument("token id " + std::to_string(id) +
                              " outside embedding table of " +
                              std::to_string(vocab) + " rows");
      }
    }
  }
  return gru.encode(embed, seqs);
}

void add_encoder(ParamStore& store, const EncoderDims& dims, numcore::Rng& rng,
                 const std::string& prefix) {
  if (dims.vocab == 0 || dims.object_dim == 0 || dims.embed == 0 ||
      dims.hidden == 0 || dims.attention == 0) {
    throw InvalidArgument("encoder dimensions must be positive");
  }
  const double r = dims.init_range;
  add_text_encoder(store, prefix + ".question", dims.vocab, dims.embed,
                   dims.hidden, rng, r);
  store.add_uniform(prefix + ".att.q", {dims.hidden, dims.attention}, r, rng);
  store.add_uniform(prefix + ".att.o", {dims.object_dim, dims.attention}, r,
                    rng);
  store.add_uniform(prefix + ".att.b", {1, dims.attention}, r, rng);
  store.add_uniform(prefix + ".att.w", {dims.attention, 1}, r, rng);
  numcore::add_linear(store, prefix + ".v_proj", dims.object_dim, dims.hidden,
                      rng, r);
}

Encoder Encoder::bind(const ParamBinding& params, const std::string& prefix) {
  Encoder e;
  e.question = TextEncoder::bind(params, prefix + ".question");
  e.att_q = params[prefix + ".att.q"];
  e.att_o = params[prefix + ".att.o"];
  e.att_b = params[prefix + ".att.b"];
  e.att_w = params[prefix + ".att.w"];
  e.v_proj = numcore::Linear::bind(params, prefix + ".v_proj");
  return e;
}

VisualEncoding Encoder::encode_visual(Var objects, Var q,
                                      std::size_t n_obj) const {
  const std::size_t batch = q.rows();
  if (n_obj == 0) throw InvalidArgument("visual encoding over an empty object set");
  if (objects.rows() != batch * n_obj) {
    throw ShapeError("object rows " + std::to_string(objects.rows()) +
                     " != batch " + std::to_string(batch) + " x " +
                     std::to_string(n_obj) + " objects");
  }
  std::vector<std::size_t> owner(batch * n_obj);
  for (std::size_t i = 0; i < owner.size(); ++i) owner[i] = i / n_obj;
  const Var q_part = numcore::embedding_lookup(matmul(q, att_q), std::move(owner));
  const Var hidden = numcore::tanh(add(add(q_part, matmul(objects, att_o)), att_b));
  const std::vector<std::size_t> offsets = numcore::uniform_offsets(batch, n_obj);
  const Var alpha = numcore::softmax_segments(matmul(hidden, att_w), offsets);
  // Sum of alpha_i o_i per example, written as n_obj * mean.
  const Var pooled = numcore::scale(
      numcore::mean_over_segments(mul(alpha, objects), offsets),
      static_cast<double>(n_obj));
  return {v_proj(pooled), alpha};
}

Var stack_objects(Tape& tape, const std::vector<const Tensor*>& sets) {
  if (sets.empty()) throw InvalidArgument("no object sets to stack");
  const std::size_t n = sets.front()->rows();
  const std::size_t d = sets.front()->cols();
  std::vector<double> data;
  data.reserve(sets.size() * n * d);
  for (const Tensor* t : sets) {
    if (t->rows() != n || t->cols() != d) {
      throw ShapeError("object sets differ in shape: " +
                       numcore::shape_string(t->shape()) + " vs [" +
                       std::to_string(n) + ", " + std::to_string(d) + "]");
    }
    data.insert(data.end(), t->storage().begin(), t->storage().end());
  }
  return numcore::constant(tape,
                           Tensor::matrix(sets.size() * n, d, std::move(data)));
}

Var qv_embedding(Var q, Var v) {
  if (q.value().shape() != v.value().shape()) {
    throw ShapeError("q and v differ in shape: " +
                     numcore::shape_string(q.value().shape()) + " vs " +
                     numcore::shape_string(v.value().shape()));
  }
  return mul(q, v);
}

Tensor qv_embedding(const Tensor& q, const Tensor& v) {
  if (q.shape() != v.shape()) {
    throw ShapeError("q and v differ in shape: " + numcore::shape_string(q.shape()) +
                     " vs " + numcore::shape_string(v.shape()));
  }
  Tensor out = q;
  for (std::size_t i = 0; i < out.size(); ++i) out[i] *= v[i];
  return out;
}

Tensor embed_answer(int answer_id, std::size_t num_answers) {
  if (answer_id < 0 || static_cast<std::size_t>(answer_id) >= num_answers) {
    throw InvalidArgument("answer id " + std::to_string(answer_id) +
                          " outside [0, " + std::to_string(num_answers) + ")");
  }
  Tensor t({1, num_answers}, 0.0);
  t[answer_id] = 1.0;
  return t;
}

Tensor encode_question(const TokenSeq& tokens, const ParamStore& params,
                       const std::string& prefix) {
  Tape tape;
  ParamBinding bound(tape, params, [](const std::string&) { return false; });
  return TextEncoder::bind(bound, prefix + ".question").encode({tokens}).value();
}

Tensor encode_explanation(const TokenSeq& tokens, const ParamStore& params,
                          const std::string& prefix) {
  Tape tape;
  ParamBinding bound(tape, params, [](const std::string&) { return false; });
  return TextEncoder::bind(bound, prefix).encode({tokens}).value();
}

VisualResult encode_visual(const Tensor& objects, const Tensor& q,
                           const ParamStore& params, const std::string& prefix) {
  Tape tape;
  ParamBinding bound(tape, params, [](const std::string&) { return false; });
  const Encoder enc = Encoder::bind(bound, prefix);
  const VisualEncoding out =
      enc.encode_visual(numcore::constant(tape, objects),
                        numcore::constant(tape, q), objects.rows());
  const auto& a = out.alpha.value().storage();
  return {out.v.value(), {a.begin(), a.end()}};
}

}  // namespace compex::encoders
