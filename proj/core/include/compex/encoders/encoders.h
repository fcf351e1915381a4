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

#ifndef COMPEX_ENCODERS_ENCODERS_H_
#define COMPEX_ENCODERS_ENCODERS_H_

#include <string>
#include <vector>

#include "compex/numcore/layers.h"
#include "compex/numcore/param_store.h"

namespace compex::encoders {

using numcore::ParamBinding;
using numcore::ParamStore;
using numcore::Tensor;
using numcore::TokenSeq;
using numcore::Var;

struct EncoderDims {
  std::size_t vocab = 0;
  std::size_t embed = 32;
  std::size_t hidden = 64;
  std::size_t attention = 64;
  std::size_t object_dim = 0;
  double init_range = numcore::kInitRange;
};

/// Word embedding plus a single-layer GRU: `<prefix>.embed` (vocab x embed)
/// and `<prefix>.gru.*`.
void add_text_encoder(ParamStore& store, const std::string& prefix,
                      std::size_t vocab, std::size_t embed, std::size_t hidden,
                      numcore::Rng& rng, double range = numcore::kInitRange);

struct TextEncoder {
  Var embed;
  numcore::Gru gru;

  static TextEncoder bind(const ParamBinding& params, const std::string& prefix);
  /// Last hidden state per sequence, one row each. Empty sequences are
  /// rejected.
  Var encode(const std::vector<TokenSeq>& seqs) const;
};

/// Question encoder, object attention and the projection of the attended
/// features into the question space, all under `<prefix>.`.
void add_encoder(ParamStore& store, const EncoderDims& dims, numcore::Rng& rng,
                 const std::string& prefix = "encoder");

struct VisualEncoding {
  Var v;      // B x H
  Var alpha;  // (B * N_obj) x 1, one softmax per example
};

struct Encoder {
  TextEncoder question;
  Var att_q;  // H x K
  Var att_o;  // D_obj x K
  Var att_b;  // 1 x K
  Var att_w;  // K x 1
  numcore::Linear v_proj;

  static Encoder bind(const ParamBinding& params,
                      const std::string& prefix = "encoder");

  Var encode_questions(const std::vector<TokenSeq>& seqs) const {
    return question.encode(seqs);
  }

  /// `objects` stacks every example's object rows ((B * n_obj) x D_obj);
  /// `q` has one row per example.
  ///   logit_i = w . tanh(q W_q + o_i W_o + b)
  ///   alpha   = softmax over each example's objects
  ///   v       = (sum_i alpha_i o_i) W_v + b_v
  VisualEncoding encode_visual(Var objects, Var q, std::size_t n_obj) const;
};

/// Stacks object matrices (all the same shape) into one constant.
Var stack_objects(numcore::Tape& tape, const std::vector<const Tensor*>& sets);

/// q * v elementwise; shapes must match.
Var qv_embedding(Var q, Var v);
Tensor qv_embedding(const Tensor& q, const Tensor& v);

/// One-hot row of length `num_answers`.
Tensor embed_answer(int answer_id, std::size_t num_answers);

// Single-example conveniences over frozen parameters.
Tensor encode_question(const TokenSeq& tokens, const ParamStore& params,
                       const std::string& prefix = "encoder");
Tensor encode_explanation(const TokenSeq& tokens, const ParamStore& params,
                          const std::string& prefix);
struct VisualResult {
  Tensor v;
  std::vector<double> alpha;
};
VisualResult encode_visual(const Tensor& objects, const Tensor& q,
                           const ParamStore& params,
                           const std::string& prefix = "encoder");

}  // namespace compex::encoders

#endif  // COMPEX_ENCODERS_ENCODERS_H_
