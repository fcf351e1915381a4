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

#ifndef COMPEX_GENERATOR_EXPLAINER_H_
#define COMPEX_GENERATOR_EXPLAINER_H_

#include <cstdint>
#include <functional>
#include <map>
#include <nlohmann/json.hpp>
#include <string>
#include <vector>

#include "compex/corpus/example.h"
#include "compex/corpus/vocabulary.h"
#include "compex/numcore/layers.h"
#include "compex/retrieval/index.h"

namespace compex::generator {

using numcore::ParamBinding;
using numcore::ParamStore;
using numcore::Tensor;
using numcore::TokenSeq;
using numcore::Var;

inline constexpr std::size_t kDefaultSamples = 8;

struct GeneratorConfig {
  std::size_t vocab = 0;
  std::size_t answers = 0;
  std::size_t object_dim = 0;
  std::size_t question_dim = 64;  // width of the encoder's q
  std::size_t embed = 32;
  std::size_t hidden = 64;
  std::size_t attention = 64;
  double init_range = numcore::kInitRange;

  nlohmann::ordered_json to_json() const;
  static GeneratorConfig from_json(const nlohmann::ordered_json& j);
};

/// Adds every `generator.*` entry.
void init_generator_params(ParamStore& store, const GeneratorConfig& cfg,
                           numcore::Rng& rng);

/// Per-row conditioning of the decoder. Rows are independent; R rows carry
/// R * n_obj object rows.
struct DecodeContext {
  Var fixed;     // R x (hidden + question_dim + embed): x, q, answer embedding
  Var u;         // (R * n_obj) x hidden, question-attended object features
  Var u_att;     // (R * n_obj) x attention, u projected for the attention
  std::size_t n_obj = 0;
  std::size_t rows() const { return fixed.rows(); }
};

struct DecoderState {
  Var h1;
  Var h2;
};

struct StepOutput {
  DecoderState state;
  Var probs;  // R x vocab
};

/// Two stacked GRU cells. The first reads [x, q, answer, previous word,
/// h2]; its state drives an attention over u whose result, with h1, feeds
/// the second; h2 projects onto the vocabulary.
struct Generator {
  Var pool_embed;
  numcore::Gru pool_gru;
  numcore::Linear u_obj;  // object_dim -> hidden
  Var u_q;                // question_dim x hidden
  Var word_embed;         // vocab x embed
  Var answer_embed;       // answers x embed
  numcore::Gru gru1, gru2;
  Var att_u, att_h, att_b, att_w;
  numcore::Linear out;

  static Generator bind(const ParamBinding& params,
                        const std::string& prefix = "generator");

  /// Max over the last GRU states of each set's members; an empty set gives
  /// a zero row.
  Var pool(const std::vector<std::vector<TokenSeq>>& sets) const;

  DecodeContext context(Var x, Var q, Var objects, std::size_t n_obj,
                        const std::vector<int>& answers) const;
  /// Context rows picked (and possibly repeated) by index.
  static DecodeContext select(const DecodeContext& ctx,
                              const std::vector<std::size_t>& rows);

  DecoderState initial_state(const DecodeContext& ctx) const;
  StepOutput step(const DecodeContext& ctx, const DecoderState& state,
                  const std::vector<int>& previous) const;

  /// Mean next-token cross-entropy over every target token, EOS included.
  Var teacher_forced_loss(const DecodeContext& ctx,
                          const std::vector<TokenSeq>& targets) const;
};

/// Coordinate-wise max of the member encodings. Throws for an empty set.
Tensor pool_retrieved(const retrieval::CompetingSet& set, const ParamStore& params);

struct DecodeConfig {
  enum class Mode { kBeam, kSample };
  Mode mode = Mode::kBeam;
  std::size_t beam_size = 2;
  std::size_t max_len = corpus::kMaxExplanationTokens;
  double temperature = 1.0;
  std::uint64_t seed = 1;

  void validate() const;
};

struct Decoded {
  TokenSeq tokens;     // without BOS/EOS
  double score = 0.0;  // sum of log-probabilities of the emitted tokens
  bool finished = false;  // ended with EOS rather than max_len
};

/// Conditioning for one (example, answer) pair: pretrained q, raw objects and
/// the pooled competing set (zero when the set is empty).
struct Conditioning {
  Tensor q;        // 1 x question_dim
  const Tensor* objects = nullptr;
  int answer = -1;
  Tensor x;        // 1 x hidden
};

Conditioning condition(const Tensor& q, const Tensor& objects, int answer_id,
                       const retrieval::CompetingSet& set, const ParamStore& params);

/// Greedy decode (beam_size 1) or beam search. Beam search keeps the greedy
/// result as the incumbent, so its score is never lower.
Decoded generate_explanation(const Conditioning& c, const ParamStore& params,
                             const DecodeConfig& cfg);
Decoded greedy_decode(const Conditioning& c, const ParamStore& params,
                      std::size_t max_len);

/// Model log-probability of `tokens` followed by EOS (or without EOS when
/// `with_eos` is false).
double sequence_score(const Conditioning& c, const ParamStore& params,
                      const TokenSeq& tokens, bool with_eos = true);

/// `n` temperature samples per candidate, drawn in candidate order from one
/// stream seeded by `seed`.
std::map<int, std::vector<Decoded>> sample_explanation_set(
    const std::vector<Conditioning>& candidates, const ParamStore& params,
    std::size_t n, std::uint64_t seed,
    std::size_t max_len = corpus::kMaxExplanationTokens, double temperature = 1.0);

/// Pretrained question encodings for `examples`, one row each.
Tensor question_embeddings(const ParamStore& params,
                           const std::vector<const corpus::VQAExample*>& examples,
                           const std::string& prefix = "");

struct GeneratorHyper {
  int epochs = 10;
  double lr = 5e-4;
  int batch_size = 64;
  std::size_t k_exp = retrieval::kDefaultExplanations;
  std::uint64_t seed = 1;

  nlohmann::ordered_json to_json() const;
};

struct GeneratorEpoch {
  int epoch = 0;  // 0 = before training
  double loss = 0.0;  // nats per token over the train split
};

struct GeneratorResult {
  ParamStore params;  // generator.*
  std::vector<GeneratorEpoch> history;
};

/// Teacher forcing on gold explanations. Each example is conditioned on the
/// retrieved set for its gold answer with its own row excluded; `encoder`
/// holds the pretrained encoder (under `prefix`) the index was built with.
GeneratorResult train_generator(const std::vector<const corpus::VQAExample*>& train,
                                const retrieval::ExplanationIndex& index,
                                const ParamStore& encoder, const GeneratorConfig& cfg,
                                const GeneratorHyper& hyper,
                                const std::function<void(const GeneratorEpoch&)>& on_epoch = nullptr,
                                const std::string& prefix = "");

/// {"id", "answer", "tokens", "text", "decode_score"}
nlohmann::ordered_json decoded_to_json(const std::string& id, const std::string& answer,
                                       const Decoded& d, const corpus::Vocabulary& vocab);

}  // namespace compex::generator

#endif  // COMPEX_GENERATOR_EXPLAINER_H_
