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

#ifndef COMPEX_VQA_PREDICTOR_H_
#define COMPEX_VQA_PREDICTOR_H_

#include <nlohmann/json.hpp>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "compex/corpus/example.h"
#include "compex/encoders/encoders.h"

namespace compex::vqa {

using corpus::VQAExample;
using numcore::ParamBinding;
using numcore::ParamStore;
using numcore::Tensor;
using numcore::Var;

/// Shapes of the answerer: question encoder, object attention and the
/// two-layer predictor over q * v.
struct VqaModelConfig {
  std::size_t vocab = 0;
  std::size_t answers = 0;
  std::size_t object_dim = 0;
  std::size_t embed = 32;
  std::size_t hidden = 64;
  std::size_t attention = 64;
  std::size_t ff_hidden = 64;
  double init_range = numcore::kInitRange;

  encoders::EncoderDims encoder_dims() const {
    return {vocab, embed, hidden, attention, object_dim, init_range};
  }
  nlohmann::ordered_json to_json() const;
  static VqaModelConfig from_json(const nlohmann::ordered_json& j);
};

/// Adds `encoder.*` and `predictor.*` entries.
void init_vqa_params(ParamStore& store, const VqaModelConfig& cfg,
                     numcore::Rng& rng);

struct Predictor {
  numcore::Linear l1;
  numcore::Linear l2;

  static Predictor bind(const ParamBinding& params,
                        const std::string& prefix = "predictor");
  /// sigmoid(relu(qv W1 + b1) W2 + b2), one row of A scores per input row.
  Var operator()(Var qv) const;
};

struct VqaOutputs {
  Var q;
  Var v;
  Var qv;
  Var probs;  // B x A
  Var alpha;  // (B * N_obj) x 1
};

/// Runs encoders and predictor on a batch. `prefix` selects a copy of the
/// parameters stored under another name (e.g. "pretrained.").
VqaOutputs vqa_forward(const ParamBinding& params,
                       const std::vector<const VQAExample*>& batch,
                       const std::string& prefix = "");

/// Soft-score targets, one row per example.
Tensor answer_targets(const std::vector<const VQAExample*>& batch,
                      std::size_t num_answers);

/// Sum over answers of bce_soft(score, target), averaged over the rows.
Var vqa_loss(Var probs, const Tensor& targets);

/// Descending by score, ties by lower answer index.
std::vector<std::pair<int, double>> topk_candidates(
    std::span<const double> scores, std::size_t k);

/// Forward results over frozen parameters, row per example.
struct VqaPredictions {
  Tensor probs;  // N x A
  Tensor qv;     // N x H
};
VqaPredictions predict(const ParamStore& params,
                       const std::vector<const VQAExample*>& examples,
                       const std::string& prefix = "",
                       std::size_t chunk = 500);

/// Mean gold soft score of each row's top answer, times 100.
double top1_accuracy(const Tensor& probs,
                     const std::vector<const VQAExample*>& examples);

}  // namespace compex::vqa

#endif  // COMPEX_VQA_PREDICTOR_H_
