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

#ifndef COMPEX_VERIFIER_FINETUNE_H_
#define COMPEX_VERIFIER_FINETUNE_H_

#include <cstdint>
#include <functional>
#include <nlohmann/json.hpp>
#include <optional>
#include <vector>

#include "compex/corpus/example.h"
#include "compex/retrieval/index.h"
#include "compex/verifier/verifier.h"
#include "compex/vqa/predictor.h"

namespace compex::verifier {

using corpus::VQAExample;

/// The six components of the verification loss and their weighted sum,
///   total = lambda * l_m + l_r_q + l_r_v + l_r_a + l_r_x + l_r_ax,
/// evaluated left to right.
struct LossBreakdown {
  double l_m = 0.0;
  double l_r_q = 0.0;
  double l_r_v = 0.0;
  double l_r_a = 0.0;
  double l_r_x = 0.0;
  double l_r_ax = 0.0;
  double total = 0.0;
  double lambda = kDefaultLambda;

  static double compose(double lambda, double l_m, double l_r_q, double l_r_v,
                        double l_r_a, double l_r_x, double l_r_ax) {
    return lambda * l_m + l_r_q + l_r_v + l_r_a + l_r_x + l_r_ax;
  }
  bool identity_holds() const {
    return total == compose(lambda, l_m, l_r_q, l_r_v, l_r_a, l_r_x, l_r_ax);
  }
  nlohmann::ordered_json to_json() const;
};

/// Per-example record of one loss evaluation.
struct ExampleTerms {
  LossBreakdown breakdown;
  double vqae = 0.0;
  int answer = -1;            // gold answer a
  std::size_t q_partner = 0;  // batch position supplying Q'
  std::size_t v_partner = 0;  // batch position supplying V'
  std::optional<NegativeSample> negative;
  retrieval::CompetingSet negative_set;  // X_{a'}
  bool no_negative = false;
  bool empty_negative_set = false;
};

/// Supplies X_{a'} for the example at a batch position.
using NegativeSetProvider =
    std::function<retrieval::CompetingSet(const VQAExample&, int answer)>;

struct LossOptions {
  double lambda = kDefaultLambda;
  double vqae_weight = 0.1;
};

struct BatchLoss {
  Var objective;  // verification total + vqae_weight * vqae, batch mean
  Var verification;
  Var vqae;
  LossBreakdown mean;  // components averaged over the batch
  std::vector<ExampleTerms> examples;
};

/// Verification loss and the joint answer loss on one batch. The caller's
/// binding must hold encoder.*, predictor.* and verifier.* entries. Needs at
/// least two examples for the Q'/V' replacements.
///
/// Per example, with S_m = S(Q, V, a, x_a) and a' drawn from the predicted
/// scores of answers with soft score below 0.6:
///   l_m    = -log S_m
///   l_r_q  = -log(1 - S(Q', V, a, x_a))
///   l_r_v  = -log(1 - S(Q, V', a, x_a))
///   l_r_a  = -log(1 - S(Q, V, a', x_a))
///   l_r_x  = -log(1 - max_{x' in X_a'} S(Q, V, a, x'))
///   l_r_ax = -log(1 - max_{x' in X_a'} S(Q, V, a', x'))
///   vqae   = -log(P(a) S_m) - log(1 - P(a') max_{x' in X_a'} S(Q, V, a', x'))
/// Terms that need a' or a non-empty X_a' are zero and flagged when those
/// are missing.
BatchLoss verification_loss(const ParamBinding& params,
                            const std::vector<const VQAExample*>& batch,
                            const NegativeSetProvider& negative_sets,
                            numcore::Rng& rng, const LossOptions& options = {});

struct FinetuneHyper {
  int epochs = 40;
  double vqa_lr = 5e-4;
  double verifier_lr = 5e-4;
  int batch_size = 384;
  int decay_every = 5;
  double decay = 0.8;
  double lambda = kDefaultLambda;
  double vqae_weight = 0.1;
  std::size_t k_exp = retrieval::kDefaultExplanations;
  bool fixed_vqa = false;
  std::uint64_t seed = 1;

  nlohmann::ordered_json to_json() const;
};

struct StepLog {
  int epoch = 0;
  int step = 0;
  LossBreakdown breakdown;
  double vqae = 0.0;
  double objective = 0.0;
  std::vector<int> negatives;  // a' per example, -1 when none
  int no_negative = 0;
  int empty_negative_set = 0;

  nlohmann::ordered_json to_json() const;
};

struct FinetuneEpoch {
  int epoch = 0;
  double lr_scale = 1.0;
  double objective = 0.0;
  LossBreakdown breakdown;
  double heldout_accuracy = 0.0;  // top-1 of the fine-tuned predictor
};

struct FinetuneResult {
  ParamStore params;  // encoder.*, predictor.*, verifier.*
  std::vector<FinetuneEpoch> epochs;
};

/// Joint fine-tuning from `pretrained` (encoder.* and predictor.*). The index
/// must have been built against the pretrained encoder. With fixed_vqa only
/// verifier.* entries change. A custom provider replaces retrieval as the
/// source of X_{a'}.
FinetuneResult finetune(const std::vector<const VQAExample*>& train,
                        const std::vector<const VQAExample*>& heldout,
                        const retrieval::ExplanationIndex& index,
                        const ParamStore& pretrained,
                        const VerifierConfig& cfg, const FinetuneHyper& hyper,
                        const std::function<void(const StepLog&)>& on_step = nullptr,
                        const std::function<void(const FinetuneEpoch&)>& on_epoch = nullptr,
                        const NegativeSetProvider& provider = nullptr);

/// Retrieval-backed provider: the example's pretrained q * v embedding is
/// looked up in the index (by id) and its own row is excluded.
NegativeSetProvider retrieval_provider(const retrieval::ExplanationIndex& index,
                                       std::size_t k_exp);

}  // namespace compex::verifier

#endif  // COMPEX_VERIFIER_FINETUNE_H_
