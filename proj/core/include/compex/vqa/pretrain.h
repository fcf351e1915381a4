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

#ifndef COMPEX_VQA_PRETRAIN_H_
#define COMPEX_VQA_PRETRAIN_H_

#include <cstdint>
#include <functional>
#include <nlohmann/json.hpp>
#include <vector>

#include "compex/vqa/predictor.h"

namespace compex::vqa {

struct PretrainHyper {
  int epochs = 30;
  double lr = 5e-4;
  int batch_size = 384;
  std::uint64_t seed = 1;

  nlohmann::ordered_json to_json() const;
};

struct EpochMetrics {
  int epoch = 0;  // 0 is the initialization, before any update
  double train_loss = 0.0;
  double heldout_accuracy = 0.0;  // NaN when there is no held-out split
};

struct PretrainResult {
  ParamStore params;
  std::vector<EpochMetrics> history;
};

/// Shuffled minibatch order for one epoch.
std::vector<std::vector<std::size_t>> make_batches(std::size_t n,
                                                   std::size_t batch_size,
                                                   numcore::Rng& rng);

/// Mean vqa_loss over `examples` at `params`, evaluated in chunks.
double mean_vqa_loss(const ParamStore& params,
                     const std::vector<const VQAExample*>& examples);

/// Minibatch Adam on vqa_loss over `train`. Accuracy on `heldout` is
/// reported per epoch and never used for selection. Throws DivergenceError
/// naming the epoch and step when the loss stops being finite.
PretrainResult pretrain(const std::vector<const VQAExample*>& train,
                        const std::vector<const VQAExample*>& heldout,
                        const VqaModelConfig& cfg, const PretrainHyper& hyper,
                        const std::function<void(const EpochMetrics&)>&
                            on_epoch = nullptr);

}  // namespace compex::vqa

#endif  // COMPEX_VQA_PRETRAIN_H_
