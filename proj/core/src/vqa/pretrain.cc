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

#include "compex/vqa/pretrain.h"

#include <cmath>
#include <limits>
#include <numeric>

#include "compex/error.h"
#include "compex/numcore/adam.h"

namespace compex::vqa {

nlohmann::ordered_json PretrainHyper::to_json() const {
  return {{"epochs", epochs},
          {"lr", lr},
          {"batch_size", batch_size},
          {"seed", seed}};
}

std::vector<std::vector<std::size_t>> make_batches(std::size_t n,
                                                   std::size_t batch_size,
                                                   numcore::Rng& rng) {
  if (batch_size == 0) throw InvalidArgument("batch size must be positive");
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  for (std::size_t i = n; i > 1; --i) {
    std::swap(order[i - 1], order[rng.uniform_index(i)]);
  }
  std::vector<std::vector<std::size_t>> batches;
  for (std::size_t start = 0; start < n; start += batch_size) {
    batches.emplace_back(order.begin() + start,
                         order.begin() + std::min(n, start + batch_size));
  }
  return batches;
}

double mean_vqa_loss(const ParamStore& params,
                     const std::vector<const VQAExample*>& examples) {
  if (examples.empty()) throw InvalidArgument("no examples");
  const VqaPredictions pred = predict(params, examples);
  const Tensor targets = answer_targets(examples, pred.probs.cols());
  double total = 0.0;
  for (std::size_t i = 0; i < targets.size(); ++i) {
    total += numcore::bce_soft_value(pred.probs[i], targets[i]);
  }
  return total / static_cast<double>(examples.size());
}

PretrainResult pretrain(const std::vector<const VQAExample*>& train,
                        const std::vector<const VQAExample*>& heldout,
                        const VqaModelConfig& cfg, const PretrainHyper& hyper,
                        const std::function<void(const EpochMetrics&)>& on_epoch) {
  if (train.empty()) throw InvalidArgument("pretraining needs a non-empty train split");
  if (hyper.epochs < 0) throw InvalidArgument("epochs must be non-negative");
  if (hyper.batch_size <= 0) throw InvalidArgument("batch size must be positive");
  if (!(hyper.lr > 0.0)) throw InvalidArgument("learning rate must be positive");

  PretrainResult result;
  numcore::Rng init_rng = numcore::Rng::derive(hyper.seed, "vqa-init");
  init_vqa_params(result.params, cfg, init_rng);
  numcore::Rng order_rng = numcore::Rng::derive(hyper.seed, "pretrain-order");

  auto heldout_accuracy = [&]() {
    if (heldout.empty()) return std::numeric_limits<double>::quiet_NaN();
    return top1_accuracy(predict(result.params, heldout).probs, heldout);
  };
  auto emit = [&](EpochMetrics m) {
    result.history.push_back(m);
    if (on_epoch) on_epoch(m);
  };
  emit({0, mean_vqa_loss(result.params, train), heldout_accuracy()});

  numcore::Adam adam;
  for (int epoch = 1; epoch <= hyper.epochs; ++epoch) {
    double loss_sum = 0.0;
    std::size_t step = 0;
    for (const auto& idx : make_batches(train.size(), hyper.batch_size, order_rng)) {
      ++step;
      std::vector<const VQAExample*> batch;
      batch.reserve(idx.size());
      for (std::size_t i : idx) batch.push_back(train[i]);
      numcore::Tape tape;
      ParamBinding bound(tape, result.params);
      std::map<std::string, Tensor> grads;
      double loss = 0.0;
      try {
        const VqaOutputs out = vqa_forward(bound, batch);
        const Var l = vqa_loss(out.probs, answer_targets(batch, cfg.answers));
        loss = l.value().item();
        grads = bound.gradients(l);
      } catch (const NonFiniteError& e) {
        throw DivergenceError("pretrain epoch " + std::to_string(epoch) +
                              " step " + std::to_string(step) + ": " + e.what());
      }
      if (!std::isfinite(loss)) {
        throw DivergenceError("pretrain epoch " + std::to_string(epoch) +
                              " step " + std::to_string(step) +
                              ": loss is not finite");
      }
      adam.step(result.params, grads, hyper.lr);
      loss_sum += loss * static_cast<double>(batch.size());
    }
    emit({epoch, loss_sum / static_cast<double>(train.size()),
          heldout_accuracy()});
  }
  return result;
}

}  // namespace compex::vqa
