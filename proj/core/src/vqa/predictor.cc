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

#include "compex/vqa/predictor.h"

#include <algorithm>
#include <numeric>

#include "compex/error.h"

namespace compex::vqa {

nlohmann::ordered_json VqaModelConfig::to_json() const {
  return {{"vocab", vocab},         {"answers", answers},
          {"object_dim", object_dim}, {"embed", embed},
          {"hidden", hidden},       {"attention", attention},
          {"ff_hidden", ff_hidden}, {"init_range", init_range}};
}

VqaModelConfig VqaModelConfig::from_json(const nlohmann::ordered_json& j) {
  VqaModelConfig c;
  try {
    c.vocab = j.at("vocab").get<std::size_t>();
    c.answers = j.at("answers").get<std::size_t>();
    c.object_dim = j.at("object_dim").get<std::size_t>();
    c.embed = j.at("embed").get<std::size_t>();
    c.hidden = j.at("hidden").get<std::size_t>();
    c.attention = j.at("attention").get<std::size_t>();
    c.ff_hidden = j.at("ff_hidden").get<std::size_t>();
    c.init_range = j.at("init_range").get<double>();
  } catch (const nlohmann::json::exception& e) {
    throw SchemaError(std::string("model config: ") + e.what());
  }
  return c;
}

void init_vqa_params(ParamStore& store, const VqaModelConfig& cfg,
                     numcore::Rng& rng) {
  if (cfg.answers == 0) throw InvalidArgument("answer space is empty");
  if (cfg.ff_hidden == 0) throw InvalidArgument("ff_hidden must be positive");
  if (!(cfg.init_range > 0.0)) throw InvalidArgument("init_range must be positive");
  encoders::add_encoder(store, cfg.encoder_dims(), rng);
  numcore::add_linear(store, "predictor.l1", cfg.hidden, cfg.ff_hidden, rng,
                      cfg.init_range);
  numcore::add_linear(store, "predictor.l2", cfg.ff_hidden, cfg.answers, rng,
                      cfg.init_range);
}

Predictor Predictor::bind(const ParamBinding& params, const std::string& prefix) {
  return {numcore::Linear::bind(params, prefix + ".l1"),
          numcore::Linear::bind(params, prefix + ".l2")};
}

Var Predictor::operator()(Var qv) const {
  return numcore::sigmoid(l2(numcore::relu(l1(qv))));
}

VqaOutputs vqa_forward(const ParamBinding& params,
                       const std::vector<const VQAExample*>& batch,
                       const std::string& prefix) {
  if (batch.empty()) throw InvalidArgument("empty batch");
  numcore::Tape& tape = *params[prefix + "encoder.att.q"].tape;
  const encoders::Encoder enc = encoders::Encoder::bind(params, prefix + "encoder");
  std::vector<numcore::TokenSeq> questions;
  std::vector<const Tensor*> objects;
  questions.reserve(batch.size());
  objects.reserve(batch.size());
  for (const VQAExample* ex : batch) {
    if (ex->question_tokens.empty()) {
      throw InvalidArgument("example '" + ex->id + "' has an empty question");
    }
    questions.push_back(ex->question_tokens);
    objects.push_back(ex->objects);
  }
  VqaOutputs out;
  out.q = enc.encode_questions(questions);
  const encoders::VisualEncoding vis = enc.encode_visual(
      encoders::stack_objects(tape, objects), out.q, objects.front()->rows());
  out.v = vis.v;
  out.alpha = vis.alpha;
  out.qv = encoders::qv_embedding(out.q, out.v);
  out.probs = Predictor::bind(params, prefix + "predictor")(out.qv);
  return out;
}

Tensor answer_targets(const std::vector<const VQAExample*>& batch,
                      std::size_t num_answers) {
  Tensor t({batch.size(), num_answers}, 0.0);
  for (std::size_t b = 0; b < batch.size(); ++b) {
    for (const auto& [id, score] : batch[b]->answer_scores) {
      if (static_cast<std::size_t>(id) >= num_answers) {
        throw InvalidArgument("answer id outside the answer space");
      }
      t.at(b, id) = score;
    }
  }
  return t;
}

Var vqa_loss(Var probs, const Tensor& targets) {
  Tensor weight(targets.shape(), 1.0 / static_cast<double>(targets.rows()));
  return numcore::bce_soft(probs, targets, std::move(weight));
}

std::vector<std::pair<int, double>> topk_candidates(
    std::span<const double> scores, std::size_t k) {
  if (k < 1 || k > scores.size()) {
    throw InvalidArgument("k=" + std::to_string(k) + " outside [1, " +
                          std::to_string(scores.size()) + "]");
  }
  std::vector<int> order(scores.size());
  std::iota(order.begin(), order.end(), 0);
  std::partial_sort(order.begin(), order.begin() + k, order.end(),
                    [&](int a, int b) {
                      if (scores[a] != scores[b]) return scores[a] > scores[b];
                      return a < b;
                    });
  std::vector<std::pair<int, double>> out;
  out.reserve(k);
  for (std::size_t i = 0; i < k; ++i) out.emplace_back(order[i], scores[order[i]]);
  return out;
}

VqaPredictions predict(const ParamStore& params,
                       const std::vector<const VQAExample*>& examples,
                       const std::string& prefix, std::size_t chunk) {
  if (examples.empty()) throw InvalidArgument("no examples to predict");
  const std::size_t answers = params.get(prefix + "predictor.l2.b").cols();
  const std::size_t hidden = params.get(prefix + "encoder.v_proj.b").cols();
  VqaPredictions out{Tensor({examples.size(), answers}),
                     Tensor({examples.size(), hidden})};
  // Only the parameters under `prefix` are bound.
  ParamStore view;
  view.import_prefix(params, prefix + "encoder.", prefix + "encoder.");
  view.import_prefix(params, prefix + "predictor.", prefix + "predictor.");
  for (std::size_t start = 0; start < examples.size(); start += chunk) {
    const std::size_t end = std::min(examples.size(), start + chunk);
    const std::vector<const VQAExample*> batch(examples.begin() + start,
                                               examples.begin() + end);
    numcore::Tape tape;
    ParamBinding bound(tape, view, [](const std::string&) { return false; });
    const VqaOutputs o = vqa_forward(bound, batch, prefix);
    std::copy(o.probs.value().storage().begin(), o.probs.value().storage().end(),
              out.probs.storage().begin() + start * answers);
    std::copy(o.qv.value().storage().begin(), o.qv.value().storage().end(),
              out.qv.storage().begin() + start * hidden);
  }
  return out;
}

double top1_accuracy(const Tensor& probs,
                     const std::vector<const VQAExample*>& examples) {
  if (examples.empty()) return 0.0;
  if (probs.rows() != examples.size()) {
    throw ShapeError("prediction rows do not match the example count");
  }
  double total = 0.0;
  const std::size_t a = probs.cols();
  for (std::size_t i = 0; i < examples.size(); ++i) {
    const auto top = topk_candidates(probs.data().subspan(i * a, a), 1);
    total += examples[i]->score_of(top.front().first);
  }
  return 100.0 * total / static_cast<double>(examples.size());
}

}  // namespace compex::vqa
