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

#include "compex/verifier/finetune.h"

#include <cmath>
#include <limits>
#include <map>
#include <memory>
#include <unordered_map>

#include "compex/error.h"
#include "compex/numcore/adam.h"
#include "compex/vqa/pretrain.h"

namespace compex::verifier {
namespace {

using nlohmann::ordered_json;

Tensor column(std::size_t n, double value) {
  return Tensor::matrix(n, 1, std::vector<double>(n, value));
}

Var gather(Var x, std::vector<std::size_t> rows) {
  return numcore::embedding_lookup(x, std::move(rows));
}

// Row-wise P(answer) as a column: sum_j probs[r, j] * onehot[r, j].
Var pick(Var probs, const std::vector<int>& answers) {
  const std::size_t a = probs.cols();
  Tensor onehot = Tensor::zeros(answers.size(), a);
  for (std::size_t r = 0; r < answers.size(); ++r) {
    onehot.at(r, static_cast<std::size_t>(answers[r])) = 1.0;
  }
  return numcore::matmul(numcore::mul(probs, numcore::constant(*probs.tape, std::move(onehot))),
                         numcore::constant(*probs.tape, Tensor::ones(a, 1)));
}

Var zero(numcore::Tape& tape) { return numcore::constant(tape, Tensor::scalar(0.0)); }

std::string where(const char* phase, int epoch, int step) {
  return std::string(phase) + " epoch " + std::to_string(epoch) + " step " +
         std::to_string(step);
}

}  // namespace

ordered_json LossBreakdown::to_json() const {
  return {{"lambda", lambda}, {"l_m", l_m},   {"l_r_q", l_r_q},
          {"l_r_v", l_r_v},   {"l_r_a", l_r_a}, {"l_r_x", l_r_x},
          {"l_r_ax", l_r_ax}, {"total", total}};
}

ordered_json FinetuneHyper::to_json() const {
  return {{"epochs", epochs},           {"vqa_lr", vqa_lr},
          {"verifier_lr", verifier_lr}, {"batch_size", batch_size},
          {"decay_every", decay_every}, {"decay", decay},
          {"lambda", lambda},           {"vqae_weight", vqae_weight},
          {"k_exp", k_exp},             {"fixed_vqa", fixed_vqa},
          {"seed", seed}};
}

ordered_json StepLog::to_json() const {
  ordered_json j;
  j["epoch"] = epoch;
  j["step"] = step;
  j["breakdown"] = breakdown.to_json();
  j["vqae"] = vqae;
  j["objective"] = objective;
  j["negatives"] = negatives;
  j["no_negative"] = no_negative;
  j["empty_negative_set"] = empty_negative_set;
  return j;
}

BatchLoss verification_loss(const ParamBinding& params,
                            const std::vector<const VQAExample*>& batch,
                            const NegativeSetProvider& negative_sets,
                            numcore::Rng& rng, const LossOptions& options) {
  const std::size_t n = batch.size();
  if (n < 2) throw InvalidArgument("verification loss needs at least two examples per batch");
  if (!negative_sets) throw InvalidArgument("no negative explanation provider");

  const vqa::VqaOutputs out = vqa::vqa_forward(params, batch);
  numcore::Tape& tape = *out.probs.tape;
  const Verifier ver = Verifier::bind(params);
  const Tensor probs = out.probs.value();
  const std::size_t num_answers = probs.cols();

  BatchLoss loss;
  loss.examples.resize(n);

  // Unique explanation sequences, encoded once.
  std::map<TokenSeq, std::size_t> seq_index;
  std::vector<TokenSeq> seqs;
  auto intern = [&](const TokenSeq& s) {
    auto [it, fresh] = seq_index.emplace(s, seqs.size());
    if (fresh) seqs.push_back(s);
    return it->second;
  };

  std::vector<std::size_t> gold_x(n);
  for (std::size_t b = 0; b < n; ++b) {
    const VQAExample& ex = *batch[b];
    ExampleTerms& t = loss.examples[b];
    if (ex.explanation_tokens.empty()) {
      throw InvalidArgument("example '" + ex.id + "' has no explanation");
    }
    t.answer = ex.gold_answer();
    if (t.answer < 0) throw InvalidArgument("example '" + ex.id + "' has no gold answer");
    std::size_t j = rng.uniform_index(n - 1);
    t.q_partner = j >= b ? j + 1 : j;
    j = rng.uniform_index(n - 1);
    t.v_partner = j >= b ? j + 1 : j;
    const auto row = probs.data().subspan(b * num_answers, num_answers);
    t.negative = sample_negative_answer(row, ex.answer_scores, rng);
    t.no_negative = !t.negative.has_value();
    if (t.negative) {
      t.negative_set = negative_sets(ex, t.negative->answer);
      t.empty_negative_set = t.negative_set.empty();
    }
    gold_x[b] = intern(ex.explanation_tokens);
  }

  // Score rows: matched, Q', V', a', then members against a and against a'.
  std::vector<std::size_t> qi, vi, xi;
  std::vector<int> ai;
  auto push = [&](std::size_t q, std::size_t v, int a, std::size_t x) {
    qi.push_back(q);
    vi.push_back(v);
    ai.push_back(a);
    xi.push_back(x);
    return qi.size() - 1;
  };
  std::vector<std::size_t> m_rows, q_rows, v_rows, a_rows, x_rows, ax_rows;
  std::vector<std::size_t> set_offsets{0};
  std::vector<std::size_t> with_set;
  for (std::size_t b = 0; b < n; ++b) m_rows.push_back(push(b, b, loss.examples[b].answer, gold_x[b]));
  for (std::size_t b = 0; b < n; ++b) {
    q_rows.push_back(push(loss.examples[b].q_partner, b, loss.examples[b].answer, gold_x[b]));
  }
  for (std::size_t b = 0; b < n; ++b) {
    v_rows.push_back(push(b, loss.examples[b].v_partner, loss.examples[b].answer, gold_x[b]));
  }
  for (std::size_t b = 0; b < n; ++b) {
    const ExampleTerms& t = loss.examples[b];
    if (!t.negative) continue;
    a_rows.push_back(push(b, b, t.negative->answer, gold_x[b]));
  }
  for (std::size_t b = 0; b < n; ++b) {
    const ExampleTerms& t = loss.examples[b];
    if (!t.negative || t.empty_negative_set) continue;
    with_set.push_back(b);
    for (const auto& m : t.negative_set.members) {
      const std::size_t x = intern(m.tokens);
      x_rows.push_back(push(b, b, t.answer, x));
      ax_rows.push_back(push(b, b, t.negative->answer, x));
    }
    set_offsets.push_back(x_rows.size());
  }

  const Var px = ver.project_x(ver.encode_explanations(seqs));
  const Var s = ver.score(ver.project_q(out.q), qi, ver.project_v(out.v), vi,
                          ver.project_answers(ai), px, xi);
  const Tensor sv = s.value();
  const double w = 1.0 / static_cast<double>(n);

  const Var s_m = gather(s, m_rows);
  const Var l_m = numcore::bce_soft(s_m, column(n, 1.0), column(n, w));
  const Var l_q = numcore::bce_soft(gather(s, q_rows), column(n, 0.0), column(n, w));
  const Var l_v = numcore::bce_soft(gather(s, v_rows), column(n, 0.0), column(n, w));
  Var l_a = zero(tape), l_x = zero(tape), l_ax = zero(tape);
  if (!a_rows.empty()) {
    l_a = numcore::bce_soft(gather(s, a_rows), column(a_rows.size(), 0.0),
                            column(a_rows.size(), w));
  }
  Var max_ax;
  if (!with_set.empty()) {
    const std::size_t k = with_set.size();
    const Var max_x = numcore::max_over_segments(gather(s, x_rows), set_offsets);
    max_ax = numcore::max_over_segments(gather(s, ax_rows), set_offsets);
    l_x = numcore::bce_soft(max_x, column(k, 0.0), column(k, w));
    l_ax = numcore::bce_soft(max_ax, column(k, 0.0), column(k, w));
  }
  // Fixed summation order; LossBreakdown::compose mirrors it.
  loss.verification =
      numcore::add(numcore::add(numcore::add(numcore::add(numcore::add(
                       numcore::scale(l_m, options.lambda), l_q), l_v), l_a), l_x), l_ax);

  std::vector<int> gold(n);
  for (std::size_t b = 0; b < n; ++b) gold[b] = loss.examples[b].answer;
  const Var pos = numcore::mul(pick(out.probs, gold), s_m);
  loss.vqae = numcore::bce_soft(pos, column(n, 1.0), column(n, w));
  if (!with_set.empty()) {
    std::vector<int> neg;
    for (std::size_t b : with_set) neg.push_back(loss.examples[b].negative->answer);
    const Var p_neg = numcore::mul(pick(gather(out.probs, with_set), neg), max_ax);
    loss.vqae = numcore::add(
        loss.vqae, numcore::bce_soft(p_neg, column(with_set.size(), 0.0),
                                     column(with_set.size(), w)));
  }
  loss.objective = numcore::add(loss.verification,
                                numcore::scale(loss.vqae, options.vqae_weight));

  LossBreakdown& mean = loss.mean;
  mean.lambda = options.lambda;
  mean.l_m = l_m.value().item();
  mean.l_r_q = l_q.value().item();
  mean.l_r_v = l_v.value().item();
  mean.l_r_a = l_a.value().item();
  mean.l_r_x = l_x.value().item();
  mean.l_r_ax = l_ax.value().item();
  mean.total = loss.verification.value().item();

  // Per-example values from the same scores.
  auto neg_term = [&](double p) { return numcore::bce_soft_value(p, 0.0); };
  std::size_t a_next = 0, set_next = 0;
  for (std::size_t b = 0; b < n; ++b) {
    ExampleTerms& t = loss.examples[b];
    LossBreakdown& e = t.breakdown;
    e.lambda = options.lambda;
    const double sm = sv[m_rows[b]];
    e.l_m = numcore::bce_soft_value(sm, 1.0);
    e.l_r_q = neg_term(sv[q_rows[b]]);
    e.l_r_v = neg_term(sv[v_rows[b]]);
    const double pa = probs.at(b, static_cast<std::size_t>(t.answer));
    t.vqae = numcore::bce_soft_value(pa * sm, 1.0);
    if (t.negative) e.l_r_a = neg_term(sv[a_rows[a_next++]]);
    if (t.negative && !t.empty_negative_set) {
      double mx = -1.0, max_a = -1.0;
      for (std::size_t r = set_offsets[set_next]; r < set_offsets[set_next + 1]; ++r) {
        mx = std::max(mx, sv[x_rows[r]]);
        max_a = std::max(max_a, sv[ax_rows[r]]);
      }
      ++set_next;
      e.l_r_x = neg_term(mx);
      e.l_r_ax = neg_term(max_a);
      const double pn = probs.at(b, static_cast<std::size_t>(t.negative->answer));
      t.vqae += numcore::bce_soft_value(pn * max_a, 0.0);
    }
    e.total = LossBreakdown::compose(e.lambda, e.l_m, e.l_r_q, e.l_r_v, e.l_r_a,
                                     e.l_r_x, e.l_r_ax);
  }
  return loss;
}

NegativeSetProvider retrieval_provider(const retrieval::ExplanationIndex& index,
                                       std::size_t k_exp) {
  auto rows = std::make_shared<std::unordered_map<std::string, std::size_t>>();
  for (std::size_t r = 0; r < index.size(); ++r) rows->emplace(index.rows()[r].example_id, r);
  return [&index, rows, k_exp](const VQAExample& ex, int answer) {
    auto it = rows->find(ex.id);
    if (it == rows->end()) {
      throw InvalidArgument("example '" + ex.id + "' is not in the explanation index");
    }
    return retrieval::retrieve(index, index.built_against(),
                               index.embedding(it->second), answer, k_exp, ex.id);
  };
}

FinetuneResult finetune(const std::vector<const VQAExample*>& train,
                        const std::vector<const VQAExample*>& heldout,
                        const retrieval::ExplanationIndex& index,
                        const ParamStore& pretrained,
                        const VerifierConfig& cfg, const FinetuneHyper& hyper,
                        const std::function<void(const StepLog&)>& on_step,
                        const std::function<void(const FinetuneEpoch&)>& on_epoch,
                        const NegativeSetProvider& provider) {
  if (train.size() < 2) throw InvalidArgument("fine-tuning needs at least two train examples");
  if (hyper.epochs < 0) throw InvalidArgument("epochs must be non-negative");
  if (hyper.batch_size < 2) throw InvalidArgument("batch size must be at least 2");
  if (!(hyper.vqa_lr > 0.0) || !(hyper.verifier_lr > 0.0)) {
    throw InvalidArgument("learning rates must be positive");
  }
  if (hyper.decay_every <= 0) throw InvalidArgument("decay interval must be positive");
  index.check_fingerprint(retrieval::encoder_fingerprint(pretrained));

  ParamStore work;
  work.import_prefix(pretrained, "encoder.");
  work.import_prefix(pretrained, "predictor.");
  if (work.names_with_prefix("predictor.").empty()) {
    throw MissingArtifact("pretrained checkpoint has no predictor parameters");
  }
  numcore::Rng init_rng = numcore::Rng::derive(hyper.seed, "verifier-init");
  init_verifier_params(work, cfg, init_rng);

  const NegativeSetProvider sets = provider ? provider : retrieval_provider(index, hyper.k_exp);
  numcore::Rng order_rng = numcore::Rng::derive(hyper.seed, "finetune-order");
  numcore::Rng loss_rng = numcore::Rng::derive(hyper.seed, "finetune-negatives");
  const bool fixed = hyper.fixed_vqa;
  auto trainable = [fixed](const std::string& name) {
    return !fixed || name.rfind("verifier.", 0) == 0;
  };
  const LossOptions options{hyper.lambda, hyper.vqae_weight};

  FinetuneResult result;
  numcore::Adam adam;
  for (int epoch = 1; epoch <= hyper.epochs; ++epoch) {
    const double lr_scale = numcore::step_decay(1.0, epoch - 1, hyper.decay_every, hyper.decay);
    auto lr_for = [&](const std::string& name) {
      const double base = name.rfind("verifier.", 0) == 0 ? hyper.verifier_lr : hyper.vqa_lr;
      return numcore::step_decay(base, epoch - 1, hyper.decay_every, hyper.decay);
    };
    auto batches = vqa::make_batches(train.size(), static_cast<std::size_t>(hyper.batch_size),
                                     order_rng);
    if (batches.size() > 1 && batches.back().size() == 1) {
      batches[batches.size() - 2].push_back(batches.back().front());
      batches.pop_back();
    }
    FinetuneEpoch summary;
    summary.epoch = epoch;
    summary.lr_scale = lr_scale;
    summary.breakdown.lambda = hyper.lambda;
    int step = 0;
    for (const auto& idx : batches) {
      ++step;
      std::vector<const VQAExample*> batch;
      batch.reserve(idx.size());
      for (std::size_t i : idx) batch.push_back(train[i]);
      numcore::Tape tape;
      ParamBinding bound(tape, work, trainable);
      std::map<std::string, Tensor> grads;
      BatchLoss loss;
      try {
        loss = verification_loss(bound, batch, sets, loss_rng, options);
        if (!std::isfinite(loss.objective.value().item())) {
          throw DivergenceError(where("finetune", epoch, step) + ": loss is not finite");
        }
        grads = bound.gradients(loss.objective);
      } catch (const NonFiniteError& e) {
        throw DivergenceError(where("finetune", epoch, step) + ": " + e.what());
      }
      adam.step(work, grads, lr_for);

      StepLog log;
      log.epoch = epoch;
      log.step = step;
      log.breakdown = loss.mean;
      log.vqae = loss.vqae.value().item();
      log.objective = loss.objective.value().item();
      for (const ExampleTerms& t : loss.examples) {
        log.negatives.push_back(t.negative ? t.negative->answer : -1);
        log.no_negative += t.no_negative ? 1 : 0;
        log.empty_negative_set += t.empty_negative_set ? 1 : 0;
      }
      if (on_step) on_step(log);

      const double share = static_cast<double>(batch.size()) / static_cast<double>(train.size());
      LossBreakdown& acc = summary.breakdown;
      acc.l_m += share * loss.mean.l_m;
      acc.l_r_q += share * loss.mean.l_r_q;
      acc.l_r_v += share * loss.mean.l_r_v;
      acc.l_r_a += share * loss.mean.l_r_a;
      acc.l_r_x += share * loss.mean.l_r_x;
      acc.l_r_ax += share * loss.mean.l_r_ax;
      summary.objective += share * log.objective;
    }
    LossBreakdown& acc = summary.breakdown;
    acc.total = LossBreakdown::compose(acc.lambda, acc.l_m, acc.l_r_q, acc.l_r_v,
                                       acc.l_r_a, acc.l_r_x, acc.l_r_ax);
    summary.heldout_accuracy =
        heldout.empty() ? std::numeric_limits<double>::quiet_NaN()
                        : vqa::top1_accuracy(vqa::predict(work, heldout).probs, heldout);
    result.epochs.push_back(summary);
    if (on_epoch) on_epoch(summary);
  }

  result.params = std::move(work);
  result.params.import_prefix(pretrained, "encoder.", "pretrained.encoder.");
  result.params.import_prefix(pretrained, "predictor.", "pretrained.predictor.");
  return result;
}

}  // namespace compex::verifier
