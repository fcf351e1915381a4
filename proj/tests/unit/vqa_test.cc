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

#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <numeric>
#include <set>

#include "compex/error.h"
#include "compex/numcore/grad_check.h"
#include "compex/numcore/ops.h"
#include "compex/vqa/predictor.h"
#include "compex/vqa/pretrain.h"
#include "test_util.h"

namespace compex::vqa {
namespace {

using numcore::Rng;
using numcore::Tape;

VqaModelConfig small_model(const test::SmallCorpus& sc) {
  VqaModelConfig cfg;
  cfg.vocab = sc.vocab.size();
  cfg.answers = sc.answers.size();
  cfg.object_dim = 8;
  cfg.embed = 8;
  cfg.hidden = 12;
  cfg.attention = 8;
  cfg.ff_hidden = 12;
  cfg.init_range = 0.5;
  return cfg;
}

TEST(TopK, DescendingWithTiesByLowerIndex) {
  const std::vector<double> s = {0.2, 0.9, 0.5, 0.9, 0.5, 0.1};
  const auto top = topk_candidates(s, 4);
  ASSERT_EQ(top.size(), 4u);
  EXPECT_EQ(top[0].first, 1);
  EXPECT_EQ(top[1].first, 3);
  EXPECT_EQ(top[2].first, 2);
  EXPECT_EQ(top[3].first, 4);
  EXPECT_EQ(topk_candidates(s, s.size()).size(), s.size());
  EXPECT_THROW(topk_candidates(s, s.size() + 1), InvalidArgument);
  EXPECT_THROW(topk_candidates(s, 0), InvalidArgument);
}

TEST(TopK, AgreesWithFullSortOnRandomScores) {
  Rng rng(4);
  for (int trial = 0; trial < 200; ++trial) {
    std::vector<double> s(30);
    // Coarse values force plenty of ties.
    for (double& x : s) x = std::round(rng.uniform() * 8.0) / 8.0;
    std::vector<int> order(s.size());
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(), [&](int a, int b) { return s[a] > s[b]; });
    const auto top = topk_candidates(s, 10);
    for (std::size_t i = 0; i < 10; ++i) {
      EXPECT_EQ(top[i].first, order[i]);
      EXPECT_EQ(top[i].second, s[order[i]]);
    }
  }
}

TEST(Loss, SumsBceOverAnswersAveragedOverRows) {
  Tape tape;
  const Tensor probs = Tensor::matrix(2, 2, {0.9, 0.2, 0.4, 0.6});
  const Tensor targets = Tensor::matrix(2, 2, {1.0, 0.0, 1.0 / 3.0, 2.0 / 3.0});
  double want = 0.0;
  for (std::size_t i = 0; i < 4; ++i) {
    want -= targets[i] * std::log(probs[i]) + (1 - targets[i]) * std::log(1 - probs[i]);
  }
  want /= 2.0;
  EXPECT_NEAR(vqa_loss(numcore::constant(tape, probs), targets).value().item(), want, 1e-15);
}

TEST(Loss, FullModelGradientChecks) {
  test::SmallCorpus sc(test::small_config(10, 0));
  auto cfg = small_model(sc);
  cfg.embed = 3;
  cfg.hidden = 4;
  cfg.attention = 3;
  cfg.ff_hidden = 4;
  Rng rng(17);
  ParamStore p;
  init_vqa_params(p, cfg, rng);
  const std::vector<const VQAExample*> batch(sc.train.begin(), sc.train.begin() + 2);
  const Tensor targets = answer_targets(batch, cfg.answers);
  const auto r = numcore::grad_check(
      [&](Tape&, const numcore::ParamBinding& b) {
        return vqa_loss(vqa_forward(b, batch).probs, targets);
      },
      p, 1e-3, numcore::Stencil::kFivePoint);
  EXPECT_LE(r.max_rel_error, 1e-4) << r.worst_param;
}

TEST(Targets, CarrySoftScores) {
  test::SmallCorpus sc(test::small_config(30, 0));
  const Tensor t = answer_targets(sc.train, sc.answers.size());
  for (std::size_t i = 0; i < sc.train.size(); ++i) {
    for (std::size_t a = 0; a < sc.answers.size(); ++a) {
      EXPECT_EQ(t.at(i, a), sc.train[i]->score_of(static_cast<int>(a)));
    }
  }
}

TEST(Accuracy, MeanGoldScoreOfTopAnswer) {
  test::SmallCorpus sc(test::small_config(6, 0));
  Tensor probs({sc.train.size(), sc.answers.size()}, 0.0);
  double want = 0.0;
  for (std::size_t i = 0; i < sc.train.size(); ++i) {
    // Pick the gold answer on even rows and the worst-scoring one on odd rows.
    int pick = sc.train[i]->gold_answer();
    if (i % 2) {
      for (std::size_t a = 0; a < sc.answers.size(); ++a) {
        if (sc.train[i]->score_of(static_cast<int>(a)) == 0.0) pick = static_cast<int>(a);
      }
    }
    probs.at(i, static_cast<std::size_t>(pick)) = 1.0;
    want += sc.train[i]->score_of(pick);
  }
  EXPECT_NEAR(top1_accuracy(probs, sc.train), 100.0 * want / sc.train.size(), 1e-12);
}

TEST(Batches, PartitionEveryIndexOnce) {
  Rng rng(3);
  const auto batches = make_batches(103, 10, rng);
  EXPECT_EQ(batches.size(), 11u);
  std::set<std::size_t> seen;
  for (const auto& b : batches) {
    EXPECT_LE(b.size(), 10u);
    seen.insert(b.begin(), b.end());
  }
  EXPECT_EQ(seen.size(), 103u);
  EXPECT_EQ(*seen.rbegin(), 102u);
}

TEST(Predict, ChunkingDoesNotChangeResults) {
  test::SmallCorpus sc(test::small_config(25, 0));
  Rng rng(5);
  ParamStore p;
  init_vqa_params(p, small_model(sc), rng);
  const auto whole = predict(p, sc.train, "", 500);
  const auto chunked = predict(p, sc.train, "", 7);
  EXPECT_TRUE(whole.probs.bit_equal(chunked.probs));
  EXPECT_TRUE(whole.qv.bit_equal(chunked.qv));
}

TEST(Pretrain, LossFallsAndRunIsDeterministic) {
  test::SmallCorpus sc(test::small_config(200, 50));
  PretrainHyper hyper;
  hyper.epochs = 6;
  hyper.batch_size = 32;
  hyper.lr = 5e-3;
  const auto a = pretrain(sc.train, sc.test, small_model(sc), hyper);
  ASSERT_EQ(a.history.size(), 7u);
  EXPECT_LT(a.history.back().train_loss, a.history.front().train_loss);
  const auto b = pretrain(sc.train, sc.test, small_model(sc), hyper);
  EXPECT_TRUE(a.params.bit_equal(b.params));
}

}  // namespace
}  // namespace compex::vqa
