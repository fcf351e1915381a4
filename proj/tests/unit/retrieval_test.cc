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

#include "compex/error.h"
#include "compex/retrieval/index.h"
#include "compex/vqa/predictor.h"
#include "oracles.h"
#include "test_util.h"

namespace compex::retrieval {
namespace {

using numcore::ParamStore;
using numcore::Rng;

constexpr const char* kPrint = "fp-test";

ExplanationIndex grid_index(Rng& rng, std::size_t n, std::size_t dim, int answers) {
  return test::grid_index(rng, kPrint, n, dim, answers);
}

TEST(Retrieve, MatchesBruteForceOnTiedGrid) {
  Rng rng(42);
  const std::size_t dim = 4;
  const ExplanationIndex index = grid_index(rng, 1000, dim, 6);
  for (int qi = 0; qi < 200; ++qi) {
    std::vector<double> q(dim);
    for (double& x : q) x = static_cast<double>(rng.uniform_index(3));
    const int answer = static_cast<int>(rng.uniform_index(6));
    const std::string exclude = qi % 3 == 0 ? index.rows()[rng.uniform_index(1000)].example_id : "";
    const CompetingSet got = retrieve(index, kPrint, q, answer, 8, exclude);
    const auto want = test::knn_oracle(index, q, answer, 8, exclude);
    ASSERT_EQ(got.members.size(), want.size()) << "query " << qi;
    for (std::size_t i = 0; i < want.size(); ++i) {
      EXPECT_EQ(got.members[i].source_id, want[i]) << "query " << qi << " rank " << i;
    }
    EXPECT_EQ(got.answer_id, answer);
  }
}

TEST(Retrieve, ThresholdIsStrict) {
  std::vector<IndexRow> rows = {{"a", {{0, 0.6}}, {4}, "at threshold"},
                                {"b", {{0, 2.0 / 3.0}}, {4}, "above"}};
  const ExplanationIndex index(kPrint, numcore::Tensor::matrix(2, 1, {0.0, 5.0}), rows);
  const std::vector<double> q = {0.0};
  const CompetingSet s = retrieve(index, kPrint, q, 0);
  ASSERT_EQ(s.members.size(), 1u);
  EXPECT_EQ(s.members[0].source_id, "b");
  EXPECT_DOUBLE_EQ(s.members[0].distance, 5.0);
  EXPECT_TRUE(retrieve(index, kPrint, q, 3).empty());
}

TEST(Retrieve, StaleFingerprintAndWrongWidthAreRejected) {
  Rng rng(1);
  const ExplanationIndex index = grid_index(rng, 10, 3, 2);
  const std::vector<double> q = {0.0, 0.0, 0.0};
  EXPECT_THROW(retrieve(index, "other", q, 0), StaleIndexError);
  EXPECT_THROW(retrieve(index, kPrint, std::vector<double>{0.0}, 0), ShapeError);
}

TEST(Index, SaveLoadIsBitExact) {
  Rng rng(2);
  ExplanationIndex index = grid_index(rng, 50, 3, 4);
  const auto dir = test::scratch_dir("index_roundtrip");
  index.save(dir);
  const ExplanationIndex back = ExplanationIndex::load(dir);
  EXPECT_TRUE(back.bit_equal(index));
  EXPECT_EQ(back.supporters(1), index.supporters(1));
}

TEST(Index, TamperedPayloadIsRejected) {
  Rng rng(3);
  const auto dir = test::scratch_dir("index_tamper");
  grid_index(rng, 20, 2, 2).save(dir);
  std::string bin = test::read_file(dir / "embeddings.bin");
  bin[3] ^= 0x10;
  test::write_file(dir / "embeddings.bin", bin);
  EXPECT_THROW(ExplanationIndex::load(dir), SchemaError);
  EXPECT_THROW(ExplanationIndex::load(test::scratch_dir("index_absent")), MissingArtifact);
}

TEST(Index, BuiltFromModelEmbedsQvAndTracksEncoder) {
  test::SmallCorpus sc(test::small_config(60, 0));
  vqa::VqaModelConfig cfg;
  cfg.vocab = sc.vocab.size();
  cfg.answers = sc.answers.size();
  cfg.object_dim = 8;
  cfg.embed = 4;
  cfg.hidden = 6;
  cfg.attention = 4;
  cfg.ff_hidden = 6;
  Rng rng(9);
  ParamStore p;
  vqa::init_vqa_params(p, cfg, rng);
  const ExplanationIndex index = build_index(sc.train, sc.train_explanations, p);
  EXPECT_EQ(index.built_against(), encoder_fingerprint(p));
  EXPECT_TRUE(index.embeddings().bit_equal(vqa::predict(p, sc.train).qv));
  // Every supporter of every answer clears the threshold.
  for (std::size_t a = 0; a < sc.answers.size(); ++a) {
    for (std::size_t r : index.supporters(static_cast<int>(a))) {
      EXPECT_GT(index.rows()[r].answer_scores.at(static_cast<int>(a)), kSupportThreshold);
    }
  }
  // Leave-one-out: an example never retrieves itself.
  const auto& self = index.rows()[0];
  const int gold = sc.train[0]->gold_answer();
  const CompetingSet s =
      retrieve(index, index.built_against(), index.embedding(0), gold, 100, self.example_id);
  for (const auto& m : s.members) EXPECT_NE(m.source_id, self.example_id);
  // Touching the encoder changes the fingerprint; the predictor does not.
  ParamStore moved = p;
  moved.mutable_get("predictor.l1.b")[0] += 1.0;
  EXPECT_EQ(encoder_fingerprint(moved), index.built_against());
  moved.mutable_get("encoder.att.b")[0] += 1e-12;
  EXPECT_NE(encoder_fingerprint(moved), index.built_against());
}

TEST(CompetingSets, FollowTopCandidateOrder) {
  Rng rng(6);
  const ExplanationIndex index = grid_index(rng, 200, 2, 5);
  const std::vector<double> scores = {0.1, 0.7, 0.3, 0.9, 0.2};
  const std::vector<double> q = {1.0, 1.0};
  const auto sets = competing_sets_for(index, kPrint, scores, q, "", 3, 4);
  ASSERT_EQ(sets.size(), 3u);
  EXPECT_EQ(sets[0].answer_id, 3);
  EXPECT_EQ(sets[1].answer_id, 1);
  EXPECT_EQ(sets[2].answer_id, 2);
  for (const auto& s : sets) EXPECT_LE(s.members.size(), 4u);
}

}  // namespace
}  // namespace compex::retrieval
