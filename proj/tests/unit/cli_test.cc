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

#include <nlohmann/json.hpp>
#include <sstream>

#include "compex/cli/config.h"
#include "compex/cli/run.h"
#include "test_util.h"

namespace compex::cli {
namespace {

struct Outcome {
  int code;
  std::string out;
  std::string err;
};

Outcome invoke(std::vector<std::string> args) {
  std::ostringstream out, err;
  const int code = run(args, out, err);
  return {code, out.str(), err.str()};
}

std::string tiny_config() { return COMPEX_SOURCE_DIR "/configs/tiny.conf"; }

TEST(Config, FlagBeatsFileBeatsDefault) {
  const auto dir = test::scratch_dir("cli_precedence");
  test::write_file(dir / "a.conf", "pretrain-epochs = 7\npretrain-lr = 0.01\nk-ans = 4\n");
  const RunConfig c = parse_args({"pretrain", "--config", (dir / "a.conf").string(),
                                  "--pretrain-epochs", "9"});
  EXPECT_EQ(c.pretrain_epochs, 9);
  EXPECT_DOUBLE_EQ(c.pretrain_lr, 0.01);
  EXPECT_EQ(c.k_ans, 4u);
  EXPECT_EQ(c.pretrain_batch, 384);
}

TEST(Config, GenericFlagsTargetTheCurrentStage) {
  const RunConfig p = parse_args({"pretrain", "--epochs", "3", "--lr", "0.1", "--batch", "5"});
  EXPECT_EQ(p.pretrain_epochs, 3);
  EXPECT_DOUBLE_EQ(p.pretrain_lr, 0.1);
  EXPECT_EQ(p.pretrain_batch, 5);
  EXPECT_EQ(p.finetune_epochs, 40);
  const RunConfig f = parse_args({"finetune", "--lr", "0.2"});
  EXPECT_DOUBLE_EQ(f.vqa_lr, 0.2);
  EXPECT_DOUBLE_EQ(f.verifier_lr, 0.2);
  EXPECT_THROW(parse_args({"eval", "--epochs", "3"}), UsageError);
}

TEST(Config, SeedPropagatesToGeneration) {
  const RunConfig c = parse_args({"gen-corpus", "--seed", "17"});
  EXPECT_EQ(c.seed, 17u);
  EXPECT_EQ(c.gen.seed, 17u);
  EXPECT_FALSE(c.to_json().dump().find("\"out\"") != std::string::npos);
}

TEST(Config, BadInputsAreUsageErrors) {
  EXPECT_THROW(parse_args({}), UsageError);
  EXPECT_THROW(parse_args({"train"}), UsageError);
  EXPECT_THROW(parse_args({"eval", "--mode", "best"}), UsageError);
  EXPECT_THROW(parse_args({"pretrain", "--pretrain-lr", "-1"}), UsageError);
  EXPECT_THROW(parse_args({"pretrain", "--bogus"}), UsageError);
}

TEST(Run, UnknownConfigKeyExitsTwo) {
  const auto dir = test::scratch_dir("cli_unknown_key");
  test::write_file(dir / "bad.conf", "pretrain-epochs = 2\ntypo-key = 1\n");
  const Outcome o = invoke({"pretrain", "--config", (dir / "bad.conf").string()});
  EXPECT_EQ(o.code, kExitUsage);
  EXPECT_NE(o.err.find("error: usage:"), std::string::npos) << o.err;
  EXPECT_NE(o.err.find("typo-key"), std::string::npos) << o.err;
}

TEST(Run, HelpExitsZero) {
  const Outcome o = invoke({"eval", "--help"});
  EXPECT_EQ(o.code, kExitOk);
  EXPECT_NE(o.out.find("--mode"), std::string::npos);
}

TEST(Run, MissingCheckpointExitsOne) {
  const auto dir = test::scratch_dir("cli_missing_ckpt");
  const std::string conf = tiny_config();
  const std::string corpus = (dir / "c.jsonl").string();
  ASSERT_EQ(invoke({"gen-corpus", "--config", conf, "--out", corpus}).code, kExitOk);
  const Outcome o = invoke({"eval", "--config", conf, "--corpus", corpus, "--mode", "base"});
  EXPECT_EQ(o.code, kExitFailure);
  EXPECT_NE(o.err.find("error: missing-artifact: missing checkpoint"), std::string::npos) << o.err;
  const Outcome absent = invoke({"eval", "--config", conf, "--corpus", corpus, "--mode", "base",
                                 "--checkpoint", (dir / "nope.ckpt").string()});
  EXPECT_EQ(absent.code, kExitFailure);
  EXPECT_NE(absent.err.find("nope.ckpt"), std::string::npos) << absent.err;
}

TEST(Run, GenCorpusIsByteIdenticalAcrossRuns) {
  const auto dir = test::scratch_dir("cli_gen_twice");
  const std::string conf = tiny_config();
  ASSERT_EQ(invoke({"gen-corpus", "--config", conf, "--out", (dir / "a.jsonl").string()}).code, 0);
  ASSERT_EQ(invoke({"gen-corpus", "--config", conf, "--out", (dir / "b.jsonl").string()}).code, 0);
  EXPECT_EQ(test::read_file(dir / "a.jsonl"), test::read_file(dir / "b.jsonl"));
  EXPECT_EQ(test::read_file(dir / "a.jsonl.manifest.json"),
            test::read_file(dir / "b.jsonl.manifest.json"));
}

TEST(Run, TinyPipelineEndToEnd) {
  const auto dir = test::scratch_dir("cli_pipeline");
  const std::string conf = tiny_config();
  auto p = [&](const char* name) { return (dir / name).string(); };
  auto ok = [](const Outcome& o) {
    EXPECT_EQ(o.code, kExitOk) << o.err;
    return o.code == kExitOk;
  };
  ASSERT_TRUE(ok(invoke({"gen-corpus", "--config", conf, "--out", p("c.jsonl")})));
  const std::vector<std::string> base = {"--config", conf, "--corpus", p("c.jsonl")};
  auto with = [&](std::vector<std::string> head, std::vector<std::string> tail) {
    head.insert(head.end(), base.begin(), base.end());
    head.insert(head.end(), tail.begin(), tail.end());
    return head;
  };
  ASSERT_TRUE(ok(invoke(with({"pretrain"}, {"--out", p("pre.ckpt")}))));
  ASSERT_TRUE(ok(invoke(with({"build-index"}, {"--checkpoint", p("pre.ckpt"), "--out", p("idx")}))));
  ASSERT_TRUE(ok(invoke(with({"finetune"}, {"--checkpoint", p("pre.ckpt"), "--index", p("idx"),
                                             "--out", p("ft.ckpt"), "--log", p("steps.jsonl")}))));
  ASSERT_TRUE(ok(invoke(with({"train-generator"}, {"--checkpoint", p("pre.ckpt"), "--index",
                                                   p("idx"), "--out", p("gen.ckpt")}))));
  for (const char* mode : {"base", "no-reweight", "reweighted-retrieved", "human-RR", "human-RA",
                           "reweighted-generated"}) {
    const Outcome o = invoke(with({"eval"}, {"--checkpoint", p("ft.ckpt"), "--index", p("idx"),
                                             "--generator", p("gen.ckpt"), "--mode", mode}));
    ASSERT_TRUE(ok(o)) << mode;
    const auto report = nlohmann::json::parse(o.out);
    EXPECT_EQ(report.at("mode").get<std::string>(), mode);
    EXPECT_EQ(report.at("examples").get<int>(), 40);
    const double acc = report.at("accuracy").get<double>();
    EXPECT_GE(acc, 0.0);
    EXPECT_LE(acc, 100.0);
  }
  ASSERT_TRUE(ok(invoke(with({"infer"}, {"--checkpoint", p("ft.ckpt"), "--index", p("idx"),
                                         "--out", p("pred.jsonl")}))));
  EXPECT_FALSE(test::read_file(dir / "pred.jsonl").empty());

  // A pipeline artifact from another encoder makes the index stale.
  ASSERT_TRUE(ok(invoke(with({"pretrain"}, {"--seed", "4", "--out", p("pre2.ckpt")}))));
  const Outcome stale = invoke(with({"finetune"}, {"--checkpoint", p("pre2.ckpt"), "--index",
                                                   p("idx"), "--out", p("ft2.ckpt")}));
  EXPECT_EQ(stale.code, kExitFailure);
  EXPECT_NE(stale.err.find("error: stale-index:"), std::string::npos) << stale.err;
}

}  // namespace
}  // namespace compex::cli
