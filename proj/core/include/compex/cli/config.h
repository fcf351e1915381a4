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

#ifndef COMPEX_CLI_CONFIG_H_
#define COMPEX_CLI_CONFIG_H_

#include <cstdint>
#include <nlohmann/json.hpp>
#include <string>
#include <vector>

#include "compex/corpus/synthetic.h"
#include "compex/error.h"

namespace compex::cli {

inline const std::vector<std::string>& subcommands() {
  static const std::vector<std::string> names = {
      "gen-corpus", "pretrain", "build-index", "finetune",
      "train-generator", "infer", "eval", "gradcheck"};
  return names;
}

/// Bad flags, a bad config file or an unknown subcommand. Carries the usage
/// text of the subcommand being parsed.
class UsageError : public Error {
 public:
  UsageError(const std::string& message, std::string usage)
      : Error("usage", message), usage_(std::move(usage)) {}
  const std::string& usage() const { return usage_; }

 private:
  std::string usage_;
};

/// Everything one invocation needs. Every subcommand accepts every key, so a
/// single config file can drive the whole pipeline; stage-specific settings
/// carry a stage prefix and the generic --epochs/--lr/--batch override the
/// current stage's value.
struct RunConfig {
  std::string subcommand;
  std::string help;  // set when --help was given; nothing else is valid then

  // Paths. They are not echoed into artifacts, so that the same inputs
  // written elsewhere give byte-identical outputs.
  std::string config_path;
  std::string corpus;
  std::string checkpoint;
  std::string index;
  std::string generator;
  std::string out;
  std::string dump;
  std::string log;

  std::uint64_t seed = 1;
  std::string mode = "reweighted-retrieved";
  std::string explanations = "retrieved";
  bool fixed_vqa = false;

  corpus::GenConfig gen;  // gen.seed mirrors `seed`

  std::size_t embed = 32;
  std::size_t hidden = 64;
  std::size_t attention = 64;
  std::size_t ff_hidden = 64;
  double init_range = 0.08;
  std::size_t verifier_hidden = 64;
  double verifier_init_range = 0.08;
  std::size_t generator_hidden = 64;
  double generator_init_range = 0.08;

  int pretrain_epochs = 30;
  double pretrain_lr = 5e-4;
  int pretrain_batch = 384;

  int finetune_epochs = 40;
  double vqa_lr = 5e-4;
  double verifier_lr = 5e-4;
  int finetune_batch = 384;
  int decay_every = 5;
  double decay = 0.8;
  double lambda = 10.0;
  double vqae_weight = 0.1;

  int generator_epochs = 10;
  double generator_lr = 5e-4;
  int generator_batch = 64;

  std::size_t k_ans = 10;
  std::size_t k_exp = 8;
  std::size_t samples = 8;
  int gradcheck_points = 100;

  /// Everything but the paths. The generic overrides are already folded
  /// into the stage settings by parse_args.
  nlohmann::ordered_json to_json() const;
};

/// Parses `args` (without the program name): args[0] is the subcommand,
/// --config loads key=value lines (keys are the long flag names), and flags
/// given on the command line win. Throws UsageError.
RunConfig parse_args(const std::vector<std::string>& args);

/// Usage text listing the subcommands.
std::string top_level_usage();

/// Help text of one subcommand.
std::string subcommand_usage(const std::string& subcommand);

}  // namespace compex::cli

#endif  // COMPEX_CLI_CONFIG_H_
