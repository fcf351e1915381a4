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

#ifndef COMPEX_EVAL_EVALUATE_H_
#define COMPEX_EVAL_EVALUATE_H_

#include <cstdint>
#include <nlohmann/json.hpp>
#include <string>
#include <vector>

#include "compex/corpus/answer_space.h"
#include "compex/corpus/example.h"
#include "compex/corpus/vocabulary.h"
#include "compex/eval/reweight.h"
#include "compex/numcore/param_store.h"
#include "compex/retrieval/index.h"

namespace compex::eval {

enum class Mode {
  kBase,
  kReweightedRetrieved,
  kReweightedGenerated,
  kNoReweight,
  kFixedVqa,
  kHumanRR,
  kHumanRA,
};

std::string mode_name(Mode mode);
/// Throws InvalidArgument for an unknown name.
Mode parse_mode(const std::string& name);
const std::vector<Mode>& all_modes();

struct EvalInputs {
  std::vector<const corpus::VQAExample*> test;
  std::vector<const corpus::VQAExample*> train;  // human-RA looks up same-answer rows
  const corpus::Vocabulary* vocab = nullptr;
  const corpus::AnswerSpace* answers = nullptr;
  /// Fine-tuned checkpoint (encoder, predictor, verifier and the pretrained.*
  /// copy). For base a pretrained checkpoint is also accepted; for fixed-vqa
  /// it must come from a fixed-VQA fine-tune.
  const numcore::ParamStore* model = nullptr;
  const numcore::ParamStore* generator = nullptr;  // reweighted-generated only
  const retrieval::ExplanationIndex* index = nullptr;
};

struct EvalOptions {
  Mode mode = Mode::kReweightedRetrieved;
  std::size_t k_ans = retrieval::kDefaultCandidates;
  std::size_t k_exp = retrieval::kDefaultExplanations;
  std::size_t samples = 8;  // generated explanations per candidate
  std::uint64_t seed = 1;
};

struct ExampleResult {
  std::string id;
  std::vector<Reweighted> topk;
  int chosen = -1;
  std::string explanation;  // most supportive member for the chosen answer
  double gold_score = 0.0;  // soft score of `chosen`
  std::vector<double> probs;  // full answer distribution
};

struct EvalReport {
  std::string mode;
  std::size_t examples = 0;
  double accuracy = 0.0;
  double mean_selected_s = 0.0;  // NaN for modes without verification
  std::size_t empty_sets = 0;    // candidates vetoed for lack of explanations
  bool has_text_metrics = false;
  double bleu4 = 0.0;    // corpus BLEU-4 of selected explanations vs human
  double rouge_l = 0.0;  // mean ROUGE-L, same pairs
  std::string note;
  nlohmann::ordered_json config;
  std::uint64_t seed = 0;

  nlohmann::ordered_json to_json() const;
  static EvalReport from_json(const nlohmann::ordered_json& j);
};

struct EvalResult {
  EvalReport report;
  std::vector<ExampleResult> examples;
};

EvalResult evaluate(const EvalInputs& inputs, const EvalOptions& options);

/// {"id", "mode", "topk": [{"answer", "p", "s_max", "p_tilde"}], "chosen",
///  "explanation_text", "gold_score_of_chosen"}
nlohmann::ordered_json dump_line(const ExampleResult& r, Mode mode,
                                 const corpus::AnswerSpace& answers);

}  // namespace compex::eval

#endif  // COMPEX_EVAL_EVALUATE_H_
