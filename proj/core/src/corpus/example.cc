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

#include "compex/corpus/example.h"

#include <algorithm>

#include "compex/error.h"

namespace compex::corpus {

std::string_view split_name(Split split) {
  return split == Split::kTrain ? "train" : "test";
}

Split parse_split(std::string_view name) {
  if (name == "train") return Split::kTrain;
  if (name == "test") return Split::kTest;
  throw InvalidArgument("unknown split '" + std::string(name) +
                        "' (expected train or test)");
}

double soft_score(int human_count, int annotator_total) {
  if (human_count < 0 || human_count > annotator_total) {
    throw InvalidArgument("answer count " + std::to_string(human_count) +
                          " outside [0, " + std::to_string(annotator_total) +
                          "]");
  }
  return std::min(human_count / 3.0, 1.0);
}

std::map<std::string, double> Example::gold_scores() const {
  std::map<std::string, double> out;
  for (const auto& a : answers) {
    // Duplicate texts are merged by count.
    out[a.text] = 0.0;
  }
  std::map<std::string, int> counts;
  for (const auto& a : answers) counts[a.text] += a.count;
  for (auto& [text, score] : out) {
    score = soft_score(std::min(counts[text], kAnnotators));
  }
  return out;
}

int VQAExample::gold_answer() const {
  int best = -1;
  double best_score = 0.0;
  for (const auto& [id, s] : answer_scores) {
    if (s > best_score) {
      best = id;
      best_score = s;
    }
  }
  return best;
}

double VQAExample::score_of(int answer_id) const {
  auto it = answer_scores.find(answer_id);
  return it == answer_scores.end() ? 0.0 : it->second;
}

VQAExample encode_example(const Example& example, const Vocabulary& vocab,
                          const AnswerSpace& answers) {
  VQAExample out;
  out.id = example.id;
  out.question_tokens = tokenize(example.question, vocab, kMaxQuestionTokens);
  out.objects = &example.objects;
  for (const auto& [text, score] : example.gold_scores()) {
    const int id = answers.id(text);
    if (id >= 0 && score > 0.0) out.answer_scores[id] = score;
  }
  out.explanation_tokens =
      tokenize(example.explanation, vocab, kMaxExplanationTokens);
  out.split = example.split;
  return out;
}

std::vector<const Example*> select_split(const Corpus& corpus, Split split) {
  std::vector<const Example*> out;
  for (const auto& e : corpus) {
    if (e.split == split) out.push_back(&e);
  }
  return out;
}

}  // namespace compex::corpus
