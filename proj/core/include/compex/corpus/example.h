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

#ifndef COMPEX_CORPUS_EXAMPLE_H_
#define COMPEX_CORPUS_EXAMPLE_H_

#include <map>
#include <string>
#include <string_view>
#include <vector>

#include "compex/corpus/answer_space.h"
#include "compex/corpus/vocabulary.h"
#include "compex/numcore/tensor.h"

namespace compex::corpus {

enum class Split { kTrain, kTest };

std::string_view split_name(Split split);
Split parse_split(std::string_view name);

/// Number of annotators behind every answer count.
inline constexpr int kAnnotators = 10;

/// min(count / 3, 1). Rejects negative counts and counts above the
/// annotator total.
double soft_score(int human_count, int annotator_total = kAnnotators);

struct AnswerCount {
  std::string text;
  int count = 0;

  friend bool operator==(const AnswerCount&, const AnswerCount&) = default;
};

/// One multimodal instance as stored on disk. Token-level fields are derived
/// by `encode_example`.
struct Example {
  std::string id;
  std::string question;
  numcore::Tensor objects;  // N_obj x D_obj
  std::vector<AnswerCount> answers;
  std::string explanation;
  Split split = Split::kTrain;

  /// Soft score per answer text.
  std::map<std::string, double> gold_scores() const;

  friend bool operator==(const Example& a, const Example& b) {
    return a.id == b.id && a.question == b.question &&
           a.objects.bit_equal(b.objects) && a.answers == b.answers &&
           a.explanation == b.explanation && a.split == b.split;
  }
};

using Corpus = std::vector<Example>;

/// Maximum question length after truncation.
inline constexpr std::size_t kMaxQuestionTokens = 14;
inline constexpr std::size_t kMaxExplanationTokens = 20;

/// Token-level view of an example under a vocabulary and answer space.
struct VQAExample {
  std::string id;
  TokenSeq question_tokens;
  const numcore::Tensor* objects = nullptr;
  /// Soft score per answer id; answers outside the space are dropped.
  std::map<int, double> answer_scores;
  TokenSeq explanation_tokens;
  Split split = Split::kTrain;

  /// Highest-scoring answer id (lowest id on ties), or -1 if none.
  int gold_answer() const;
  double score_of(int answer_id) const;
};

/// The encoded view keeps a pointer into `example.objects`.
VQAExample encode_example(const Example& example, const Vocabulary& vocab,
                          const AnswerSpace& answers);

std::vector<const Example*> select_split(const Corpus& corpus, Split split);

}  // namespace compex::corpus

#endif  // COMPEX_CORPUS_EXAMPLE_H_
