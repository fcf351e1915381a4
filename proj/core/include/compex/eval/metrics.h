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

#ifndef COMPEX_EVAL_METRICS_H_
#define COMPEX_EVAL_METRICS_H_

#include <string>
#include <vector>

#include "compex/corpus/example.h"

namespace compex::eval {

using Words = std::vector<std::string>;

/// A metric value; `flagged` marks a degenerate input scored as 0.
struct Scored {
  double value = 0.0;
  bool flagged = false;
};

/// Sentence BLEU-4 against one or more references. Clipped n-gram
/// precisions for n = 1..4, uniform weights, brevity penalty against the
/// reference length closest to the candidate's (shorter wins ties). A
/// precision with no matches is floored at 1 / (2 * candidate length).
Scored bleu4(const Words& candidate, const std::vector<Words>& references);

/// Corpus BLEU-4: matches and totals summed over every pair before the
/// precisions are formed; same floor and brevity rule on the summed lengths.
Scored corpus_bleu4(const std::vector<Words>& candidates,
                    const std::vector<std::vector<Words>>& references);

std::size_t lcs_length(const Words& a, const Words& b);

inline constexpr double kRougeBeta = 1.2;

/// LCS F-measure (1 + b^2) P R / (R + b^2 P) with b = 1.2.
Scored rouge_l(const Words& candidate, const Words& reference);

/// Mean gold soft score of the predicted answers, times 100. A negative
/// prediction means "missing" and is rejected.
double vqa_accuracy(const std::vector<int>& predictions,
                    const std::vector<const corpus::VQAExample*>& examples);

}  // namespace compex::eval

#endif  // COMPEX_EVAL_METRICS_H_
