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

#ifndef COMPEX_EVAL_REWEIGHT_H_
#define COMPEX_EVAL_REWEIGHT_H_

#include <map>
#include <utility>
#include <vector>

namespace compex::eval {

/// Best verification score over a candidate's competing set. An empty set
/// carries score 0 and the flag.
struct SetScore {
  double s_max = 0.0;
  bool empty_set = false;
};

struct Reweighted {
  int answer = -1;
  double p = 0.0;
  double s_max = 0.0;
  double p_tilde = 0.0;
  bool empty_set = false;
};

/// P~(a) = P(a) * s_max(a) for every candidate, in input order. A candidate
/// without an entry is rejected, as is a flagged entry with nonzero score.
std::vector<Reweighted> reweight(const std::vector<std::pair<int, double>>& topk,
                                 const std::map<int, SetScore>& s_max);

/// Position of the largest P~, ties to the lower answer id. Throws on an
/// empty list.
std::size_t final_answer(const std::vector<Reweighted>& reweighted);

}  // namespace compex::eval

#endif  // COMPEX_EVAL_REWEIGHT_H_
