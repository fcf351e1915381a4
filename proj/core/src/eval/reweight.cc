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

#include "compex/eval/reweight.h"

#include <string>

#include "compex/error.h"

namespace compex::eval {

std::vector<Reweighted> reweight(const std::vector<std::pair<int, double>>& topk,
                                 const std::map<int, SetScore>& s_max) {
  std::vector<Reweighted> out;
  out.reserve(topk.size());
  for (const auto& [answer, p] : topk) {
    auto it = s_max.find(answer);
    if (it == s_max.end()) {
      throw InvalidArgument("no verification score for candidate " + std::to_string(answer));
    }
    const SetScore& s = it->second;
    if (s.empty_set && s.s_max != 0.0) {
      throw InvalidArgument("candidate " + std::to_string(answer) +
                            " has an empty set but a nonzero score");
    }
    out.push_back({answer, p, s.s_max, p * s.s_max, s.empty_set});
  }
  return out;
}

std::size_t final_answer(const std::vector<Reweighted>& reweighted) {
  if (reweighted.empty()) throw InvalidArgument("no candidates to choose from");
  std::size_t best = 0;
  for (std::size_t i = 1; i < reweighted.size(); ++i) {
    const Reweighted& c = reweighted[i];
    const Reweighted& b = reweighted[best];
    if (c.p_tilde > b.p_tilde || (c.p_tilde == b.p_tilde && c.answer < b.answer)) best = i;
  }
  return best;
}

}  // namespace compex::eval
