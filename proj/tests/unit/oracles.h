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

// Reference implementations shared by the unit tests and the acceptance
// binary. They are written independently of the library code they check.

#ifndef COMPEX_TESTS_UNIT_ORACLES_H_
#define COMPEX_TESTS_UNIT_ORACLES_H_

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <functional>
#include <string>
#include <tuple>
#include <unordered_map>
#include <vector>

#include "compex/numcore/rng.h"
#include "compex/retrieval/index.h"

namespace compex::test {

using Words = std::vector<std::string>;

inline Words random_words(numcore::Rng& rng, std::size_t max_len, std::size_t alphabet) {
  Words w(rng.uniform_index(max_len + 1));
  for (auto& s : w) s = "w" + std::to_string(rng.uniform_index(alphabet));
  return w;
}

/// LCS by memoized recursion over suffixes.
inline std::size_t lcs_oracle(const Words& a, const Words& b) {
  std::vector<std::vector<int>> memo(a.size() + 1, std::vector<int>(b.size() + 1, -1));
  std::function<int(std::size_t, std::size_t)> go = [&](std::size_t i, std::size_t j) -> int {
    if (i == a.size() || j == b.size()) return 0;
    int& m = memo[i][j];
    if (m >= 0) return m;
    if (a[i] == b[j]) return m = 1 + go(i + 1, j + 1);
    return m = std::max(go(i + 1, j), go(i, j + 1));
  };
  return static_cast<std::size_t>(go(0, 0));
}

/// Sentence BLEU-4 from the definition: string-keyed n-gram counts, the
/// product of the four precisions, then the fourth root. A precision with no
/// matches counts as 1 / (2 * candidate length). `cand` must be non-empty.
inline double bleu_oracle(const Words& cand, const std::vector<Words>& refs) {
  auto grams = [](const Words& w, std::size_t n) {
    std::unordered_map<std::string, int> out;
    for (std::size_t i = 0; i + n <= w.size(); ++i) {
      std::string key;
      for (std::size_t k = i; k < i + n; ++k) key += w[k] + '\x1f';
      ++out[key];
    }
    return out;
  };
  double product = 1.0;
  for (std::size_t n = 1; n <= 4; ++n) {
    const auto c = grams(cand, n);
    int matched = 0, total = 0;
    for (const auto& [g, k] : c) {
      int best = 0;
      for (const Words& r : refs) {
        const auto rg = grams(r, n);
        auto it = rg.find(g);
        if (it != rg.end()) best = std::max(best, it->second);
      }
      matched += std::min(k, best);
      total += k;
    }
    product *= matched == 0 ? 0.5 / static_cast<double>(cand.size())
                            : static_cast<double>(matched) / total;
  }
  std::size_t r = refs[0].size();
  for (const Words& ref : refs) {
    const long d = std::labs(static_cast<long>(ref.size()) - static_cast<long>(cand.size()));
    const long bd = std::labs(static_cast<long>(r) - static_cast<long>(cand.size()));
    if (d < bd || (d == bd && ref.size() < r)) r = ref.size();
  }
  const double c = static_cast<double>(cand.size());
  const double bp = c > static_cast<double>(r) ? 1.0 : std::exp(1.0 - static_cast<double>(r) / c);
  return bp * std::pow(product, 0.25);
}

/// Index rows on a coarse integer grid so many distances tie exactly, with
/// soft scores drawn from a set that includes the 0.6 threshold itself.
inline retrieval::ExplanationIndex grid_index(numcore::Rng& rng, const std::string& print,
                                              std::size_t n, std::size_t dim, int answers) {
  const double levels[] = {0.0, 1.0 / 3.0, 0.6, 2.0 / 3.0, 1.0};
  std::vector<retrieval::IndexRow> rows;
  std::vector<double> emb;
  for (std::size_t i = 0; i < n; ++i) {
    retrieval::IndexRow r;
    char id[32];
    // Ids are shuffled relative to the row order.
    std::snprintf(id, sizeof id, "ex-%05llu",
                  static_cast<unsigned long long>((i * 7919) % 100003));
    r.example_id = id;
    for (int a = 0; a < answers; ++a) {
      const double s = levels[rng.uniform_index(5)];
      if (s > 0.0) r.answer_scores[a] = s;
    }
    r.explanation_tokens = {4, 5};
    r.explanation = "row " + std::to_string(i);
    rows.push_back(std::move(r));
    for (std::size_t d = 0; d < dim; ++d) emb.push_back(static_cast<double>(rng.uniform_index(3)));
  }
  return retrieval::ExplanationIndex(print, numcore::Tensor::matrix(n, dim, std::move(emb)),
                                     std::move(rows));
}

/// Brute-force filtered k-NN: scan every row, keep soft score > 0.6 and id
/// != exclude, sort by (squared distance, id), take k.
inline std::vector<std::string> knn_oracle(const retrieval::ExplanationIndex& index,
                                           const std::vector<double>& q, int answer,
                                           std::size_t k, const std::string& exclude) {
  std::vector<std::tuple<double, std::string>> all;
  for (std::size_t r = 0; r < index.size(); ++r) {
    const retrieval::IndexRow& row = index.rows()[r];
    auto it = row.answer_scores.find(answer);
    if (it == row.answer_scores.end() || !(it->second > 0.6)) continue;
    if (row.example_id == exclude) continue;
    double sq = 0.0;
    for (std::size_t d = 0; d < q.size(); ++d) {
      const double diff = q[d] - index.embedding(r)[d];
      sq += diff * diff;
    }
    all.emplace_back(sq, row.example_id);
  }
  std::sort(all.begin(), all.end());
  std::vector<std::string> ids;
  for (std::size_t i = 0; i < std::min(k, all.size()); ++i) ids.push_back(std::get<1>(all[i]));
  return ids;
}

}  // namespace compex::test

#endif  // COMPEX_TESTS_UNIT_ORACLES_H_
