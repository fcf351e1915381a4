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

#include "compex/eval/metrics.h"

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdlib>
#include <map>

#include "compex/error.h"

namespace compex::eval {
namespace {

constexpr int kMaxOrder = 4;

using NGramCounts = std::map<Words, std::size_t>;

NGramCounts ngrams(const Words& w, int n) {
  NGramCounts out;
  const auto len = static_cast<int>(w.size());
  for (int i = 0; i + n <= len; ++i) {
    ++out[Words(w.begin() + i, w.begin() + i + n)];
  }
  return out;
}

struct Stats {
  std::array<std::size_t, kMaxOrder> matches{};
  std::array<std::size_t, kMaxOrder> totals{};
  std::size_t cand_len = 0;
  std::size_t ref_len = 0;
};

std::size_t closest_ref_length(std::size_t c, const std::vector<Words>& refs) {
  std::size_t best = refs.front().size();
  for (const Words& r : refs) {
    const auto d = static_cast<long>(r.size()) - static_cast<long>(c);
    const auto bd = static_cast<long>(best) - static_cast<long>(c);
    if (std::labs(d) < std::labs(bd) || (std::labs(d) == std::labs(bd) && r.size() < best)) {
      best = r.size();
    }
  }
  return best;
}

void accumulate(Stats& s, const Words& cand, const std::vector<Words>& refs) {
  for (int n = 1; n <= kMaxOrder; ++n) {
    const NGramCounts c = ngrams(cand, n);
    NGramCounts max_ref;
    for (const Words& r : refs) {
      for (const auto& [g, k] : ngrams(r, n)) max_ref[g] = std::max(max_ref[g], k);
    }
    for (const auto& [g, k] : c) {
      auto it = max_ref.find(g);
      if (it != max_ref.end()) s.matches[n - 1] += std::min(k, it->second);
      s.totals[n - 1] += k;
    }
  }
  s.cand_len += cand.size();
  s.ref_len += closest_ref_length(cand.size(), refs);
}

double score(const Stats& s) {
  const double c = static_cast<double>(s.cand_len);
  double log_sum = 0.0;
  for (int n = 0; n < kMaxOrder; ++n) {
    const double p = s.matches[n] == 0
                         ? 1.0 / (2.0 * c)
                         : static_cast<double>(s.matches[n]) / static_cast<double>(s.totals[n]);
    log_sum += std::log(p);
  }
  const double r = static_cast<double>(s.ref_len);
  const double bp = c > r ? 1.0 : std::exp(1.0 - r / c);
  return bp * std::exp(log_sum / kMaxOrder);
}

}  // namespace

Scored bleu4(const Words& candidate, const std::vector<Words>& references) {
  if (references.empty()) throw InvalidArgument("BLEU needs at least one reference");
  if (candidate.empty()) return {0.0, true};
  Stats s;
  accumulate(s, candidate, references);
  return {score(s), false};
}

Scored corpus_bleu4(const std::vector<Words>& candidates,
                    const std::vector<std::vector<Words>>& references) {
  if (candidates.size() != references.size()) {
    throw InvalidArgument("one reference list per candidate is required");
  }
  Stats s;
  bool flagged = false;
  for (std::size_t i = 0; i < candidates.size(); ++i) {
    if (references[i].empty()) throw InvalidArgument("BLEU needs at least one reference");
    if (candidates[i].empty()) flagged = true;
    accumulate(s, candidates[i], references[i]);
  }
  if (s.cand_len == 0) return {0.0, true};
  return {score(s), flagged};
}

std::size_t lcs_length(const Words& a, const Words& b) {
  std::vector<std::size_t> prev(b.size() + 1, 0), cur(b.size() + 1, 0);
  for (std::size_t i = 1; i <= a.size(); ++i) {
    for (std::size_t j = 1; j <= b.size(); ++j) {
      cur[j] = a[i - 1] == b[j - 1] ? prev[j - 1] + 1 : std::max(prev[j], cur[j - 1]);
    }
    std::swap(prev, cur);
  }
  return prev[b.size()];
}

Scored rouge_l(const Words& candidate, const Words& reference) {
  if (candidate.empty() || reference.empty()) return {0.0, true};
  const auto lcs = static_cast<double>(lcs_length(candidate, reference));
  if (lcs == 0.0) return {0.0, false};
  const double p = lcs / static_cast<double>(candidate.size());
  const double r = lcs / static_cast<double>(reference.size());
  const double b2 = kRougeBeta * kRougeBeta;
  return {(1.0 + b2) * p * r / (r + b2 * p), false};
}

double vqa_accuracy(const std::vector<int>& predictions,
                    const std::vector<const corpus::VQAExample*>& examples) {
  if (predictions.size() != examples.size()) {
    throw InvalidArgument("expected " + std::to_string(examples.size()) +
                          " predictions, got " + std::to_string(predictions.size()));
  }
  if (examples.empty()) throw InvalidArgument("no examples to score");
  double total = 0.0;
  for (std::size_t i = 0; i < examples.size(); ++i) {
    if (predictions[i] < 0) {
      throw InvalidArgument("missing prediction for '" + examples[i]->id + "'");
    }
    total += examples[i]->score_of(predictions[i]);
  }
  return 100.0 * total / static_cast<double>(examples.size());
}

}  // namespace compex::eval
