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

#ifndef COMPEX_RETRIEVAL_INDEX_H_
#define COMPEX_RETRIEVAL_INDEX_H_

#include <filesystem>
#include <map>
#include <span>
#include <string>
#include <vector>

#include "compex/corpus/example.h"
#include "compex/numcore/param_store.h"

namespace compex::retrieval {

using corpus::TokenSeq;
using numcore::Tensor;

/// Soft-score threshold a training row must exceed to support an answer.
inline constexpr double kSupportThreshold = 0.6;
inline constexpr std::size_t kDefaultCandidates = 10;
inline constexpr std::size_t kDefaultExplanations = 8;

struct IndexRow {
  std::string example_id;
  std::map<int, double> answer_scores;
  TokenSeq explanation_tokens;
  std::string explanation;
};

struct CompetingMember {
  TokenSeq tokens;
  std::string text;
  std::string source_id;  // training example id, or empty when generated
  double distance = 0.0;
};

struct CompetingSet {
  int answer_id = -1;
  std::vector<CompetingMember> members;

  bool empty() const { return members.empty(); }
};

/// Training-set rows keyed by their q * v embedding. Immutable once built.
class ExplanationIndex {
 public:
  ExplanationIndex() = default;
  ExplanationIndex(std::string built_against, Tensor embeddings,
                   std::vector<IndexRow> rows);

  const std::string& built_against() const { return built_against_; }
  std::size_t size() const { return rows_.size(); }
  std::size_t dim() const { return embeddings_.cols(); }
  const Tensor& embeddings() const { return embeddings_; }
  const std::vector<IndexRow>& rows() const { return rows_; }
  std::span<const double> embedding(std::size_t row) const {
    return embeddings_.data().subspan(row * dim(), dim());
  }

  /// Throws StaleIndexError unless `fingerprint` equals built_against().
  void check_fingerprint(const std::string& fingerprint) const;

  /// Rows whose soft score for `answer_id` exceeds the support threshold, in
  /// row order.
  const std::vector<std::size_t>& supporters(int answer_id) const;

  /// Directory with manifest.json, embeddings.bin and rows.jsonl.
  void save(const std::filesystem::path& dir) const;
  static ExplanationIndex load(const std::filesystem::path& dir);

  bool bit_equal(const ExplanationIndex& other) const;

 private:
  std::string built_against_;
  Tensor embeddings_;
  std::vector<IndexRow> rows_;
  std::map<int, std::vector<std::size_t>> supporters_;
};

/// Fingerprint of the encoder that produces index embeddings; `prefix`
/// locates the encoder entries ("" or "pretrained.").
std::string encoder_fingerprint(const numcore::ParamStore& params,
                                const std::string& prefix = "");

/// One embedding pass over `train` with the encoder and predictor stored
/// under `prefix`.
ExplanationIndex build_index(
    const std::vector<const corpus::VQAExample*>& train,
    const std::vector<std::string>& explanations,
    const numcore::ParamStore& params, const std::string& prefix = "");

/// Filtered exact k-NN: rows with soft score for `answer_id` above the
/// threshold and id != `exclude_id`, ascending by L2 distance to `query`,
/// ties by example id, first `k`.
CompetingSet retrieve(const ExplanationIndex& index,
                      const std::string& fingerprint,
                      std::span<const double> query, int answer_id,
                      std::size_t k = kDefaultExplanations,
                      const std::string& exclude_id = {});

/// Top-`k_ans` candidates of `scores` each with its retrieved set, in
/// candidate order.
std::vector<CompetingSet> competing_sets_for(
    const ExplanationIndex& index, const std::string& fingerprint,
    std::span<const double> scores, std::span<const double> query,
    const std::string& exclude_id, std::size_t k_ans = kDefaultCandidates,
    std::size_t k_exp = kDefaultExplanations);

}  // namespace compex::retrieval

#endif  // COMPEX_RETRIEVAL_INDEX_H_
