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

#ifndef COMPEX_VERIFIER_VERIFIER_H_
#define COMPEX_VERIFIER_VERIFIER_H_

#include <map>
#include <nlohmann/json.hpp>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "compex/encoders/encoders.h"
#include "compex/numcore/rng.h"

namespace compex::verifier {

using numcore::ParamBinding;
using numcore::ParamStore;
using numcore::Tensor;
using numcore::TokenSeq;
using numcore::Var;

/// Answers with a soft score below this may serve as negatives.
inline constexpr double kNegativeThreshold = 0.6;
inline constexpr double kDefaultLambda = 10.0;

struct VerifierConfig {
  std::size_t vocab = 0;
  std::size_t answers = 0;
  std::size_t input_hidden = 64;  // width of q, v and phi(x)
  std::size_t embed = 32;
  std::size_t hidden = 64;
  double init_range = numcore::kInitRange;

  nlohmann::ordered_json to_json() const;
  static VerifierConfig from_json(const nlohmann::ordered_json& j);
};

/// Adds every `verifier.*` entry, including the explanation encoder
/// `verifier.phi.*`.
void init_verifier_params(ParamStore& store, const VerifierConfig& cfg,
                          numcore::Rng& rng);

/// S(Q, V, a, x) = sigmoid(f2(concat(relu f_q(q), relu f_v(v), relu f_a(a),
/// relu f_x(phi(x))))), with f2 = Linear -> relu -> Linear(1).
///
/// Tuples are assembled by row index into per-input projections, so that a
/// step projects each distinct q, v and explanation once.
struct Verifier {
  encoders::TextEncoder phi;
  numcore::Linear f_q, f_v, f_a, f_x;
  numcore::Linear head1, head2;

  static Verifier bind(const ParamBinding& params,
                       const std::string& prefix = "verifier");

  Var encode_explanations(const std::vector<TokenSeq>& seqs) const {
    return phi.encode(seqs);
  }
  Var project_q(Var q) const { return numcore::relu(f_q(q)); }
  Var project_v(Var v) const { return numcore::relu(f_v(v)); }
  Var project_x(Var x) const { return numcore::relu(f_x(x)); }
  /// relu(onehot(a) W_a + b_a), computed as a row gather of W_a.
  Var project_answers(const std::vector<int>& ids) const;
  /// Scores one tuple per row; each index selects a row of the matching
  /// projection.
  Var score(Var pq, const std::vector<std::size_t>& qi, Var pv,
            const std::vector<std::size_t>& vi, Var pa, Var px,
            const std::vector<std::size_t>& xi) const;
  /// Same tuples with the answer projections already one per row.
  Var score_rows(Var q_rows, Var v_rows, Var a_rows, Var x_rows) const;
};

/// Single-tuple score with a one-hot answer, over frozen parameters.
double verify(const Tensor& q, const Tensor& v, const Tensor& answer_onehot,
              const Tensor& explanation_encoding, const ParamStore& params);

/// Explanation encodings under `verifier.phi`, one row per sequence.
Tensor encode_explanations(const std::vector<TokenSeq>& seqs,
                           const ParamStore& params);

struct NegativeSample {
  int answer = -1;
  double probability = 0.0;  // sampling probability of `answer`
};

/// Draws a' with probability proportional to `scores` over answers whose
/// soft score is below the threshold. Returns nullopt when none qualifies.
std::optional<NegativeSample> sample_negative_answer(
    std::span<const double> scores, const std::map<int, double>& answer_scores,
    numcore::Rng& rng);

/// Sampling distribution used by sample_negative_answer (zeros for
/// ineligible answers).
std::vector<double> negative_distribution(
    std::span<const double> scores, const std::map<int, double>& answer_scores);

struct Supportive {
  std::size_t member = 0;
  double score = 0.0;
};

/// Member of the set maximizing S(q, v, answer, member); ties go to the
/// lowest index. nullopt for an empty set.
std::optional<Supportive> most_supportive(const std::vector<TokenSeq>& members,
                                          const Tensor& q, const Tensor& v,
                                          int answer_id,
                                          const ParamStore& params);

/// Argmax of `scores` with ties to the lowest index; nullopt when empty.
std::optional<Supportive> best_member(std::span<const double> scores);

/// Scores of every member for one (q, v, answer).
std::vector<double> member_scores(const Tensor& member_encodings,
                                  const Tensor& q, const Tensor& v,
                                  int answer_id, const ParamStore& params);

}  // namespace compex::verifier

#endif  // COMPEX_VERIFIER_VERIFIER_H_
