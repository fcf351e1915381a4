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

#include "compex/verifier/verifier.h"

#include "compex/error.h"

namespace compex::verifier {
namespace {

bool frozen(const std::string&) { return false; }

ParamStore verifier_view(const ParamStore& params) {
  ParamStore view;
  view.import_prefix(params, "verifier.", "verifier.");
  if (view.empty()) throw MissingArtifact("no verifier parameters in checkpoint");
  return view;
}

}  // namespace

nlohmann::ordered_json VerifierConfig::to_json() const {
  return {{"vocab", vocab},   {"answers", answers},
          {"input_hidden", input_hidden}, {"embed", embed},
          {"hidden", hidden}, {"init_range", init_range}};
}

VerifierConfig VerifierConfig::from_json(const nlohmann::ordered_json& j) {
  VerifierConfig c;
  try {
    c.vocab = j.at("vocab").get<std::size_t>();
    c.answers = j.at("answers").get<std::size_t>();
    c.input_hidden = j.at("input_hidden").get<std::size_t>();
    c.embed = j.at("embed").get<std::size_t>();
    c.hidden = j.at("hidden").get<std::size_t>();
    c.init_range = j.at("init_range").get<double>();
  } catch (const nlohmann::json::exception& e) {
    throw SchemaError(std::string("verifier config: ") + e.what());
  }
  return c;
}

void init_verifier_params(ParamStore& store, const VerifierConfig& cfg,
                          numcore::Rng& rng) {
  if (cfg.vocab == 0 || cfg.answers == 0 || cfg.input_hidden == 0 ||
      cfg.embed == 0 || cfg.hidden == 0) {
    throw InvalidArgument("verifier dimensions must be positive");
  }
  const double r = cfg.init_range;
  encoders::add_text_encoder(store, "verifier.phi", cfg.vocab, cfg.embed,
                             cfg.input_hidden, rng, r);
  numcore::add_linear(store, "verifier.f_q", cfg.input_hidden, cfg.hidden, rng, r);
  numcore::add_linear(store, "verifier.f_v", cfg.input_hidden, cfg.hidden, rng, r);
  numcore::add_linear(store, "verifier.f_a", cfg.answers, cfg.hidden, rng, r);
  numcore::add_linear(store, "verifier.f_x", cfg.input_hidden, cfg.hidden, rng, r);
  numcore::add_linear(store, "verifier.head1", 4 * cfg.hidden, cfg.hidden, rng, r);
  numcore::add_linear(store, "verifier.head2", cfg.hidden, 1, rng, r);
}

Verifier Verifier::bind(const ParamBinding& params, const std::string& prefix) {
  Verifier v;
  v.phi = encoders::TextEncoder::bind(params, prefix + ".phi");
  v.f_q = numcore::Linear::bind(params, prefix + ".f_q");
  v.f_v = numcore::Linear::bind(params, prefix + ".f_v");
  v.f_a = numcore::Linear::bind(params, prefix + ".f_a");
  v.f_x = numcore::Linear::bind(params, prefix + ".f_x");
  v.head1 = numcore::Linear::bind(params, prefix + ".head1");
  v.head2 = numcore::Linear::bind(params, prefix + ".head2");
  return v;
}

Var Verifier::project_answers(const std::vector<int>& ids) const {
  const std::size_t answers = f_a.w.rows();
  std::vector<std::size_t> rows;
  rows.reserve(ids.size());
  for (int id : ids) {
    if (id < 0 || static_cast<std::size_t>(id) >= answers) {
      throw InvalidArgument("answer id " + std::to_string(id) +
                            " outside the verifier's answer space");
    }
    rows.push_back(static_cast<std::size_t>(id));
  }
  return numcore::relu(add(numcore::embedding_lookup(f_a.w, std::move(rows)), f_a.b));
}

Var Verifier::score(Var pq, const std::vector<std::size_t>& qi, Var pv,
                    const std::vector<std::size_t>& vi, Var pa, Var px,
                    const std::vector<std::size_t>& xi) const {
  return score_rows(numcore::embedding_lookup(pq, qi),
                    numcore::embedding_lookup(pv, vi), pa,
                    numcore::embedding_lookup(px, xi));
}

Var Verifier::score_rows(Var q_rows, Var v_rows, Var a_rows, Var x_rows) const {
  const Var parts[] = {q_rows, v_rows, a_rows, x_rows};
  return numcore::sigmoid(head2(numcore::relu(head1(numcore::concat(parts, 1)))));
}

double verify(const Tensor& q, const Tensor& v, const Tensor& answer_onehot,
              const Tensor& explanation_encoding, const ParamStore& params) {
  const ParamStore view = verifier_view(params);
  numcore::Tape tape;
  ParamBinding bound(tape, view, frozen);
  const Verifier ver = Verifier::bind(bound);
  if (answer_onehot.cols() != ver.f_a.w.rows()) {
    throw ShapeError("answer one-hot has " + std::to_string(answer_onehot.cols()) +
                     " entries, verifier expects " +
                     std::to_string(ver.f_a.w.rows()));
  }
  const Var a = numcore::relu(ver.f_a(numcore::constant(tape, answer_onehot)));
  const Var s = ver.score_rows(ver.project_q(numcore::constant(tape, q)),
                               ver.project_v(numcore::constant(tape, v)), a,
                               ver.project_x(numcore::constant(tape, explanation_encoding)));
  return s.value().item();
}

Tensor encode_explanations(const std::vector<TokenSeq>& seqs,
                           const ParamStore& params) {
  ParamStore view;
  view.import_prefix(params, "verifier.phi.", "verifier.phi.");
  numcore::Tape tape;
  ParamBinding bound(tape, view, frozen);
  return encoders::TextEncoder::bind(bound, "verifier.phi").encode(seqs).value();
}

std::vector<double> negative_distribution(
    std::span<const double> scores, const std::map<int, double>& answer_scores) {
  std::vector<double> w(scores.size(), 0.0);
  for (std::size_t a = 0; a < scores.size(); ++a) {
    auto it = answer_scores.find(static_cast<int>(a));
    const double s = it == answer_scores.end() ? 0.0 : it->second;
    if (s < kNegativeThreshold) w[a] = scores[a];
  }
  double total = 0.0;
  for (double x : w) total += x;
  if (total > 0.0) {
    for (double& x : w) x /= total;
  }
  return w;
}

std::optional<NegativeSample> sample_negative_answer(
    std::span<const double> scores, const std::map<int, double>& answer_scores,
    numcore::Rng& rng) {
  const std::vector<double> w = negative_distribution(scores, answer_scores);
  double total = 0.0;
  for (double x : w) total += x;
  if (!(total > 0.0)) return std::nullopt;
  const std::size_t a = rng.categorical(w);
  return NegativeSample{static_cast<int>(a), w[a]};
}

std::vector<double> member_scores(const Tensor& member_encodings,
                                  const Tensor& q, const Tensor& v,
                                  int answer_id, const ParamStore& params) {
  const ParamStore view = verifier_view(params);
  numcore::Tape tape;
  ParamBinding bound(tape, view, frozen);
  const Verifier ver = Verifier::bind(bound);
  const std::size_t n = member_encodings.rows();
  const std::vector<std::size_t> zeros(n, 0);
  std::vector<std::size_t> rows(n);
  for (std::size_t i = 0; i < n; ++i) rows[i] = i;
  const Var s = ver.score(ver.project_q(numcore::constant(tape, q)), zeros,
                          ver.project_v(numcore::constant(tape, v)), zeros,
                          ver.project_answers(std::vector<int>(n, answer_id)),
                          ver.project_x(numcore::constant(tape, member_encodings)),
                          rows);
  const auto& d = s.value().storage();
  return {d.begin(), d.end()};
}

std::optional<Supportive> best_member(std::span<const double> scores) {
  if (scores.empty()) return std::nullopt;
  Supportive best{0, scores[0]};
  for (std::size_t i = 1; i < scores.size(); ++i) {
    if (scores[i] > best.score) best = {i, scores[i]};
  }
  return best;
}

std::optional<Supportive> most_supportive(const std::vector<TokenSeq>& members,
                                          const Tensor& q, const Tensor& v,
                                          int answer_id,
                                          const ParamStore& params) {
  if (members.empty()) return std::nullopt;
  const Tensor enc = encode_explanations(members, params);
  return best_member(member_scores(enc, q, v, answer_id, params));
}

}  // namespace compex::verifier
