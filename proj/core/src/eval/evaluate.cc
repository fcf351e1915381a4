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

#include "compex/eval/evaluate.h"

#include <cmath>
#include <limits>
#include <map>
#include <unordered_map>

#include "compex/error.h"
#include "compex/eval/metrics.h"
#include "compex/generator/explainer.h"
#include "compex/verifier/verifier.h"
#include "compex/vqa/predictor.h"

namespace compex::eval {
namespace {

using nlohmann::ordered_json;
using numcore::ParamBinding;
using numcore::ParamStore;
using numcore::Tape;
using numcore::Tensor;
using numcore::TokenSeq;

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

const std::vector<std::pair<Mode, std::string>>& mode_table() {
  static const std::vector<std::pair<Mode, std::string>> kModes = {
      {Mode::kBase, "base"},
      {Mode::kReweightedRetrieved, "reweighted-retrieved"},
      {Mode::kReweightedGenerated, "reweighted-generated"},
      {Mode::kNoReweight, "no-reweight"},
      {Mode::kFixedVqa, "fixed-vqa"},
      {Mode::kHumanRR, "human-RR"},
      {Mode::kHumanRA, "human-RA"},
  };
  return kModes;
}

bool frozen(const std::string&) { return false; }

struct Member {
  TokenSeq tokens;
  std::string text;
};
using MemberSet = std::vector<Member>;

Tensor row_of(const Tensor& m, std::size_t r) {
  const std::size_t c = m.cols();
  return Tensor::matrix(1, c, std::vector<double>(m.data().begin() + r * c,
                                                  m.data().begin() + (r + 1) * c));
}

struct SetScores {
  std::vector<SetScore> s;
  std::vector<std::size_t> best;  // most supportive member per set
};

// Scores every member of every set against (q, v, answer) in one pass.
SetScores score_sets(const ParamStore& verifier, const Tensor& q, const Tensor& v,
                     const std::vector<int>& answers, const std::vector<MemberSet>& sets) {
  SetScores out;
  out.s.resize(sets.size());
  out.best.assign(sets.size(), 0);
  std::map<TokenSeq, std::size_t> unique;
  std::vector<TokenSeq> seqs;
  std::vector<std::size_t> xi, zeros;
  std::vector<int> ai;
  for (std::size_t c = 0; c < sets.size(); ++c) {
    for (const Member& m : sets[c]) {
      auto [it, fresh] = unique.emplace(m.tokens, seqs.size());
      if (fresh) seqs.push_back(m.tokens);
      xi.push_back(it->second);
      ai.push_back(answers[c]);
    }
  }
  if (seqs.empty()) {
    for (SetScore& s : out.s) s = {0.0, true};
    return out;
  }
  zeros.assign(xi.size(), 0);
  Tape tape;
  ParamBinding bound(tape, verifier, frozen);
  const verifier::Verifier ver = verifier::Verifier::bind(bound);
  const Tensor scores =
      ver.score(ver.project_q(numcore::constant(tape, q)), zeros,
                ver.project_v(numcore::constant(tape, v)), zeros, ver.project_answers(ai),
                ver.project_x(ver.encode_explanations(seqs)), xi)
          .value();
  std::size_t row = 0;
  for (std::size_t c = 0; c < sets.size(); ++c) {
    if (sets[c].empty()) {
      out.s[c] = {0.0, true};
      continue;
    }
    const auto best = verifier::best_member(scores.data().subspan(row, sets[c].size()));
    out.s[c] = {best->score, false};
    out.best[c] = best->member;
    row += sets[c].size();
  }
  return out;
}

MemberSet from_competing(const retrieval::CompetingSet& set) {
  MemberSet out;
  for (const auto& m : set.members) out.push_back({m.tokens, m.text});
  return out;
}

bool has_prefix(const ParamStore& p, const std::string& prefix) {
  return !p.names_with_prefix(prefix).empty();
}

}  // namespace

std::string mode_name(Mode mode) {
  for (const auto& [m, name] : mode_table()) {
    if (m == mode) return name;
  }
  throw InvalidArgument("unknown eval mode");
}

Mode parse_mode(const std::string& name) {
  for (const auto& [m, n] : mode_table()) {
    if (n == name) return m;
  }
  std::string known;
  for (const auto& [m, n] : mode_table()) known += (known.empty() ? "" : ", ") + n;
  throw InvalidArgument("unknown eval mode '" + name + "' (expected one of " + known + ")");
}

const std::vector<Mode>& all_modes() {
  static const std::vector<Mode> kAll = [] {
    std::vector<Mode> v;
    for (const auto& [m, n] : mode_table()) v.push_back(m);
    return v;
  }();
  return kAll;
}

ordered_json EvalReport::to_json() const {
  ordered_json j;
  j["mode"] = mode;
  j["examples"] = examples;
  j["accuracy"] = accuracy;
  j["per_answer_type"] = nullptr;  // the corpus carries no answer types
  j["mean_selected_verification"] =
      std::isnan(mean_selected_s) ? ordered_json(nullptr) : ordered_json(mean_selected_s);
  j["empty_sets"] = empty_sets;
  if (has_text_metrics) {
    j["text_metrics"] = {{"bleu4", bleu4}, {"rouge_l", rouge_l}};
  } else {
    j["text_metrics"] = nullptr;
  }
  j["note"] = note;
  j["config"] = config;
  j["seed"] = seed;
  return j;
}

EvalReport EvalReport::from_json(const ordered_json& j) {
  EvalReport r;
  try {
    r.mode = j.at("mode").get<std::string>();
    r.examples = j.at("examples").get<std::size_t>();
    r.accuracy = j.at("accuracy").get<double>();
    const auto& s = j.at("mean_selected_verification");
    r.mean_selected_s = s.is_null() ? kNaN : s.get<double>();
    r.empty_sets = j.at("empty_sets").get<std::size_t>();
    const auto& t = j.at("text_metrics");
    r.has_text_metrics = !t.is_null();
    if (r.has_text_metrics) {
      r.bleu4 = t.at("bleu4").get<double>();
      r.rouge_l = t.at("rouge_l").get<double>();
    }
    r.note = j.at("note").get<std::string>();
    r.config = j.at("config");
    r.seed = j.at("seed").get<std::uint64_t>();
  } catch (const nlohmann::json::exception& e) {
    throw SchemaError(std::string("eval report: ") + e.what());
  }
  return r;
}

EvalResult evaluate(const EvalInputs& in, const EvalOptions& opt) {
  if (in.test.empty()) throw InvalidArgument("nothing to evaluate: empty test split");
  if (in.vocab == nullptr || in.answers == nullptr) {
    throw InvalidArgument("evaluation needs the vocabulary and answer space");
  }
  if (in.model == nullptr) throw MissingArtifact("model checkpoint");
  if (opt.k_ans == 0 || opt.k_exp == 0) throw InvalidArgument("k_ans and k_exp must be positive");
  const ParamStore& model = *in.model;
  const Mode mode = opt.mode;
  const bool base = mode == Mode::kBase;

  // Base reads the pretrained copy when the checkpoint carries one.
  const std::string p_prefix =
      base && has_prefix(model, "pretrained.encoder.") ? "pretrained." : "";
  if (!base) {
    if (!has_prefix(model, "verifier.")) {
      throw MissingArtifact("verifier parameters (run finetune first)");
    }
    if (!has_prefix(model, "pretrained.encoder.")) {
      throw MissingArtifact("pretrained encoder copy in the fine-tuned checkpoint");
    }
    if (in.index == nullptr) throw MissingArtifact("explanation index");
  }
  if (mode == Mode::kFixedVqa &&
      retrieval::encoder_fingerprint(model) !=
          retrieval::encoder_fingerprint(model, "pretrained.")) {
    throw InvalidArgument("fixed-vqa mode needs a checkpoint fine-tuned with --fixed-vqa");
  }
  if (mode == Mode::kReweightedGenerated && in.generator == nullptr) {
    throw MissingArtifact("generator checkpoint");
  }
  if (mode == Mode::kHumanRA && in.train.empty()) {
    throw InvalidArgument("human-RA needs the train split");
  }

  // Shared forward pass: P, and the fine-tuned q and v for the verifier.
  const std::size_t n = in.test.size();
  const std::size_t num_answers = in.answers->size();
  Tensor probs, q_all, v_all;
  {
    ParamStore view;
    view.import_prefix(model, p_prefix + "encoder.");
    view.import_prefix(model, p_prefix + "predictor.");
    std::vector<double> p, q, v;
    std::size_t qd = 0;
    constexpr std::size_t kChunk = 250;
    for (std::size_t start = 0; start < n; start += kChunk) {
      std::vector<const corpus::VQAExample*> chunk(
          in.test.begin() + static_cast<long>(start),
          in.test.begin() + static_cast<long>(std::min(n, start + kChunk)));
      Tape tape;
      ParamBinding bound(tape, view, frozen);
      const vqa::VqaOutputs out = vqa::vqa_forward(bound, chunk, p_prefix);
      const Tensor& pv = out.probs.value();
      p.insert(p.end(), pv.storage().begin(), pv.storage().end());
      const Tensor qv = out.q.value();
      const Tensor vv = out.v.value();
      qd = qv.cols();
      q.insert(q.end(), qv.storage().begin(), qv.storage().end());
      v.insert(v.end(), vv.storage().begin(), vv.storage().end());
    }
    if (p.size() != n * num_answers) {
      throw ShapeError("model answer space does not match the corpus answer space");
    }
    probs = Tensor::matrix(n, num_answers, std::move(p));
    q_all = Tensor::matrix(n, qd, std::move(q));
    v_all = Tensor::matrix(n, qd, std::move(v));
  }

  // Retrieval keys and conditioning come from the pretrained encoder.
  std::string fp;
  Tensor query, q_pre;
  ParamStore verifier_params;
  if (!base) {
    fp = retrieval::encoder_fingerprint(model, "pretrained.");
    in.index->check_fingerprint(fp);
    query = vqa::predict(model, in.test, "pretrained.").qv;
    verifier_params.import_prefix(model, "verifier.");
    if (mode == Mode::kReweightedGenerated) {
      q_pre = generator::question_embeddings(model, in.test, "pretrained.");
    }
  }
  std::unordered_map<std::string, const corpus::VQAExample*> train_by_id;
  for (const corpus::VQAExample* t : in.train) train_by_id.emplace(t->id, t);

  EvalResult result;
  std::vector<int> chosen_ids;
  std::vector<Words> hyps;
  std::vector<std::vector<Words>> refs;
  double rouge_sum = 0.0, s_sum = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const corpus::VQAExample& ex = *in.test[i];
    const auto row = probs.data().subspan(i * num_answers, num_answers);
    const auto cands = vqa::topk_candidates(row, std::min(opt.k_ans, num_answers));
    ExampleResult r;
    r.id = ex.id;
    r.probs.assign(row.begin(), row.end());

    if (base) {
      for (const auto& [a, p] : cands) r.topk.push_back({a, p, kNaN, p, false});
      r.chosen = cands.front().first;
    } else {
      const auto qrow = query.data().subspan(i * query.cols(), query.cols());
      const int gold = ex.gold_answer();
      const std::string gold_text = in.vocab->decode(ex.explanation_tokens);
      std::vector<MemberSet> sets;
      std::vector<int> answers;
      for (const auto& [a, p] : cands) {
        answers.push_back(a);
        const bool human = (mode == Mode::kHumanRR || mode == Mode::kHumanRA) && a == gold;
        if (human) {
          sets.push_back({{ex.explanation_tokens, gold_text}});
        } else if (mode == Mode::kHumanRA) {
          // Nearest same-answer training row: identical question first,
          // then q*v distance, then id.
          const retrieval::IndexRow* best = nullptr;
          bool best_same = false;
          double best_d = 0.0;
          for (std::size_t rr : in.index->supporters(a)) {
            const retrieval::IndexRow& ir = in.index->rows()[rr];
            auto it = train_by_id.find(ir.example_id);
            const bool same = it != train_by_id.end() &&
                              it->second->question_tokens == ex.question_tokens;
            const auto e = in.index->embedding(rr);
            double d = 0.0;
            for (std::size_t k = 0; k < e.size(); ++k) d += (qrow[k] - e[k]) * (qrow[k] - e[k]);
            const bool better =
                best == nullptr || (same && !best_same) ||
                (same == best_same && (d < best_d || (d == best_d && ir.example_id < best->example_id)));
            if (better) {
              best = &ir;
              best_same = same;
              best_d = d;
            }
          }
          sets.push_back(best == nullptr
                             ? MemberSet{}
                             : MemberSet{{best->explanation_tokens, best->explanation}});
        } else {
          sets.push_back(from_competing(
              retrieval::retrieve(*in.index, fp, qrow, a, opt.k_exp, ex.id)));
        }
      }
      if (mode == Mode::kReweightedGenerated) {
        const Tensor qp = row_of(q_pre, i);
        std::vector<generator::Conditioning> conds;
        for (std::size_t c = 0; c < cands.size(); ++c) {
          retrieval::CompetingSet cs;
          cs.answer_id = answers[c];
          for (const Member& m : sets[c]) cs.members.push_back({m.tokens, m.text, "", 0.0});
          conds.push_back(generator::condition(qp, *ex.objects, answers[c], cs, *in.generator));
        }
        const std::uint64_t seed =
            numcore::Rng::derive(opt.seed, "eval-generated:" + ex.id).next_u64();
        auto generated =
            generator::sample_explanation_set(conds, *in.generator, opt.samples, seed);
        for (std::size_t c = 0; c < cands.size(); ++c) {
          MemberSet g;
          for (const auto& d : generated.at(answers[c])) {
            if (!d.tokens.empty()) g.push_back({d.tokens, in.vocab->decode(d.tokens)});
          }
          sets[c] = std::move(g);
        }
      }
      const SetScores sc = score_sets(verifier_params, row_of(q_all, i), row_of(v_all, i),
                                      answers, sets);
      std::map<int, SetScore> s_max;
      for (std::size_t c = 0; c < cands.size(); ++c) {
        s_max[answers[c]] = sc.s[c];
        if (sc.s[c].empty_set) ++result.report.empty_sets;
      }
      r.topk = reweight(cands, s_max);
      const std::size_t pick = mode == Mode::kNoReweight ? 0 : final_answer(r.topk);
      r.chosen = r.topk[pick].answer;
      if (!sets[pick].empty()) r.explanation = sets[pick][sc.best[pick]].text;
      s_sum += r.topk[pick].s_max;

      hyps.push_back(corpus::split_words(r.explanation));
      refs.push_back({corpus::split_words(gold_text)});
      rouge_sum += rouge_l(hyps.back(), refs.back().front()).value;
    }
    r.gold_score = ex.score_of(r.chosen);
    chosen_ids.push_back(r.chosen);
    result.examples.push_back(std::move(r));
  }

  EvalReport& rep = result.report;
  rep.mode = mode_name(mode);
  rep.examples = n;
  rep.accuracy = vqa_accuracy(chosen_ids, in.test);
  rep.mean_selected_s = base ? kNaN : s_sum / static_cast<double>(n);
  if (!base) {
    rep.has_text_metrics = true;
    rep.bleu4 = corpus_bleu4(hyps, refs).value;
    rep.rouge_l = rouge_sum / static_cast<double>(n);
  }
  if (mode == Mode::kHumanRA) {
    rep.note =
        "wrong candidates use the human explanation of the nearest training example "
        "with that answer (identical question first, then q*v distance)";
  }
  rep.config = {{"mode", rep.mode},
                {"k_ans", opt.k_ans},
                {"k_exp", opt.k_exp},
                {"samples", opt.samples}};
  rep.seed = opt.seed;
  return result;
}

ordered_json dump_line(const ExampleResult& r, Mode mode, const corpus::AnswerSpace& answers) {
  ordered_json topk = ordered_json::array();
  for (const Reweighted& c : r.topk) {
    ordered_json e;
    e["answer"] = answers.text(c.answer);
    e["p"] = c.p;
    e["s_max"] = std::isnan(c.s_max) ? ordered_json(nullptr) : ordered_json(c.s_max);
    e["p_tilde"] = c.p_tilde;
    topk.push_back(std::move(e));
  }
  ordered_json j;
  j["id"] = r.id;
  j["mode"] = mode_name(mode);
  j["topk"] = std::move(topk);
  j["chosen"] = answers.text(r.chosen);
  j["explanation_text"] = r.explanation;
  j["gold_score_of_chosen"] = r.gold_score;
  return j;
}

}  // namespace compex::eval
