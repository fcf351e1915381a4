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

#include "compex/generator/explainer.h"

#include <algorithm>
#include <cmath>
#include <limits>
#include <unordered_map>

#include "compex/encoders/encoders.h"
#include "compex/error.h"
#include "compex/numcore/adam.h"
#include "compex/vqa/pretrain.h"

namespace compex::generator {
namespace {

using corpus::Vocabulary;
using nlohmann::ordered_json;
using numcore::Tape;

bool frozen(const std::string&) { return false; }

ParamStore generator_view(const ParamStore& params) {
  ParamStore view;
  view.import_prefix(params, "generator.");
  if (view.empty()) throw MissingArtifact("no generator parameters in checkpoint");
  return view;
}

std::vector<std::size_t> segment_rows(const std::vector<std::size_t>& rows,
                                      std::size_t n_obj) {
  std::vector<std::size_t> out;
  out.reserve(rows.size() * n_obj);
  for (std::size_t r : rows) {
    for (std::size_t o = 0; o < n_obj; ++o) out.push_back(r * n_obj + o);
  }
  return out;
}

std::vector<std::size_t> repeat_rows(std::size_t rows, std::size_t n) {
  std::vector<std::size_t> out(rows * n);
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = i / n;
  return out;
}

// Tokens the decoder may emit: everything except PAD and BOS.
bool emittable(std::size_t id) {
  return id != static_cast<std::size_t>(Vocabulary::kPad) &&
         id != static_cast<std::size_t>(Vocabulary::kBos);
}

double log_prob(double p) {
  return std::log(std::max(p, std::numeric_limits<double>::min()));
}

// Frozen decoder over one conditioning, rows repeated on demand.
class Session {
 public:
  Session(const ParamStore& params, const std::vector<Conditioning>& cs)
      : view_(generator_view(params)),
        bound_(tape_, view_, frozen),
        gen_(Generator::bind(bound_)) {
    if (cs.empty()) throw InvalidArgument("nothing to decode");
    const std::size_t n_obj = cs.front().objects->rows();
    std::vector<double> q, x, obj;
    std::vector<int> answers;
    for (const Conditioning& c : cs) {
      if (c.objects == nullptr || c.objects->rows() != n_obj) {
        throw ShapeError("conditioning object sets differ in size");
      }
      q.insert(q.end(), c.q.storage().begin(), c.q.storage().end());
      x.insert(x.end(), c.x.storage().begin(), c.x.storage().end());
      obj.insert(obj.end(), c.objects->storage().begin(), c.objects->storage().end());
      answers.push_back(c.answer);
    }
    const std::size_t n = cs.size();
    base_ = gen_.context(
        numcore::constant(tape_, Tensor::matrix(n, cs.front().x.cols(), std::move(x))),
        numcore::constant(tape_, Tensor::matrix(n, cs.front().q.cols(), std::move(q))),
        numcore::constant(tape_, Tensor::matrix(n * n_obj, cs.front().objects->cols(),
                                                std::move(obj))),
        n_obj, answers);
  }

  const Generator& gen() const { return gen_; }
  const DecodeContext& base() const { return base_; }
  std::size_t vocab() const { return gen_.out.w.cols(); }

 private:
  Tape tape_;
  ParamStore view_;
  ParamBinding bound_;
  Generator gen_;
  DecodeContext base_;
};

struct Hypothesis {
  TokenSeq tokens;
  double score = 0.0;
  bool finished = false;
  std::size_t state_row = 0;
};

}  // namespace

ordered_json GeneratorConfig::to_json() const {
  return {{"vocab", vocab},           {"answers", answers},
          {"object_dim", object_dim}, {"question_dim", question_dim},
          {"embed", embed},           {"hidden", hidden},
          {"attention", attention},   {"init_range", init_range}};
}

GeneratorConfig GeneratorConfig::from_json(const ordered_json& j) {
  GeneratorConfig c;
  try {
    c.vocab = j.at("vocab").get<std::size_t>();
    c.answers = j.at("answers").get<std::size_t>();
    c.object_dim = j.at("object_dim").get<std::size_t>();
    c.question_dim = j.at("question_dim").get<std::size_t>();
    c.embed = j.at("embed").get<std::size_t>();
    c.hidden = j.at("hidden").get<std::size_t>();
    c.attention = j.at("attention").get<std::size_t>();
    c.init_range = j.at("init_range").get<double>();
  } catch (const nlohmann::json::exception& e) {
    throw SchemaError(std::string("generator config: ") + e.what());
  }
  return c;
}

void init_generator_params(ParamStore& store, const GeneratorConfig& cfg,
                           numcore::Rng& rng) {
  if (cfg.vocab == 0 || cfg.answers == 0 || cfg.object_dim == 0 ||
      cfg.question_dim == 0 || cfg.embed == 0 || cfg.hidden == 0 ||
      cfg.attention == 0) {
    throw InvalidArgument("generator dimensions must be positive");
  }
  const double r = cfg.init_range;
  const std::size_t h = cfg.hidden;
  encoders::add_text_encoder(store, "generator.pool", cfg.vocab, cfg.embed, h, rng, r);
  numcore::add_linear(store, "generator.u_obj", cfg.object_dim, h, rng, r);
  store.add_uniform("generator.u_q", {cfg.question_dim, h}, r, rng);
  store.add_uniform("generator.word_embed", {cfg.vocab, cfg.embed}, r, rng);
  store.add_uniform("generator.answer_embed", {cfg.answers, cfg.embed}, r, rng);
  numcore::add_gru(store, "generator.gru1", h + cfg.question_dim + 2 * cfg.embed + h,
                   h, rng, r);
  store.add_uniform("generator.att_u", {h, cfg.attention}, r, rng);
  store.add_uniform("generator.att_h", {h, cfg.attention}, r, rng);
  store.add_uniform("generator.att_b", {1, cfg.attention}, r, rng);
  store.add_uniform("generator.att_w", {cfg.attention, 1}, r, rng);
  numcore::add_gru(store, "generator.gru2", 2 * h, h, rng, r);
  numcore::add_linear(store, "generator.out", h, cfg.vocab, rng, r);
}

Generator Generator::bind(const ParamBinding& params, const std::string& prefix) {
  Generator g;
  const encoders::TextEncoder pool = encoders::TextEncoder::bind(params, prefix + ".pool");
  g.pool_embed = pool.embed;
  g.pool_gru = pool.gru;
  g.u_obj = numcore::Linear::bind(params, prefix + ".u_obj");
  g.u_q = params[prefix + ".u_q"];
  g.word_embed = params[prefix + ".word_embed"];
  g.answer_embed = params[prefix + ".answer_embed"];
  g.gru1 = numcore::Gru::bind(params, prefix + ".gru1");
  g.att_u = params[prefix + ".att_u"];
  g.att_h = params[prefix + ".att_h"];
  g.att_b = params[prefix + ".att_b"];
  g.att_w = params[prefix + ".att_w"];
  g.gru2 = numcore::Gru::bind(params, prefix + ".gru2");
  g.out = numcore::Linear::bind(params, prefix + ".out");
  return g;
}

Var Generator::pool(const std::vector<std::vector<TokenSeq>>& sets) const {
  Tape& tape = *pool_embed.tape;
  const std::size_t h = pool_gru.hidden();
  std::vector<TokenSeq> members;
  std::vector<std::size_t> offsets{0};
  std::vector<std::size_t> row_of(sets.size());
  std::size_t nonempty = 0;
  for (const auto& set : sets) {
    if (set.empty()) continue;
    members.insert(members.end(), set.begin(), set.end());
    offsets.push_back(members.size());
    ++nonempty;
  }
  // Empty sets read the trailing zero row.
  std::size_t next = 0;
  for (std::size_t i = 0; i < sets.size(); ++i) {
    row_of[i] = sets[i].empty() ? nonempty : next++;
  }
  const Var zero = numcore::constant(tape, Tensor::zeros(1, h));
  if (members.empty()) return numcore::embedding_lookup(zero, row_of);
  const Var pooled = numcore::max_over_segments(
      pool_gru.encode(pool_embed, members), std::move(offsets));
  const Var table[] = {pooled, zero};
  return numcore::embedding_lookup(numcore::concat(table, 0), std::move(row_of));
}

DecodeContext Generator::context(Var x, Var q, Var objects, std::size_t n_obj,
                                 const std::vector<int>& answers) const {
  const std::size_t rows = q.rows();
  if (x.rows() != rows || answers.size() != rows || objects.rows() != rows * n_obj) {
    throw ShapeError("generator context inputs disagree on the number of rows");
  }
  std::vector<std::size_t> ids;
  for (int a : answers) {
    if (a < 0 || static_cast<std::size_t>(a) >= answer_embed.rows()) {
      throw InvalidArgument("answer id " + std::to_string(a) +
                            " outside the generator's answer space");
    }
    ids.push_back(static_cast<std::size_t>(a));
  }
  DecodeContext ctx;
  ctx.n_obj = n_obj;
  const Var parts[] = {x, q, numcore::embedding_lookup(answer_embed, std::move(ids))};
  ctx.fixed = numcore::concat(parts, 1);
  const Var q_part = numcore::embedding_lookup(matmul(q, u_q), repeat_rows(rows, n_obj));
  ctx.u = numcore::relu(add(u_obj(objects), q_part));
  ctx.u_att = matmul(ctx.u, att_u);
  return ctx;
}

DecodeContext Generator::select(const DecodeContext& ctx,
                                const std::vector<std::size_t>& rows) {
  DecodeContext out;
  out.n_obj = ctx.n_obj;
  out.fixed = numcore::embedding_lookup(ctx.fixed, rows);
  const std::vector<std::size_t> seg = segment_rows(rows, ctx.n_obj);
  out.u = numcore::embedding_lookup(ctx.u, seg);
  out.u_att = numcore::embedding_lookup(ctx.u_att, seg);
  return out;
}

DecoderState Generator::initial_state(const DecodeContext& ctx) const {
  Tape& tape = *ctx.fixed.tape;
  const std::size_t h = gru1.hidden();
  const Var zero = numcore::constant(tape, Tensor::zeros(ctx.rows(), h));
  return {zero, zero};
}

StepOutput Generator::step(const DecodeContext& ctx, const DecoderState& state,
                           const std::vector<int>& previous) const {
  const std::size_t rows = ctx.rows();
  if (previous.size() != rows) throw ShapeError("one previous token per row is required");
  std::vector<std::size_t> ids;
  for (int t : previous) {
    if (t < 0 || static_cast<std::size_t>(t) >= word_embed.rows()) {
      throw InvalidArgument("token id " + std::to_string(t) + " outside the vocabulary");
    }
    ids.push_back(static_cast<std::size_t>(t));
  }
  const Var in1[] = {ctx.fixed, numcore::embedding_lookup(word_embed, std::move(ids)),
                     state.h2};
  const Var h1 = gru1.step(numcore::concat(in1, 1), state.h1);

  const Var h_part = numcore::embedding_lookup(matmul(h1, att_h), repeat_rows(rows, ctx.n_obj));
  const Var hidden = numcore::tanh(add(add(ctx.u_att, h_part), att_b));
  const std::vector<std::size_t> offsets = numcore::uniform_offsets(rows, ctx.n_obj);
  const Var alpha = numcore::softmax_segments(matmul(hidden, att_w), offsets);
  const Var attended = numcore::scale(
      numcore::mean_over_segments(mul(alpha, ctx.u), offsets),
      static_cast<double>(ctx.n_obj));

  const Var in2[] = {attended, h1};
  const Var h2 = gru2.step(numcore::concat(in2, 1), state.h2);
  return {{h1, h2}, numcore::softmax_rows(out(h2))};
}

Var Generator::teacher_forced_loss(const DecodeContext& ctx,
                                   const std::vector<TokenSeq>& targets) const {
  const std::size_t rows = ctx.rows();
  if (targets.size() != rows) throw ShapeError("one target sequence per row is required");
  std::size_t steps = 0, total = 0;
  for (const TokenSeq& t : targets) {
    if (t.empty()) throw InvalidArgument("empty target explanation");
    steps = std::max(steps, t.size() + 1);
    total += t.size() + 1;
  }
  const std::size_t vocab = out.w.cols();
  const double w = 1.0 / static_cast<double>(total);
  DecoderState state = initial_state(ctx);
  std::vector<int> previous(rows, Vocabulary::kBos);
  Var loss;
  bool have = false;
  for (std::size_t s = 0; s < steps; ++s) {
    const StepOutput o = step(ctx, state, previous);
    state = o.state;
    Tensor target = Tensor::zeros(rows, vocab);
    for (std::size_t r = 0; r < rows; ++r) {
      const TokenSeq& t = targets[r];
      int next = Vocabulary::kPad;
      if (s < t.size()) {
        next = t[s];
      } else if (s == t.size()) {
        next = Vocabulary::kEos;
      }
      if (s <= t.size()) target.at(r, static_cast<std::size_t>(next)) = 1.0;
      previous[r] = next;
    }
    // -log p(target) per live row: with a one-hot target and weight, bce
    // keeps only the target entry.
    Tensor weight = target;
    for (double& v : weight.storage()) v *= w;
    const Var term = numcore::bce_soft(o.probs, std::move(target), std::move(weight));
    loss = have ? add(loss, term) : term;
    have = true;
  }
  return loss;
}

Tensor pool_retrieved(const retrieval::CompetingSet& set, const ParamStore& params) {
  if (set.empty()) throw InvalidArgument("cannot pool an empty explanation set");
  const ParamStore view = generator_view(params);
  Tape tape;
  ParamBinding bound(tape, view, frozen);
  std::vector<TokenSeq> members;
  for (const auto& m : set.members) members.push_back(m.tokens);
  return Generator::bind(bound).pool({members}).value();
}

void DecodeConfig::validate() const {
  if (beam_size < 1) throw InvalidArgument("beam size must be at least 1");
  if (max_len < 1) throw InvalidArgument("max_len must be at least 1");
  if (!(temperature > 0.0)) throw InvalidArgument("temperature must be positive");
}

Conditioning condition(const Tensor& q, const Tensor& objects, int answer_id,
                       const retrieval::CompetingSet& set, const ParamStore& params) {
  Conditioning c;
  c.q = q;
  c.objects = &objects;
  c.answer = answer_id;
  if (set.empty()) {
    c.x = Tensor::zeros(1, params.get("generator.pool.gru.u_r").cols());
  } else {
    c.x = pool_retrieved(set, params);
  }
  return c;
}

Decoded greedy_decode(const Conditioning& c, const ParamStore& params,
                      std::size_t max_len) {
  if (max_len < 1) throw InvalidArgument("max_len must be at least 1");
  Session session(params, {c});
  const Generator& g = session.gen();
  DecoderState state = g.initial_state(session.base());
  Decoded d;
  int previous = Vocabulary::kBos;
  for (std::size_t s = 0; s < max_len; ++s) {
    const StepOutput o = g.step(session.base(), state, {previous});
    state = o.state;
    const Tensor p = o.probs.value();
    std::size_t best = 0;
    double best_p = -1.0;
    for (std::size_t v = 0; v < p.cols(); ++v) {
      if (emittable(v) && p[v] > best_p) {
        best_p = p[v];
        best = v;
      }
    }
    d.score += log_prob(best_p);
    if (best == static_cast<std::size_t>(Vocabulary::kEos)) {
      d.finished = true;
      break;
    }
    d.tokens.push_back(static_cast<int>(best));
    previous = static_cast<int>(best);
  }
  return d;
}

Decoded generate_explanation(const Conditioning& c, const ParamStore& params,
                             const DecodeConfig& cfg) {
  cfg.validate();
  if (cfg.mode == DecodeConfig::Mode::kSample) {
    return sample_explanation_set({c}, params, 1, cfg.seed, cfg.max_len,
                                  cfg.temperature)
        .begin()
        ->second.front();
  }
  Decoded incumbent = greedy_decode(c, params, cfg.max_len);
  if (cfg.beam_size == 1) return incumbent;

  Session session(params, {c});
  const Generator& g = session.gen();
  const std::size_t vocab = session.vocab();
  std::vector<Hypothesis> beam{Hypothesis{}};
  DecodeContext ctx = session.base();
  DecoderState state = g.initial_state(ctx);
  for (std::size_t s = 0; s < cfg.max_len; ++s) {
    std::vector<std::size_t> live;
    std::vector<int> previous;
    for (std::size_t i = 0; i < beam.size(); ++i) {
      if (beam[i].finished) continue;
      live.push_back(i);
      previous.push_back(beam[i].tokens.empty() ? Vocabulary::kBos : beam[i].tokens.back());
    }
    if (live.empty()) break;
    std::vector<std::size_t> state_rows;
    for (std::size_t i : live) state_rows.push_back(beam[i].state_row);
    const DecodeContext sub = Generator::select(ctx, std::vector<std::size_t>(live.size(), 0));
    const DecoderState in{numcore::embedding_lookup(state.h1, state_rows),
                          numcore::embedding_lookup(state.h2, state_rows)};
    const StepOutput o = g.step(sub, in, previous);
    const Tensor p = o.probs.value();

    std::vector<Hypothesis> next;
    for (const Hypothesis& h : beam) {
      if (h.finished) next.push_back(h);
    }
    for (std::size_t j = 0; j < live.size(); ++j) {
      const Hypothesis& h = beam[live[j]];
      for (std::size_t v = 0; v < vocab; ++v) {
        if (!emittable(v)) continue;
        Hypothesis e;
        e.score = h.score + log_prob(p.at(j, v));
        e.tokens = h.tokens;
        e.state_row = j;
        if (v == static_cast<std::size_t>(Vocabulary::kEos)) {
          e.finished = true;
        } else {
          e.tokens.push_back(static_cast<int>(v));
        }
        next.push_back(std::move(e));
      }
    }
    // Highest score first; ties prefer finished, then shorter, then lexicographic.
    std::stable_sort(next.begin(), next.end(), [](const Hypothesis& a, const Hypothesis& b) {
      if (a.score != b.score) return a.score > b.score;
      if (a.finished != b.finished) return a.finished;
      return a.tokens < b.tokens;
    });
    next.resize(std::min(next.size(), cfg.beam_size));
    beam = std::move(next);
    state = o.state;
  }
  const Hypothesis& top = beam.front();
  if (top.score >= incumbent.score) {
    return Decoded{top.tokens, top.score, top.finished};
  }
  return incumbent;
}

double sequence_score(const Conditioning& c, const ParamStore& params,
                      const TokenSeq& tokens, bool with_eos) {
  Session session(params, {c});
  const Generator& g = session.gen();
  DecoderState state = g.initial_state(session.base());
  int previous = Vocabulary::kBos;
  double score = 0.0;
  const std::size_t steps = tokens.size() + (with_eos ? 1 : 0);
  for (std::size_t s = 0; s < steps; ++s) {
    const StepOutput o = g.step(session.base(), state, {previous});
    state = o.state;
    const int next = s < tokens.size() ? tokens[s] : Vocabulary::kEos;
    score += log_prob(o.probs.value()[static_cast<std::size_t>(next)]);
    previous = next;
  }
  return score;
}

std::map<int, std::vector<Decoded>> sample_explanation_set(
    const std::vector<Conditioning>& candidates, const ParamStore& params,
    std::size_t n, std::uint64_t seed, std::size_t max_len, double temperature) {
  if (n == 0) throw InvalidArgument("sample count must be positive");
  DecodeConfig check;
  check.max_len = max_len;
  check.temperature = temperature;
  check.validate();
  std::map<int, std::vector<Decoded>> out;
  if (candidates.empty()) return out;

  numcore::Rng rng = numcore::Rng::derive(seed, "explanation-samples");
  Session session(params, candidates);
  const Generator& g = session.gen();
  const std::size_t rows = candidates.size() * n;
  const DecodeContext ctx = Generator::select(session.base(), repeat_rows(candidates.size(), n));
  DecoderState state = g.initial_state(ctx);
  std::vector<Decoded> samples(rows);
  std::vector<int> previous(rows, Vocabulary::kBos);
  const std::size_t vocab = session.vocab();
  std::vector<double> weights(vocab);
  for (std::size_t s = 0; s < max_len; ++s) {
    bool any = false;
    for (const Decoded& d : samples) any = any || !d.finished;
    if (!any) break;
    const StepOutput o = g.step(ctx, state, previous);
    state = o.state;
    const Tensor p = o.probs.value();
    for (std::size_t r = 0; r < rows; ++r) {
      Decoded& d = samples[r];
      if (d.finished) continue;
      for (std::size_t v = 0; v < vocab; ++v) {
        weights[v] = emittable(v) ? std::pow(p.at(r, v), 1.0 / temperature) : 0.0;
      }
      const std::size_t t = rng.categorical(weights);
      d.score += log_prob(p.at(r, t));
      if (t == static_cast<std::size_t>(Vocabulary::kEos)) {
        d.finished = true;
        previous[r] = Vocabulary::kEos;
      } else {
        d.tokens.push_back(static_cast<int>(t));
        previous[r] = static_cast<int>(t);
      }
    }
  }
  for (std::size_t c = 0; c < candidates.size(); ++c) {
    auto& slot = out[candidates[c].answer];
    for (std::size_t i = 0; i < n; ++i) slot.push_back(std::move(samples[c * n + i]));
  }
  return out;
}

Tensor question_embeddings(const ParamStore& params,
                           const std::vector<const corpus::VQAExample*>& examples,
                           const std::string& prefix) {
  ParamStore view;
  view.import_prefix(params, prefix + "encoder.question.", "encoder.question.");
  if (view.empty()) throw MissingArtifact("no question encoder under '" + prefix + "encoder.'");
  std::vector<double> data;
  std::size_t width = 0;
  constexpr std::size_t kChunk = 500;
  for (std::size_t start = 0; start < examples.size(); start += kChunk) {
    Tape tape;
    ParamBinding bound(tape, view, frozen);
    const encoders::TextEncoder enc = encoders::TextEncoder::bind(bound, "encoder.question");
    std::vector<TokenSeq> seqs;
    for (std::size_t i = start; i < std::min(examples.size(), start + kChunk); ++i) {
      seqs.push_back(examples[i]->question_tokens);
    }
    const Tensor q = enc.encode(seqs).value();
    width = q.cols();
    data.insert(data.end(), q.storage().begin(), q.storage().end());
  }
  return Tensor::matrix(examples.size(), width, std::move(data));
}

ordered_json GeneratorHyper::to_json() const {
  return {{"epochs", epochs}, {"lr", lr}, {"batch_size", batch_size},
          {"k_exp", k_exp},   {"seed", seed}};
}

GeneratorResult train_generator(const std::vector<const corpus::VQAExample*>& train,
                                const retrieval::ExplanationIndex& index,
                                const ParamStore& encoder, const GeneratorConfig& cfg,
                                const GeneratorHyper& hyper,
                                const std::function<void(const GeneratorEpoch&)>& on_epoch,
                                const std::string& prefix) {
  if (train.empty()) throw InvalidArgument("generator training needs a non-empty train split");
  if (hyper.epochs < 0) throw InvalidArgument("epochs must be non-negative");
  if (hyper.batch_size <= 0) throw InvalidArgument("batch size must be positive");
  if (!(hyper.lr > 0.0)) throw InvalidArgument("learning rate must be positive");
  const std::string fp = retrieval::encoder_fingerprint(encoder, prefix);
  index.check_fingerprint(fp);

  std::unordered_map<std::string, std::size_t> row_of;
  for (std::size_t r = 0; r < index.size(); ++r) row_of.emplace(index.rows()[r].example_id, r);

  // Fixed conditioning per example: pretrained q and the gold answer's set.
  const Tensor q_all = question_embeddings(encoder, train, prefix);
  std::vector<std::vector<TokenSeq>> sets(train.size());
  std::vector<int> gold(train.size());
  for (std::size_t i = 0; i < train.size(); ++i) {
    const corpus::VQAExample& ex = *train[i];
    if (ex.explanation_tokens.empty()) {
      throw InvalidArgument("example '" + ex.id + "' has no explanation");
    }
    gold[i] = ex.gold_answer();
    auto it = row_of.find(ex.id);
    if (it == row_of.end()) {
      throw InvalidArgument("example '" + ex.id + "' is not in the explanation index");
    }
    const retrieval::CompetingSet set = retrieval::retrieve(
        index, fp, index.embedding(it->second), gold[i], hyper.k_exp, ex.id);
    for (const auto& m : set.members) sets[i].push_back(m.tokens);
  }

  GeneratorResult result;
  numcore::Rng init_rng = numcore::Rng::derive(hyper.seed, "generator-init");
  init_generator_params(result.params, cfg, init_rng);
  numcore::Rng order_rng = numcore::Rng::derive(hyper.seed, "generator-order");

  const std::size_t qd = q_all.cols();
  auto run_batch = [&](Tape& tape, const ParamBinding& bound,
                       const std::vector<std::size_t>& idx) {
    const Generator g = Generator::bind(bound);
    std::vector<double> q;
    std::vector<const Tensor*> objs;
    std::vector<std::vector<TokenSeq>> batch_sets;
    std::vector<int> answers;
    std::vector<TokenSeq> targets;
    for (std::size_t i : idx) {
      q.insert(q.end(), q_all.data().begin() + i * qd, q_all.data().begin() + (i + 1) * qd);
      objs.push_back(train[i]->objects);
      batch_sets.push_back(sets[i]);
      answers.push_back(gold[i]);
      targets.push_back(train[i]->explanation_tokens);
    }
    const DecodeContext ctx = g.context(
        g.pool(batch_sets), numcore::constant(tape, Tensor::matrix(idx.size(), qd, std::move(q))),
        encoders::stack_objects(tape, objs), objs.front()->rows(), answers);
    return g.teacher_forced_loss(ctx, targets);
  };
  auto mean_loss = [&]() {
    double total = 0.0;
    std::size_t tokens = 0;
    for (std::size_t start = 0; start < train.size(); start += 256) {
      std::vector<std::size_t> idx;
      std::size_t t = 0;
      for (std::size_t i = start; i < std::min(train.size(), start + 256); ++i) {
        idx.push_back(i);
        t += train[i]->explanation_tokens.size() + 1;
      }
      Tape tape;
      ParamBinding bound(tape, result.params, frozen);
      total += run_batch(tape, bound, idx).value().item() * static_cast<double>(t);
      tokens += t;
    }
    return total / static_cast<double>(tokens);
  };
  auto emit = [&](GeneratorEpoch e) {
    result.history.push_back(e);
    if (on_epoch) on_epoch(e);
  };
  emit({0, mean_loss()});

  numcore::Adam adam;
  for (int epoch = 1; epoch <= hyper.epochs; ++epoch) {
    int step = 0;
    for (const auto& idx : vqa::make_batches(train.size(), static_cast<std::size_t>(hyper.batch_size),
                                             order_rng)) {
      ++step;
      Tape tape;
      ParamBinding bound(tape, result.params);
      std::map<std::string, Tensor> grads;
      try {
        const Var loss = run_batch(tape, bound, idx);
        if (!std::isfinite(loss.value().item())) {
          throw DivergenceError("generator epoch " + std::to_string(epoch) + " step " +
                                std::to_string(step) + ": loss is not finite");
        }
        grads = bound.gradients(loss);
      } catch (const NonFiniteError& e) {
        throw DivergenceError("generator epoch " + std::to_string(epoch) + " step " +
                              std::to_string(step) + ": " + e.what());
      }
      adam.step(result.params, grads, hyper.lr);
    }
    emit({epoch, mean_loss()});
  }
  return result;
}

ordered_json decoded_to_json(const std::string& id, const std::string& answer,
                             const Decoded& d, const corpus::Vocabulary& vocab) {
  ordered_json j;
  j["id"] = id;
  j["answer"] = answer;
  j["tokens"] = d.tokens;
  j["text"] = vocab.decode(d.tokens);
  j["decode_score"] = d.score;
  return j;
}

}  // namespace compex::generator
