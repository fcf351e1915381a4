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

#include "compex/cli/gradcheck.h"

#include <chrono>
#include <cstdio>
#include <functional>
#include <sstream>

#include "compex/encoders/encoders.h"
#include "compex/generator/explainer.h"
#include "compex/numcore/grad_check.h"
#include "compex/numcore/ops.h"
#include "compex/numcore/rng.h"
#include "compex/verifier/verifier.h"
#include "compex/vqa/predictor.h"

namespace compex::cli {
namespace {

using numcore::ParamBinding;
using numcore::ParamStore;
using numcore::Rng;
using numcore::Tape;
using numcore::Tensor;
using numcore::TokenSeq;
using numcore::Var;

// Small shapes keep 100 points per operation well inside the time budget.
constexpr std::size_t kVocab = 9;
constexpr std::size_t kEmbed = 3;
constexpr std::size_t kHidden = 4;
constexpr std::size_t kAttention = 3;
constexpr std::size_t kObjectDim = 3;
constexpr std::size_t kObjects = 3;
constexpr std::size_t kAnswers = 5;
constexpr std::size_t kBatch = 2;
constexpr double kRange = 0.5;
// Near the five-point optimum eps^(1/5); see grad_check for the noise floors.
constexpr double kStep = 1e-3;

Tensor random_matrix(Rng& rng, std::size_t rows, std::size_t cols, double lo = -1.0,
                     double hi = 1.0) {
  std::vector<double> v(rows * cols);
  for (double& x : v) x = rng.uniform(lo, hi);
  return Tensor::matrix(rows, cols, std::move(v));
}

// At least two tokens: with one, the first GRU step sees a zero state and the
// reset gate gets no meaningful gradient.
TokenSeq random_seq(Rng& rng) {
  TokenSeq s(2 + rng.uniform_index(3));
  for (int& t : s) t = static_cast<int>(4 + rng.uniform_index(kVocab - 4));
  return s;
}

std::vector<TokenSeq> random_seqs(Rng& rng, std::size_t n) {
  std::vector<TokenSeq> out;
  for (std::size_t i = 0; i < n; ++i) out.push_back(random_seq(rng));
  return out;
}

struct Case {
  ParamStore point;
  numcore::ScalarFn fn;
};

using CaseMaker = std::function<Case(Rng&)>;

encoders::EncoderDims dims() {
  return {kVocab, kEmbed, kHidden, kAttention, kObjectDim, kRange};
}

Case question_encoder_case(Rng& rng) {
  Case c;
  encoders::add_encoder(c.point, dims(), rng);
  auto seqs = random_seqs(rng, kBatch);
  auto target = random_matrix(rng, kBatch, kHidden, 0.0, 1.0);
  c.fn = [seqs, target](Tape&, const ParamBinding& b) {
    const auto enc = encoders::Encoder::bind(b);
    return numcore::bce_soft(numcore::sigmoid(enc.encode_questions(seqs)), target);
  };
  return c;
}

Case visual_encoder_case(Rng& rng) {
  Case c;
  encoders::add_encoder(c.point, dims(), rng);
  auto objects = random_matrix(rng, kBatch * kObjects, kObjectDim);
  auto q = random_matrix(rng, kBatch, kHidden);
  auto tv = random_matrix(rng, kBatch, kHidden, 0.0, 1.0);
  auto ta = random_matrix(rng, kBatch * kObjects, 1, 0.0, 1.0);
  c.fn = [=](Tape& tape, const ParamBinding& b) {
    const auto enc = encoders::Encoder::bind(b);
    const auto vis = enc.encode_visual(numcore::constant(tape, objects),
                                       numcore::constant(tape, q), kObjects);
    return numcore::add(numcore::bce_soft(numcore::sigmoid(vis.v), tv),
                        numcore::bce_soft(vis.alpha, ta));
  };
  return c;
}

Case predictor_case(Rng& rng) {
  Case c;
  vqa::VqaModelConfig cfg;
  cfg.vocab = kVocab;
  cfg.answers = kAnswers;
  cfg.object_dim = kObjectDim;
  cfg.embed = kEmbed;
  cfg.hidden = kHidden;
  cfg.attention = kAttention;
  cfg.ff_hidden = kHidden;
  cfg.init_range = kRange;
  vqa::init_vqa_params(c.point, cfg, rng);
  auto qv = random_matrix(rng, kBatch, kHidden);
  auto targets = random_matrix(rng, kBatch, kAnswers, 0.0, 1.0);
  c.fn = [qv, targets](Tape& tape, const ParamBinding& b) {
    const auto pred = vqa::Predictor::bind(b);
    return vqa::vqa_loss(pred(numcore::constant(tape, qv)), targets);
  };
  return c;
}

Case verifier_case(Rng& rng) {
  Case c;
  verifier::VerifierConfig cfg;
  cfg.vocab = kVocab;
  cfg.answers = kAnswers;
  cfg.input_hidden = kHidden;
  cfg.embed = kEmbed;
  cfg.hidden = kHidden;
  cfg.init_range = kRange;
  verifier::init_verifier_params(c.point, cfg, rng);
  auto q = random_matrix(rng, kBatch, kHidden);
  auto v = random_matrix(rng, kBatch, kHidden);
  auto seqs = random_seqs(rng, 3);
  std::vector<int> answers;
  for (int i = 0; i < 3; ++i) answers.push_back(static_cast<int>(rng.uniform_index(kAnswers)));
  // Four tuples mixing the rows, the way a fine-tuning step does.
  const std::vector<std::size_t> qi = {0, 1, 0, 1}, vi = {0, 1, 1, 0}, xi = {0, 1, 2, 0};
  const std::vector<int> ai = {answers[0], answers[1], answers[2], answers[0]};
  auto target = random_matrix(rng, 4, 1, 0.0, 1.0);
  c.fn = [=](Tape& tape, const ParamBinding& b) {
    const auto ver = verifier::Verifier::bind(b);
    const Var pq = ver.project_q(numcore::constant(tape, q));
    const Var pv = ver.project_v(numcore::constant(tape, v));
    const Var px = ver.project_x(ver.encode_explanations(seqs));
    const Var pa = ver.project_answers(ai);
    return numcore::bce_soft(ver.score(pq, qi, pv, vi, pa, px, xi), target);
  };
  return c;
}

Case generator_case(Rng& rng) {
  Case c;
  generator::GeneratorConfig cfg;
  cfg.vocab = kVocab;
  cfg.answers = kAnswers;
  cfg.object_dim = kObjectDim;
  cfg.question_dim = kHidden;
  cfg.embed = kEmbed;
  cfg.hidden = kHidden;
  cfg.attention = kAttention;
  cfg.init_range = kRange;
  generator::init_generator_params(c.point, cfg, rng);
  std::vector<std::vector<TokenSeq>> sets = {random_seqs(rng, 2), random_seqs(rng, 1)};
  auto q = random_matrix(rng, kBatch, kHidden);
  auto objects = random_matrix(rng, kBatch * kObjects, kObjectDim);
  std::vector<int> answers = {static_cast<int>(rng.uniform_index(kAnswers)),
                              static_cast<int>(rng.uniform_index(kAnswers))};
  auto targets = random_seqs(rng, kBatch);
  c.fn = [=](Tape& tape, const ParamBinding& b) {
    const auto gen = generator::Generator::bind(b);
    const auto ctx = gen.context(gen.pool(sets), numcore::constant(tape, q),
                                 numcore::constant(tape, objects), kObjects, answers);
    return gen.teacher_forced_loss(ctx, targets);
  };
  return c;
}

}  // namespace

std::vector<OpGradCheck> gradient_suite(std::uint64_t seed, int points) {
  const std::vector<std::pair<std::string, CaseMaker>> makers = {
      {"encoder.question", question_encoder_case},
      {"encoder.visual", visual_encoder_case},
      {"predictor", predictor_case},
      {"verifier", verifier_case},
      {"generator", generator_case},
  };
  std::vector<OpGradCheck> rows;
  for (const auto& [name, make] : makers) {
    const auto start = std::chrono::steady_clock::now();
    OpGradCheck row;
    row.op = name;
    for (int p = 0; p < points; ++p) {
      Rng rng = Rng::derive(seed, "gradcheck:" + name + ":" + std::to_string(p));
      const Case c = make(rng);
      const auto r = numcore::grad_check(c.fn, c.point, kStep, numcore::Stencil::kFivePoint);
      const auto central = numcore::grad_check(c.fn, c.point, 1e-5, numcore::Stencil::kCentral);
      row.central_max_rel_error = std::max(row.central_max_rel_error, central.max_rel_error);
      ++row.points;
      row.coordinates += r.coordinates;
      row.kinked += r.kinked;
      if (row.worst_param.empty() || r.max_rel_error > row.max_rel_error) {
        row.max_rel_error = r.max_rel_error;
        row.worst_param = r.worst_param;
      }
    }
    row.seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    rows.push_back(row);
  }
  return rows;
}

std::string format_gradcheck_table(const std::vector<OpGradCheck>& rows) {
  std::ostringstream out;
  char line[256];
  std::snprintf(line, sizeof line, "%-18s %6s %11s %7s %14s  %-6s %-14s %s\n", "op",
                "points", "coordinates", "kinked", "max_rel_error", "status", "central_1e-5",
                "worst_param");
  out << line;
  for (const auto& r : rows) {
    std::snprintf(line, sizeof line, "%-18s %6d %11zu %7zu %14.3e  %-6s %-14.3e %s\n",
                  r.op.c_str(), r.points, r.coordinates, r.kinked, r.max_rel_error,
                  r.passed() ? "ok" : "FAIL", r.central_max_rel_error, r.worst_param.c_str());
    out << line;
  }
  return out.str();
}

nlohmann::ordered_json gradcheck_to_json(const std::vector<OpGradCheck>& rows) {
  nlohmann::ordered_json j = nlohmann::ordered_json::array();
  for (const auto& r : rows) {
    j.push_back({{"op", r.op},
                 {"points", r.points},
                 {"coordinates", r.coordinates},
                 {"kinked", r.kinked},
                 {"max_rel_error", r.max_rel_error},
                 {"central_max_rel_error", r.central_max_rel_error},
                 {"worst_param", r.worst_param},
                 {"passed", r.passed()}});
  }
  return j;
}

}  // namespace compex::cli
