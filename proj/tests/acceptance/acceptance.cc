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

// Acceptance run: one PASS/FAIL line per criterion, exit status 1 when any
// fails. The accuracy criteria drive the real pipeline through cli::run on
// the shipped config; the rest are property checks against oracles.

#include <CLI11.hpp>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <map>
#include <nlohmann/json.hpp>
#include <numbers>
#include <set>
#include <sstream>

#include "compex/cli/gradcheck.h"
#include "compex/cli/model.h"
#include "compex/cli/run.h"
#include "compex/error.h"
#include "compex/eval/metrics.h"
#include "compex/eval/reweight.h"
#include "compex/generator/explainer.h"
#include "compex/numcore/checkpoint.h"
#include "compex/retrieval/index.h"
#include "compex/verifier/finetune.h"
#include "compex/vqa/pretrain.h"
#include "oracles.h"
#include "test_util.h"

namespace fs = std::filesystem;

namespace compex {
namespace {

using numcore::Rng;
using Clock = std::chrono::steady_clock;

// Tolerances and bounds.
constexpr double kMinLift = 3.0;
// Lift measured by the first complete run of the shipped config (3.40),
// rounded down to 0.1 and frozen as the regression bound.
constexpr double kFrozenLift = 3.4;
constexpr double kPipelineBudgetSeconds = 15 * 60;
constexpr double kOrderingSlack = 0.5;
constexpr int kGradPoints = 100;
constexpr double kGradBudgetSeconds = 120;
constexpr double kClosedFormTolerance = 1e-12;
constexpr double kBleuTolerance = 1e-9;
constexpr double kOverfitNats = 0.05;

struct Result {
  bool passed = false;
  std::string detail;
};

double seconds_since(Clock::time_point start) {
  return std::chrono::duration<double>(Clock::now() - start).count();
}

std::string fmt(const char* f, double a) {
  char buf[64];
  std::snprintf(buf, sizeof buf, f, a);
  return buf;
}

std::string read_bytes(const fs::path& p) { return test::read_file(p); }

struct Invocation {
  int code = 0;
  std::string out;
  std::string err;
  double seconds = 0.0;
};

Invocation invoke(const std::vector<std::string>& args) {
  std::ostringstream out, err;
  const auto start = Clock::now();
  Invocation r;
  r.code = cli::run(args, out, err);
  r.seconds = seconds_since(start);
  r.out = out.str();
  r.err = err.str();
  return r;
}

Invocation must(const std::vector<std::string>& args) {
  Invocation r = invoke(args);
  if (r.code != 0) {
    std::string joined;
    for (const auto& a : args) joined += a + " ";
    throw Error("internal", "`compex " + joined + "` exited " + std::to_string(r.code) + ": " +
                                r.err.substr(r.err.rfind("error:") == std::string::npos
                                                 ? 0
                                                 : r.err.rfind("error:")));
  }
  return r;
}

// ---------------------------------------------------------------------------
// Full pipeline on the shipped config.

struct Pipeline {
  fs::path dir;
  std::string config;
  std::map<std::string, double> accuracy;
  double lift_seconds = 0.0;   // stages the accuracy-lift criterion needs
  double total_seconds = 0.0;  // everything, including the generator
  std::string failure;

  std::string path(const std::string& name) const { return (dir / name).string(); }
  std::vector<std::string> with(std::vector<std::string> head,
                                const std::vector<std::string>& tail) const {
    head.insert(head.end(), {"--config", config, "--corpus", path("corpus.jsonl")});
    head.insert(head.end(), tail.begin(), tail.end());
    return head;
  }
  double eval(const std::string& mode) {
    const Invocation r = must(with({"eval"}, {"--checkpoint", path("ft.ckpt"), "--index",
                                              path("index"), "--generator", path("gen.ckpt"),
                                              "--mode", mode, "--out",
                                              path("eval_" + mode + ".json")}));
    total_seconds += r.seconds;
    if (mode == "base" || mode == "reweighted-retrieved") lift_seconds += r.seconds;
    const auto report = nlohmann::json::parse(read_bytes(dir / ("eval_" + mode + ".json")));
    accuracy[mode] = report.at("accuracy").get<double>();
    std::cerr << "  eval " << mode << " " << accuracy[mode] << " (" << fmt("%.1f", r.seconds)
              << " s)\n";
    return accuracy[mode];
  }

  void run() {
    fs::remove_all(dir);
    fs::create_directories(dir);
    auto stage = [&](const std::string& name, const std::vector<std::string>& args,
                     bool for_lift) {
      const Invocation r = must(args);
      total_seconds += r.seconds;
      if (for_lift) lift_seconds += r.seconds;
      std::cerr << "  " << name << " " << fmt("%.1f", r.seconds) << " s\n";
    };
    stage("gen-corpus", {"gen-corpus", "--config", config, "--out", path("corpus.jsonl")}, true);
    stage("pretrain", with({"pretrain"}, {"--out", path("pre.ckpt")}), true);
    stage("build-index", with({"build-index"}, {"--checkpoint", path("pre.ckpt"), "--out",
                                                path("index")}),
          true);
    stage("finetune", with({"finetune"}, {"--checkpoint", path("pre.ckpt"), "--index",
                                          path("index"), "--out", path("ft.ckpt")}),
          true);
    stage("train-generator", with({"train-generator"}, {"--checkpoint", path("pre.ckpt"),
                                                        "--index", path("index"), "--out",
                                                        path("gen.ckpt")}),
          false);
    for (const char* mode :
         {"base", "reweighted-retrieved", "no-reweight", "human-RR", "human-RA"}) {
      eval(mode);
    }
  }
};

Result accuracy_lift(const Pipeline& p) {
  if (!p.failure.empty()) return {false, p.failure};
  const double base = p.accuracy.at("base");
  const double rw = p.accuracy.at("reweighted-retrieved");
  const double lift = rw - base;
  const double bound = std::max(kMinLift, kFrozenLift);
  const bool fast = p.lift_seconds < kPipelineBudgetSeconds;
  std::string d = "base " + fmt("%.2f", base) + ", reweighted-retrieved " + fmt("%.2f", rw) +
                  ", lift " + fmt("%.2f", lift) + " (bound " + fmt("%.1f", bound) +
                  "); pipeline " + fmt("%.0f", p.lift_seconds) + " s, with generator and " +
                  "ablation evals " + fmt("%.0f", p.total_seconds) + " s (budget " +
                  fmt("%.0f", kPipelineBudgetSeconds) + " s)";
  return {lift >= bound && fast, d};
}

Result ablation_ordering(const Pipeline& p) {
  if (!p.failure.empty()) return {false, p.failure};
  const std::vector<std::string> chain = {"human-RA", "human-RR", "reweighted-retrieved",
                                          "no-reweight", "base"};
  bool ok = true;
  std::string d;
  for (std::size_t i = 0; i < chain.size(); ++i) {
    d += (i ? " >= " : "") + chain[i] + " " + fmt("%.2f", p.accuracy.at(chain[i]));
    if (i + 1 < chain.size() &&
        p.accuracy.at(chain[i]) + kOrderingSlack < p.accuracy.at(chain[i + 1])) {
      ok = false;
      d += " (violated)";
    }
  }
  return {ok, d + " (slack " + fmt("%.1f", kOrderingSlack) + ")"};
}

// ---------------------------------------------------------------------------
// Property criteria.

Result gradient_suite() {
  const auto start = Clock::now();
  const auto rows = cli::gradient_suite(1, kGradPoints);
  const double secs = seconds_since(start);
  bool ok = secs < kGradBudgetSeconds;
  double worst = 0.0;
  std::string d;
  for (const auto& r : rows) {
    ok = ok && r.passed() && r.points == kGradPoints;
    worst = std::max(worst, r.max_rel_error);
    d += r.op + " " + fmt("%.1e", r.max_rel_error) + (r.passed() ? "" : " FAIL") + "; ";
  }
  return {ok, d + "max " + fmt("%.2e", worst) + " <= 1e-4 at " + std::to_string(kGradPoints) +
                  " points each, " + fmt("%.1f", secs) + " s"};
}

Result retrieval_oracle() {
  Rng rng(2024);
  const std::string print = "acceptance";
  const std::size_t dim = 4;
  const auto index = test::grid_index(rng, print, 1000, dim, 6);
  std::size_t mismatches = 0, members = 0;
  for (int qi = 0; qi < 200; ++qi) {
    std::vector<double> q(dim);
    for (double& x : q) x = static_cast<double>(rng.uniform_index(3));
    const int answer = static_cast<int>(rng.uniform_index(6));
    const std::string exclude =
        qi % 3 == 0 ? index.rows()[rng.uniform_index(index.size())].example_id : "";
    const auto got = retrieval::retrieve(index, print, q, answer, 8, exclude);
    const auto want = test::knn_oracle(index, q, answer, 8, exclude);
    members += want.size();
    if (got.members.size() != want.size()) {
      ++mismatches;
      continue;
    }
    for (std::size_t i = 0; i < want.size(); ++i) {
      if (got.members[i].source_id != want[i]) {
        ++mismatches;
        break;
      }
    }
  }
  // The strict threshold on its own: a row at exactly 0.6 never qualifies.
  const retrieval::ExplanationIndex edge(
      print, numcore::Tensor::matrix(2, 1, {0.0, 1.0}),
      {{"a", {{0, 0.6}}, {4}, "at"}, {"b", {{0, 2.0 / 3.0}}, {4}, "above"}});
  const auto s = retrieval::retrieve(edge, print, std::vector<double>{0.0}, 0);
  const bool strict = s.members.size() == 1 && s.members[0].source_id == "b";
  return {mismatches == 0 && strict,
          std::to_string(200 - mismatches) + "/200 queries identical to brute force over 1000 " +
              "rows (" + std::to_string(members) + " members), threshold 0.6 strict: " +
              (strict ? "yes" : "no")};
}

Result loss_algebra() {
  test::SmallCorpus sc(test::small_config(160, 20));
  vqa::VqaModelConfig vcfg;
  vcfg.vocab = sc.vocab.size();
  vcfg.answers = sc.answers.size();
  vcfg.object_dim = 8;
  vcfg.embed = 6;
  vcfg.hidden = 8;
  vcfg.attention = 6;
  vcfg.ff_hidden = 8;
  vcfg.init_range = 0.3;
  vqa::PretrainHyper ph;
  ph.epochs = 2;
  ph.batch_size = 32;
  const auto pre = vqa::pretrain(sc.train, sc.test, vcfg, ph);
  const auto index = retrieval::build_index(sc.train, sc.train_explanations, pre.params);
  verifier::VerifierConfig cfg;
  cfg.vocab = sc.vocab.size();
  cfg.answers = sc.answers.size();
  cfg.input_hidden = 8;
  cfg.embed = 6;
  cfg.hidden = 6;
  cfg.init_range = 0.3;
  verifier::FinetuneHyper fh;
  fh.epochs = 5;
  fh.batch_size = 32;
  std::size_t steps = 0, broken = 0;
  const auto ft = verifier::finetune(sc.train, sc.test, index, pre.params, cfg, fh,
                                     [&](const verifier::StepLog& s) {
                                       ++steps;
                                       if (!s.breakdown.identity_holds()) ++broken;
                                     });

  // Zeroed head: every score is sigmoid(0) = 1/2.
  numcore::ParamStore zeroed = ft.params;
  zeroed.set("verifier.head2.w", numcore::Tensor({cfg.hidden, 1}, 0.0));
  zeroed.set("verifier.head2.b", numcore::Tensor({1, 1}, 0.0));
  const auto provider = verifier::retrieval_provider(index, 8);
  double worst = 0.0;
  std::size_t checked = 0;
  for (std::size_t start = 0; start + 16 <= sc.train.size(); start += 16) {
    const std::vector<const corpus::VQAExample*> batch(sc.train.begin() + start,
                                                       sc.train.begin() + start + 16);
    numcore::Tape tape;
    numcore::ParamBinding b(tape, zeroed);
    Rng rng = Rng::derive(7, "zeroed:" + std::to_string(start));
    const auto loss = verifier::verification_loss(b, batch, provider, rng);
    double mean = 0.0;
    for (const auto& t : loss.examples) {
      const int active = 2 + (t.negative ? 1 : 0) + (t.negative && !t.empty_negative_set ? 2 : 0);
      const double want = (10 + active) * std::numbers::ln2;
      worst = std::max(worst, std::abs(t.breakdown.total - want));
      mean += want / static_cast<double>(batch.size());
      ++checked;
    }
    worst = std::max(worst, std::abs(loss.mean.total - mean));
  }
  return {broken == 0 && steps == 25 && worst <= kClosedFormTolerance,
          "identity exact on " + std::to_string(steps - broken) + "/" + std::to_string(steps) +
              " logged steps of a 5-epoch fine-tune; zeroed-head closed form max error " +
              fmt("%.1e", worst) + " over " + std::to_string(checked) + " examples (tol 1e-12)"};
}

Result reweighting_invariants() {
  Rng rng(909);
  std::size_t violations = 0;
  for (int trial = 0; trial < 10000; ++trial) {
    const std::size_t k = 1 + rng.uniform_index(10);
    std::vector<std::pair<int, double>> topk;
    std::map<int, eval::SetScore> s;
    for (std::size_t i = 0; i < k; ++i) {
      const int a = static_cast<int>(i * 3 + rng.uniform_index(3));
      topk.push_back({a, std::round(rng.uniform() * 10.0) / 10.0});
      const bool empty = rng.uniform() < 0.1;
      s[a] = {empty ? 0.0 : rng.uniform(), empty};
    }
    const auto rw = eval::reweight(topk, s);
    for (const auto& r : rw) violations += r.p_tilde > r.p;
    const int chosen = rw[eval::final_answer(rw)].answer;
    for (double c : {0.5, 0.25, 0.125}) {
      auto scaled = s;
      for (auto& [a, score] : scaled) score.s_max *= c;
      const auto rs = eval::reweight(topk, scaled);
      violations += rs[eval::final_answer(rs)].answer != chosen;
    }
  }
  return {violations == 0, "10000 fuzzed lists: P~ <= P everywhere and argmax unchanged " +
                               std::string("under common scaling of S by 1/2, 1/4, 1/8; ") +
                               std::to_string(violations) + " violations"};
}

Result metric_sanity() {
  const test::Words w = {"the", "red", "cup", "is", "on", "the", "left"};
  const double b = eval::bleu4(w, {w}).value;
  const double r = eval::rouge_l(w, w).value;
  Rng rng(515);
  std::size_t lcs_bad = 0;
  for (int i = 0; i < 1000; ++i) {
    const auto x = test::random_words(rng, 14, 6), y = test::random_words(rng, 14, 6);
    lcs_bad += eval::lcs_length(x, y) != test::lcs_oracle(x, y);
  }
  double worst = 0.0;
  for (int i = 0; i < 100; ++i) {
    auto cand = test::random_words(rng, 12, 5);
    if (cand.empty()) cand.push_back("w0");
    std::vector<test::Words> refs;
    const std::size_t n = 1 + rng.uniform_index(3);
    for (std::size_t k = 0; k < n; ++k) {
      auto ref = test::random_words(rng, 12, 5);
      if (ref.empty()) ref.push_back("w1");
      refs.push_back(ref);
    }
    worst = std::max(worst, std::abs(eval::bleu4(cand, refs).value - test::bleu_oracle(cand, refs)));
  }
  const bool ok = b == 1.0 && r == 1.0 && lcs_bad == 0 && worst <= kBleuTolerance;
  return {ok, "identical strings BLEU-4 " + fmt("%.15g", b) + " ROUGE-L " + fmt("%.15g", r) +
                  "; LCS oracle mismatches " + std::to_string(lcs_bad) + "/1000; BLEU oracle " +
                  "max diff " + fmt("%.1e", worst) + " over 100 pairs (tol 1e-9)"};
}

// Every file under `dir`, relative path -> bytes.
std::map<std::string, std::string> snapshot(const fs::path& dir) {
  std::map<std::string, std::string> out;
  for (const auto& e : fs::recursive_directory_iterator(dir)) {
    if (e.is_regular_file()) out[fs::relative(e.path(), dir).string()] = read_bytes(e.path());
  }
  return out;
}

void tiny_pipeline(const fs::path& dir, const std::string& conf) {
  fs::remove_all(dir);
  fs::create_directories(dir);
  auto p = [&](const std::string& n) { return (dir / n).string(); };
  auto with = [&](std::vector<std::string> head, const std::vector<std::string>& tail) {
    head.insert(head.end(), {"--config", conf, "--corpus", p("corpus.jsonl")});
    head.insert(head.end(), tail.begin(), tail.end());
    return head;
  };
  must({"gen-corpus", "--config", conf, "--out", p("corpus.jsonl")});
  must(with({"pretrain"}, {"--out", p("pre.ckpt")}));
  must(with({"build-index"}, {"--checkpoint", p("pre.ckpt"), "--out", p("index")}));
  must(with({"finetune"}, {"--checkpoint", p("pre.ckpt"), "--index", p("index"), "--out",
                           p("ft.ckpt"), "--log", p("steps.jsonl")}));
  must(with({"finetune"}, {"--checkpoint", p("pre.ckpt"), "--index", p("index"), "--out",
                           p("ft_fixed.ckpt"), "--fixed-vqa"}));
  must(with({"train-generator"}, {"--checkpoint", p("pre.ckpt"), "--index", p("index"), "--out",
                                  p("gen.ckpt")}));
  for (const std::string mode : {"base", "no-reweight", "reweighted-retrieved", "human-RR",
                                 "human-RA", "reweighted-generated"}) {
    must(with({"eval"}, {"--checkpoint", p("ft.ckpt"), "--index", p("index"), "--generator",
                         p("gen.ckpt"), "--mode", mode, "--out", p("eval_" + mode + ".json"),
                         "--dump", p("dump_" + mode + ".jsonl")}));
  }
  must(with({"eval"}, {"--checkpoint", p("ft_fixed.ckpt"), "--index", p("index"), "--mode",
                       "fixed-vqa", "--out", p("eval_fixed-vqa.json")}));
  for (const std::string src : {"retrieved", "generated", "human-rr", "human-ra"}) {
    must(with({"infer"}, {"--checkpoint", p("ft.ckpt"), "--index", p("index"), "--generator",
                          p("gen.ckpt"), "--explanations", src, "--out",
                          p("infer_" + src + ".jsonl")}));
  }
  must({"gradcheck", "--config", conf, "--out", p("gradcheck.json")});
}

Result determinism(const fs::path& work, const std::string& conf) {
  const fs::path a = work / "determinism_a", b = work / "determinism_b";
  tiny_pipeline(a, conf);
  tiny_pipeline(b, conf);
  const auto sa = snapshot(a), sb = snapshot(b);
  std::vector<std::string> differ;
  for (const auto& [name, bytes] : sa) {
    auto it = sb.find(name);
    if (it == sb.end() || it->second != bytes) differ.push_back(name);
  }
  if (sa.size() != sb.size()) differ.push_back("(file sets differ)");

  // Round trips.
  const auto ck = numcore::load_checkpoint(a / "ft.ckpt");
  numcore::save_checkpoint(work / "roundtrip.ckpt", ck);
  const bool ckpt_rt = read_bytes(work / "roundtrip.ckpt") == read_bytes(a / "ft.ckpt") &&
                       numcore::load_checkpoint(work / "roundtrip.ckpt").params.bit_equal(ck.params);
  const auto idx = retrieval::ExplanationIndex::load(a / "index");
  fs::remove_all(work / "roundtrip_index");
  idx.save(work / "roundtrip_index");
  bool index_rt = retrieval::ExplanationIndex::load(work / "roundtrip_index").bit_equal(idx);
  for (const char* f : {"manifest.json", "embeddings.bin", "rows.jsonl"}) {
    index_rt = index_rt && read_bytes(work / "roundtrip_index" / f) == read_bytes(a / "index" / f);
  }

  // An index built against another encoder is refused.
  auto p = [&](const std::string& n) { return (a / n).string(); };
  must({"pretrain", "--config", conf, "--corpus", p("corpus.jsonl"), "--seed", "99", "--out",
        (work / "other_pre.ckpt").string()});
  const Invocation stale =
      invoke({"finetune", "--config", conf, "--corpus", p("corpus.jsonl"), "--checkpoint",
              (work / "other_pre.ckpt").string(), "--index", p("index"), "--out",
              (work / "stale.ckpt").string()});
  const bool stale_rejected =
      stale.code == cli::kExitFailure && stale.err.find("error: stale-index:") != std::string::npos;

  std::string d = std::to_string(sa.size() - std::min(sa.size(), differ.size())) + "/" +
                  std::to_string(sa.size()) + " artifacts byte-identical across two runs of " +
                  "every subcommand";
  if (!differ.empty()) d += " (differ: " + differ.front() + ")";
  d += std::string("; checkpoint round trip ") + (ckpt_rt ? "bit-exact" : "BROKEN") +
       "; index round trip " + (index_rt ? "bit-exact" : "BROKEN") + "; stale index " +
       (stale_rejected ? "rejected" : "ACCEPTED");
  return {differ.empty() && ckpt_rt && index_rt && stale_rejected, d};
}

Result generator_sanity(const Pipeline& p) {
  // Overfit oracle on a 10-example corpus.
  test::SmallCorpus sc(test::small_config(10, 0));
  vqa::VqaModelConfig v;
  v.vocab = sc.vocab.size();
  v.answers = sc.answers.size();
  v.object_dim = 8;
  v.embed = 6;
  v.hidden = 8;
  v.attention = 6;
  v.ff_hidden = 8;
  numcore::ParamStore enc;
  Rng rng(2);
  vqa::init_vqa_params(enc, v, rng);
  const auto index = retrieval::build_index(sc.train, sc.train_explanations, enc);
  generator::GeneratorConfig g;
  g.vocab = sc.vocab.size();
  g.answers = sc.answers.size();
  g.object_dim = 8;
  g.question_dim = 8;
  g.embed = 12;
  g.hidden = 24;
  g.attention = 12;
  g.init_range = 0.1;
  generator::GeneratorHyper h;
  h.epochs = 200;
  h.lr = 0.02;
  h.batch_size = 2;
  const auto trained = generator::train_generator(sc.train, index, enc, g, h);
  double best = trained.history.front().loss;
  int reached = -1;
  for (const auto& e : trained.history) {
    best = std::min(best, e.loss);
    if (reached < 0 && e.loss < kOverfitNats) reached = e.epoch;
  }

  // Beam-2 against greedy on every test example of the shipped pipeline.
  std::size_t examples = 0, worse = 0;
  std::string beam_note;
  if (p.failure.empty()) {
    cli::Workspace ws;
    cli::load_workspace(p.path("corpus.jsonl"), ws);
    const auto pre = numcore::load_checkpoint(p.path("pre.ckpt")).params;
    const auto gen = numcore::load_checkpoint(p.path("gen.ckpt")).params;
    const auto idx = retrieval::ExplanationIndex::load(p.path("index"));
    const auto pred = vqa::predict(pre, ws.test);
    const numcore::Tensor q = generator::question_embeddings(pre, ws.test);
    generator::DecodeConfig beam;
    beam.beam_size = 2;
    for (std::size_t i = 0; i < ws.test.size(); ++i) {
      const auto* ex = ws.test[i];
      const std::size_t a = pred.probs.cols();
      const int answer = vqa::topk_candidates(pred.probs.data().subspan(i * a, a), 1)[0].first;
      const auto set = retrieval::retrieve(idx, idx.built_against(),
                                           pred.qv.data().subspan(i * pred.qv.cols(),
                                                                  pred.qv.cols()),
                                           answer, 8);
      numcore::Tensor qi({1, q.cols()}, 0.0);
      for (std::size_t c = 0; c < q.cols(); ++c) qi[c] = q.at(i, c);
      const auto c = generator::condition(qi, *ex->objects, answer, set, gen);
      const auto greedy = generator::greedy_decode(c, gen, beam.max_len);
      const auto b = generator::generate_explanation(c, gen, beam);
      ++examples;
      worse += b.score < greedy.score;
    }
  } else {
    beam_note = " (pipeline unavailable: " + p.failure + ")";
  }
  const bool ok = reached >= 0 && reached <= 200 && p.failure.empty() && worse == 0;
  return {ok, "10-example overfit reaches " + fmt("%.4f", best) + " nats/token" +
                  (reached >= 0 ? " (below 0.05 at epoch " + std::to_string(reached) + ")"
                                : " (never below 0.05)") +
                  "; beam-2 >= greedy on " + std::to_string(examples - worse) + "/" +
                  std::to_string(examples) + " test examples" + beam_note};
}

}  // namespace
}  // namespace compex

int main(int argc, char** argv) {
  using namespace compex;
  CLI::App app{"compex acceptance criteria"};
  std::string work = (fs::temp_directory_path() / "compex_acceptance").string();
  std::string config = COMPEX_SOURCE_DIR "/configs/synthetic.conf";
  std::string tiny = COMPEX_SOURCE_DIR "/configs/tiny.conf";
  std::vector<std::string> only;
  std::vector<std::string> known;
  app.add_option("--work-dir", work, "scratch directory for pipeline artifacts");
  app.add_option("--config", config, "shipped pipeline config")->check(CLI::ExistingFile);
  app.add_option("--tiny-config", tiny, "small config for determinism runs")
      ->check(CLI::ExistingFile);
  app.add_option("--only", only, "run just these criteria");
  app.add_option("--known-failure", known,
                 "criteria still printed as FAIL but not counted in the exit status");
  CLI11_PARSE(app, argc, argv);
  fs::create_directories(work);

  auto wanted = [&](const std::string& name) {
    return only.empty() || std::find(only.begin(), only.end(), name) != only.end();
  };
  int failed = 0, known_failed = 0;
  auto report = [&](const std::string& name, const std::function<Result()>& check) {
    if (!wanted(name)) return;
    Result r;
    const auto start = Clock::now();
    try {
      r = check();
    } catch (const std::exception& e) {
      r = {false, std::string("exception: ") + e.what()};
    }
    const bool is_known = std::find(known.begin(), known.end(), name) != known.end();
    if (!r.passed) (is_known ? known_failed : failed) += 1;
    std::cout << (r.passed ? "PASS " : "FAIL ") << name << ": " << r.detail << " ["
              << fmt("%.1f", seconds_since(start)) << " s]"
              << (!r.passed && is_known ? " (known failure, not counted)" : "") << std::endl;
  };

  std::cout << "INFO published-benchmarks: the published VQA-X accuracies and BLEU-4 scores need "
               "the original images, detector features and pretrained language stacks; they "
               "are not reproduced here, and the properties below stand in for them"
            << std::endl;

  report("gradient-suite", gradient_suite);
  report("retrieval-oracle", retrieval_oracle);
  report("loss-algebra", loss_algebra);
  report("reweighting-invariants", reweighting_invariants);
  report("metric-sanity", metric_sanity);
  report("determinism-persistence", [&] { return determinism(work, tiny); });

  Pipeline pipeline;
  pipeline.dir = fs::path(work) / "pipeline";
  pipeline.config = config;
  if (wanted("accuracy-lift") || wanted("ablation-ordering") || wanted("generator-sanity")) {
    std::cerr << "running the shipped pipeline in " << pipeline.dir << "\n";
    try {
      pipeline.run();
    } catch (const std::exception& e) {
      pipeline.failure = e.what();
    }
  }
  report("accuracy-lift", [&] { return accuracy_lift(pipeline); });
  report("ablation-ordering", [&] { return ablation_ordering(pipeline); });
  report("generator-sanity", [&] { return generator_sanity(pipeline); });

  std::cout << failed << " failed, " << known_failed << " known failure(s)" << std::endl;
  return failed == 0 ? 0 : 1;
}
