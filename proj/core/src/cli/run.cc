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

#include "compex/cli/run.h"

#include <algorithm>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <optional>
#include <sstream>

#include "compex/cli/config.h"
#include "compex/cli/gradcheck.h"
#include "compex/cli/model.h"
#include "compex/corpus/corpus_io.h"
#include "compex/error.h"
#include "compex/eval/evaluate.h"
#include "compex/generator/explainer.h"
#include "compex/verifier/finetune.h"
#include "compex/vqa/pretrain.h"

namespace compex::cli {
namespace {

using nlohmann::ordered_json;

std::string fmt(const char* format, double a, double b = 0.0, double c = 0.0) {
  char buf[160];
  std::snprintf(buf, sizeof buf, format, a, b, c);
  return buf;
}

void require_out(const RunConfig& cfg) {
  if (cfg.out.empty()) throw UsageError("--out is required", subcommand_usage(cfg.subcommand));
}

ordered_json checkpoint_ref(const numcore::Checkpoint& c) {
  return {{"kind", c.metadata.value("kind", "")}, {"fingerprint", c.fingerprint}};
}

int gen_corpus(const RunConfig& cfg, std::ostream& out) {
  require_out(cfg);
  corpus::validate(cfg.gen);
  const corpus::SyntheticCorpus sc = corpus::generate_corpus(cfg.gen);
  corpus::save_corpus(sc.examples, cfg.out);
  Workspace ws;
  load_workspace(cfg.out, ws);
  ordered_json manifest = {{"kind", "corpus"},
                           {"config", cfg.to_json()},
                           {"sha256", ws.sha256},
                           {"train", ws.train.size()},
                           {"test", ws.test.size()},
                           {"vocab", ws.vocab.size()},
                           {"answers", ws.answers.size()}};
  write_json_file(cfg.out + ".manifest.json", manifest);
  manifest.erase("config");
  out << manifest.dump() << "\n";
  return kExitOk;
}

vqa::VqaModelConfig vqa_config(const RunConfig& cfg, const Workspace& ws) {
  vqa::VqaModelConfig c;
  c.vocab = ws.vocab.size();
  c.answers = ws.answers.size();
  c.object_dim = ws.object_dim;
  c.embed = cfg.embed;
  c.hidden = cfg.hidden;
  c.attention = cfg.attention;
  c.ff_hidden = cfg.ff_hidden;
  c.init_range = cfg.init_range;
  return c;
}

int pretrain(const RunConfig& cfg, std::ostream& out, std::ostream& err) {
  require_out(cfg);
  Workspace ws;
  load_workspace(cfg.corpus, ws);
  const vqa::VqaModelConfig model = vqa_config(cfg, ws);
  vqa::PretrainHyper hyper;
  hyper.epochs = cfg.pretrain_epochs;
  hyper.lr = cfg.pretrain_lr;
  hyper.batch_size = cfg.pretrain_batch;
  hyper.seed = cfg.seed;
  const vqa::PretrainResult r =
      vqa::pretrain(ws.train, ws.test, model, hyper, [&](const vqa::EpochMetrics& m) {
        err << "pretrain epoch " << m.epoch
            << fmt(" loss %.5f heldout %.2f", m.train_loss, m.heldout_accuracy) << "\n";
      });
  numcore::Checkpoint ckpt;
  ckpt.params = r.params;
  ckpt.metadata = artifact_metadata("pretrain", cfg, ws);
  ckpt.metadata["vqa_config"] = model.to_json();
  ckpt.metadata["hyper"] = hyper.to_json();
  ordered_json history = ordered_json::array();
  for (const auto& m : r.history) {
    history.push_back({{"epoch", m.epoch},
                       {"train_loss", m.train_loss},
                       {"heldout_accuracy", m.heldout_accuracy}});
  }
  ckpt.metadata["history"] = history;
  numcore::save_checkpoint(cfg.out, ckpt);
  const auto saved = numcore::load_checkpoint(cfg.out);
  out << ordered_json({{"checkpoint", cfg.out},
                       {"fingerprint", saved.fingerprint},
                       {"heldout_accuracy", r.history.back().heldout_accuracy}})
             .dump()
      << "\n";
  return kExitOk;
}

int build_index(const RunConfig& cfg, std::ostream& out) {
  require_out(cfg);
  Workspace ws;
  load_workspace(cfg.corpus, ws);
  const auto ckpt = load_checkpoint_artifact(cfg.checkpoint);
  check_checkpoint(ckpt, ws, {"pretrain", "finetune"});
  const std::string prefix = encoder_prefix(ckpt.params);
  const auto index = retrieval::build_index(ws.train, ws.train_explanations, ckpt.params, prefix);
  index.save(cfg.out);
  ordered_json manifest = {{"kind", "index-config"},
                           {"config", cfg.to_json()},
                           {"corpus_sha256", ws.sha256},
                           {"checkpoint", checkpoint_ref(ckpt)},
                           {"built_against", index.built_against()},
                           {"rows", index.size()}};
  write_json_file((std::filesystem::path(cfg.out) / "config.json").string(), manifest);
  out << ordered_json({{"index", cfg.out},
                       {"rows", index.size()},
                       {"built_against", index.built_against()}})
             .dump()
      << "\n";
  return kExitOk;
}

int finetune(const RunConfig& cfg, std::ostream& out, std::ostream& err) {
  require_out(cfg);
  Workspace ws;
  load_workspace(cfg.corpus, ws);
  const auto pre = load_checkpoint_artifact(cfg.checkpoint);
  check_checkpoint(pre, ws, {"pretrain"});
  const auto index = load_index_artifact(cfg.index);
  index.check_fingerprint(retrieval::encoder_fingerprint(pre.params));

  const auto model = vqa::VqaModelConfig::from_json(pre.metadata.at("vqa_config"));
  verifier::VerifierConfig vcfg;
  vcfg.vocab = ws.vocab.size();
  vcfg.answers = ws.answers.size();
  vcfg.input_hidden = model.hidden;
  vcfg.embed = cfg.embed;
  vcfg.hidden = cfg.verifier_hidden;
  vcfg.init_range = cfg.verifier_init_range;
  verifier::FinetuneHyper hyper;
  hyper.epochs = cfg.finetune_epochs;
  hyper.vqa_lr = cfg.vqa_lr;
  hyper.verifier_lr = cfg.verifier_lr;
  hyper.batch_size = cfg.finetune_batch;
  hyper.decay_every = cfg.decay_every;
  hyper.decay = cfg.decay;
  hyper.lambda = cfg.lambda;
  hyper.vqae_weight = cfg.vqae_weight;
  hyper.k_exp = cfg.k_exp;
  hyper.fixed_vqa = cfg.fixed_vqa;
  hyper.seed = cfg.seed;

  std::ofstream log;
  if (!cfg.log.empty()) {
    log.open(cfg.log, std::ios::binary | std::ios::trunc);
    if (!log) throw IoError("cannot write " + cfg.log);
  }
  const auto r = verifier::finetune(
      ws.train, ws.test, index, pre.params, vcfg, hyper,
      [&](const verifier::StepLog& s) {
        if (log.is_open()) log << s.to_json().dump() << "\n";
      },
      [&](const verifier::FinetuneEpoch& e) {
        err << "finetune epoch " << e.epoch
            << fmt(" objective %.5f l_m %.5f heldout %.2f", e.objective, e.breakdown.l_m,
                   e.heldout_accuracy)
            << "\n";
      });

  numcore::Checkpoint ckpt;
  ckpt.params = r.params;
  ckpt.metadata = artifact_metadata("finetune", cfg, ws);
  ckpt.metadata["vqa_config"] = model.to_json();
  ckpt.metadata["verifier_config"] = vcfg.to_json();
  ckpt.metadata["hyper"] = hyper.to_json();
  ckpt.metadata["pretrained"] = checkpoint_ref(pre);
  ckpt.metadata["index_built_against"] = index.built_against();
  ordered_json history = ordered_json::array();
  for (const auto& e : r.epochs) {
    history.push_back({{"epoch", e.epoch},
                       {"lr_scale", e.lr_scale},
                       {"objective", e.objective},
                       {"breakdown", e.breakdown.to_json()},
                       {"heldout_accuracy", e.heldout_accuracy}});
  }
  ckpt.metadata["history"] = history;
  numcore::save_checkpoint(cfg.out, ckpt);
  out << ordered_json({{"checkpoint", cfg.out},
                       {"fixed_vqa", cfg.fixed_vqa},
                       {"epochs", r.epochs.size()},
                       {"heldout_accuracy",
                        r.epochs.empty() ? 0.0 : r.epochs.back().heldout_accuracy}})
             .dump()
      << "\n";
  return kExitOk;
}

int train_generator(const RunConfig& cfg, std::ostream& out, std::ostream& err) {
  require_out(cfg);
  Workspace ws;
  load_workspace(cfg.corpus, ws);
  const auto ckpt = load_checkpoint_artifact(cfg.checkpoint);
  check_checkpoint(ckpt, ws, {"pretrain", "finetune"});
  const auto index = load_index_artifact(cfg.index);
  const std::string prefix = encoder_prefix(ckpt.params);
  const auto model = vqa::VqaModelConfig::from_json(ckpt.metadata.at("vqa_config"));

  generator::GeneratorConfig gcfg;
  gcfg.vocab = ws.vocab.size();
  gcfg.answers = ws.answers.size();
  gcfg.object_dim = ws.object_dim;
  gcfg.question_dim = model.hidden;
  gcfg.embed = cfg.embed;
  gcfg.hidden = cfg.generator_hidden;
  gcfg.attention = cfg.attention;
  gcfg.init_range = cfg.generator_init_range;
  generator::GeneratorHyper hyper;
  hyper.epochs = cfg.generator_epochs;
  hyper.lr = cfg.generator_lr;
  hyper.batch_size = cfg.generator_batch;
  hyper.k_exp = cfg.k_exp;
  hyper.seed = cfg.seed;
  const auto r = generator::train_generator(
      ws.train, index, ckpt.params, gcfg, hyper,
      [&](const generator::GeneratorEpoch& e) {
        err << "generator epoch " << e.epoch << fmt(" loss %.5f nats/token", e.loss) << "\n";
      },
      prefix);

  numcore::Checkpoint out_ckpt;
  out_ckpt.params = r.params;
  out_ckpt.metadata = artifact_metadata("generator", cfg, ws);
  out_ckpt.metadata["generator_config"] = gcfg.to_json();
  out_ckpt.metadata["hyper"] = hyper.to_json();
  out_ckpt.metadata["encoder"] = checkpoint_ref(ckpt);
  out_ckpt.metadata["index_built_against"] = index.built_against();
  ordered_json history = ordered_json::array();
  for (const auto& e : r.history) history.push_back({{"epoch", e.epoch}, {"loss", e.loss}});
  out_ckpt.metadata["history"] = history;
  numcore::save_checkpoint(cfg.out, out_ckpt);
  out << ordered_json({{"checkpoint", cfg.out}, {"final_loss", r.history.back().loss}}).dump()
      << "\n";
  return kExitOk;
}

eval::Mode mode_for_explanations(const std::string& source) {
  if (source == "retrieved") return eval::Mode::kReweightedRetrieved;
  if (source == "generated") return eval::Mode::kReweightedGenerated;
  if (source == "human-rr") return eval::Mode::kHumanRR;
  return eval::Mode::kHumanRA;
}

struct Evaluated {
  eval::EvalResult result;
  corpus::AnswerSpace answers;
};

Evaluated evaluate(const RunConfig& cfg, eval::Mode mode) {
  // The checkpoint is checked first so that a missing model is the error
  // reported before anything else is touched.
  const auto ckpt = load_checkpoint_artifact(cfg.checkpoint);
  Workspace ws;
  load_workspace(cfg.corpus, ws);
  check_checkpoint(ckpt, ws, {"pretrain", "finetune"});
  ordered_json inputs = {{"corpus_sha256", ws.sha256}, {"checkpoint", checkpoint_ref(ckpt)}};

  std::optional<retrieval::ExplanationIndex> index;
  std::optional<numcore::Checkpoint> gen;
  if (mode != eval::Mode::kBase) {
    index = load_index_artifact(cfg.index);
    inputs["index_built_against"] = index->built_against();
  }
  if (mode == eval::Mode::kReweightedGenerated) {
    gen = load_checkpoint_artifact(cfg.generator, "generator");
    check_checkpoint(*gen, ws, {"generator"});
    inputs["generator"] = checkpoint_ref(*gen);
  }
  eval::EvalInputs in;
  in.test = ws.test;
  in.train = ws.train;
  in.vocab = &ws.vocab;
  in.answers = &ws.answers;
  in.model = &ckpt.params;
  in.generator = gen ? &gen->params : nullptr;
  in.index = index ? &*index : nullptr;
  eval::EvalOptions opt;
  opt.mode = mode;
  opt.k_ans = cfg.k_ans;
  opt.k_exp = cfg.k_exp;
  opt.samples = cfg.samples;
  opt.seed = cfg.seed;
  Evaluated e{eval::evaluate(in, opt), ws.answers};
  e.result.report.config = cfg.to_json();
  e.result.report.config["inputs"] = inputs;
  return e;
}

std::string dump_lines(const Evaluated& e, eval::Mode mode) {
  std::string text;
  for (const auto& ex : e.result.examples) {
    text += eval::dump_line(ex, mode, e.answers).dump() + "\n";
  }
  return text;
}

int eval_cmd(const RunConfig& cfg, std::ostream& out) {
  const eval::Mode mode = eval::parse_mode(cfg.mode);
  const Evaluated e = evaluate(cfg, mode);
  const ordered_json report = e.result.report.to_json();
  if (!cfg.dump.empty()) write_text_file(cfg.dump, dump_lines(e, mode));
  if (cfg.out.empty()) {
    out << report.dump(2) << "\n";
  } else {
    write_json_file(cfg.out, report);
    out << ordered_json({{"mode", report.at("mode")},
                         {"accuracy", report.at("accuracy")},
                         {"report", cfg.out}})
               .dump()
        << "\n";
  }
  return kExitOk;
}

int infer(const RunConfig& cfg, std::ostream& out) {
  require_out(cfg);
  const eval::Mode mode = mode_for_explanations(cfg.explanations);
  const Evaluated e = evaluate(cfg, mode);
  write_text_file(cfg.out, dump_lines(e, mode));
  write_json_file(cfg.out + ".manifest.json",
                  {{"kind", "predictions"},
                   {"config", e.result.report.config},
                   {"examples", e.result.examples.size()}});
  out << ordered_json({{"predictions", cfg.out},
                       {"mode", eval::mode_name(mode)},
                       {"examples", e.result.examples.size()}})
             .dump()
      << "\n";
  return kExitOk;
}

int gradcheck(const RunConfig& cfg, std::ostream& out) {
  const auto rows = gradient_suite(cfg.seed, cfg.gradcheck_points);
  out << format_gradcheck_table(rows);
  if (!cfg.out.empty()) {
    write_json_file(cfg.out, {{"config", cfg.to_json()}, {"ops", gradcheck_to_json(rows)}});
  }
  for (const auto& r : rows) {
    if (!r.passed()) {
      throw Error("gradcheck", r.op + " exceeds the tolerance (" +
                                   fmt("%.3e", r.max_rel_error) + " at " + r.worst_param + ")");
    }
  }
  return kExitOk;
}

int dispatch(const RunConfig& cfg, std::ostream& out, std::ostream& err) {
  const std::string& s = cfg.subcommand;
  if (s == "gen-corpus") return gen_corpus(cfg, out);
  if (s == "pretrain") return pretrain(cfg, out, err);
  if (s == "build-index") return build_index(cfg, out);
  if (s == "finetune") return finetune(cfg, out, err);
  if (s == "train-generator") return train_generator(cfg, out, err);
  if (s == "infer") return infer(cfg, out);
  if (s == "eval") return eval_cmd(cfg, out);
  return gradcheck(cfg, out);
}

std::string one_line(std::string s) {
  std::replace(s.begin(), s.end(), '\n', ' ');
  while (!s.empty() && s.back() == ' ') s.pop_back();
  return s;
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  try {
    const RunConfig cfg = parse_args(args);
    if (!cfg.help.empty()) {
      out << cfg.help;
      return kExitOk;
    }
    return dispatch(cfg, out, err);
  } catch (const UsageError& e) {
    err << e.usage() << "\n";
    err << "error: " << e.kind() << ": " << one_line(e.what()) << "\n";
    return kExitUsage;
  } catch (const Error& e) {
    err << "error: " << e.kind() << ": " << one_line(e.what()) << "\n";
  } catch (const nlohmann::json::exception& e) {
    err << "error: schema: " << one_line(e.what()) << "\n";
  } catch (const std::filesystem::filesystem_error& e) {
    err << "error: io: " << one_line(e.what()) << "\n";
  } catch (const std::exception& e) {
    err << "error: internal: " << one_line(e.what()) << "\n";
  }
  return kExitFailure;
}

}  // namespace compex::cli
