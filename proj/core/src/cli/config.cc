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

#include "compex/cli/config.h"

#include <CLI11.hpp>
#include <algorithm>
#include <memory>
#include <sstream>

namespace compex::cli {
namespace {

bool known_subcommand(const std::string& name) {
  const auto& all = subcommands();
  return std::find(all.begin(), all.end(), name) != all.end();
}

struct Overrides {
  CLI::Option* epochs = nullptr;
  CLI::Option* lr = nullptr;
  CLI::Option* batch = nullptr;
  int epochs_value = 0;
  double lr_value = 0.0;
  int batch_value = 0;
};

std::unique_ptr<CLI::App> make_app(const std::string& subcommand, RunConfig& c,
                                   Overrides& o) {
  auto app = std::make_unique<CLI::App>("compex " + subcommand, "compex " + subcommand);
  app->set_config("--config", "", "key=value file; keys are long flag names")
      ->check(CLI::ExistingFile);
  app->allow_config_extras(CLI::config_extras_mode::error);

  app->add_option("--corpus", c.corpus, "corpus JSONL");
  app->add_option("--checkpoint", c.checkpoint, "model checkpoint");
  app->add_option("--index", c.index, "explanation index directory");
  app->add_option("--generator", c.generator, "generator checkpoint");
  app->add_option("--out", c.out, "output path");
  app->add_option("--dump", c.dump, "per-example JSONL (eval)");
  app->add_option("--log", c.log, "per-step JSONL (finetune)");

  app->add_option("--seed", c.seed, "root seed");
  app->add_option("--mode", c.mode, "evaluation mode")->check(CLI::IsMember(
      {"base", "reweighted-retrieved", "reweighted-generated", "no-reweight", "fixed-vqa",
       "human-RR", "human-RA"}));
  app->add_option("--explanations", c.explanations, "explanation source (infer)")
      ->check(CLI::IsMember({"retrieved", "generated", "human-rr", "human-ra"}));
  app->add_flag("--fixed-vqa", c.fixed_vqa, "train only the verifier");

  app->add_option("--num-train", c.gen.num_train);
  app->add_option("--num-test", c.gen.num_test);
  app->add_option("--num-attributes", c.gen.num_attributes);
  app->add_option("--num-categories", c.gen.num_categories);
  app->add_option("--num-locations", c.gen.num_locations);
  app->add_option("--shortcut-strength", c.gen.shortcut_strength);
  app->add_option("--visual-reliability", c.gen.visual_reliability);
  app->add_option("--num-objects", c.gen.num_objects);
  app->add_option("--object-dim", c.gen.object_dim);
  app->add_option("--feature-noise", c.gen.feature_noise);

  app->add_option("--embed", c.embed);
  app->add_option("--hidden", c.hidden);
  app->add_option("--attention", c.attention);
  app->add_option("--ff-hidden", c.ff_hidden);
  app->add_option("--init-range", c.init_range);
  app->add_option("--verifier-hidden", c.verifier_hidden);
  app->add_option("--verifier-init-range", c.verifier_init_range);
  app->add_option("--generator-hidden", c.generator_hidden);
  app->add_option("--generator-init-range", c.generator_init_range);

  app->add_option("--pretrain-epochs", c.pretrain_epochs);
  app->add_option("--pretrain-lr", c.pretrain_lr);
  app->add_option("--pretrain-batch", c.pretrain_batch);
  app->add_option("--finetune-epochs", c.finetune_epochs);
  app->add_option("--vqa-lr", c.vqa_lr);
  app->add_option("--verifier-lr", c.verifier_lr);
  app->add_option("--finetune-batch", c.finetune_batch);
  app->add_option("--decay-every", c.decay_every);
  app->add_option("--decay", c.decay);
  app->add_option("--lambda", c.lambda);
  app->add_option("--vqae-weight", c.vqae_weight);
  app->add_option("--generator-epochs", c.generator_epochs);
  app->add_option("--generator-lr", c.generator_lr);
  app->add_option("--generator-batch", c.generator_batch);

  app->add_option("--k-ans", c.k_ans);
  app->add_option("--k-exp", c.k_exp);
  app->add_option("--samples", c.samples, "generated explanations per candidate");
  app->add_option("--gradcheck-points", c.gradcheck_points);

  o.epochs = app->add_option("--epochs", o.epochs_value, "epochs of the current stage");
  o.lr = app->add_option("--lr", o.lr_value, "learning rate of the current stage");
  o.batch = app->add_option("--batch", o.batch_value, "batch size of the current stage");
  return app;
}

void apply_overrides(RunConfig& c, const Overrides& o, const std::string& usage) {
  const bool any = o.epochs->count() || o.lr->count() || o.batch->count();
  if (!any) return;
  const std::string& s = c.subcommand;
  if (s == "pretrain") {
    if (o.epochs->count()) c.pretrain_epochs = o.epochs_value;
    if (o.lr->count()) c.pretrain_lr = o.lr_value;
    if (o.batch->count()) c.pretrain_batch = o.batch_value;
  } else if (s == "finetune") {
    if (o.epochs->count()) c.finetune_epochs = o.epochs_value;
    if (o.lr->count()) c.vqa_lr = c.verifier_lr = o.lr_value;
    if (o.batch->count()) c.finetune_batch = o.batch_value;
  } else if (s == "train-generator") {
    if (o.epochs->count()) c.generator_epochs = o.epochs_value;
    if (o.lr->count()) c.generator_lr = o.lr_value;
    if (o.batch->count()) c.generator_batch = o.batch_value;
  } else {
    throw UsageError("--epochs, --lr and --batch only apply to training subcommands", usage);
  }
}

void validate(const RunConfig& c, const std::string& usage) {
  auto positive = [&](double v, const char* name) {
    if (!(v > 0)) throw UsageError(std::string("--") + name + " must be positive", usage);
  };
  auto non_negative = [&](double v, const char* name) {
    if (!(v >= 0)) throw UsageError(std::string("--") + name + " must be non-negative", usage);
  };
  non_negative(c.pretrain_epochs, "pretrain-epochs");
  non_negative(c.finetune_epochs, "finetune-epochs");
  non_negative(c.generator_epochs, "generator-epochs");
  non_negative(c.lambda, "lambda");
  non_negative(c.vqae_weight, "vqae-weight");
  positive(c.pretrain_lr, "pretrain-lr");
  positive(c.vqa_lr, "vqa-lr");
  positive(c.verifier_lr, "verifier-lr");
  positive(c.generator_lr, "generator-lr");
  positive(c.pretrain_batch, "pretrain-batch");
  positive(c.finetune_batch, "finetune-batch");
  positive(c.generator_batch, "generator-batch");
  positive(c.decay_every, "decay-every");
  positive(c.decay, "decay");
  positive(static_cast<double>(c.k_ans), "k-ans");
  positive(static_cast<double>(c.k_exp), "k-exp");
  positive(static_cast<double>(c.samples), "samples");
  positive(c.gradcheck_points, "gradcheck-points");
  positive(c.init_range, "init-range");
  positive(c.verifier_init_range, "verifier-init-range");
  positive(c.generator_init_range, "generator-init-range");
}

}  // namespace

std::string top_level_usage() {
  std::ostringstream out;
  out << "usage: compex <subcommand> [flags]\n\nsubcommands:\n";
  for (const auto& s : subcommands()) out << "  " << s << "\n";
  out << "\nrun 'compex <subcommand> --help' for the flags.\n";
  return out.str();
}

std::string subcommand_usage(const std::string& subcommand) {
  RunConfig c;
  Overrides o;
  return make_app(subcommand, c, o)->help();
}

RunConfig parse_args(const std::vector<std::string>& args) {
  if (args.empty()) throw UsageError("missing subcommand", top_level_usage());
  const std::string& sub = args.front();
  if (sub == "--help" || sub == "-h") {
    RunConfig c;
    c.help = top_level_usage();
    return c;
  }
  if (!known_subcommand(sub)) {
    throw UsageError("unknown subcommand '" + sub + "'", top_level_usage());
  }
  RunConfig c;
  c.subcommand = sub;
  Overrides o;
  auto app = make_app(sub, c, o);
  const std::string usage = app->help();
  std::vector<std::string> rest(args.rbegin(), args.rend() - 1);  // CLI11 wants reverse order
  try {
    app->parse(rest);
  } catch (const CLI::CallForHelp&) {
    c.help = usage;
    return c;
  } catch (const CLI::ParseError& e) {
    throw UsageError(e.what(), usage);
  }
  if (auto* cfg = app->get_config_ptr(); cfg && cfg->count()) c.config_path = cfg->as<std::string>();
  c.gen.seed = c.seed;
  apply_overrides(c, o, usage);
  validate(c, usage);
  return c;
}

nlohmann::ordered_json RunConfig::to_json() const {
  nlohmann::ordered_json j;
  j["subcommand"] = subcommand;
  j["seed"] = seed;
  j["mode"] = mode;
  j["explanations"] = explanations;
  j["fixed_vqa"] = fixed_vqa;
  j["corpus"] = {{"num_train", gen.num_train},
                 {"num_test", gen.num_test},
                 {"num_attributes", gen.num_attributes},
                 {"num_categories", gen.num_categories},
                 {"num_locations", gen.num_locations},
                 {"shortcut_strength", gen.shortcut_strength},
                 {"visual_reliability", gen.visual_reliability},
                 {"num_objects", gen.num_objects},
                 {"object_dim", gen.object_dim},
                 {"feature_noise", gen.feature_noise}};
  j["model"] = {{"embed", embed},
                {"hidden", hidden},
                {"attention", attention},
                {"ff_hidden", ff_hidden},
                {"init_range", init_range},
                {"verifier_hidden", verifier_hidden},
                {"verifier_init_range", verifier_init_range},
                {"generator_hidden", generator_hidden},
                {"generator_init_range", generator_init_range}};
  j["pretrain"] = {{"epochs", pretrain_epochs}, {"lr", pretrain_lr}, {"batch", pretrain_batch}};
  j["finetune"] = {{"epochs", finetune_epochs}, {"vqa_lr", vqa_lr},
                   {"verifier_lr", verifier_lr}, {"batch", finetune_batch},
                   {"decay_every", decay_every}, {"decay", decay},
                   {"lambda", lambda},           {"vqae_weight", vqae_weight}};
  j["generator"] = {{"epochs", generator_epochs}, {"lr", generator_lr},
                    {"batch", generator_batch}};
  j["k_ans"] = k_ans;
  j["k_exp"] = k_exp;
  j["samples"] = samples;
  j["gradcheck_points"] = gradcheck_points;
  return j;
}

}  // namespace compex::cli
