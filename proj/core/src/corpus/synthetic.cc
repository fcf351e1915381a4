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

#include "compex/corpus/synthetic.h"

#include <cmath>
#include <cstdio>

#include "compex/error.h"
#include "compex/numcore/rng.h"

namespace compex::corpus {
namespace {

constexpr const char* kAttributes[] = {
    "red",     "blue",    "green",  "yellow", "black",   "white",  "orange",
    "purple",  "pink",    "brown",  "gray",   "silver",  "golden", "wooden",
    "metal",   "plastic", "glass",  "striped", "spotted", "plain", "shiny",
    "dusty",   "wet",     "dry",    "broken", "new",     "old",    "tiny",
    "huge",    "round",   "square", "soft"};

constexpr const char* kCategories[] = {
    "cup",  "car",   "shirt", "ball",  "hat",   "bag",  "chair", "kite",
    "bench", "lamp", "boat",  "clock", "vase",  "bike", "sign",  "plate"};

constexpr const char* kLocations[] = {"left",  "right", "top",  "bottom",
                                      "middle", "corner", "front", "back"};

constexpr int kNumLocationWords = std::size(kLocations);

constexpr const char* kQuestionTemplates[] = {
    "what does the {c} look like",
    "what is the {c} like",
    "how would you describe the {c}",
    "which property does the {c} have",
};

constexpr const char* kQuestionSuffixes[] = {"", " in the picture",
                                             " in this image", " here"};

constexpr const char* kExplanationTemplates[] = {
    "the {c} on the {l} is {a}",
    "because the {c} looks {a}",
    "the {l} {c} appears {a}",
    "there is a {a} {c} on the {l}",
};

std::string fill(std::string tmpl, const std::string& c, const std::string& a,
                 const std::string& l) {
  auto replace = [&tmpl](const std::string& key, const std::string& value) {
    for (std::size_t pos = tmpl.find(key); pos != std::string::npos;
         pos = tmpl.find(key, pos + value.size())) {
      tmpl.replace(pos, key.size(), value);
    }
  };
  replace("{c}", c);
  replace("{a}", a);
  replace("{l}", l);
  return tmpl;
}

// Unit-scale random directions for categories, attributes and locations.
struct Embeddings {
  std::vector<std::vector<double>> category, attribute, location;
};

std::vector<std::vector<double>> random_table(int n, int dim,
                                              numcore::Rng& rng) {
  const double scale = 1.0 / std::sqrt(static_cast<double>(dim));
  std::vector<std::vector<double>> t(n, std::vector<double>(dim));
  for (auto& row : t) {
    for (double& v : row) v = rng.normal() * scale;
  }
  return t;
}

double round4(double v) { return std::round(v * 1e4) / 1e4; }

int pick_other(numcore::Rng& rng, int n, int exclude) {
  int v = static_cast<int>(rng.uniform_index(n - 1));
  return v >= exclude ? v + 1 : v;
}

}  // namespace

void validate(const GenConfig& cfg) {
  auto require = [](bool ok, const std::string& msg) {
    if (!ok) throw InvalidArgument("corpus config: " + msg);
  };
  require(cfg.num_train >= 0 && cfg.num_test >= 0,
          "split sizes must be non-negative");
  require(cfg.num_examples() >= 1, "at least one example is required");
  require(cfg.num_attributes >= 2, "num_attributes must be at least 2");
  require(cfg.num_categories >= 1, "num_categories must be positive");
  require(cfg.num_objects >= 1, "num_objects must be positive");
  require(cfg.object_dim >= 1, "object_dim must be positive");
  require(cfg.num_objects == 1 || cfg.num_categories >= 2,
          "distractor objects need at least two categories");
  require(cfg.num_locations >= 1 && cfg.num_locations <= kNumLocationWords,
          "num_locations must lie in [1, " + std::to_string(kNumLocationWords) +
              "]");
  require(cfg.shortcut_strength >= 0.0 && cfg.shortcut_strength <= 1.0,
          "shortcut_strength must lie in [0, 1]");
  require(cfg.visual_reliability >= 0.0 && cfg.visual_reliability <= 1.0,
          "visual_reliability must lie in [0, 1]");
  require(std::isfinite(cfg.feature_noise) && cfg.feature_noise >= 0.0,
          "feature_noise must be finite and non-negative");
}

int prior_attribute(const GenConfig& cfg, int category) {
  return (category * 7 + 3) % cfg.num_attributes;
}

std::string attribute_word(int attribute) {
  if (attribute < static_cast<int>(std::size(kAttributes))) {
    return kAttributes[attribute];
  }
  return "attr" + std::to_string(attribute);
}

std::string category_word(int category) {
  if (category < static_cast<int>(std::size(kCategories))) {
    return kCategories[category];
  }
  return "thing" + std::to_string(category);
}

std::string location_word(int location) { return kLocations[location]; }

SyntheticCorpus generate_corpus(const GenConfig& cfg) {
  validate(cfg);
  numcore::Rng rng = numcore::Rng::derive(cfg.seed, "corpus");
  numcore::Rng table_rng = numcore::Rng::derive(cfg.seed, "corpus-features");
  Embeddings emb;
  emb.category = random_table(cfg.num_categories, cfg.object_dim, table_rng);
  emb.attribute = random_table(cfg.num_attributes, cfg.object_dim, table_rng);
  emb.location = random_table(cfg.num_locations, cfg.object_dim, table_rng);
  const double noise = cfg.feature_noise / std::sqrt(cfg.object_dim);

  const std::size_t n_obj = cfg.num_objects;
  const std::size_t dim = cfg.object_dim;
  SyntheticCorpus out;
  out.examples.reserve(cfg.num_examples());
  out.latents.reserve(cfg.num_examples());

  for (int i = 0; i < cfg.num_examples(); ++i) {
    const bool train = i < cfg.num_train;
    Latent lat;
    lat.category = static_cast<int>(rng.uniform_index(cfg.num_categories));
    lat.attribute = rng.uniform() < cfg.shortcut_strength
                        ? prior_attribute(cfg, lat.category)
                        : static_cast<int>(rng.uniform_index(cfg.num_attributes));
    lat.displayed = rng.uniform() < cfg.visual_reliability
                        ? lat.attribute
                        : static_cast<int>(rng.uniform_index(cfg.num_attributes));
    lat.location = static_cast<int>(rng.uniform_index(cfg.num_locations));
    lat.target_slot = static_cast<int>(rng.uniform_index(n_obj));

    std::vector<double> feats(n_obj * dim);
    for (std::size_t o = 0; o < n_obj; ++o) {
      int cat, attr, loc;
      if (static_cast<int>(o) == lat.target_slot) {
        cat = lat.category;
        attr = lat.displayed;
        loc = lat.location;
      } else {
        cat = pick_other(rng, cfg.num_categories, lat.category);
        attr = static_cast<int>(rng.uniform_index(cfg.num_attributes));
        loc = static_cast<int>(rng.uniform_index(cfg.num_locations));
      }
      for (std::size_t k = 0; k < dim; ++k) {
        feats[o * dim + k] = round4(emb.category[cat][k] +
                                    emb.attribute[attr][k] +
                                    emb.location[loc][k] + noise * rng.normal());
      }
    }

    const std::string c = category_word(lat.category);
    const std::string a = attribute_word(lat.attribute);
    const std::string l = location_word(lat.location);

    Example ex;
    char id[32];
    std::snprintf(id, sizeof(id), "%s-%05d", train ? "train" : "test",
                  train ? i : i - cfg.num_train);
    ex.id = id;
    ex.question =
        fill(kQuestionTemplates[rng.uniform_index(std::size(kQuestionTemplates))],
             c, a, l) +
        kQuestionSuffixes[rng.uniform_index(std::size(kQuestionSuffixes))];
    ex.objects = numcore::Tensor::matrix(n_obj, dim, std::move(feats));

    // Annotator votes: the latent answer gets a clear majority, and about
    // half the examples carry a single dissenting vote.
    const int gold = 4 + static_cast<int>(rng.uniform_index(kAnnotators - 3));
    ex.answers.push_back({a, gold});
    const int rest = kAnnotators - gold;
    if (rest > 0 && rng.uniform() < 0.5) {
      const int alt = pick_other(rng, cfg.num_attributes, lat.attribute);
      ex.answers.push_back({attribute_word(alt), 1});
    }
    ex.explanation = fill(
        kExplanationTemplates[rng.uniform_index(std::size(kExplanationTemplates))],
        c, a, l);
    ex.split = train ? Split::kTrain : Split::kTest;
    out.examples.push_back(std::move(ex));
    out.latents.push_back(lat);
  }
  return out;
}

}  // namespace compex::corpus
