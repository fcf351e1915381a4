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

// Synthetic multimodal corpus.
//
// Each example asks about one object category. The answer is a latent
// attribute z. With probability `shortcut_strength` z is the category's prior
// attribute, otherwise it is uniform over all attributes. The object of the
// asked category shows attribute d in its feature vector, where d = z with
// probability `visual_reliability` and uniform otherwise. Distractor objects
// carry other categories. The explanation always names z, the category and
// the object's location.

#ifndef COMPEX_CORPUS_SYNTHETIC_H_
#define COMPEX_CORPUS_SYNTHETIC_H_

#include <cstdint>
#include <string>
#include <vector>

#include "compex/corpus/example.h"

namespace compex::corpus {

struct GenConfig {
  std::uint64_t seed = 1;
  int num_train = 5000;
  int num_test = 1000;
  int num_attributes = 32;
  int num_categories = 10;
  int num_locations = 4;
  double shortcut_strength = 0.5;
  double visual_reliability = 0.8;
  int num_objects = 36;
  int object_dim = 64;
  double feature_noise = 0.3;

  int num_examples() const { return num_train + num_test; }
};

/// Throws InvalidArgument when the configuration is inconsistent.
void validate(const GenConfig& cfg);

/// Generative state behind one example.
struct Latent {
  int category = 0;
  int attribute = 0;  // z, the answer
  int displayed = 0;  // d, the attribute visible in the object features
  int location = 0;
  int target_slot = 0;
};

struct SyntheticCorpus {
  Corpus examples;
  std::vector<Latent> latents;  // parallel to `examples`
};

SyntheticCorpus generate_corpus(const GenConfig& cfg);

/// Prior attribute of a category.
int prior_attribute(const GenConfig& cfg, int category);

std::string attribute_word(int attribute);
std::string category_word(int category);
std::string location_word(int location);

}  // namespace compex::corpus

#endif  // COMPEX_CORPUS_SYNTHETIC_H_
