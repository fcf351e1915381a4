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

#ifndef COMPEX_TESTS_UNIT_TEST_UTIL_H_
#define COMPEX_TESTS_UNIT_TEST_UTIL_H_

#include <filesystem>
#include <fstream>
#include <iterator>
#include <string>
#include <vector>

#include "compex/corpus/corpus_io.h"
#include "compex/corpus/synthetic.h"
#include "compex/numcore/rng.h"
#include "compex/numcore/tensor.h"

namespace compex::test {

inline numcore::Tensor random_matrix(numcore::Rng& rng, std::size_t rows, std::size_t cols,
                                     double lo = -1.0, double hi = 1.0) {
  std::vector<double> v(rows * cols);
  for (double& x : v) x = rng.uniform(lo, hi);
  return numcore::Tensor::matrix(rows, cols, std::move(v));
}

/// Fresh, empty directory under the build tree's temp area.
inline std::filesystem::path scratch_dir(const std::string& name) {
  const auto dir = std::filesystem::temp_directory_path() / "compex_tests" / name;
  std::filesystem::remove_all(dir);
  std::filesystem::create_directories(dir);
  return dir;
}

inline std::string read_file(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

inline void write_file(const std::filesystem::path& p, const std::string& bytes) {
  std::ofstream out(p, std::ios::binary | std::ios::trunc);
  out << bytes;
}

/// Small synthetic corpus with the encoded views, for module tests.
struct SmallCorpus {
  corpus::SyntheticCorpus data;
  corpus::Vocabulary vocab;
  corpus::AnswerSpace answers;
  std::vector<corpus::VQAExample> encoded;
  std::vector<const corpus::VQAExample*> train, test;
  std::vector<std::string> train_explanations;

  explicit SmallCorpus(corpus::GenConfig cfg) : data(corpus::generate_corpus(cfg)) {
    vocab = corpus::build_vocabulary(data.examples);
    answers = corpus::build_answer_space(data.examples);
    encoded.reserve(data.examples.size());
    for (const auto& e : data.examples) encoded.push_back(corpus::encode_example(e, vocab, answers));
    for (std::size_t i = 0; i < encoded.size(); ++i) {
      if (encoded[i].split == corpus::Split::kTrain) {
        train.push_back(&encoded[i]);
        train_explanations.push_back(data.examples[i].explanation);
      } else {
        test.push_back(&encoded[i]);
      }
    }
  }
  SmallCorpus(const SmallCorpus&) = delete;
  SmallCorpus& operator=(const SmallCorpus&) = delete;
};

inline corpus::GenConfig small_config(int train = 120, int test = 40) {
  corpus::GenConfig c;
  c.num_train = train;
  c.num_test = test;
  c.num_attributes = 8;
  c.num_categories = 4;
  c.num_objects = 4;
  c.object_dim = 8;
  return c;
}

}  // namespace compex::test

#endif  // COMPEX_TESTS_UNIT_TEST_UTIL_H_
