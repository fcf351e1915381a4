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

#ifndef COMPEX_CORPUS_VOCABULARY_H_
#define COMPEX_CORPUS_VOCABULARY_H_

#include <nlohmann/json.hpp>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

namespace compex::corpus {

using TokenSeq = std::vector<int>;

class Vocabulary {
 public:
  static constexpr int kPad = 0;
  static constexpr int kBos = 1;
  static constexpr int kEos = 2;
  static constexpr int kUnk = 3;

  /// Reserved entries only.
  Vocabulary();

  /// Reserved entries followed by `words` (deduplicated, sorted).
  static Vocabulary from_words(std::vector<std::string> words);

  int id(std::string_view word) const;  // kUnk when absent
  const std::string& word(int id) const;
  bool contains(std::string_view word) const;
  std::size_t size() const { return words_.size(); }

  /// Joins the words of `ids`, skipping reserved ids.
  std::string decode(const TokenSeq& ids) const;

  nlohmann::ordered_json to_json() const;
  static Vocabulary from_json(const nlohmann::ordered_json& j);

  friend bool operator==(const Vocabulary& a, const Vocabulary& b) {
    return a.words_ == b.words_;
  }

 private:
  std::vector<std::string> words_;
  std::unordered_map<std::string, int> index_;
};

/// Lowercases and splits on whitespace.
std::vector<std::string> split_words(std::string_view text);

/// Lowercase, whitespace split, truncate to `max_len`, out-of-vocabulary
/// words map to kUnk. Empty text gives an empty sequence.
TokenSeq tokenize(std::string_view text, const Vocabulary& vocab,
                  std::size_t max_len);

}  // namespace compex::corpus

#endif  // COMPEX_CORPUS_VOCABULARY_H_
