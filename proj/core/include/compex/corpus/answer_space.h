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

#ifndef COMPEX_CORPUS_ANSWER_SPACE_H_
#define COMPEX_CORPUS_ANSWER_SPACE_H_

#include <map>
#include <nlohmann/json.hpp>
#include <string>
#include <vector>

namespace compex::corpus {

/// Ordered, duplicate-free list of answer strings. Indices are stable for the
/// lifetime of a run and are persisted in checkpoints.
class AnswerSpace {
 public:
  AnswerSpace() = default;
  explicit AnswerSpace(std::vector<std::string> answers);

  std::size_t size() const { return answers_.size(); }
  const std::string& text(int id) const;
  /// -1 when absent.
  int id(const std::string& text) const;
  const std::vector<std::string>& answers() const { return answers_; }

  nlohmann::ordered_json to_json() const;
  static AnswerSpace from_json(const nlohmann::ordered_json& j);

  friend bool operator==(const AnswerSpace& a, const AnswerSpace& b) {
    return a.answers_ == b.answers_;
  }

 private:
  std::vector<std::string> answers_;
  std::map<std::string, int> index_;
};

}  // namespace compex::corpus

#endif  // COMPEX_CORPUS_ANSWER_SPACE_H_
