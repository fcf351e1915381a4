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

#include "compex/corpus/answer_space.h"

#include "compex/error.h"

namespace compex::corpus {

AnswerSpace::AnswerSpace(std::vector<std::string> answers)
    : answers_(std::move(answers)) {
  for (std::size_t i = 0; i < answers_.size(); ++i) {
    if (!index_.emplace(answers_[i], static_cast<int>(i)).second) {
      throw InvalidArgument("duplicate answer in answer space: " + answers_[i]);
    }
  }
}

const std::string& AnswerSpace::text(int id) const {
  if (id < 0 || static_cast<std::size_t>(id) >= answers_.size()) {
    throw InvalidArgument("answer id " + std::to_string(id) +
                          " outside answer space of size " +
                          std::to_string(answers_.size()));
  }
  return answers_[id];
}

int AnswerSpace::id(const std::string& text) const {
  auto it = index_.find(text);
  return it == index_.end() ? -1 : it->second;
}

nlohmann::ordered_json AnswerSpace::to_json() const {
  return nlohmann::ordered_json(answers_);
}

AnswerSpace AnswerSpace::from_json(const nlohmann::ordered_json& j) {
  if (!j.is_array()) throw SchemaError("answer space must be a JSON array");
  std::vector<std::string> answers;
  for (const auto& a : j) {
    if (!a.is_string()) throw SchemaError("answer entries must be strings");
    answers.push_back(a.get<std::string>());
  }
  try {
    return AnswerSpace(std::move(answers));
  } catch (const InvalidArgument& e) {
    throw SchemaError(e.what());
  }
}

}  // namespace compex::corpus
