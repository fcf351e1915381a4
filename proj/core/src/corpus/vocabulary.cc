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

#include "compex/corpus/vocabulary.h"

#include <algorithm>
#include <cctype>

#include "compex/error.h"

namespace compex::corpus {
namespace {

const char* const kReserved[] = {"<pad>", "<bos>", "<eos>", "<unk>"};

}  // namespace

Vocabulary::Vocabulary() {
  for (const char* w : kReserved) {
    index_.emplace(w, static_cast<int>(words_.size()));
    words_.emplace_back(w);
  }
}

Vocabulary Vocabulary::from_words(std::vector<std::string> words) {
  std::sort(words.begin(), words.end());
  words.erase(std::unique(words.begin(), words.end()), words.end());
  Vocabulary v;
  for (auto& w : words) {
    if (w.empty() || v.index_.count(w)) continue;
    v.index_.emplace(w, static_cast<int>(v.words_.size()));
    v.words_.push_back(std::move(w));
  }
  return v;
}

int Vocabulary::id(std::string_view word) const {
  auto it = index_.find(std::string(word));
  return it == index_.end() ? kUnk : it->second;
}

const std::string& Vocabulary::word(int id) const {
  if (id < 0 || static_cast<std::size_t>(id) >= words_.size()) {
    throw InvalidArgument("token id " + std::to_string(id) +
                          " outside vocabulary of size " +
                          std::to_string(words_.size()));
  }
  return words_[id];
}

bool Vocabulary::contains(std::string_view word) const {
  return index_.count(std::string(word)) > 0;
}

std::string Vocabulary::decode(const TokenSeq& ids) const {
  std::string out;
  for (int id : ids) {
    if (id == kPad || id == kBos || id == kEos) continue;
    if (!out.empty()) out += ' ';
    out += word(id);
  }
  return out;
}

nlohmann::ordered_json Vocabulary::to_json() const {
  return nlohmann::ordered_json(
      std::vector<std::string>(words_.begin() + 4, words_.end()));
}

Vocabulary Vocabulary::from_json(const nlohmann::ordered_json& j) {
  if (!j.is_array()) throw SchemaError("vocabulary must be a JSON array");
  Vocabulary v;
  for (const auto& w : j) {
    if (!w.is_string()) throw SchemaError("vocabulary entries must be strings");
    const std::string s = w.get<std::string>();
    if (v.index_.count(s)) throw SchemaError("duplicate vocabulary entry: " + s);
    v.index_.emplace(s, static_cast<int>(v.words_.size()));
    v.words_.push_back(s);
  }
  return v;
}

std::vector<std::string> split_words(std::string_view text) {
  std::vector<std::string> out;
  std::string cur;
  for (char ch : text) {
    const auto c = static_cast<unsigned char>(ch);
    if (std::isspace(c)) {
      if (!cur.empty()) out.push_back(std::move(cur));
      cur.clear();
    } else {
      cur += static_cast<char>(std::tolower(c));
    }
  }
  if (!cur.empty()) out.push_back(std::move(cur));
  return out;
}

TokenSeq tokenize(std::string_view text, const Vocabulary& vocab,
                  std::size_t max_len) {
  TokenSeq ids;
  for (const auto& w : split_words(text)) {
    if (ids.size() == max_len) break;
    ids.push_back(vocab.id(w));
  }
  return ids;
}

}  // namespace compex::corpus
