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

#include "compex/corpus/corpus_io.h"

#include <fstream>
#include <istream>
#include <nlohmann/json.hpp>
#include <ostream>
#include <set>

#include "compex/error.h"

namespace compex::corpus {
namespace {

using nlohmann::ordered_json;

[[noreturn]] void fail(std::size_t line_no, const std::string& msg) {
  throw SchemaError("line " + std::to_string(line_no) + ": " + msg);
}

const ordered_json& field(const ordered_json& obj, const char* name,
                          std::size_t line_no) {
  auto it = obj.find(name);
  if (it == obj.end()) fail(line_no, std::string("missing field '") + name + "'");
  return *it;
}

std::string string_field(const ordered_json& obj, const char* name,
                         std::size_t line_no) {
  const auto& v = field(obj, name, line_no);
  if (!v.is_string()) fail(line_no, std::string("'") + name + "' must be a string");
  return v.get<std::string>();
}

}  // namespace

std::string example_to_json_line(const Example& example) {
  ordered_json j;
  j["id"] = example.id;
  j["question"] = example.question;
  ordered_json objects = ordered_json::array();
  const std::size_t n = example.objects.rows();
  const std::size_t d = example.objects.cols();
  for (std::size_t r = 0; r < n; ++r) {
    ordered_json row = ordered_json::array();
    for (std::size_t c = 0; c < d; ++c) row.push_back(example.objects.at(r, c));
    objects.push_back(std::move(row));
  }
  j["objects"] = std::move(objects);
  ordered_json answers = ordered_json::array();
  for (const auto& a : example.answers) {
    answers.push_back({{"text", a.text}, {"count", a.count}});
  }
  j["answers"] = std::move(answers);
  j["explanation"] = example.explanation;
  j["split"] = std::string(split_name(example.split));
  return j.dump();
}

Example example_from_json_line(const std::string& line, std::size_t line_no) {
  ordered_json j;
  try {
    j = ordered_json::parse(line);
  } catch (const nlohmann::json::parse_error& e) {
    fail(line_no, std::string("invalid JSON: ") + e.what());
  }
  if (!j.is_object()) fail(line_no, "expected a JSON object");

  Example ex;
  ex.id = string_field(j, "id", line_no);
  if (ex.id.empty()) fail(line_no, "'id' must be non-empty");
  ex.question = string_field(j, "question", line_no);

  const auto& objects = field(j, "objects", line_no);
  if (!objects.is_array() || objects.empty()) {
    fail(line_no, "'objects' must be a non-empty array of arrays");
  }
  std::size_t dim = 0;
  std::vector<double> flat;
  for (const auto& row : objects) {
    if (!row.is_array() || row.empty()) {
      fail(line_no, "'objects' rows must be non-empty arrays");
    }
    if (dim == 0) dim = row.size();
    if (row.size() != dim) fail(line_no, "'objects' rows differ in length");
    for (const auto& v : row) {
      if (!v.is_number()) fail(line_no, "'objects' entries must be numbers");
      flat.push_back(v.get<double>());
    }
  }
  ex.objects = numcore::Tensor::matrix(objects.size(), dim, std::move(flat));
  if (!ex.objects.all_finite()) fail(line_no, "'objects' must be finite");

  const auto& answers = field(j, "answers", line_no);
  if (!answers.is_array()) fail(line_no, "'answers' must be an array");
  for (const auto& a : answers) {
    if (!a.is_object()) fail(line_no, "'answers' entries must be objects");
    AnswerCount ac;
    ac.text = string_field(a, "text", line_no);
    const auto& count = field(a, "count", line_no);
    if (!count.is_number_integer()) fail(line_no, "'count' must be an integer");
    ac.count = count.get<int>();
    if (ac.count < 0 || ac.count > kAnnotators) {
      fail(line_no, "'count' outside [0, " + std::to_string(kAnnotators) + "]");
    }
    ex.answers.push_back(std::move(ac));
  }

  ex.explanation = string_field(j, "explanation", line_no);
  try {
    ex.split = parse_split(string_field(j, "split", line_no));
  } catch (const InvalidArgument& e) {
    fail(line_no, e.what());
  }

  bool positive = false;
  for (const auto& [text, score] : ex.gold_scores()) positive |= score > 0.0;
  if (!positive) fail(line_no, "no answer has a positive soft score");
  if (ex.split == Split::kTrain && split_words(ex.explanation).empty()) {
    fail(line_no, "train example has an empty explanation");
  }
  return ex;
}

void write_corpus(std::ostream& out, const Corpus& corpus) {
  for (const auto& ex : corpus) out << example_to_json_line(ex) << '\n';
}

Corpus read_corpus(std::istream& in) {
  Corpus corpus;
  std::string line;
  std::size_t line_no = 0;
  std::set<std::string> ids;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    Example ex = example_from_json_line(line, line_no);
    if (!ids.insert(ex.id).second) fail(line_no, "duplicate id '" + ex.id + "'");
    if (!corpus.empty() &&
        ex.objects.shape() != corpus.front().objects.shape()) {
      fail(line_no, "object shape " + numcore::shape_string(ex.objects.shape()) +
                        " differs from " +
                        numcore::shape_string(corpus.front().objects.shape()));
    }
    corpus.push_back(std::move(ex));
  }
  return corpus;
}

void save_corpus(const Corpus& corpus, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write " + path.string());
  write_corpus(out, corpus);
  if (!out) throw IoError("write failed for " + path.string());
}

Corpus load_corpus(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot read " + path.string());
  return read_corpus(in);
}

void validate_corpus(const Corpus& corpus) {
  std::set<std::string> ids;
  for (std::size_t i = 0; i < corpus.size(); ++i) {
    const Example& ex = corpus[i];
    const std::string where = "example '" + ex.id + "': ";
    if (!ids.insert(ex.id).second) throw SchemaError(where + "duplicate id");
    if (ex.objects.shape() != corpus.front().objects.shape()) {
      throw SchemaError(where + "object shape differs from the corpus");
    }
    bool positive = false;
    for (const auto& [text, score] : ex.gold_scores()) positive |= score > 0.0;
    if (!positive) throw SchemaError(where + "no positive answer");
    if (ex.split == Split::kTrain && split_words(ex.explanation).empty()) {
      throw SchemaError(where + "train example has an empty explanation");
    }
  }
}

Vocabulary build_vocabulary(const Corpus& corpus) {
  std::vector<std::string> words;
  for (const auto& ex : corpus) {
    if (ex.split != Split::kTrain) continue;
    for (auto& w : split_words(ex.question)) words.push_back(std::move(w));
    for (auto& w : split_words(ex.explanation)) words.push_back(std::move(w));
  }
  return Vocabulary::from_words(std::move(words));
}

AnswerSpace build_answer_space(const Corpus& corpus) {
  std::set<std::string> answers;
  for (const auto& ex : corpus) {
    if (ex.split != Split::kTrain) continue;
    for (const auto& a : ex.answers) {
      if (a.count > 0) answers.insert(a.text);
    }
  }
  return AnswerSpace({answers.begin(), answers.end()});
}

}  // namespace compex::corpus
