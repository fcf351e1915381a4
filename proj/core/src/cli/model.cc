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

#include "compex/cli/model.h"

#include <filesystem>
#include <fstream>
#include <iterator>

#include "compex/corpus/corpus_io.h"
#include "compex/error.h"

namespace compex::cli {
namespace {

void require_path(const std::string& path, const std::string& what) {
  if (path.empty()) throw MissingArtifact("missing " + what + " (no path given)");
  if (!std::filesystem::exists(path)) throw MissingArtifact("missing " + what + ": " + path);
}

std::string file_sha256(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot read " + path);
  const std::string bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  return numcore::sha256_hex(bytes);
}

}  // namespace

void load_workspace(const std::string& path, Workspace& ws) {
  require_path(path, "corpus");
  ws.examples = corpus::load_corpus(path);
  ws.sha256 = file_sha256(path);
  ws.vocab = corpus::build_vocabulary(ws.examples);
  ws.answers = corpus::build_answer_space(ws.examples);
  ws.encoded.clear();
  ws.encoded.reserve(ws.examples.size());
  for (const auto& e : ws.examples) ws.encoded.push_back(corpus::encode_example(e, ws.vocab, ws.answers));
  ws.train.clear();
  ws.test.clear();
  ws.train_explanations.clear();
  for (std::size_t i = 0; i < ws.encoded.size(); ++i) {
    if (ws.encoded[i].split == corpus::Split::kTrain) {
      ws.train.push_back(&ws.encoded[i]);
      ws.train_explanations.push_back(ws.examples[i].explanation);
    } else {
      ws.test.push_back(&ws.encoded[i]);
    }
  }
  if (ws.train.empty()) throw SchemaError("corpus " + path + " has no train examples");
  ws.object_dim = ws.examples.front().objects.cols();
}

numcore::Checkpoint load_checkpoint_artifact(const std::string& path, const std::string& what) {
  require_path(path, what);
  return numcore::load_checkpoint(path);
}

retrieval::ExplanationIndex load_index_artifact(const std::string& path) {
  require_path(path, "index");
  return retrieval::ExplanationIndex::load(path);
}

void check_checkpoint(const numcore::Checkpoint& ckpt, const Workspace& ws,
                      const std::vector<std::string>& kinds) {
  const auto& m = ckpt.metadata;
  if (!m.contains("kind") || !m.contains("vocab") || !m.contains("answers")) {
    throw SchemaError("checkpoint metadata lacks kind, vocab or answers");
  }
  const auto kind = m.at("kind").get<std::string>();
  bool ok = false;
  std::string expected;
  for (const auto& k : kinds) {
    ok = ok || k == kind;
    expected += (expected.empty() ? "" : " or ") + k;
  }
  if (!ok) throw SchemaError("expected a " + expected + " checkpoint, got " + kind);
  if (!(corpus::Vocabulary::from_json(m.at("vocab")) == ws.vocab)) {
    throw SchemaError("checkpoint vocabulary does not match the corpus");
  }
  if (!(corpus::AnswerSpace::from_json(m.at("answers")) == ws.answers)) {
    throw SchemaError("checkpoint answer space does not match the corpus");
  }
}

std::string encoder_prefix(const numcore::ParamStore& params) {
  return params.names_with_prefix("pretrained.encoder.").empty() ? "" : "pretrained.";
}

nlohmann::ordered_json artifact_metadata(const std::string& kind, const RunConfig& cfg,
                                         const Workspace& ws) {
  nlohmann::ordered_json m;
  m["kind"] = kind;
  m["config"] = cfg.to_json();
  m["corpus_sha256"] = ws.sha256;
  m["vocab"] = ws.vocab.to_json();
  m["answers"] = ws.answers.to_json();
  return m;
}

void write_text_file(const std::string& path, const std::string& text) {
  const std::filesystem::path p(path);
  if (p.has_parent_path()) std::filesystem::create_directories(p.parent_path());
  std::ofstream out(p, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot write " + path);
  out << text;
  if (!out) throw IoError("failed writing " + path);
}

void write_json_file(const std::string& path, const nlohmann::ordered_json& j) {
  write_text_file(path, j.dump(2) + "\n");
}

}  // namespace compex::cli
