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

#ifndef COMPEX_CLI_MODEL_H_
#define COMPEX_CLI_MODEL_H_

#include <nlohmann/json.hpp>
#include <string>
#include <vector>

#include "compex/cli/config.h"
#include "compex/corpus/answer_space.h"
#include "compex/corpus/example.h"
#include "compex/corpus/vocabulary.h"
#include "compex/numcore/checkpoint.h"
#include "compex/retrieval/index.h"

namespace compex::cli {

// Loading and describing the artifacts that flow between subcommands.

/// A corpus file with its train-split vocabulary and answer space and the
/// encoded examples. Not copyable: the encoded views point into `examples`.
struct Workspace {
  corpus::Corpus examples;
  corpus::Vocabulary vocab;
  corpus::AnswerSpace answers;
  std::vector<corpus::VQAExample> encoded;
  std::vector<const corpus::VQAExample*> train;
  std::vector<const corpus::VQAExample*> test;
  std::vector<std::string> train_explanations;  // parallel to `train`
  std::string sha256;                           // of the file bytes
  std::size_t object_dim = 0;

  Workspace() = default;
  Workspace(const Workspace&) = delete;
  Workspace& operator=(const Workspace&) = delete;
};

/// Throws MissingArtifact when `path` is empty or absent.
void load_workspace(const std::string& path, Workspace& ws);

/// Throws MissingArtifact("missing <what>: ...") when `path` is empty or
/// absent.
numcore::Checkpoint load_checkpoint_artifact(const std::string& path,
                                             const std::string& what = "checkpoint");
retrieval::ExplanationIndex load_index_artifact(const std::string& path);

/// Rejects a checkpoint whose vocabulary or answer space differs from the
/// corpus, and one whose kind is not in `kinds`.
void check_checkpoint(const numcore::Checkpoint& ckpt, const Workspace& ws,
                      const std::vector<std::string>& kinds);

/// "pretrained." when the store carries a pretrained copy, "" otherwise.
std::string encoder_prefix(const numcore::ParamStore& params);

/// Common checkpoint metadata: kind, effective config, corpus hash,
/// vocabulary and answers.
nlohmann::ordered_json artifact_metadata(const std::string& kind, const RunConfig& cfg,
                                         const Workspace& ws);

/// Writes `j` (pretty, trailing newline) to `path`; throws IoError.
void write_json_file(const std::string& path, const nlohmann::ordered_json& j);
void write_text_file(const std::string& path, const std::string& text);

}  // namespace compex::cli

#endif  // COMPEX_CLI_MODEL_H_
