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

#ifndef COMPEX_CORPUS_CORPUS_IO_H_
#define COMPEX_CORPUS_CORPUS_IO_H_

#include <filesystem>
#include <iosfwd>
#include <string>

#include "compex/corpus/answer_space.h"
#include "compex/corpus/example.h"
#include "compex/corpus/vocabulary.h"

namespace compex::corpus {

// JSONL, one example per line:
//   {"id": str, "question": str, "objects": [[float x D_obj] x N_obj],
//    "answers": [{"text": str, "count": int}], "explanation": str,
//    "split": "train" | "test"}

std::string example_to_json_line(const Example& example);

/// Parses one line. `line_no` is 1-based and only used in error messages.
Example example_from_json_line(const std::string& line, std::size_t line_no);

void write_corpus(std::ostream& out, const Corpus& corpus);
Corpus read_corpus(std::istream& in);

void save_corpus(const Corpus& corpus, const std::filesystem::path& path);

/// Throws SchemaError("line N: ...") on the first malformed line. Also checks
/// the corpus-wide invariants (unique ids, uniform object shape).
Corpus load_corpus(const std::filesystem::path& path);

/// Throws SchemaError when ids repeat, object shapes differ, an example has
/// no positive answer, or a train example lacks an explanation.
void validate_corpus(const Corpus& corpus);

/// Words of every train question and explanation.
Vocabulary build_vocabulary(const Corpus& corpus);

/// Sorted distinct answer texts with a positive count in the train split.
AnswerSpace build_answer_space(const Corpus& corpus);

}  // namespace compex::corpus

#endif  // COMPEX_CORPUS_CORPUS_IO_H_
