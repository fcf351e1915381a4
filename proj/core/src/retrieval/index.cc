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

#include "compex/retrieval/index.h"

#include <algorithm>
#include <bit>
#include <cmath>
#include <fstream>
#include <nlohmann/json.hpp>
#include <sstream>

#include "compex/error.h"
#include "compex/numcore/checkpoint.h"
#include "compex/vqa/predictor.h"

namespace compex::retrieval {
namespace {

using nlohmann::ordered_json;

constexpr int kIndexFormatVersion = 1;

std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot read " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_file(const std::filesystem::path& path, const std::string& bytes) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot write " + path.string());
  out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
  if (!out) throw IoError("short write to " + path.string());
}

struct Hit {
  double distance;
  std::size_t row;
};

}  // namespace

ExplanationIndex::ExplanationIndex(std::string built_against, Tensor embeddings,
                                   std::vector<IndexRow> rows)
    : built_against_(std::move(built_against)),
      embeddings_(std::move(embeddings)),
      rows_(std::move(rows)) {
  if (embeddings_.rows() != rows_.size()) {
    throw ShapeError("index has " + std::to_string(rows_.size()) + " rows but " +
                     std::to_string(embeddings_.rows()) + " embeddings");
  }
  for (std::size_t r = 0; r < rows_.size(); ++r) {
    if (rows_[r].explanation_tokens.empty()) {
      throw InvalidArgument("index row '" + rows_[r].example_id +
                            "' has an empty explanation");
    }
    for (const auto& [id, score] : rows_[r].answer_scores) {
      if (score > kSupportThreshold) supporters_[id].push_back(r);
    }
  }
}

void ExplanationIndex::check_fingerprint(const std::string& fingerprint) const {
  if (fingerprint != built_against_) {
    throw StaleIndexError("index was built against encoder " +
                          built_against_.substr(0, 12) +
                          " but the checkpoint in use has " +
                          fingerprint.substr(0, 12));
  }
}

const std::vector<std::size_t>& ExplanationIndex::supporters(int answer_id) const {
  static const std::vector<std::size_t> kNone;
  auto it = supporters_.find(answer_id);
  return it == supporters_.end() ? kNone : it->second;
}

void ExplanationIndex::save(const std::filesystem::path& dir) const {
  std::filesystem::create_directories(dir);
  std::string bin;
  numcore::append_f64_le(bin, embeddings_.data());
  std::string rows_text;
  for (const IndexRow& r : rows_) {
    ordered_json scores = ordered_json::array();
    for (const auto& [id, s] : r.answer_scores) scores.push_back({id, s});
    ordered_json j;
    j["id"] = r.example_id;
    j["answer_scores"] = std::move(scores);
    j["tokens"] = r.explanation_tokens;
    j["explanation"] = r.explanation;
    rows_text += j.dump();
    rows_text += '\n';
  }
  ordered_json manifest;
  manifest["format_version"] = kIndexFormatVersion;
  manifest["built_against"] = built_against_;
  manifest["rows"] = rows_.size();
  manifest["dim"] = dim();
  manifest["embeddings_sha256"] = numcore::sha256_hex(bin);
  manifest["rows_sha256"] = numcore::sha256_hex(rows_text);
  write_file(dir / "embeddings.bin", bin);
  write_file(dir / "rows.jsonl", rows_text);
  write_file(dir / "manifest.json", manifest.dump(2) + "\n");
}

ExplanationIndex ExplanationIndex::load(const std::filesystem::path& dir) {
  if (!std::filesystem::exists(dir / "manifest.json")) {
    throw MissingArtifact("index manifest not found in " + dir.string());
  }
  ordered_json manifest;
  try {
    manifest = ordered_json::parse(read_file(dir / "manifest.json"));
  } catch (const nlohmann::json::exception& e) {
    throw SchemaError("malformed index manifest: " + std::string(e.what()));
  }
  const std::string bin = read_file(dir / "embeddings.bin");
  const std::string rows_text = read_file(dir / "rows.jsonl");
  try {
    if (manifest.at("format_version").get<int>() != kIndexFormatVersion) {
      throw SchemaError("unsupported index format version");
    }
    if (manifest.at("embeddings_sha256").get<std::string>() !=
            numcore::sha256_hex(bin) ||
        manifest.at("rows_sha256").get<std::string>() !=
            numcore::sha256_hex(rows_text)) {
      throw SchemaError("index files do not match their manifest hashes");
    }
    const std::size_t n = manifest.at("rows").get<std::size_t>();
    const std::size_t dim = manifest.at("dim").get<std::size_t>();
    if (bin.size() != n * dim * 8) throw SchemaError("embedding payload size mismatch");
    std::vector<IndexRow> rows;
    std::istringstream in(rows_text);
    std::string line;
    while (std::getline(in, line)) {
      const ordered_json j = ordered_json::parse(line);
      IndexRow r;
      r.example_id = j.at("id").get<std::string>();
      for (const auto& p : j.at("answer_scores")) {
        r.answer_scores[p.at(0).get<int>()] = p.at(1).get<double>();
      }
      r.explanation_tokens = j.at("tokens").get<TokenSeq>();
      r.explanation = j.at("explanation").get<std::string>();
      rows.push_back(std::move(r));
    }
    if (rows.size() != n) throw SchemaError("row count does not match the manifest");
    return ExplanationIndex(manifest.at("built_against").get<std::string>(),
                            Tensor::matrix(n, dim, numcore::read_f64_le(bin, n * dim)),
                            std::move(rows));
  } catch (const nlohmann::json::exception& e) {
    throw SchemaError("malformed index: " + std::string(e.what()));
  }
}

bool ExplanationIndex::bit_equal(const ExplanationIndex& other) const {
  if (built_against_ != other.built_against_ ||
      !embeddings_.bit_equal(other.embeddings_) ||
      rows_.size() != other.rows_.size()) {
    return false;
  }
  for (std::size_t i = 0; i < rows_.size(); ++i) {
    const IndexRow& a = rows_[i];
    const IndexRow& b = other.rows_[i];
    if (a.example_id != b.example_id || a.explanation != b.explanation ||
        a.explanation_tokens != b.explanation_tokens ||
        a.answer_scores.size() != b.answer_scores.size()) {
      return false;
    }
    for (auto ia = a.answer_scores.begin(), ib = b.answer_scores.begin();
         ia != a.answer_scores.end(); ++ia, ++ib) {
      if (ia->first != ib->first ||
          std::bit_cast<std::uint64_t>(ia->second) !=
              std::bit_cast<std::uint64_t>(ib->second)) {
        return false;
      }
    }
  }
  return true;
}

std::string encoder_fingerprint(const numcore::ParamStore& params,
                                const std::string& prefix) {
  if (params.names_with_prefix(prefix + "encoder.").empty()) {
    throw MissingArtifact("no encoder parameters under '" + prefix + "encoder.'");
  }
  return numcore::fingerprint(params, prefix + "encoder.");
}

ExplanationIndex build_index(const std::vector<const corpus::VQAExample*>& train,
                             const std::vector<std::string>& explanations,
                             const numcore::ParamStore& params,
                             const std::string& prefix) {
  if (train.empty()) throw InvalidArgument("cannot build an index over an empty train split");
  if (explanations.size() != train.size()) {
    throw InvalidArgument("one explanation text per train example is required");
  }
  const vqa::VqaPredictions pred = vqa::predict(params, train, prefix);
  std::vector<IndexRow> rows;
  rows.reserve(train.size());
  for (std::size_t i = 0; i < train.size(); ++i) {
    rows.push_back({train[i]->id, train[i]->answer_scores,
                    train[i]->explanation_tokens, explanations[i]});
  }
  return ExplanationIndex(encoder_fingerprint(params, prefix), pred.qv,
                          std::move(rows));
}

CompetingSet retrieve(const ExplanationIndex& index,
                      const std::string& fingerprint,
                      std::span<const double> query, int answer_id,
                      std::size_t k, const std::string& exclude_id) {
  index.check_fingerprint(fingerprint);
  if (query.size() != index.dim()) {
    throw ShapeError("query has " + std::to_string(query.size()) +
                     " dims, index has " + std::to_string(index.dim()));
  }
  std::vector<Hit> hits;
  for (std::size_t r : index.supporters(answer_id)) {
    if (index.rows()[r].example_id == exclude_id) continue;
    const auto e = index.embedding(r);
    double sq = 0.0;
    for (std::size_t d = 0; d < query.size(); ++d) {
      const double diff = query[d] - e[d];
      sq += diff * diff;
    }
    hits.push_back({std::sqrt(sq), r});
  }
  const auto& rows = index.rows();
  auto closer = [&rows](const Hit& a, const Hit& b) {
    if (a.distance != b.distance) return a.distance < b.distance;
    return rows[a.row].example_id < rows[b.row].example_id;
  };
  const std::size_t take = std::min(k, hits.size());
  std::partial_sort(hits.begin(), hits.begin() + take, hits.end(), closer);
  CompetingSet out;
  out.answer_id = answer_id;
  for (std::size_t i = 0; i < take; ++i) {
    const IndexRow& row = rows[hits[i].row];
    out.members.push_back(
        {row.explanation_tokens, row.explanation, row.example_id, hits[i].distance});
  }
  return out;
}

std::vector<CompetingSet> competing_sets_for(
    const ExplanationIndex& index, const std::string& fingerprint,
    std::span<const double> scores, std::span<const double> query,
    const std::string& exclude_id, std::size_t k_ans, std::size_t k_exp) {
  std::vector<CompetingSet> out;
  for (const auto& [id, p] : vqa::topk_candidates(scores, k_ans)) {
    out.push_back(retrieve(index, fingerprint, query, id, k_exp, exclude_id));
  }
  return out;
}

}  // namespace compex::retrieval
