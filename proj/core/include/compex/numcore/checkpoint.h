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

#ifndef COMPEX_NUMCORE_CHECKPOINT_H_
#define COMPEX_NUMCORE_CHECKPOINT_H_

#include <cstdint>
#include <filesystem>
#include <nlohmann/json.hpp>
#include <span>
#include <string>
#include <string_view>

#include "compex/numcore/param_store.h"

namespace compex::numcore {

inline constexpr int kCheckpointFormatVersion = 1;

// On-disk layout:
//
//   bytes 0..7    magic "CPXCKPT1"
//   bytes 8..15   manifest length N, little-endian uint64
//   next N bytes  manifest, UTF-8 JSON:
//                   format_version, param_store_version, rng_state,
//                   fingerprint, payload_bytes, metadata,
//                   entries: [{name, shape, offset}]
//   remainder     payload: every entry's values as little-endian IEEE-754
//                 binary64, at `offset` bytes from the payload start
struct Checkpoint {
  ParamStore params;
  nlohmann::ordered_json metadata = nlohmann::ordered_json::object();
  std::string rng_state;
  std::string fingerprint;
};

void save_checkpoint(const std::filesystem::path& path,
                     const Checkpoint& checkpoint);
/// Throws IoError for unreadable files and SchemaError for malformed ones.
Checkpoint load_checkpoint(const std::filesystem::path& path);

std::string sha256_hex(std::span<const unsigned char> bytes);
std::string sha256_hex(std::string_view text);

/// Content hash over (name, shape, payload) of every entry whose name starts
/// with `prefix`; names are hashed with the prefix removed, so the same
/// tensors stored under different prefixes share a fingerprint.
std::string fingerprint(const ParamStore& params, std::string_view prefix = {});

/// Appends little-endian binary64 values to `out`.
void append_f64_le(std::string& out, std::span<const double> values);
/// Decodes `count` binary64 values from `bytes`.
std::vector<double> read_f64_le(std::string_view bytes, std::size_t count);

}  // namespace compex::numcore

#endif  // COMPEX_NUMCORE_CHECKPOINT_H_
