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

#include "compex/numcore/checkpoint.h"

#include <openssl/evp.h>

#include <bit>
#include <cstring>
#include <fstream>
#include <sstream>

#include "compex/error.h"

namespace compex::numcore {
namespace {

constexpr char kMagic[8] = {'C', 'P', 'X', 'C', 'K', 'P', 'T', '1'};

std::uint64_t to_le(std::uint64_t x) {
  if constexpr (std::endian::native == std::endian::little) {
    return x;
  } else {
    return __builtin_bswap64(x);
  }
}

void append_u64_le(std::string& out, std::uint64_t x) {
  x = to_le(x);
  char buf[8];
  std::memcpy(buf, &x, 8);
  out.append(buf, 8);
}

std::uint64_t read_u64_le(const char* p) {
  std::uint64_t x;
  std::memcpy(&x, p, 8);
  return to_le(x);
}

class Sha256 {
 public:
  Sha256() : ctx_(EVP_MD_CTX_new()) {
    if (!ctx_ || EVP_DigestInit_ex(ctx_, EVP_sha256(), nullptr) != 1) {
      throw Error("crypto", "SHA-256 initialisation failed");
    }
  }
  ~Sha256() { EVP_MD_CTX_free(ctx_); }
  Sha256(const Sha256&) = delete;
  Sha256& operator=(const Sha256&) = delete;

  void update(const void* data, std::size_t n) {
    if (EVP_DigestUpdate(ctx_, data, n) != 1) {
      throw Error("crypto", "SHA-256 update failed");
    }
  }
  void update(std::string_view s) { update(s.data(), s.size()); }

  std::string hex() {
    unsigned char digest[EVP_MAX_MD_SIZE];
    unsigned int len = 0;
    if (EVP_DigestFinal_ex(ctx_, digest, &len) != 1) {
      throw Error("crypto", "SHA-256 finalisation failed");
    }
    static constexpr char kHex[] = "0123456789abcdef";
    std::string out;
    for (unsigned int i = 0; i < len; ++i) {
      out.push_back(kHex[digest[i] >> 4]);
      out.push_back(kHex[digest[i] & 15]);
    }
    return out;
  }

 private:
  EVP_MD_CTX* ctx_;
};

}  // namespace

void append_f64_le(std::string& out, std::span<const double> values) {
  const std::size_t start = out.size();
  out.resize(start + values.size() * 8);
  char* dst = out.data() + start;
  for (double v : values) {
    std::uint64_t bits = to_le(std::bit_cast<std::uint64_t>(v));
    std::memcpy(dst, &bits, 8);
    dst += 8;
  }
}

std::vector<double> read_f64_le(std::string_view bytes, std::size_t count) {
  if (bytes.size() < count * 8) throw SchemaError("truncated binary64 payload");
  std::vector<double> out(count);
  for (std::size_t i = 0; i < count; ++i) {
    out[i] = std::bit_cast<double>(read_u64_le(bytes.data() + i * 8));
  }
  return out;
}

std::string sha256_hex(std::span<const unsigned char> bytes) {
  Sha256 h;
  h.update(bytes.data(), bytes.size());
  return h.hex();
}

std::string sha256_hex(std::string_view text) {
  Sha256 h;
  h.update(text);
  return h.hex();
}

std::string fingerprint(const ParamStore& params, std::string_view prefix) {
  Sha256 h;
  std::string buf;
  for (const std::string& name : params.names_with_prefix(prefix)) {
    const Tensor& t = params.get(name);
    buf.clear();
    buf += name.substr(prefix.size());
    buf.push_back('\0');
    for (std::size_t d : t.shape()) append_u64_le(buf, d);
    append_f64_le(buf, t.data());
    h.update(buf);
  }
  return h.hex();
}

void save_checkpoint(const std::filesystem::path& path,
                     const Checkpoint& checkpoint) {
  std::string payload;
  payload.reserve(checkpoint.params.num_values() * 8);
  nlohmann::ordered_json entries = nlohmann::ordered_json::array();
  for (const auto& [name, tensor] : checkpoint.params.entries()) {
    entries.push_back({{"name", name},
                       {"shape", tensor.shape()},
                       {"offset", payload.size()}});
    append_f64_le(payload, tensor.data());
  }
  nlohmann::ordered_json manifest;
  manifest["format_version"] = kCheckpointFormatVersion;
  manifest["param_store_version"] = checkpoint.params.version();
  manifest["fingerprint"] = fingerprint(checkpoint.params);
  manifest["payload_bytes"] = payload.size();
  manifest["rng_state"] = checkpoint.rng_state;
  manifest["metadata"] = checkpoint.metadata;
  manifest["entries"] = std::move(entries);
  const std::string text = manifest.dump();

  std::string header(kMagic, sizeof(kMagic));
  append_u64_le(header, text.size());

  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot write checkpoint " + path.string());
  out.write(header.data(), static_cast<std::streamsize>(header.size()));
  out.write(text.data(), static_cast<std::streamsize>(text.size()));
  out.write(payload.data(), static_cast<std::streamsize>(payload.size()));
  if (!out) throw IoError("short write to checkpoint " + path.string());
}

Checkpoint load_checkpoint(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot read checkpoint " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  const std::string bytes = ss.str();
  if (bytes.size() < 16 || std::memcmp(bytes.data(), kMagic, 8) != 0) {
    throw SchemaError(path.string() + " is not a checkpoint file");
  }
  const std::uint64_t manifest_len = read_u64_le(bytes.data() + 8);
  if (manifest_len > bytes.size() - 16) {
    throw SchemaError("truncated checkpoint manifest in " + path.string());
  }
  nlohmann::ordered_json manifest;
  try {
    manifest = nlohmann::ordered_json::parse(
        std::string_view(bytes).substr(16, manifest_len));
  } catch (const nlohmann::json::exception& e) {
    throw SchemaError("malformed checkpoint manifest: " + std::string(e.what()));
  }
  if (manifest.value("format_version", -1) != kCheckpointFormatVersion) {
    throw SchemaError("unsupported checkpoint format version in " +
                      path.string());
  }
  const std::string_view payload =
      std::string_view(bytes).substr(16 + manifest_len);
  Checkpoint ckpt;
  try {
    if (manifest.at("payload_bytes").get<std::size_t>() != payload.size()) {
      throw SchemaError("payload size mismatch in " + path.string());
    }
    ckpt.params.set_version(manifest.at("param_store_version").get<int>());
    for (const auto& e : manifest.at("entries")) {
      const Shape shape = e.at("shape").get<Shape>();
      const std::size_t offset = e.at("offset").get<std::size_t>();
      const std::size_t count = shape_size(shape);
      if (offset + count * 8 > payload.size()) {
        throw SchemaError("entry '" + e.at("name").get<std::string>() +
                          "' runs past the payload");
      }
      ckpt.params.add(e.at("name").get<std::string>(),
                      Tensor(shape, read_f64_le(payload.substr(offset), count)));
    }
    ckpt.rng_state = manifest.at("rng_state").get<std::string>();
    ckpt.metadata = manifest.at("metadata");
    ckpt.fingerprint = manifest.at("fingerprint").get<std::string>();
  } catch (const nlohmann::json::exception& e) {
    throw SchemaError("malformed checkpoint manifest: " + std::string(e.what()));
  }
  if (fingerprint(ckpt.params) != ckpt.fingerprint) {
    throw SchemaError("checkpoint payload does not match its fingerprint: " +
                      path.string());
  }
  return ckpt;
}

}  // namespace compex::numcore
