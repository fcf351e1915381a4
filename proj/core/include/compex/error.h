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

#ifndef COMPEX_ERROR_H_
#define COMPEX_ERROR_H_

#include <stdexcept>
#include <string>

namespace compex {

/// Base class for every error raised by the library. `kind()` is a short
/// stable token used by the CLI's machine-parsable error line.
class Error : public std::runtime_error {
 public:
  Error(std::string kind, const std::string& message)
      : std::runtime_error(message), kind_(std::move(kind)) {}

  const std::string& kind() const { return kind_; }

 private:
  std::string kind_;
};

class ShapeError : public Error {
 public:
  explicit ShapeError(const std::string& message) : Error("shape", message) {}
};

class NonFiniteError : public Error {
 public:
  explicit NonFiniteError(const std::string& message)
      : Error("non-finite", message) {}
};

class InvalidArgument : public Error {
 public:
  explicit InvalidArgument(const std::string& message)
      : Error("invalid-argument", message) {}
};

class SchemaError : public Error {
 public:
  explicit SchemaError(const std::string& message) : Error("schema", message) {}
};

class IoError : public Error {
 public:
  explicit IoError(const std::string& message) : Error("io", message) {}
};

class StaleIndexError : public Error {
 public:
  explicit StaleIndexError(const std::string& message)
      : Error("stale-index", message) {}
};

class MissingArtifact : public Error {
 public:
  explicit MissingArtifact(const std::string& message)
      : Error("missing-artifact", message) {}
};

class DivergenceError : public Error {
 public:
  explicit DivergenceError(const std::string& message)
      : Error("divergence", message) {}
};

}  // namespace compex

#endif  // COMPEX_ERROR_H_
