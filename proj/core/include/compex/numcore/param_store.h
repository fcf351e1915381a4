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

#ifndef COMPEX_NUMCORE_PARAM_STORE_H_
#define COMPEX_NUMCORE_PARAM_STORE_H_

#include <functional>
#include <map>
#include <string>
#include <string_view>
#include <vector>

#include "compex/numcore/ops.h"
#include "compex/numcore/rng.h"
#include "compex/numcore/tensor.h"

namespace compex::numcore {

inline constexpr int kParamStoreVersion = 1;

/// Named trainable tensors. Names are unique and an entry's shape is fixed
/// once created. Iteration order is lexicographic by name.
class ParamStore {
 public:
  void add(const std::string& name, Tensor value);
  /// Adds an entry filled with uniform(-range, range) draws.
  void add_uniform(const std::string& name, Shape shape, double range, Rng& rng);

  /// Replaces an entry's values; the shape must not change.
  void set(const std::string& name, Tensor value);

  bool contains(const std::string& name) const;
  const Tensor& get(const std::string& name) const;
  Tensor& mutable_get(const std::string& name);

  const std::map<std::string, Tensor>& entries() const { return entries_; }
  std::vector<std::string> names() const;
  std::vector<std::string> names_with_prefix(std::string_view prefix) const;
  std::size_t size() const { return entries_.size(); }
  bool empty() const { return entries_.empty(); }
  std::size_t num_values() const;

  /// Copies every entry under `prefix` from `other`, optionally renaming the
  /// prefix. Existing entries are overwritten (shapes must agree).
  void import_prefix(const ParamStore& other, std::string_view prefix,
                     std::string_view renamed = {});

  bool bit_equal(const ParamStore& other) const;

  int version() const { return version_; }
  void set_version(int v) { version_ = v; }

 private:
  std::map<std::string, Tensor> entries_;
  int version_ = kParamStoreVersion;
};

/// Parameters of a store bound as leaves on one tape.
class ParamBinding {
 public:
  /// Binds every entry. Entries for which `trainable` returns false are bound
  /// as constants and receive no gradient.
  ParamBinding(Tape& tape, const ParamStore& store,
               const std::function<bool(const std::string&)>& trainable =
                   nullptr);

  Var operator[](const std::string& name) const;
  bool contains(const std::string& name) const { return vars_.count(name); }

  /// Gradients of `loss` for every trainable entry.
  std::map<std::string, Tensor> gradients(Var loss) const;

 private:
  Tape* tape_;
  std::map<std::string, Var> vars_;
  std::map<std::string, bool> trainable_;
};

}  // namespace compex::numcore

#endif  // COMPEX_NUMCORE_PARAM_STORE_H_
