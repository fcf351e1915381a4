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

#include "compex/numcore/param_store.h"

#include "compex/error.h"

namespace compex::numcore {

void ParamStore::add(const std::string& name, Tensor value) {
  if (name.empty()) throw InvalidArgument("parameter name must be non-empty");
  if (!entries_.emplace(name, std::move(value)).second) {
    throw InvalidArgument("duplicate parameter '" + name + "'");
  }
}

void ParamStore::add_uniform(const std::string& name, Shape shape,
                             double range, Rng& rng) {
  Tensor t(std::move(shape), 0.0);
  for (std::size_t i = 0; i < t.size(); ++i) t[i] = rng.uniform(-range, range);
  add(name, std::move(t));
}

void ParamStore::set(const std::string& name, Tensor value) {
  Tensor& slot = mutable_get(name);
  if (!slot.same_shape(value)) {
    throw ShapeError("parameter '" + name + "' has shape " +
                     shape_string(slot.shape()) + ", cannot assign " +
                     shape_string(value.shape()));
  }
  slot = std::move(value);
}

bool ParamStore::contains(const std::string& name) const {
  return entries_.count(name) > 0;
}

const Tensor& ParamStore::get(const std::string& name) const {
  auto it = entries_.find(name);
  if (it == entries_.end()) {
    throw InvalidArgument("unknown parameter '" + name + "'");
  }
  return it->second;
}

Tensor& ParamStore::mutable_get(const std::string& name) {
  auto it = entries_.find(name);
  if (it == entries_.end()) {
    throw InvalidArgument("unknown parameter '" + name + "'");
  }
  return it->second;
}

std::vector<std::string> ParamStore::names() const {
  std::vector<std::string> out;
  out.reserve(entries_.size());
  for (const auto& [name, _] : entries_) out.push_back(name);
  return out;
}

std::vector<std::string> ParamStore::names_with_prefix(
    std::string_view prefix) const {
  std::vector<std::string> out;
  for (auto it = entries_.lower_bound(std::string(prefix));
       it != entries_.end() && it->first.starts_with(prefix); ++it) {
    out.push_back(it->first);
  }
  return out;
}

std::size_t ParamStore::num_values() const {
  std::size_t n = 0;
  for (const auto& [_, t] : entries_) n += t.size();
  return n;
}

void ParamStore::import_prefix(const ParamStore& other, std::string_view prefix,
                               std::string_view renamed) {
  for (const std::string& name : other.names_with_prefix(prefix)) {
    const std::string target =
        renamed.empty() ? name
                        : std::string(renamed) + name.substr(prefix.size());
    if (contains(target)) {
      set(target, other.get(name));
    } else {
      add(target, other.get(name));
    }
  }
}

bool ParamStore::bit_equal(const ParamStore& other) const {
  if (entries_.size() != other.entries_.size()) return false;
  auto a = entries_.begin();
  auto b = other.entries_.begin();
  for (; a != entries_.end(); ++a, ++b) {
    if (a->first != b->first || !a->second.bit_equal(b->second)) return false;
  }
  return true;
}

ParamBinding::ParamBinding(
    Tape& tape, const ParamStore& store,
    const std::function<bool(const std::string&)>& trainable)
    : tape_(&tape) {
  for (const auto& [name, value] : store.entries()) {
    const bool train = !trainable || trainable(name);
    trainable_[name] = train;
    vars_[name] = Var{&tape, train ? tape.leaf(name, value)
                                   : tape.leaf(name, value, false)};
  }
}

Var ParamBinding::operator[](const std::string& name) const {
  auto it = vars_.find(name);
  if (it == vars_.end()) {
    throw InvalidArgument("parameter '" + name + "' is not bound");
  }
  return it->second;
}

std::map<std::string, Tensor> ParamBinding::gradients(Var loss) const {
  Gradients grads = tape_->backward(loss.id);
  std::map<std::string, Tensor> out;
  for (const auto& [name, var] : vars_) {
    if (!trainable_.at(name)) continue;
    const Tensor* g = grads.of(var.id);
    out.emplace(name, g ? *g : Tensor(var.value().shape(), 0.0));
  }
  return out;
}

}  // namespace compex::numcore
