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

#ifndef COMPEX_NUMCORE_TAPE_H_
#define COMPEX_NUMCORE_TAPE_H_

#include <cstddef>
#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "compex/numcore/tensor.h"

namespace compex::numcore {

using NodeId = std::size_t;

/// The closed set of differentiable primitives. Everything else (relu, GRU
/// cells, cross-entropy, ...) is composed from these.
enum class OpKind {
  kLeaf,
  kMatMul,
  kAdd,
  kMul,
  kConcat,
  kSigmoid,
  kTanh,
  kSoftmax,
  kMaxOverSet,
  kMeanOverSet,
  kEmbeddingLookup,
  kBceSoft,
};

const char* op_name(OpKind kind);

/// Clamp applied to probabilities before taking logs in kBceSoft.
inline constexpr double kProbEpsilon = 1e-7;

struct Node {
  OpKind kind = OpKind::kLeaf;
  std::vector<NodeId> inputs;
  Tensor value;
  bool requires_grad = false;
  // Leaves: binding name; empty for anonymous constants.
  std::string name;
  // Lookup ids, segment offsets, or the concat axis depending on `kind`.
  std::vector<std::size_t> indices;
  // kBceSoft only.
  Tensor target;
  Tensor weight;
  // kMaxOverSet: winning input (or row) per output element, saved by forward.
  std::vector<std::size_t> argmax;
};

class Gradients {
 public:
  explicit Gradients(std::size_t n) : grads_(n) {}

  /// Gradient w.r.t. node `id`, or nullptr if it does not influence the
  /// output (or does not require grad).
  const Tensor* of(NodeId id) const {
    return grads_[id] ? &*grads_[id] : nullptr;
  }
  std::optional<Tensor>& slot(NodeId id) { return grads_[id]; }

 private:
  std::vector<std::optional<Tensor>> grads_;
};

/// Define-by-run record of a computation. Ops append nodes in topological
/// order; `forward` replays the record against rebound leaves and `backward`
/// runs reverse-mode accumulation from a scalar node.
class Tape {
 public:
  NodeId leaf(std::string name, Tensor value, bool requires_grad = true);
  NodeId constant(Tensor value);

  /// Appends an op node and evaluates it eagerly. Throws ShapeError or
  /// NonFiniteError naming the node id.
  NodeId push(Node node);

  const Tensor& value(NodeId id) const { return nodes_.at(id).value; }
  const Node& node(NodeId id) const { return nodes_.at(id); }
  std::size_t size() const { return nodes_.size(); }

  void mark_output(NodeId id, std::string name);

  /// Rebinds every named leaf from `leaves` and recomputes all nodes.
  /// Returns the marked outputs. Unbound named leaves are rejected.
  std::map<std::string, Tensor> forward(
      const std::map<std::string, Tensor>& leaves);

  /// Hash of every max-over-set winner. Two evaluations with equal
  /// signatures lie on the same linear piece of each max (and relu).
  std::uint64_t selection_signature() const;
  /// Reverse-mode gradients of scalar node `output` w.r.t. every node.
  Gradients backward(NodeId output) const;

  /// Gradients keyed by leaf name (zero tensors for leaves the output does
  /// not depend on).
  std::map<std::string, Tensor> backward_leaves(NodeId output) const;

 private:
  std::vector<Node> nodes_;
  std::map<std::string, NodeId> outputs_;
};

}  // namespace compex::numcore

#endif  // COMPEX_NUMCORE_TAPE_H_
