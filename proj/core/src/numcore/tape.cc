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

#include "compex/numcore/tape.h"

#include "compex/error.h"
#include "kernels.h"

namespace compex::numcore {

const char* op_name(OpKind kind) {
  switch (kind) {
    case OpKind::kLeaf: return "leaf";
    case OpKind::kMatMul: return "matmul";
    case OpKind::kAdd: return "add";
    case OpKind::kMul: return "mul";
    case OpKind::kConcat: return "concat";
    case OpKind::kSigmoid: return "sigmoid";
    case OpKind::kTanh: return "tanh";
    case OpKind::kSoftmax: return "softmax";
    case OpKind::kMaxOverSet: return "max_over_set";
    case OpKind::kMeanOverSet: return "mean_over_set";
    case OpKind::kEmbeddingLookup: return "embedding_lookup";
    case OpKind::kBceSoft: return "bce_soft";
  }
  return "unknown";
}

namespace {

void check_finite(const Node& node, NodeId id) {
  if (!node.value.all_finite()) {
    throw NonFiniteError("op #" + std::to_string(id) + " (" +
                         op_name(node.kind) + ") produced a non-finite value");
  }
}

}  // namespace

NodeId Tape::leaf(std::string name, Tensor value, bool requires_grad) {
  Node node;
  node.kind = OpKind::kLeaf;
  node.name = std::move(name);
  node.value = std::move(value);
  node.requires_grad = requires_grad;
  const NodeId id = nodes_.size();
  check_finite(node, id);
  nodes_.push_back(std::move(node));
  return id;
}

NodeId Tape::constant(Tensor value) { return leaf("", std::move(value), false); }

NodeId Tape::push(Node node) {
  const NodeId id = nodes_.size();
  for (NodeId in : node.inputs) {
    if (in >= id) {
      throw InvalidArgument("op #" + std::to_string(id) +
                            " references a later node");
    }
    node.requires_grad = node.requires_grad || nodes_[in].requires_grad;
  }
  internal::evaluate(node, nodes_, id);
  check_finite(node, id);
  nodes_.push_back(std::move(node));
  return id;
}

void Tape::mark_output(NodeId id, std::string name) {
  if (id >= nodes_.size()) throw InvalidArgument("unknown node id");
  outputs_[std::move(name)] = id;
}

std::uint64_t Tape::selection_signature() const {
  std::uint64_t h = 1469598103934665603ULL;  // FNV-1a
  auto mix = [&h](std::uint64_t v) {
    h ^= v;
    h *= 1099511628211ULL;
  };
  for (NodeId id = 0; id < nodes_.size(); ++id) {
    if (nodes_[id].kind != OpKind::kMaxOverSet) continue;
    mix(id);
    for (std::size_t a : nodes_[id].argmax) mix(a);
  }
  return h;
}

std::map<std::string, Tensor> Tape::forward(
    const std::map<std::string, Tensor>& leaves) {
  for (NodeId id = 0; id < nodes_.size(); ++id) {
    Node& node = nodes_[id];
    if (node.kind == OpKind::kLeaf) {
      if (node.name.empty()) continue;
      auto it = leaves.find(node.name);
      if (it == leaves.end()) {
        throw InvalidArgument("leaf '" + node.name + "' is not bound");
      }
      if (!it->second.same_shape(node.value)) {
        throw ShapeError("leaf '" + node.name + "' expects " +
                         shape_string(node.value.shape()) + ", got " +
                         shape_string(it->second.shape()));
      }
      node.value = it->second;
      check_finite(node, id);
      continue;
    }
    internal::evaluate(node, nodes_, id);
    check_finite(node, id);
  }
  std::map<std::string, Tensor> out;
  for (const auto& [name, id] : outputs_) out.emplace(name, nodes_[id].value);
  return out;
}

Gradients Tape::backward(NodeId output) const {
  if (output >= nodes_.size()) throw InvalidArgument("unknown node id");
  if (nodes_[output].value.size() != 1) {
    throw ShapeError("backward needs a scalar output, node #" +
                     std::to_string(output) + " has shape " +
                     shape_string(nodes_[output].value.shape()));
  }
  Gradients grads(nodes_.size());
  grads.slot(output) = Tensor(nodes_[output].value.shape(), 1.0);
  for (NodeId id = output + 1; id-- > 0;) {
    const Node& node = nodes_[id];
    if (node.kind == OpKind::kLeaf || !node.requires_grad) continue;
    const auto& g = grads.slot(id);
    if (!g) continue;
    internal::backprop(node, *g, nodes_, grads);
  }
  return grads;
}

std::map<std::string, Tensor> Tape::backward_leaves(NodeId output) const {
  Gradients grads = backward(output);
  std::map<std::string, Tensor> out;
  for (NodeId id = 0; id < nodes_.size(); ++id) {
    const Node& node = nodes_[id];
    if (node.kind != OpKind::kLeaf || node.name.empty()) continue;
    const Tensor* g = grads.of(id);
    Tensor value = g ? *g : Tensor(node.value.shape(), 0.0);
    auto [it, inserted] = out.emplace(node.name, value);
    if (!inserted) {
      for (std::size_t i = 0; i < value.size(); ++i) it->second[i] += value[i];
    }
  }
  return out;
}

}  // namespace compex::numcore
