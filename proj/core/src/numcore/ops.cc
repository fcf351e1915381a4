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

#include "compex/numcore/ops.h"

#include <Eigen/Core>
#include <algorithm>
#include <cmath>
#include <string>

#include "compex/error.h"
#include "kernels.h"

namespace compex::numcore {
namespace {

using RowMajor =
    Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using ConstMap = Eigen::Map<const RowMajor>;
using MutMap = Eigen::Map<RowMajor>;

ConstMap view(const Tensor& t) {
  return ConstMap(t.data().data(), static_cast<Eigen::Index>(t.rows()),
                  static_cast<Eigen::Index>(t.cols()));
}

MutMap view(Tensor& t) {
  return MutMap(t.data().data(), static_cast<Eigen::Index>(t.rows()),
                static_cast<Eigen::Index>(t.cols()));
}

[[noreturn]] void shape_fail(NodeId id, OpKind kind, const std::string& what) {
  throw ShapeError("op #" + std::to_string(id) + " (" + op_name(kind) +
                   "): " + what);
}

std::string dims(const Tensor& t) { return shape_string({t.rows(), t.cols()}); }

// Adds `delta` into the gradient slot, allocating it on first use.
Tensor& slot_for(Gradients& grads, NodeId id, const Tensor& like) {
  auto& slot = grads.slot(id);
  if (!slot) slot = Tensor(like.shape(), 0.0);
  return *slot;
}

bool wants_grad(const std::vector<Node>& nodes, NodeId id) {
  return nodes[id].requires_grad;
}

struct Broadcast {
  std::size_t rows, cols;
};

Broadcast broadcast_shape(const Tensor& a, const Tensor& b, NodeId id,
                          OpKind kind) {
  auto pick = [&](std::size_t x, std::size_t y) -> std::size_t {
    if (x == y) return x;
    if (x == 1) return y;
    if (y == 1) return x;
    shape_fail(id, kind, "cannot broadcast " + dims(a) + " with " + dims(b));
  };
  return {pick(a.rows(), b.rows()), pick(a.cols(), b.cols())};
}

template <typename F>
void broadcast_apply(const Tensor& a, const Tensor& b, Tensor& out, F f) {
  const std::size_t R = out.rows(), C = out.cols();
  const std::size_t ar = a.rows(), ac = a.cols(), br = b.rows(),
                    bc = b.cols();
  const double* pa = a.data().data();
  const double* pb = b.data().data();
  double* po = out.data().data();
  if (ar == R && ac == C && br == R && bc == C) {
    for (std::size_t i = 0; i < R * C; ++i) po[i] = f(pa[i], pb[i]);
    return;
  }
  for (std::size_t r = 0; r < R; ++r) {
    const double* rowa = pa + (ar == 1 ? 0 : r) * ac;
    const double* rowb = pb + (br == 1 ? 0 : r) * bc;
    double* rowo = po + r * C;
    for (std::size_t c = 0; c < C; ++c) {
      rowo[c] = f(rowa[ac == 1 ? 0 : c], rowb[bc == 1 ? 0 : c]);
    }
  }
}

// Sums `grad` (R x C) down to the shape of `target` and accumulates.
void reduce_into(const Tensor& grad, Tensor& target) {
  const std::size_t R = grad.rows(), C = grad.cols();
  const std::size_t tr = target.rows(), tc = target.cols();
  const double* g = grad.data().data();
  double* t = target.data().data();
  if (tr == R && tc == C) {
    for (std::size_t i = 0; i < R * C; ++i) t[i] += g[i];
    return;
  }
  for (std::size_t r = 0; r < R; ++r) {
    for (std::size_t c = 0; c < C; ++c) {
      t[(tr == 1 ? 0 : r) * tc + (tc == 1 ? 0 : c)] += g[r * C + c];
    }
  }
}

void check_offsets(const std::vector<std::size_t>& offsets, std::size_t rows,
                   NodeId id, OpKind kind) {
  if (offsets.size() < 2 || offsets.front() != 0 || offsets.back() != rows) {
    shape_fail(id, kind, "segment offsets must span [0, " +
                             std::to_string(rows) + "]");
  }
  for (std::size_t g = 0; g + 1 < offsets.size(); ++g) {
    if (offsets[g + 1] <= offsets[g]) {
      shape_fail(id, kind, "empty or decreasing segment " + std::to_string(g));
    }
  }
}

double clamp_prob(double p) {
  return std::clamp(p, kProbEpsilon, 1.0 - kProbEpsilon);
}

}  // namespace

namespace internal {

void evaluate(Node& node, const std::vector<Node>& nodes, NodeId id) {
  auto in = [&](std::size_t i) -> const Tensor& {
    return nodes[node.inputs[i]].value;
  };
  switch (node.kind) {
    case OpKind::kLeaf:
      return;
    case OpKind::kMatMul: {
      const Tensor& a = in(0);
      const Tensor& b = in(1);
      if (a.cols() != b.rows()) {
        shape_fail(id, node.kind, dims(a) + " x " + dims(b));
      }
      node.value = Tensor({a.rows(), b.cols()}, 0.0);
      view(node.value).noalias() = view(a) * view(b);
      return;
    }
    case OpKind::kAdd:
    case OpKind::kMul: {
      const Tensor& a = in(0);
      const Tensor& b = in(1);
      const Broadcast s = broadcast_shape(a, b, id, node.kind);
      node.value = Tensor({s.rows, s.cols}, 0.0);
      if (node.kind == OpKind::kAdd) {
        broadcast_apply(a, b, node.value,
                        [](double x, double y) { return x + y; });
      } else {
        broadcast_apply(a, b, node.value,
                        [](double x, double y) { return x * y; });
      }
      return;
    }
    case OpKind::kConcat: {
      const std::size_t axis = node.indices.at(0);
      std::size_t rows = 0, cols = 0;
      for (std::size_t i = 0; i < node.inputs.size(); ++i) {
        const Tensor& t = in(i);
        if (axis == 1) {
          if (i > 0 && t.rows() != rows) {
            shape_fail(id, node.kind, "row count mismatch " + dims(t));
          }
          rows = t.rows();
          cols += t.cols();
        } else {
          if (i > 0 && t.cols() != cols) {
            shape_fail(id, node.kind, "column count mismatch " + dims(t));
          }
          cols = t.cols();
          rows += t.rows();
        }
      }
      node.value = Tensor({rows, cols}, 0.0);
      double* out = node.value.data().data();
      if (axis == 1) {
        std::size_t offset = 0;
        for (std::size_t i = 0; i < node.inputs.size(); ++i) {
          const Tensor& t = in(i);
          for (std::size_t r = 0; r < rows; ++r) {
            std::copy_n(t.data().data() + r * t.cols(), t.cols(),
                        out + r * cols + offset);
          }
          offset += t.cols();
        }
      } else {
        for (std::size_t i = 0; i < node.inputs.size(); ++i) {
          const Tensor& t = in(i);
          out = std::copy_n(t.data().data(), t.size(), out);
        }
      }
      return;
    }
    case OpKind::kSigmoid: {
      const Tensor& x = in(0);
      node.value = Tensor({x.rows(), x.cols()}, 0.0);
      for (std::size_t i = 0; i < x.size(); ++i) {
        const double v = x[i];
        // Split on sign so exp never overflows.
        node.value[i] = v >= 0 ? 1.0 / (1.0 + std::exp(-v))
                               : std::exp(v) / (1.0 + std::exp(v));
      }
      return;
    }
    case OpKind::kTanh: {
      const Tensor& x = in(0);
      node.value = Tensor({x.rows(), x.cols()}, 0.0);
      for (std::size_t i = 0; i < x.size(); ++i) node.value[i] = std::tanh(x[i]);
      return;
    }
    case OpKind::kSoftmax: {
      const Tensor& x = in(0);
      node.value = Tensor({x.rows(), x.cols()}, 0.0);
      const std::size_t R = x.rows(), C = x.cols();
      if (node.indices.empty()) {
        for (std::size_t r = 0; r < R; ++r) {
          const double* xr = x.data().data() + r * C;
          double* yr = node.value.data().data() + r * C;
          const double m = *std::max_element(xr, xr + C);
          double z = 0;
          for (std::size_t c = 0; c < C; ++c) z += (yr[c] = std::exp(xr[c] - m));
          for (std::size_t c = 0; c < C; ++c) yr[c] /= z;
        }
      } else {
        check_offsets(node.indices, R, id, node.kind);
        for (std::size_t g = 0; g + 1 < node.indices.size(); ++g) {
          const std::size_t lo = node.indices[g], hi = node.indices[g + 1];
          for (std::size_t c = 0; c < C; ++c) {
            double m = x.at(lo, c);
            for (std::size_t r = lo + 1; r < hi; ++r) m = std::max(m, x.at(r, c));
            double z = 0;
            for (std::size_t r = lo; r < hi; ++r) {
              z += (node.value.at(r, c) = std::exp(x.at(r, c) - m));
            }
            for (std::size_t r = lo; r < hi; ++r) node.value.at(r, c) /= z;
          }
        }
      }
      return;
    }
    case OpKind::kMaxOverSet:
    case OpKind::kMeanOverSet: {
      const bool is_max = node.kind == OpKind::kMaxOverSet;
      if (node.inputs.size() > 1 || node.indices.empty()) {
        const Tensor& first = in(0);
        for (std::size_t i = 1; i < node.inputs.size(); ++i) {
          if (!in(i).same_shape(first) &&
              !(in(i).rows() == first.rows() && in(i).cols() == first.cols())) {
            shape_fail(id, node.kind, "set members differ: " + dims(first) +
                                          " vs " + dims(in(i)));
          }
        }
        node.value = Tensor({first.rows(), first.cols()}, 0.0);
        if (is_max) node.argmax.assign(first.size(), 0);
        for (std::size_t e = 0; e < first.size(); ++e) {
          double acc = first[e];
          for (std::size_t i = 1; i < node.inputs.size(); ++i) {
            const double v = in(i)[e];
            if (is_max) {
              if (v > acc) {
                acc = v;
                node.argmax[e] = i;
              }
            } else {
              acc += v;
            }
          }
          node.value[e] =
              is_max ? acc : acc / static_cast<double>(node.inputs.size());
        }
      } else {
        const Tensor& x = in(0);
        check_offsets(node.indices, x.rows(), id, node.kind);
        const std::size_t G = node.indices.size() - 1, C = x.cols();
        node.value = Tensor({G, C}, 0.0);
        if (is_max) node.argmax.assign(G * C, 0);
        for (std::size_t g = 0; g < G; ++g) {
          const std::size_t lo = node.indices[g], hi = node.indices[g + 1];
          for (std::size_t c = 0; c < C; ++c) {
            double acc = x.at(lo, c);
            std::size_t best = lo;
            for (std::size_t r = lo + 1; r < hi; ++r) {
              const double v = x.at(r, c);
              if (is_max) {
                if (v > acc) {
                  acc = v;
                  best = r;
                }
              } else {
                acc += v;
              }
            }
            if (is_max) {
              node.value.at(g, c) = acc;
              node.argmax[g * C + c] = best;
            } else {
              node.value.at(g, c) = acc / static_cast<double>(hi - lo);
            }
          }
        }
      }
      return;
    }
    case OpKind::kEmbeddingLookup: {
      const Tensor& table = in(0);
      const std::size_t C = table.cols();
      if (node.indices.empty()) shape_fail(id, node.kind, "no ids");
      node.value = Tensor({node.indices.size(), C}, 0.0);
      for (std::size_t r = 0; r < node.indices.size(); ++r) {
        const std::size_t src = node.indices[r];
        if (src >= table.rows()) {
          shape_fail(id, node.kind, "id " + std::to_string(src) +
                                        " out of range for table " +
                                        dims(table));
        }
        std::copy_n(table.data().data() + src * C, C,
                    node.value.data().data() + r * C);
      }
      return;
    }
    case OpKind::kBceSoft: {
      const Tensor& p = in(0);
      if (!(node.target.rows() == p.rows() && node.target.cols() == p.cols()) ||
          !(node.weight.rows() == p.rows() && node.weight.cols() == p.cols())) {
        shape_fail(id, node.kind, "prediction " + dims(p) + " vs target " +
                                      dims(node.target));
      }
      double total = 0;
      for (std::size_t i = 0; i < p.size(); ++i) {
        const double w = node.weight[i];
        if (w == 0.0) continue;
        const double t = node.target[i];
        const double q = clamp_prob(p[i]);
        total += w * (-t * std::log(q) - (1.0 - t) * std::log(1.0 - q));
      }
      node.value = Tensor::scalar(total);
      return;
    }
  }
}

void backprop(const Node& node, const Tensor& grad,
              const std::vector<Node>& nodes, Gradients& grads) {
  auto in = [&](std::size_t i) -> const Tensor& {
    return nodes[node.inputs[i]].value;
  };
  auto want = [&](std::size_t i) { return wants_grad(nodes, node.inputs[i]); };
  auto slot = [&](std::size_t i) -> Tensor& {
    return slot_for(grads, node.inputs[i], in(i));
  };
  switch (node.kind) {
    case OpKind::kLeaf:
      return;
    case OpKind::kMatMul: {
      if (want(0)) view(slot(0)).noalias() += view(grad) * view(in(1)).transpose();
      if (want(1)) view(slot(1)).noalias() += view(in(0)).transpose() * view(grad);
      return;
    }
    case OpKind::kAdd: {
      if (want(0)) reduce_into(grad, slot(0));
      if (want(1)) reduce_into(grad, slot(1));
      return;
    }
    case OpKind::kMul: {
      for (std::size_t side = 0; side < 2; ++side) {
        if (!want(side)) continue;
        Tensor prod({grad.rows(), grad.cols()}, 0.0);
        broadcast_apply(grad, in(1 - side), prod,
                        [](double g, double o) { return g * o; });
        reduce_into(prod, slot(side));
      }
      return;
    }
    case OpKind::kConcat: {
      const std::size_t axis = node.indices.at(0);
      const std::size_t C = grad.cols();
      std::size_t offset = 0;
      for (std::size_t i = 0; i < node.inputs.size(); ++i) {
        const Tensor& t = in(i);
        if (want(i)) {
          Tensor& s = slot(i);
          if (axis == 1) {
            for (std::size_t r = 0; r < t.rows(); ++r) {
              for (std::size_t c = 0; c < t.cols(); ++c) {
                s.at(r, c) += grad[r * C + offset + c];
              }
            }
          } else {
            for (std::size_t e = 0; e < t.size(); ++e) {
              s[e] += grad[offset * C + e];
            }
          }
        }
        offset += axis == 1 ? t.cols() : t.rows();
      }
      return;
    }
    case OpKind::kSigmoid: {
      if (!want(0)) return;
      Tensor& s = slot(0);
      for (std::size_t i = 0; i < grad.size(); ++i) {
        const double y = node.value[i];
        s[i] += grad[i] * y * (1.0 - y);
      }
      return;
    }
    case OpKind::kTanh: {
      if (!want(0)) return;
      Tensor& s = slot(0);
      for (std::size_t i = 0; i < grad.size(); ++i) {
        const double y = node.value[i];
        s[i] += grad[i] * (1.0 - y * y);
      }
      return;
    }
    case OpKind::kSoftmax: {
      if (!want(0)) return;
      Tensor& s = slot(0);
      const Tensor& y = node.value;
      const std::size_t R = y.rows(), C = y.cols();
      if (node.indices.empty()) {
        for (std::size_t r = 0; r < R; ++r) {
          double dot = 0;
          for (std::size_t c = 0; c < C; ++c) dot += grad.at(r, c) * y.at(r, c);
          for (std::size_t c = 0; c < C; ++c) {
            s.at(r, c) += y.at(r, c) * (grad.at(r, c) - dot);
          }
        }
      } else {
        for (std::size_t g = 0; g + 1 < node.indices.size(); ++g) {
          const std::size_t lo = node.indices[g], hi = node.indices[g + 1];
          for (std::size_t c = 0; c < C; ++c) {
            double dot = 0;
            for (std::size_t r = lo; r < hi; ++r) dot += grad.at(r, c) * y.at(r, c);
            for (std::size_t r = lo; r < hi; ++r) {
              s.at(r, c) += y.at(r, c) * (grad.at(r, c) - dot);
            }
          }
        }
      }
      return;
    }
    case OpKind::kMaxOverSet: {
      if (node.inputs.size() > 1 || node.indices.empty()) {
        for (std::size_t e = 0; e < grad.size(); ++e) {
          const std::size_t winner = node.argmax[e];
          if (want(winner)) slot(winner)[e] += grad[e];
        }
      } else if (want(0)) {
        Tensor& s = slot(0);
        const std::size_t C = grad.cols();
        for (std::size_t e = 0; e < grad.size(); ++e) {
          s.at(node.argmax[e], e % C) += grad[e];
        }
      }
      return;
    }
    case OpKind::kMeanOverSet: {
      if (node.inputs.size() > 1 || node.indices.empty()) {
        const double inv = 1.0 / static_cast<double>(node.inputs.size());
        for (std::size_t i = 0; i < node.inputs.size(); ++i) {
          if (!want(i)) continue;
          Tensor& s = slot(i);
          for (std::size_t e = 0; e < grad.size(); ++e) s[e] += grad[e] * inv;
        }
      } else if (want(0)) {
        Tensor& s = slot(0);
        const std::size_t C = grad.cols();
        for (std::size_t g = 0; g + 1 < node.indices.size(); ++g) {
          const std::size_t lo = node.indices[g], hi = node.indices[g + 1];
          const double inv = 1.0 / static_cast<double>(hi - lo);
          for (std::size_t r = lo; r < hi; ++r) {
            for (std::size_t c = 0; c < C; ++c) s.at(r, c) += grad.at(g, c) * inv;
          }
        }
      }
      return;
    }
    case OpKind::kEmbeddingLookup: {
      if (!want(0)) return;
      Tensor& s = slot(0);
      const std::size_t C = grad.cols();
      for (std::size_t r = 0; r < node.indices.size(); ++r) {
        double* dst = s.data().data() + node.indices[r] * C;
        const double* src = grad.data().data() + r * C;
        for (std::size_t c = 0; c < C; ++c) dst[c] += src[c];
      }
      return;
    }
    case OpKind::kBceSoft: {
      if (!want(0)) return;
      Tensor& s = slot(0);
      const Tensor& p = in(0);
      const double g = grad.item();
      for (std::size_t i = 0; i < p.size(); ++i) {
        const double w = node.weight[i];
        if (w == 0.0) continue;
        const double raw = p[i];
        // The clamp is flat outside [eps, 1 - eps].
        if (raw < kProbEpsilon || raw > 1.0 - kProbEpsilon) continue;
        const double t = node.target[i];
        s[i] += g * w * (-t / raw + (1.0 - t) / (1.0 - raw));
      }
      return;
    }
  }
}

}  // namespace internal

Var leaf(Tape& tape, std::string name, Tensor value) {
  return {&tape, tape.leaf(std::move(name), std::move(value))};
}

Var constant(Tape& tape, Tensor value) {
  return {&tape, tape.constant(std::move(value))};
}

namespace {

Tape* same_tape(std::span<const Var> vars) {
  if (vars.empty()) throw InvalidArgument("op needs at least one input");
  Tape* tape = vars.front().tape;
  for (const Var& v : vars) {
    if (v.tape != tape) throw InvalidArgument("inputs live on different tapes");
  }
  return tape;
}

Var record(OpKind kind, std::initializer_list<Var> inputs,
           std::vector<std::size_t> indices = {}) {
  std::vector<Var> vars(inputs);
  Tape* tape = same_tape(vars);
  Node node;
  node.kind = kind;
  for (const Var& v : vars) node.inputs.push_back(v.id);
  node.indices = std::move(indices);
  return {tape, tape->push(std::move(node))};
}

Var record_set(OpKind kind, std::span<const Var> inputs,
               std::vector<std::size_t> indices = {}) {
  Tape* tape = same_tape(inputs);
  Node node;
  node.kind = kind;
  for (const Var& v : inputs) node.inputs.push_back(v.id);
  node.indices = std::move(indices);
  return {tape, tape->push(std::move(node))};
}

}  // namespace

Var matmul(Var a, Var b) { return record(OpKind::kMatMul, {a, b}); }
Var add(Var a, Var b) { return record(OpKind::kAdd, {a, b}); }
Var mul(Var a, Var b) { return record(OpKind::kMul, {a, b}); }

Var concat(std::span<const Var> parts, std::size_t axis) {
  if (axis > 1) throw InvalidArgument("concat axis must be 0 or 1");
  return record_set(OpKind::kConcat, parts, {axis});
}

Var sigmoid(Var x) { return record(OpKind::kSigmoid, {x}); }
Var tanh(Var x) { return record(OpKind::kTanh, {x}); }
Var softmax_rows(Var x) { return record(OpKind::kSoftmax, {x}); }

Var softmax_segments(Var x, std::vector<std::size_t> offsets) {
  return record(OpKind::kSoftmax, {x}, std::move(offsets));
}

Var max_over_set(std::span<const Var> members) {
  return record_set(OpKind::kMaxOverSet, members);
}

Var mean_over_set(std::span<const Var> members) {
  return record_set(OpKind::kMeanOverSet, members);
}

Var max_over_segments(Var x, std::vector<std::size_t> offsets) {
  return record(OpKind::kMaxOverSet, {x}, std::move(offsets));
}

Var mean_over_segments(Var x, std::vector<std::size_t> offsets) {
  return record(OpKind::kMeanOverSet, {x}, std::move(offsets));
}

Var embedding_lookup(Var table, std::vector<std::size_t> ids) {
  return record(OpKind::kEmbeddingLookup, {table}, std::move(ids));
}

Var bce_soft(Var prediction, Tensor target, Tensor weight) {
  for (std::size_t i = 0; i < target.size(); ++i) {
    if (!(target[i] >= 0.0 && target[i] <= 1.0)) {
      throw InvalidArgument("bce_soft target " + std::to_string(target[i]) +
                            " outside [0, 1]");
    }
  }
  Node node;
  node.kind = OpKind::kBceSoft;
  node.inputs = {prediction.id};
  node.target = std::move(target);
  node.weight = std::move(weight);
  return {prediction.tape, prediction.tape->push(std::move(node))};
}

Var bce_soft(Var prediction, Tensor target) {
  Tensor weight({target.rows(), target.cols()}, 1.0);
  return bce_soft(prediction, std::move(target), std::move(weight));
}

double bce_soft_value(double prediction, double target) {
  if (!(target >= 0.0 && target <= 1.0)) {
    throw InvalidArgument("bce_soft target " + std::to_string(target) +
                          " outside [0, 1]");
  }
  const double q = clamp_prob(prediction);
  return -target * std::log(q) - (1.0 - target) * std::log(1.0 - q);
}

Var scale(Var x, double factor) {
  return mul(x, constant(*x.tape, Tensor::scalar(factor)));
}

Var add_scalar(Var x, double offset) {
  return add(x, constant(*x.tape, Tensor::scalar(offset)));
}

Var sub(Var a, Var b) { return add(a, scale(b, -1.0)); }

std::vector<std::size_t> uniform_offsets(std::size_t groups, std::size_t n) {
  std::vector<std::size_t> offsets(groups + 1);
  for (std::size_t g = 0; g <= groups; ++g) offsets[g] = g * n;
  return offsets;
}

}  // namespace compex::numcore
