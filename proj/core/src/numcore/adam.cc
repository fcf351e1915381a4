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

#include "compex/numcore/adam.h"

#include <cmath>

#include "compex/error.h"

namespace compex::numcore {

void Adam::step(ParamStore& params, const std::map<std::string, Tensor>& grads,
                const std::function<double(const std::string&)>& lr_for) {
  ++steps_;
  const double t = static_cast<double>(steps_);
  const double bias1 = 1.0 - std::pow(config_.beta1, t);
  const double bias2 = 1.0 - std::pow(config_.beta2, t);
  for (const auto& [name, grad] : grads) {
    Tensor& value = params.mutable_get(name);
    if (value.size() != grad.size()) {
      throw ShapeError("gradient for '" + name + "' has the wrong size");
    }
    auto [it, fresh] = moments_.try_emplace(name);
    if (fresh) {
      it->second.m = Tensor(value.shape(), 0.0);
      it->second.v = Tensor(value.shape(), 0.0);
    }
    Tensor& m = it->second.m;
    Tensor& v = it->second.v;
    const double lr = lr_for(name);
    for (std::size_t i = 0; i < value.size(); ++i) {
      const double g = grad[i];
      m[i] = config_.beta1 * m[i] + (1.0 - config_.beta1) * g;
      v[i] = config_.beta2 * v[i] + (1.0 - config_.beta2) * g * g;
      const double m_hat = m[i] / bias1;
      const double v_hat = v[i] / bias2;
      value[i] -= lr * m_hat / (std::sqrt(v_hat) + config_.epsilon);
    }
  }
}

void Adam::step(ParamStore& params, const std::map<std::string, Tensor>& grads,
                double lr) {
  step(params, grads, [lr](const std::string&) { return lr; });
}

double step_decay(double base_lr, int epoch, int every, double decay) {
  return base_lr * std::pow(decay, epoch / every);
}

}  // namespace compex::numcore
