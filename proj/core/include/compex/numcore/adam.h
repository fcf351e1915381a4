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

#ifndef COMPEX_NUMCORE_ADAM_H_
#define COMPEX_NUMCORE_ADAM_H_

#include <functional>
#include <map>
#include <string>

#include "compex/numcore/param_store.h"

namespace compex::numcore {

struct AdamConfig {
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;
};

/// Adam with per-parameter learning rates. Moment estimates are created
/// lazily for the entries that receive gradients.
class Adam {
 public:
  explicit Adam(AdamConfig config = {}) : config_(config) {}

  /// One update. `lr_for(name)` gives the step size of each entry.
  void step(ParamStore& params, const std::map<std::string, Tensor>& grads,
            const std::function<double(const std::string&)>& lr_for);
  void step(ParamStore& params, const std::map<std::string, Tensor>& grads,
            double lr);

  long steps() const { return steps_; }

 private:
  struct Moments {
    Tensor m;
    Tensor v;
  };

  AdamConfig config_;
  std::map<std::string, Moments> moments_;
  long steps_ = 0;
};

/// lr * decay^(floor(epoch / every)), epochs counted from 0.
double step_decay(double base_lr, int epoch, int every = 5,
                  double decay = 0.8);

}  // namespace compex::numcore

#endif  // COMPEX_NUMCORE_ADAM_H_
