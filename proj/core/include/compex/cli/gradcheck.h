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

#ifndef COMPEX_CLI_GRADCHECK_H_
#define COMPEX_CLI_GRADCHECK_H_

#include <cstdint>
#include <nlohmann/json.hpp>
#include <string>
#include <vector>

namespace compex::cli {

inline constexpr double kGradCheckTolerance = 1e-4;

struct OpGradCheck {
  std::string op;
  int points = 0;
  std::size_t coordinates = 0;  // summed over points
  std::size_t kinked = 0;       // skipped coordinates, summed over points
  double max_rel_error = 0.0;  // five-point stencil, step 1e-3
  // Plain central differences at step 1e-5, reported for reference only: its
  // ~1e-11 noise floor exceeds the tolerance on gradients below ~1e-7.
  double central_max_rel_error = 0.0;
  std::string worst_param;
  double seconds = 0.0;
  bool passed() const { return max_rel_error <= kGradCheckTolerance; }
};

/// Central-difference check of every parameterized operation (question
/// encoder, visual attention, predictor, verifier, generator) at `points`
/// random parameter/input draws each, on small shapes. Coordinates whose
/// stencil crosses a relu or max switch are skipped and counted.
std::vector<OpGradCheck> gradient_suite(std::uint64_t seed, int points);

/// Fixed-width table, one row per operation.
std::string format_gradcheck_table(const std::vector<OpGradCheck>& rows);
nlohmann::ordered_json gradcheck_to_json(const std::vector<OpGradCheck>& rows);

}  // namespace compex::cli

#endif  // COMPEX_CLI_GRADCHECK_H_
