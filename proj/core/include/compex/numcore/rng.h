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

#ifndef COMPEX_NUMCORE_RNG_H_
#define COMPEX_NUMCORE_RNG_H_

#include <cstdint>
#include <random>
#include <span>
#include <string>
#include <string_view>

namespace compex::numcore {

/// Seeded random source. Only the raw mt19937_64 stream is used; the
/// conversions to doubles, integers and normals are done here so results do
/// not depend on the standard library's distribution implementations.
class Rng {
 public:
  explicit Rng(std::uint64_t seed = 0) : engine_(seed) {}

  /// Independent stream for a named purpose, derived from a root seed.
  static Rng derive(std::uint64_t seed, std::string_view stream);

  std::uint64_t next_u64() { return engine_(); }
  /// Uniform in [0, 1).
  double uniform();
  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }
  /// Uniform in [0, n).
  std::size_t uniform_index(std::size_t n);
  double normal();
  /// Draws an index with probability proportional to `weights` (all >= 0,
  /// positive sum).
  std::size_t categorical(std::span<const double> weights);

  std::string state() const;
  void set_state(const std::string& state);

 private:
  std::mt19937_64 engine_;
};

}  // namespace compex::numcore

#endif  // COMPEX_NUMCORE_RNG_H_
