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

#include <benchmark/benchmark.h>

#include "compex/encoders/encoders.h"
#include "compex/eval/metrics.h"
#include "compex/numcore/ops.h"
#include "compex/numcore/rng.h"
#include "compex/numcore/tape.h"
#include "compex/retrieval/index.h"

namespace compex {
namespace {

using numcore::Rng;
using numcore::Tensor;

Tensor random_matrix(Rng& rng, std::size_t r, std::size_t c) {
  std::vector<double> d(r * c);
  for (double& x : d) x = rng.uniform() - 0.5;
  return Tensor::matrix(r, c, std::move(d));
}

// Forward and backward through sigmoid(A B) with a soft BCE on top.
void BM_MatmulBackward(benchmark::State& state) {
  const auto n = static_cast<std::size_t>(state.range(0));
  Rng rng(1);
  const Tensor a = random_matrix(rng, n, n), b = random_matrix(rng, n, n);
  const Tensor target = Tensor::zeros(n, n);
  for (auto _ : state) {
    numcore::Tape tape;
    const auto x = numcore::leaf(tape, "a", a);
    const auto y = numcore::leaf(tape, "b", b);
    const auto loss = numcore::bce_soft(numcore::sigmoid(numcore::matmul(x, y)), target);
    benchmark::DoNotOptimize(tape.backward(loss.id));
  }
}
BENCHMARK(BM_MatmulBackward)->RangeMultiplier(2)->Range(16, 128);

void BM_EncodeQuestion(benchmark::State& state) {
  Rng rng(2);
  numcore::ParamStore params;
  encoders::EncoderDims dims;
  dims.vocab = 200;
  dims.object_dim = 32;
  encoders::add_encoder(params, dims, rng);
  numcore::TokenSeq q;
  for (int i = 0; i < state.range(0); ++i) q.push_back(4 + static_cast<int>(rng.uniform_index(190)));
  for (auto _ : state) benchmark::DoNotOptimize(encoders::encode_question(q, params));
}
BENCHMARK(BM_EncodeQuestion)->Arg(6)->Arg(12)->Arg(24);

// Filtered exact k-NN over a synthetic index of the shipped size.
void BM_Retrieve(benchmark::State& state) {
  const auto n = static_cast<std::size_t>(state.range(0));
  const std::size_t dim = 64;
  Rng rng(3);
  std::vector<retrieval::IndexRow> rows(n);
  for (std::size_t i = 0; i < n; ++i) {
    rows[i].example_id = "ex-" + std::to_string(i);
    rows[i].answer_scores[static_cast<int>(rng.uniform_index(32))] = 1.0;
    rows[i].answer_scores[static_cast<int>(rng.uniform_index(32))] = 2.0 / 3.0;
    rows[i].explanation_tokens = {4, 5, 6};
  }
  const retrieval::ExplanationIndex index("bench", random_matrix(rng, n, dim), std::move(rows));
  const Tensor q = random_matrix(rng, 1, dim);
  int answer = 0;
  for (auto _ : state) {
    benchmark::DoNotOptimize(retrieval::retrieve(index, "bench", q.data(), answer, 8));
    answer = (answer + 1) % 32;
  }
}
BENCHMARK(BM_Retrieve)->Arg(1000)->Arg(5000);

eval::Words sentence(Rng& rng, std::size_t len) {
  eval::Words w(len);
  for (auto& s : w) s = "w" + std::to_string(rng.uniform_index(40));
  return w;
}

void BM_Bleu4(benchmark::State& state) {
  Rng rng(4);
  const auto c = sentence(rng, 14);
  const std::vector<eval::Words> refs = {sentence(rng, 12), sentence(rng, 15), sentence(rng, 13)};
  for (auto _ : state) benchmark::DoNotOptimize(eval::bleu4(c, refs));
}
BENCHMARK(BM_Bleu4);

void BM_RougeL(benchmark::State& state) {
  Rng rng(5);
  const auto len = static_cast<std::size_t>(state.range(0));
  const auto a = sentence(rng, len), b = sentence(rng, len);
  for (auto _ : state) benchmark::DoNotOptimize(eval::rouge_l(a, b));
}
BENCHMARK(BM_RougeL)->Arg(12)->Arg(48);

}  // namespace
}  // namespace compex

BENCHMARK_MAIN();
