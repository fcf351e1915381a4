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

#include <gtest/gtest.h>
#include <mpfr.h>

#include <cmath>
#include <filesystem>

#include "compex/error.h"
#include "compex/numcore/adam.h"
#include "compex/numcore/checkpoint.h"
#include "compex/numcore/grad_check.h"
#include "compex/numcore/layers.h"
#include "compex/numcore/ops.h"
#include "compex/numcore/param_store.h"
#include "compex/numcore/rng.h"
#include "test_util.h"

namespace compex::numcore {
namespace {

// -t log p - (1 - t) log(1 - p) in 256-bit arithmetic.
double mpfr_bce(double p, double t) {
  mpfr_t mp, mt, lp, l1p, one_minus_p, one_minus_t, acc;
  mpfr_inits2(256, mp, mt, lp, l1p, one_minus_p, one_minus_t, acc, static_cast<mpfr_ptr>(nullptr));
  mpfr_set_d(mp, p, MPFR_RNDN);
  mpfr_set_d(mt, t, MPFR_RNDN);
  mpfr_log(lp, mp, MPFR_RNDN);
  mpfr_ui_sub(one_minus_p, 1, mp, MPFR_RNDN);
  mpfr_log(l1p, one_minus_p, MPFR_RNDN);
  mpfr_ui_sub(one_minus_t, 1, mt, MPFR_RNDN);
  mpfr_mul(acc, mt, lp, MPFR_RNDN);
  mpfr_mul(l1p, one_minus_t, l1p, MPFR_RNDN);
  mpfr_add(acc, acc, l1p, MPFR_RNDN);
  mpfr_neg(acc, acc, MPFR_RNDN);
  const double out = mpfr_get_d(acc, MPFR_RNDN);
  mpfr_clears(mp, mt, lp, l1p, one_minus_p, one_minus_t, acc, static_cast<mpfr_ptr>(nullptr));
  return out;
}

TEST(Tape, SquareHasDerivativeSix) {
  Tape tape;
  Var x = leaf(tape, "x", Tensor::scalar(3.0));
  Var y = mul(x, x);
  const auto g = tape.backward_leaves(y.id);
  EXPECT_DOUBLE_EQ(g.at("x").item(), 6.0);
}

TEST(Tape, ConstantHasZeroGradient) {
  Tape tape;
  Var x = leaf(tape, "x", Tensor::matrix(1, 2, {1.0, 2.0}));
  Var c = constant(tape, Tensor::scalar(4.0));
  const auto g = tape.backward_leaves(add_scalar(c, 1.0).id);
  ASSERT_TRUE(g.count("x"));
  EXPECT_EQ(g.at("x")[0], 0.0);
  EXPECT_EQ(g.at("x")[1], 0.0);
  (void)x;
}

TEST(Tape, NonScalarBackwardIsRejected) {
  Tape tape;
  Var x = leaf(tape, "x", Tensor::matrix(1, 2, {1.0, 2.0}));
  EXPECT_THROW(tape.backward(x.id), Error);
}

TEST(Ops, ShapeMismatchIsRejected) {
  Tape tape;
  Var a = constant(tape, Tensor::zeros(2, 3));
  Var b = constant(tape, Tensor::zeros(2, 3));
  EXPECT_THROW(matmul(a, b), ShapeError);
}

TEST(Ops, SoftmaxSegmentsSumToOne) {
  Rng rng(3);
  Tape tape;
  Var x = constant(tape, test::random_matrix(rng, 7, 2));
  const Tensor s = softmax_segments(x, {0, 3, 7}).value();
  for (std::size_t c = 0; c < 2; ++c) {
    EXPECT_NEAR(s.at(0, c) + s.at(1, c) + s.at(2, c), 1.0, 1e-15);
    EXPECT_NEAR(s.at(3, c) + s.at(4, c) + s.at(5, c) + s.at(6, c), 1.0, 1e-15);
  }
}

TEST(Ops, BceMatchesHighPrecisionOracle) {
  Rng rng(11);
  for (int i = 0; i < 500; ++i) {
    const double p = rng.uniform(1e-6, 1.0 - 1e-6);
    const double t = i % 5 == 0 ? static_cast<double>(i % 2) : rng.uniform();
    const double want = mpfr_bce(p, t);
    EXPECT_NEAR(bce_soft_value(p, t), want, 1e-14 * std::max(1.0, std::abs(want)));
    Tape tape;
    Var v = constant(tape, Tensor::scalar(p));
    EXPECT_NEAR(bce_soft(v, Tensor::scalar(t)).value().item(), want,
                1e-14 * std::max(1.0, std::abs(want)));
  }
}

TEST(Ops, BceClampsExtremes) {
  const double at_zero = bce_soft_value(0.0, 1.0);
  EXPECT_NEAR(at_zero, mpfr_bce(kProbEpsilon, 1.0), 1e-12);
  EXPECT_TRUE(std::isfinite(bce_soft_value(1.0, 0.0)));
  EXPECT_GE(bce_soft_value(0.3, 1.0), 0.0);
  EXPECT_THROW(bce_soft_value(0.5, 1.5), InvalidArgument);
}

TEST(GradCheck, LinearFunctionIsExact) {
  ParamStore p;
  Rng rng(2);
  p.add("w", test::random_matrix(rng, 3, 1));
  const Tensor x = test::random_matrix(rng, 1, 3);
  const auto r = grad_check(
      [&](Tape& tape, const ParamBinding& b) { return matmul(constant(tape, x), b["w"]); }, p);
  EXPECT_LE(r.max_rel_error, 1e-8);
  EXPECT_EQ(r.coordinates, 3u);
}

TEST(GradCheck, ZeroParameterFunctionPassesVacuously) {
  ParamStore p;
  const auto r = grad_check(
      [](Tape& tape, const ParamBinding&) { return constant(tape, Tensor::scalar(2.0)); }, p);
  EXPECT_EQ(r.max_rel_error, 0.0);
  EXPECT_EQ(r.coordinates, 0u);
}

TEST(GradCheck, BceOfSigmoidHead) {
  Rng rng(5);
  ParamStore p;
  add_linear(p, "head", 4, 3, rng, 0.5);
  const Tensor x = test::random_matrix(rng, 5, 4);
  const Tensor t = test::random_matrix(rng, 5, 3, 0.0, 1.0);
  const auto r = grad_check(
      [&](Tape& tape, const ParamBinding& b) {
        return bce_soft(sigmoid(Linear::bind(b, "head")(constant(tape, x))), t);
      },
      p);
  EXPECT_LE(r.max_rel_error, 1e-4);
}

// matmul -> tanh -> matmul -> relu -> matmul -> sigmoid -> bce.
TEST(GradCheck, ThreeLayerComposite) {
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    Rng rng = Rng::derive(seed, "composite");
    ParamStore p;
    add_linear(p, "l1", 4, 5, rng, 0.5);
    add_linear(p, "l2", 5, 5, rng, 0.5);
    add_linear(p, "l3", 5, 2, rng, 0.5);
    const Tensor x = test::random_matrix(rng, 3, 4);
    const Tensor t = test::random_matrix(rng, 3, 2, 0.0, 1.0);
    auto fn = [&](Tape& tape, const ParamBinding& b) {
      Var h = tanh(Linear::bind(b, "l1")(constant(tape, x)));
      h = relu(Linear::bind(b, "l2")(h));
      return bce_soft(sigmoid(Linear::bind(b, "l3")(h)), t);
    };
    EXPECT_LE(grad_check(fn, p).max_rel_error, 1e-4) << "seed " << seed;
    EXPECT_LE(grad_check(fn, p, 1e-3, Stencil::kFivePoint).max_rel_error, 1e-4) << "seed " << seed;
  }
}

TEST(GradCheck, KinkCrossingsAreSkippedNotHidden) {
  // relu(w) at w = 1e-4: the five-point window of 1e-3 crosses zero.
  ParamStore p;
  p.add("w", Tensor::scalar(1e-4));
  const auto r = grad_check(
      [](Tape&, const ParamBinding& b) { return relu(b["w"]); }, p, 1e-3, Stencil::kFivePoint);
  EXPECT_EQ(r.kinked, 1u);
  EXPECT_EQ(r.coordinates, 0u);
  const auto smooth = grad_check(
      [](Tape&, const ParamBinding& b) { return relu(b["w"]); }, p, 1e-5);
  EXPECT_EQ(smooth.kinked, 0u);
  EXPECT_LE(smooth.max_rel_error, 1e-8);
}

TEST(ParamStore, ImportPrefixRenames) {
  Rng rng(1);
  ParamStore a;
  a.add_uniform("encoder.w", {2, 2}, 0.1, rng);
  a.add_uniform("predictor.w", {2, 1}, 0.1, rng);
  ParamStore b;
  b.import_prefix(a, "encoder.", "pretrained.encoder.");
  EXPECT_TRUE(b.contains("pretrained.encoder.w"));
  EXPECT_FALSE(b.contains("predictor.w"));
  EXPECT_TRUE(b.get("pretrained.encoder.w").bit_equal(a.get("encoder.w")));
  EXPECT_EQ(fingerprint(a, "encoder."), fingerprint(b, "pretrained.encoder."));
}

TEST(Checkpoint, RoundTripIsBitExact) {
  Rng rng(9);
  Checkpoint c;
  c.params.add_uniform("a.w", {3, 4}, 1.0, rng);
  c.params.add("a.b", Tensor::matrix(1, 2, {1e-310, -0.0}));
  c.metadata = {{"kind", "test"}, {"x", 1.5}};
  c.rng_state = rng.state();
  const auto dir = test::scratch_dir("ckpt");
  save_checkpoint(dir / "c.ckpt", c);
  const Checkpoint back = load_checkpoint(dir / "c.ckpt");
  EXPECT_TRUE(back.params.bit_equal(c.params));
  EXPECT_EQ(back.metadata, c.metadata);
  EXPECT_EQ(back.rng_state, c.rng_state);
  EXPECT_EQ(back.fingerprint, fingerprint(c.params));
}

TEST(Checkpoint, CorruptPayloadIsRejected) {
  Rng rng(9);
  Checkpoint c;
  c.params.add_uniform("w", {2, 2}, 1.0, rng);
  const auto dir = test::scratch_dir("ckpt_corrupt");
  save_checkpoint(dir / "c.ckpt", c);
  std::string bytes = test::read_file(dir / "c.ckpt");
  bytes.back() = static_cast<char>(bytes.back() ^ 0x01);
  test::write_file(dir / "c.ckpt", bytes);
  EXPECT_THROW(load_checkpoint(dir / "c.ckpt"), SchemaError);
  EXPECT_THROW(load_checkpoint(dir / "absent.ckpt"), IoError);
}

TEST(Rng, DerivedStreamsAreReproducibleAndDistinct) {
  Rng a = Rng::derive(1, "x"), b = Rng::derive(1, "x"), c = Rng::derive(1, "y");
  const auto va = a.next_u64();
  EXPECT_EQ(va, b.next_u64());
  EXPECT_NE(va, c.next_u64());
  Rng d(4);
  d.next_u64();
  const std::string s = d.state();
  const auto next = d.next_u64();
  Rng e;
  e.set_state(s);
  EXPECT_EQ(e.next_u64(), next);
}

TEST(Adam, StepDecaySchedule) {
  EXPECT_DOUBLE_EQ(step_decay(1.0, 0), 1.0);
  EXPECT_DOUBLE_EQ(step_decay(1.0, 4), 1.0);
  EXPECT_DOUBLE_EQ(step_decay(1.0, 5), 0.8);
  EXPECT_NEAR(step_decay(1.0, 12), 0.64, 1e-15);
}

TEST(Adam, MinimizesQuadratic) {
  ParamStore p;
  p.add("x", Tensor::matrix(1, 2, {3.0, -2.0}));
  Adam adam;
  for (int i = 0; i < 2000; ++i) {
    Tape tape;
    ParamBinding b(tape, p);
    Var x = b["x"];
    Var loss = matmul(mul(x, x), constant(tape, Tensor::ones(2, 1)));
    adam.step(p, b.gradients(loss), 0.05);
  }
  EXPECT_NEAR(p.get("x")[0], 0.0, 1e-3);
  EXPECT_NEAR(p.get("x")[1], 0.0, 1e-3);
}

}  // namespace
}  // namespace compex::numcore
