// Copyright 2026 The kpe Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include <cmath>
#include <functional>
#include <numeric>
#include <random>

#include "doctest.h"
#include "kpe/autodiff.hpp"
#include "kpe/error.hpp"
#include "kpe/gradcheck.hpp"
#include "kpe/simd.hpp"

using namespace kpe;

namespace {

Tensor random_tensor(std::vector<std::size_t> shape, std::mt19937_64& rng, double lo = -1.0, double hi = 1.0) {
  Tensor t(std::move(shape));
  std::uniform_real_distribution<double> u(lo, hi);
  for (double& v : t.values()) v = u(rng);
  return t;
}

// Reduces any output to a scalar through a fixed random target, so the
// gradient reaching the op under test is dense and non-uniform.
Var reduce(Var out, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::vector<double> target(out.value().size());
  std::uniform_real_distribution<double> u(0.1, 1.0);
  for (double& t : target) t = u(rng);
  const double total = std::accumulate(target.begin(), target.end(), 0.0);
  for (double& t : target) t /= total;
  return ops::softmax_cross_entropy(out, target);
}

double check(ParameterRegistry& reg, const std::function<Var(Tape&)>& build) {
  auto rep = finite_difference_check([&](Tape& tape) { return reduce(build(tape), 99); }, reg);
  return rep.max_rel_error;
}

}  // namespace

TEST_CASE("op gradients match central differences") {
  std::mt19937_64 rng(7);
  ParameterRegistry reg;
  reg.add("a", random_tensor({4, 3}, rng));
  reg.add("b", random_tensor({3, 5}, rng));
  reg.add("c", random_tensor({4, 3}, rng));
  reg.add("bias", random_tensor({3}, rng));
  reg.add("d", random_tensor({5, 3}, rng));
  auto P = [&](Tape& t, const char* n) { return t.parameter(reg.at(n)); };

  SUBCASE("matmul") { CHECK(check(reg, [&](Tape& t) { return ops::matmul(P(t, "a"), P(t, "b")); }) < 1e-6); }
  SUBCASE("matmul_nt") {
    CHECK(check(reg, [&](Tape& t) { return ops::matmul_nt(P(t, "a"), P(t, "d")); }) < 1e-6);
  }
  SUBCASE("add / add_row / scale") {
    CHECK(check(reg, [&](Tape& t) {
            return ops::scale(ops::add_row(ops::add(P(t, "a"), P(t, "c")), P(t, "bias")), -1.7);
          }) < 1e-6);
  }
  SUBCASE("relu away from the kink") {
    CHECK(check(reg, [&](Tape& t) { return ops::relu(ops::matmul(P(t, "a"), P(t, "b"))); }) < 1e-6);
  }
  SUBCASE("concat and slice") {
    CHECK(check(reg, [&](Tape& t) {
            Var rows = ops::concat_rows({P(t, "a"), P(t, "c")});
            Var cols = ops::concat_cols({rows, ops::slice_cols(rows, 1, 2)});
            return cols;
          }) < 1e-6);
  }
  SUBCASE("layer norm") {
    reg.add("gain", random_tensor({3}, rng, 0.5, 1.5));
    CHECK(check(reg, [&](Tape& t) { return ops::layer_norm(P(t, "a"), P(t, "gain"), P(t, "bias")); }) < 1e-6);
  }
  SUBCASE("row softmax with masked columns") {
    CHECK(check(reg, [&](Tape& t) { return ops::softmax_rows(ops::matmul(P(t, "a"), P(t, "b")), 3); }) < 1e-6);
  }
  SUBCASE("conv1d") {
    reg.add("x", random_tensor({6, 2}, rng));
    reg.add("w", random_tensor({3 * 2, 4}, rng));
    reg.add("wb", random_tensor({4}, rng));
    CHECK(check(reg, [&](Tape& t) { return ops::conv1d(P(t, "x"), P(t, "w"), P(t, "wb"), 3); }) < 1e-6);
  }
  SUBCASE("embedding lookup with repeated rows") {
    const std::vector<std::size_t> idx = {0, 2, 2, 1};
    CHECK(check(reg, [&](Tape& t) { return ops::embedding_lookup(P(t, "d"), idx); }) < 1e-6);
  }
}

TEST_CASE("conv1d computes windowed dot products") {
  Tape tape;
  // x rows: [1,2], [3,4], [5,6]; window 2, one filter with taps [1,0] then [0,1].
  Var x = tape.constant(Tensor::from_rows({{1, 2}, {3, 4}, {5, 6}}));
  Var w = tape.constant(Tensor::from_rows({{1}, {0}, {0}, {1}}));
  Var b = tape.constant(Tensor({1}, {0.5}));
  Var y = ops::conv1d(x, w, b, 2);
  REQUIRE(y.rows() == 2);
  CHECK(y.value().at(0, 0) == 1 + 4 + 0.5);
  CHECK(y.value().at(1, 0) == 3 + 6 + 0.5);
  CHECK_THROWS_AS(ops::conv1d(x, tape.constant(Tensor::matrix(8, 1)), b, 4), ShapeError);
}

TEST_CASE("shape errors are reported eagerly") {
  Tape tape;
  Var a = tape.constant(Tensor::matrix(2, 3));
  Var b = tape.constant(Tensor::matrix(2, 3));
  CHECK_THROWS_AS(ops::matmul(a, b), ShapeError);
  CHECK_THROWS_AS(ops::add(a, tape.constant(Tensor::matrix(3, 2))), ShapeError);
  CHECK_THROWS_AS(ops::slice_cols(a, 2, 2), ShapeError);
}

TEST_CASE("value-level softmax cross-entropy closed forms") {
  SUBCASE("uniform prediction over 50 spans with one positive costs ln 50") {
    std::vector<double> logits(50, 0.25), target(50, 0.0);
    target[17] = 1.0;
    auto r = softmax_cross_entropy(logits, target);
    CHECK(r.loss == doctest::Approx(std::log(50.0)).epsilon(1e-12));
    CHECK(r.loss == doctest::Approx(3.912).epsilon(1e-3));
    CHECK(r.gradient[17] == doctest::Approx(1.0 / 50 - 1.0));
  }
  SUBCASE("a dominant correct logit drives the loss to zero") {
    std::vector<double> logits = {60.0, 0.0, 0.0}, target = {1.0, 0.0, 0.0};
    CHECK(softmax_cross_entropy(logits, target).loss < 1e-20);
  }
  SUBCASE("masked entries get exactly zero probability and gradient") {
    std::vector<double> logits = {1.0, 5.0, 2.0};
    std::vector<std::uint8_t> mask = {1, 0, 1};
    std::vector<double> target = {0.5, 0.0, 0.5};
    auto r = softmax_cross_entropy(logits, target, mask);
    CHECK(r.probabilities[1] == 0.0);
    CHECK(r.gradient[1] == 0.0);
    CHECK(r.probabilities[0] + r.probabilities[2] == doctest::Approx(1.0));
  }
  SUBCASE("invalid targets") {
    std::vector<double> logits = {1.0, 2.0};
    std::vector<std::uint8_t> mask = {1, 0};
    CHECK_THROWS(softmax_cross_entropy(logits, std::vector<double>{0.0, 1.0}, mask));
    CHECK_THROWS(softmax_cross_entropy(logits, std::vector<double>{0.0, 0.0}));
    CHECK_THROWS(softmax_cross_entropy(logits, std::vector<double>{0.7, 0.7}));
    CHECK_THROWS(softmax_cross_entropy(logits, std::vector<double>{1.5, -0.5}));
  }
  SUBCASE("huge logits stay finite") {
    std::vector<double> logits = {1e300, -1e300, 0.0}, target = {0.0, 0.0, 1.0};
    auto r = softmax_cross_entropy(logits, target);
    CHECK(std::isfinite(r.loss));
  }
}

TEST_CASE("masked softmax is shift invariant") {
  std::vector<double> a = {0.3, -1.0, 2.0, 0.7};
  std::vector<double> b = a;
  for (double& v : b) v += 123.456;
  auto pa = masked_softmax(a), pb = masked_softmax(b);
  for (std::size_t i = 0; i < a.size(); ++i) CHECK(pa[i] == doctest::Approx(pb[i]).epsilon(1e-12));
}

TEST_CASE("dropout") {
  std::mt19937_64 rng(5);
  Tensor ones = Tensor::matrix(50, 40, 1.0);
  SUBCASE("identity at inference") {
    Tape tape(false);
    Var y = ops::dropout(tape.constant(ones), 0.5);
    CHECK(y.value() == ones);
  }
  SUBCASE("inverted scaling while training") {
    Tape tape(true, &rng);
    Var y = ops::dropout(tape.constant(ones), 0.2);
    std::size_t zeros = 0;
    for (double v : y.value().values()) {
      if (v == 0.0) {
        ++zeros;
      } else {
        CHECK(v == doctest::Approx(1.25));
      }
    }
    CHECK(zeros > 300);
    CHECK(zeros < 500);
  }
  SUBCASE("invalid rate") {
    Tape tape(true, &rng);
    CHECK_THROWS_AS(ops::dropout(tape.constant(ones), 1.0), ConfigError);
  }
}

TEST_CASE("backward requires a scalar and visits each node once") {
  ParameterRegistry reg;
  reg.add("w", Tensor({2, 2}, {1, 2, 3, 4}));
  Tape tape;
  Var w = tape.parameter(reg.at("w"));
  Var y = ops::matmul(w, w);
  CHECK_THROWS(tape.backward(y));
  Var loss = reduce(y, 1);
  tape.backward(loss);
  CHECK(tape.backward_visits() <= tape.size());
  reg.zero_grad();
  tape.accumulate_into(reg, 1.0);
  CHECK(reg.at("w").grad.all_finite());
}

TEST_CASE("gradient accumulation scales by batch factor") {
  ParameterRegistry reg;
  reg.add("w", Tensor({1, 3}, {0.1, 0.2, 0.3}));
  auto run = [&](double scale) {
    Tape tape;
    Var loss = reduce(tape.parameter(reg.at("w")), 3);
    tape.backward(loss);
    tape.accumulate_into(reg, scale);
  };
  reg.zero_grad();
  run(1.0);
  const Tensor once = reg.at("w").grad;
  reg.zero_grad();
  run(0.5);
  run(0.5);
  for (std::size_t i = 0; i < 3; ++i) CHECK(reg.at("w").grad[i] == doctest::Approx(once[i]).epsilon(1e-15));
}

TEST_CASE("op results agree across kernel variants") {
  if (!simd::isa_available(simd::Isa::kAvx2)) return;
  std::mt19937_64 rng(11);
  Tensor a = random_tensor({13, 37}, rng), b = random_tensor({37, 9}, rng);
  Tensor r_scalar, r_avx;
  {
    simd::ScopedIsa f(simd::Isa::kScalar);
    Tape t;
    r_scalar = ops::matmul(t.constant(a), t.constant(b)).value();
  }
  {
    simd::ScopedIsa f(simd::Isa::kAvx2);
    Tape t;
    r_avx = ops::matmul(t.constant(a), t.constant(b)).value();
  }
  for (std::size_t i = 0; i < r_scalar.size(); ++i) CHECK(r_avx[i] == doctest::Approx(r_scalar[i]).epsilon(1e-12));
}
