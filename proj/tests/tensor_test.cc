// tests/tensor_test.cc

// Copyright 2026  The casc-tar Authors

// See the top-level LICENSE file for the full license text.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//  http://www.apache.org/licenses/LICENSE-2.0
//
// THIS CODE IS PROVIDED *AS IS* BASIS, WITHOUT WARRANTIES OR CONDITIONS OF ANY
// KIND, EITHER EXPRESS OR IMPLIED, INCLUDING WITHOUT LIMITATION ANY IMPLIED
// WARRANTIES OR CONDITIONS OF TITLE, FITNESS FOR A PARTICULAR PURPOSE,
// MERCHANTABLITY OR NON-INFRINGEMENT.
// See the Apache 2 License for the specific language governing permissions and
// limitations under the License.

#include <cmath>
#include <limits>
#include <numbers>

#include "casc/base/errors.h"
#include "casc/base/rng.h"
#include "casc/tensor/gradcheck.h"
#include "casc/tensor/ops.h"
#include "doctest.h"

namespace casc {
namespace {

DiffArray Vec(Tape &t, std::vector<Real> v) {
  const int n = static_cast<int>(v.size());
  return t.Constant(Array(Shape{n}, std::move(v)));
}

TEST_CASE("logsumexp examples") {
  Tape t(false);
  CHECK(LogSumExp(Vec(t, {0, 0})).item() == doctest::Approx(std::numbers::ln2).epsilon(1e-6));
  CHECK(LogSumExp(Vec(t, {-3.25f})).item() == -3.25f);
  // The shifted-sum oracle: 1000 + log(exp(0) + exp(0)).
  const double want = 1000.0 + std::log(2.0);
  const double got = LogSumExp(Vec(t, {1000, 1000})).item();
  CHECK(std::isfinite(got));
  CHECK(got == doctest::Approx(want).epsilon(1e-7));
  const Real ninf = -std::numeric_limits<Real>::infinity();
  CHECK(LogSumExp(Vec(t, {ninf, 0})).item() == 0.0f);
  CHECK(LogSumExp(Vec(t, {ninf, ninf})).item() == ninf);
  CHECK_THROWS_AS(LogSumExp(t.Constant(Array(Shape{0}))), UsageError);
}

TEST_CASE("logsumexp is shift invariant") {
  Rng rng(11);
  for (int trial = 0; trial < 200; ++trial) {
    const int n = static_cast<int>(rng.UniformInt(1, 12));
    const double c = rng.Uniform(-50, 50);
    std::vector<Real> v(n), w(n);
    for (int i = 0; i < n; ++i) {
      v[i] = static_cast<Real>(rng.Uniform(-5, 5));
      w[i] = static_cast<Real>(v[i] + c);
    }
    Tape t(false);
    // Compare against the shift applied to the stored (rounded) inputs.
    double shift = 0;
    for (int i = 0; i < n; ++i) shift += static_cast<double>(w[i]) - v[i];
    shift /= n;
    const double a = LogSumExp(Vec(t, v)).item();
    const double b = LogSumExp(Vec(t, w)).item();
    CHECK(std::abs((b - a) - shift) <= 1e-6 * (1 + std::abs(c)));
  }
}

TEST_CASE("softmax with temperature") {
  Tape t(false);
  auto p = SoftmaxWithTemperature(Vec(t, {2.5f, 2.5f}), 1.0).value();
  CHECK(p[0] == doctest::Approx(0.5));
  CHECK(p[1] == doctest::Approx(0.5));
  p = SoftmaxWithTemperature(Vec(t, {0, static_cast<Real>(std::log(3.0))}), 1.0).value();
  CHECK(p[0] == doctest::Approx(0.25).epsilon(1e-6));
  CHECK(p[1] == doctest::Approx(0.75).epsilon(1e-6));
  p = SoftmaxWithTemperature(Vec(t, {0, static_cast<Real>(std::log(3.0))}), 1e6).value();
  CHECK(p[0] == doctest::Approx(0.5).epsilon(1e-5));
  CHECK_THROWS_AS(SoftmaxWithTemperature(Vec(t, {0, 1}), 0.0), UsageError);
  CHECK_THROWS_AS(SoftmaxWithTemperature(Vec(t, {0, 1}), -1.0), UsageError);

  Rng rng(3);
  for (int trial = 0; trial < 50; ++trial) {
    std::vector<Real> v(static_cast<int>(rng.UniformInt(1, 20)));
    for (Real &x : v) x = static_cast<Real>(rng.Normal(0, 4));
    auto q = SoftmaxWithTemperature(Vec(t, v), rng.Uniform(0.1, 3)).value();
    double s = 0;
    for (Real x : q.vec()) s += x;
    CHECK(std::abs(s - 1) <= 1e-6);
  }
}

TEST_CASE("finite difference gradient examples") {
  auto square = [](const Array &x) { return static_cast<double>(x[0]) * x[0]; };
  Array g = FiniteDifferenceGradient(square, Array(Shape{1}, {3}), 1e-3);
  CHECK(std::abs(g[0] - 6.0) <= 1e-5);

  auto constant = [](const Array &) { return 4.0; };
  g = FiniteDifferenceGradient(constant, Array(Shape{3}, {1, 2, 3}), 1e-3);
  for (Real v : g.vec()) CHECK(v == 0);

  auto blows_up = [](const Array &x) {
    return x[1] > 1.5 ? std::numeric_limits<double>::infinity() : 0.0;
  };
  try {
    FiniteDifferenceGradient(blows_up, Array(Shape{3}, {0, 1.5f, 0}), 1e-3);
    FAIL("expected NumericalError");
  } catch (const NumericalError &e) {
    CHECK(std::string(e.what()).find("coordinate 1") != std::string::npos);
  }
  CHECK_THROWS_AS(FiniteDifferenceGradient(square, Array(Shape{1}, {1}), 0), UsageError);
}

TEST_CASE("tape binds a parameter once and populates every reachable gradient") {
  Parameter w{"w", Array(Shape{2, 2}, {1, 2, 3, 4}), {}};
  Parameter unused{"unused", Array(Shape{3}, {1, 1, 1}), {}};
  Parameter frozen{"frozen", Array(Shape{2, 2}, {1, 0, 0, 1}), {}, true};
  Tape t;
  DiffArray a = t.Param(w);
  DiffArray b = t.Param(w);
  CHECK(a.id() == b.id());
  t.Param(unused);
  DiffArray f = t.Param(frozen);
  CHECK_FALSE(f.requires_grad());
  DiffArray y = Sum(MatMul(MatMul(a, b), f));
  t.Backward(y);
  // d/dW sum(W W) = 1 W^T + W^T 1 -> [[3+1+2, ...]]
  REQUIRE(w.grad.size() == 4);
  CHECK(w.grad[0] == doctest::Approx(1 + 3 + 1 + 2));
  REQUIRE(unused.grad.size() == 3);
  CHECK(unused.grad[0] == 0);
  CHECK(frozen.grad.size() == 0);
  CHECK_THROWS_AS(t.Backward(y), UsageError);
}

TEST_CASE("operand and shape errors") {
  Tape t1, t2;
  auto a = t1.Constant(Array(Shape{2, 3}));
  auto b = t2.Constant(Array(Shape{2, 3}));
  CHECK_THROWS_AS(Add(a, b), UsageError);
  CHECK_THROWS_AS(MatMul(a, t1.Constant(Array(Shape{2, 3}))), UsageError);
  CHECK_THROWS_AS(AddBias(a, t1.Constant(Array(Shape{2}))), UsageError);
  CHECK_THROWS_AS(t1.Backward(a), UsageError);
  CHECK_THROWS_AS(Array(Shape{2, 2}, std::vector<Real>{1, 2, 3}), UsageError);
}

TEST_CASE("masked softmax gives exact zeros and ignores masked values") {
  Tape t(false);
  std::vector<uint8_t> mask = {1, 0, 1, 1};
  auto x1 = t.Constant(Array(Shape{2, 2}, {0.3f, 5.0f, 1.0f, 2.0f}));
  auto x2 = t.Constant(Array(Shape{2, 2}, {0.3f, -7.0f, 1.0f, 2.0f}));
  auto p1 = SoftmaxRows(x1, 1.0, mask).value();
  auto p2 = SoftmaxRows(x2, 1.0, mask).value();
  CHECK(p1[1] == 0);
  CHECK(p1[0] == 1);
  CHECK(p1 == p2);
}

}  // namespace
}  // namespace casc
