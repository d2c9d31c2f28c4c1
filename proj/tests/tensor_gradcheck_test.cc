// tests/tensor_gradcheck_test.cc

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

// Gradient checks run against the 64-bit build of the tensor core.

#include <functional>
#include <vector>

#include "casc/base/rng.h"
#include "casc/tensor/gradcheck.h"
#include "casc/tensor/ops.h"
#include "doctest.h"

namespace casc {
namespace {

constexpr double kEps = 1e-6;
constexpr double kRel = 1e-4;
constexpr double kAbs = 1e-6;

Parameter RandomParam(Rng &rng, const std::string &name, Shape shape, double scale = 1.0) {
  Array v(shape);
  for (auto &x : v.vec()) x = static_cast<Real>(rng.Normal(0, scale));
  return Parameter{name, v, {}};
}

// sum(op(...) * R) for a fixed random R, so every output element carries a
// distinct upstream gradient.
struct Probe {
  Array weights;
  DiffArray operator()(Tape &t, const DiffArray &y) {
    if (weights.shape() != y.shape()) {
      Rng rng(99);
      weights = Array(y.shape());
      for (auto &x : weights.vec()) x = static_cast<Real>(rng.Normal());
    }
    return Sum(Mul(y, t.Constant(weights)));
  }
};

void ExpectGradOk(const std::function<DiffArray(Tape &)> &loss, std::vector<Parameter *> params) {
  GradCheckReport r = CheckGradients(loss, params, kEps, kRel, kAbs);
  INFO(r.worst);
  CHECK(r.ok);
  CHECK(r.checked > 0);
}

TEST_CASE("elementwise and matrix ops") {
  Rng rng(1);
  auto a = RandomParam(rng, "a", {3, 4});
  auto b = RandomParam(rng, "b", {3, 4});
  auto w = RandomParam(rng, "w", {4, 5});
  auto wt = RandomParam(rng, "wt", {5, 4});
  auto bias = RandomParam(rng, "bias", {5});
  Probe probe;
  ExpectGradOk([&](Tape &t) {
    auto x = Add(Mul(t.Param(a), t.Param(b)), Sub(t.Param(a), Scale(t.Param(b), 0.3)));
    return probe(t, Linear(Tanh(x), t.Param(w), t.Param(bias)));
  }, {&a, &b, &w, &bias});
  Probe probe2;
  ExpectGradOk([&](Tape &t) {
    return probe2(t, Swish(MatMul(Sigmoid(t.Param(a)), t.Param(wt), true)));
  }, {&a, &wt});
}

TEST_CASE("softmax family and layer norm") {
  Rng rng(2);
  auto x = RandomParam(rng, "x", {4, 6}, 2.0);
  auto g = RandomParam(rng, "gamma", {6});
  auto be = RandomParam(rng, "beta", {6});
  std::vector<uint8_t> mask(24, 1);
  mask[1] = mask[7] = mask[8] = 0;
  Probe p1, p2, p3, p4;
  ExpectGradOk([&](Tape &t) { return p1(t, LogSoftmaxRows(t.Param(x), 0.7)); }, {&x});
  ExpectGradOk([&](Tape &t) { return p2(t, SoftmaxRows(t.Param(x), 1.3, mask)); }, {&x});
  ExpectGradOk([&](Tape &t) {
    return p3(t, LayerNormRows(t.Param(x), t.Param(g), t.Param(be)));
  }, {&x, &g, &be});
  ExpectGradOk([&](Tape &t) { return p4(t, Glu(t.Param(x))); }, {&x});
}

TEST_CASE("convolution, gathers, slicing, attention helpers") {
  Rng rng(3);
  auto x = RandomParam(rng, "x", {5, 3});
  auto w = RandomParam(rng, "w", {3, 3});
  auto b = RandomParam(rng, "b", {3});
  auto table = RandomParam(rng, "table", {2, 5});
  auto other = RandomParam(rng, "other", {2, 3});
  auto weights = RandomParam(rng, "weights", {1, 3});
  Probe p1, p2, p3, p4, p5, p6;
  for (bool causal : {true, false}) {
    ExpectGradOk([&](Tape &t) {
      return p1(t, DepthwiseConvTime(t.Param(x), t.Param(w), t.Param(b), causal));
    }, {&x, &w, &b});
  }
  ExpectGradOk([&](Tape &t) {
    std::vector<int> ids = {1, 0, 4, 4};
    auto gathered = GatherRows(t.Param(x), ids);
    auto cat = ConcatRows({SliceRows(gathered, 1, 3), t.Param(other)});
    return p2(t, ConcatCols({SliceCols(cat, 0, 2), cat}));
  }, {&x, &other});
  ExpectGradOk([&](Tape &t) {
    return p3(t, RelativePositionBias(t.Param(table), 1, 4));
  }, {&table});
  ExpectGradOk([&](Tape &t) {
    return p4(t, OuterAddRows(t.Param(x), t.Param(other)));
  }, {&x, &other});
  ExpectGradOk([&](Tape &t) {
    // 5 rows do not split into groups of 3; use 3 of the rows twice.
    std::vector<int> ids = {0, 1, 2, 3, 4, 0};
    return p5(t, AnchoredWeightedSum(GatherRows(t.Param(x), ids), t.Param(weights), 3));
  }, {&x, &weights});
  ExpectGradOk([&](Tape &t) { return p6(t, MeanRows(t.Param(x))); }, {&x});
}

TEST_CASE("scalar reductions") {
  Rng rng(4);
  auto v = RandomParam(rng, "v", {7}, 3.0);
  ExpectGradOk([&](Tape &t) { return LogSumExp(t.Param(v)); }, {&v});
  ExpectGradOk([&](Tape &t) {
    auto a = Pick(t.Param(v), 2);
    auto b = Pick(t.Param(v), 5);
    return WeightedSum({LogAddExp(a, b), Mean(t.Param(v)), a}, {0.8, 0.2, -1.5});
  }, {&v});
}

TEST_CASE("dropout gradient uses the sampled mask") {
  Rng rng(5);
  auto x = RandomParam(rng, "x", {3, 4});
  Probe p;
  ExpectGradOk([&](Tape &t) {
    Rng r(123);  // same mask on every evaluation
    return p(t, Dropout(t.Param(x), 0.3, r));
  }, {&x});
}

}  // namespace
}  // namespace casc
