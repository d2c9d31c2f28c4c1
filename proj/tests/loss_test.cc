// tests/loss_test.cc

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
#include <numbers>

#include "casc/base/errors.h"
#include "casc/loss/distill.h"
#include "casc/model/encoder.h"
#include "casc/model/predictor.h"
#include "casc/tensor/ops.h"
#include "doctest.h"
#include "test_util.h"

namespace casc {
namespace {

using testing::RandomArray;
using testing::RandomLabels;

// Random normalised lattice on `tape`.
Lattice RandomLattice(Tape &tape, Rng &rng, int frames, int labels, int vocab, double sd = 1.5) {
  Array logits = RandomArray(rng, {frames * (labels + 1), vocab}, sd);
  return MakeLattice(LogSoftmaxRows(tape.Constant(logits)), frames, labels);
}

Lattice UniformLattice(Tape &tape, int frames, int labels, int vocab) {
  return MakeLattice(LogSoftmaxRows(tape.Constant(Array(Shape{frames * (labels + 1), vocab}))),
                     frames, labels);
}

long Binomial(int n, int k) {
  long r = 1;
  for (int i = 1; i <= k; ++i) r = r * (n - k + i) / i;
  return r;
}

TEST_CASE("rnnt loss examples") {
  Tape t(false);
  Lattice one = UniformLattice(t, 1, 0, 2);
  CHECK(RnntLoss(one, {}).item() == doctest::Approx(std::numbers::ln2).epsilon(1e-6));
  // Two frames, one label, V=2: alignments (y b b) and (b y b), each 1/8.
  Lattice two = UniformLattice(t, 2, 1, 2);
  std::vector<int> y = {1};
  CHECK(RnntLoss(two, y).item() == doctest::Approx(std::log(4.0)).epsilon(1e-6));
  BruteforceResult bf = RnntLossBruteforce(two.log_probs.value(), 2, y);
  CHECK(bf.paths == 2);
  CHECK(bf.loss == doctest::Approx(std::log(4.0)).epsilon(1e-6));
  CHECK(RnntLossBruteforce(one.log_probs.value(), 1, {}).paths == 1);
  CHECK_THROWS_AS(RnntLossBruteforce(Array(Shape{7 * 1, 2}), 7, {}), UsageError);
  Lattice empty = MakeLattice(t.Constant(Array(Shape{0, 2})), 0, 1);
  CHECK_THROWS_AS(RnntLoss(empty, y), InfeasibleError);
  CHECK_THROWS_AS(RnntLoss(two, {}), UsageError);
}

TEST_CASE("rnnt loss agrees with enumeration") {
  Rng rng(21);
  for (int trial = 0; trial < 200; ++trial) {
    const int tp = static_cast<int>(rng.UniformInt(1, 5));
    const int u = static_cast<int>(rng.UniformInt(0, 4));
    const int v = static_cast<int>(rng.UniformInt(2, 5));
    Tape t(false);
    Lattice lat = RandomLattice(t, rng, tp, u, v);
    std::vector<int> y = RandomLabels(rng, u, v);
    const double fast = RnntLoss(lat, y).item();
    BruteforceResult bf = RnntLossBruteforce(lat.log_probs.value(), tp, y);
    CHECK(bf.paths == Binomial(tp + u - 1, u));
    CHECK(std::abs(fast - bf.loss) <= 1e-5 * std::abs(bf.loss));
    CHECK(fast >= 0);
    CHECK(std::isfinite(fast));
  }
}

TEST_CASE("rnnt loss never increases when a label becomes more likely") {
  // Raise P(y | t, u-1) and take the mass from the other labels only, so
  // P(blank | t, u-1) is unchanged.
  Rng rng(22);
  for (int trial = 0; trial < 200; ++trial) {
    const int tp = static_cast<int>(rng.UniformInt(1, 5));
    const int u_len = static_cast<int>(rng.UniformInt(1, 4));
    const int v = static_cast<int>(rng.UniformInt(3, 5));
    Tape t(false);
    Lattice lat = RandomLattice(t, rng, tp, u_len, v);
    std::vector<int> y = RandomLabels(rng, u_len, v);
    const double before = RnntLoss(lat, y).item();
    const int tt = static_cast<int>(rng.UniformInt(0, tp - 1));
    const int u = static_cast<int>(rng.UniformInt(1, u_len));
    const int label = y[u - 1];
    Array lp = lat.log_probs.value();
    Real *row = lp.row(lat.Row(tt, u - 1));
    double others = 0;
    for (int k = 1; k < v; ++k)
      if (k != label) others += std::exp(static_cast<double>(row[k]));
    const double shift = rng.Uniform(0, 1) * others;
    const double keep = (others - shift) / others;
    for (int k = 1; k < v; ++k)
      if (k != label) row[k] = static_cast<Real>(row[k] + std::log(keep));
    row[label] = static_cast<Real>(std::log(std::exp(static_cast<double>(row[label])) + shift));
    const double after = RnntLoss(MakeLattice(t.Constant(lp), tp, u_len), y).item();
    CHECK(after <= before + 1e-6);
  }
}

TEST_CASE("lattice construction") {
  Rng rng(23);
  CascadedModel m(testing::TinyConfig(DecoderKind::kLstm), 1);
  testing::Randomise(m, rng);
  Tape t(false);
  Graph g{t};
  Array f = RandomArray(rng, {2, 6});
  DiffArray enc = EncodeCausal(g, m, f);
  Lattice lat = BuildLattice(g, m, enc, Predict(g, m, {}));
  CHECK(lat.frames == 1);
  CHECK(lat.labels == 0);
  CHECK(lat.log_probs.shape() == Shape{1, 6});

  std::vector<int> y = {1, 5, 2};
  f = RandomArray(rng, {9, 6});
  enc = EncodeCausal(g, m, f);
  DiffArray pred = Predict(g, m, y);
  Lattice l1 = BuildLattice(g, m, enc, pred, 1.0);
  Lattice l2 = BuildLattice(g, m, enc, pred, 2.5);
  Array plain = LogSoftmaxRows(JointLogits(g, m, enc, pred)).value();
  CHECK(l1.log_probs.value() == plain);
  for (const Lattice *l : {&l1, &l2}) {
    for (int r = 0; r < l->log_probs.rows(); ++r) {
      double s = 0;
      for (int k = 0; k < 6; ++k) s += std::exp(static_cast<double>(l->log_probs.value()(r, k)));
      CHECK(std::abs(s - 1) <= 1e-5);
    }
  }
  CHECK_THROWS_AS(BuildLattice(g, m, enc, pred, 0.0), UsageError);
}

TEST_CASE("cascaded loss") {
  CHECK(CascadedLoss(2.0, 1.0, 1.0) == 2.0);
  CHECK(CascadedLoss(2.0, 1.0, 0.0) == 1.0);
  CHECK(CascadedLoss(2.0, 1.0, 0.8) == doctest::Approx(1.8).epsilon(1e-15));
  CHECK_THROWS_AS(CascadedLoss(2.0, 1.0, 1.2), UsageError);
  Tape t(false);
  CHECK(CascadedLoss(t.Constant(Real(2)), t.Constant(Real(1)), 0.8).item() ==
        doctest::Approx(1.8).epsilon(1e-6));
}

Lattice SingleNode(Tape &t, std::vector<double> probs) {
  Array lp(Shape{1, static_cast<int>(probs.size())});
  for (std::size_t k = 0; k < probs.size(); ++k) lp[k] = static_cast<Real>(std::log(probs[k]));
  return MakeLattice(t.Constant(lp), 1, 0);
}

TEST_CASE("kd examples") {
  Tape t(false);
  // Full KL on one node, oracle by direct summation.
  Lattice pt = SingleNode(t, {0.5, 0.5}), ps = SingleNode(t, {0.25, 0.75});
  const double want = 0.5 * std::log(2.0) + 0.5 * std::log(2.0 / 3.0);
  CHECK(FullLatticeKl(pt, ps).item() == doctest::Approx(want).epsilon(1e-6));
  CHECK(std::abs(want - 0.143841) < 1e-6);

  // Three-way collapse: blank .5/.4, y .3/.4, rest .2/.2 at a u < U node.
  Array lt(Shape{2, 3}), ls(Shape{2, 3});
  const double tp[3] = {0.5, 0.3, 0.2}, sp[3] = {0.4, 0.4, 0.2};
  for (int k = 0; k < 3; ++k) {
    lt(0, k) = static_cast<Real>(std::log(tp[k]));
    ls(0, k) = static_cast<Real>(std::log(sp[k]));
    lt(1, k) = ls(1, k) = static_cast<Real>(std::log(1.0 / 3));
  }
  std::vector<int> y = {1};
  const double want3 = 0.5 * std::log(5.0 / 4) + 0.3 * std::log(3.0 / 4);
  CHECK(std::abs(want3 - 0.0252672) < 1e-6);
  CHECK(EfficientKd(MakeLattice(t.Constant(lt), 1, 1), MakeLattice(t.Constant(ls), 1, 1), y)
            .item() == doctest::Approx(want3).epsilon(1e-5));

  CHECK(TotalLoss(1.0, 5.0, 0.02) == doctest::Approx(1.08).epsilon(1e-15));
  CHECK(TotalLoss(1.0, 5.0, 0.0) == 1.0);
  CHECK(TotalLoss(1.0, 5.0, 1.0) == 5.0);
  CHECK_THROWS_AS(TotalLoss(1.0, 5.0, -0.1), UsageError);
  CHECK_THROWS_AS(FullLatticeKl(pt, SingleNode(t, {0.2, 0.3, 0.5})), UsageError);
}

TEST_CASE("kd properties on random lattices") {
  Rng rng(24);
  for (int trial = 0; trial < 300; ++trial) {
    const int tp = static_cast<int>(rng.UniformInt(1, 4));
    const int u = static_cast<int>(rng.UniformInt(0, 3));
    const int v = static_cast<int>(rng.UniformInt(2, 7));
    Tape t(false);
    Lattice a = RandomLattice(t, rng, tp, u, v, 2.0);
    Lattice b = RandomLattice(t, rng, tp, u, v, 2.0);
    std::vector<int> y = RandomLabels(rng, u, v);
    CHECK(std::abs(FullLatticeKl(a, a).item()) < 1e-10);
    CHECK(std::abs(EfficientKd(a, a, y).item()) < 1e-10);
    const double full = FullLatticeKl(a, b).item();
    const double eff = EfficientKd(a, b, y).item();
    CHECK(full >= -1e-6);
    CHECK(eff >= -1e-6);
    CHECK(eff <= full + 1e-5);
  }
}

TEST_CASE("kd gradient reaches only the student") {
  Rng rng(25);
  CascadedModel teacher(testing::TinyConfig(DecoderKind::kLstm), 1);
  CascadedModel student(testing::TinyConfig(DecoderKind::kTar), 2);
  Array f = RandomArray(rng, {8, 6});
  std::vector<int> y = {2, 4};
  for (KdMode mode : {KdMode::kFull, KdMode::kEfficient}) {
    teacher.params().ZeroGrads();
    student.params().ZeroGrads();
    Tape t;
    Graph g{t};
    Lattice lt = BuildLattice(g, teacher, EncodeCausal(g, teacher, f), Predict(g, teacher, y));
    Lattice ls = BuildLattice(g, student, EncodeCausal(g, student, f), Predict(g, student, y));
    t.Backward(KdLoss(mode, lt, ls, y));
    for (const Parameter &p : teacher.params().all())
      for (Real v : p.grad.vec()) CHECK(v == 0);
    double norm = 0;
    for (const Parameter &p : student.params().all())
      for (Real v : p.grad.vec()) norm += static_cast<double>(v) * v;
    CHECK(norm > 0);
  }
}

}  // namespace
}  // namespace casc
