// tests/acceptance/precise.cc

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

// Criteria that need 64-bit arithmetic: exact loss oracles, finite
// differences and the KD inequalities near zero.

#include <cmath>
#include <limits>
#include <sstream>
#include <vector>

#include "../test_util.h"
#include "casc/loss/distill.h"
#include "casc/model/encoder.h"
#include "casc/model/predictor.h"
#include "casc/tensor/gradcheck.h"
#include "casc/tensor/ops.h"
#include "outcome.h"

namespace casc::acceptance {
namespace {

using testing::RandomArray;
using testing::RandomLabels;
using testing::Randomise;
using testing::TinyConfig;

constexpr double kOracleRelTol = 1e-6;
constexpr double kFdStep = 1e-6;
constexpr double kFdRel = 1e-4;
constexpr double kFdAbs = 1e-6;
constexpr double kKdZero = 1e-10;
constexpr double kLogSumSlack = 1e-8;
constexpr double kAlpha = 0.02;

Lattice RandomLattice(Tape &tape, Rng &rng, int frames, int labels, int vocab, double sd) {
  Array logits = RandomArray(rng, {frames * (labels + 1), vocab}, sd);
  return MakeLattice(LogSoftmaxRows(tape.Constant(logits)), frames, labels);
}

std::vector<Parameter *> WithPrefix(CascadedModel &m, const std::string &prefix) {
  std::vector<Parameter *> out;
  for (Parameter &p : m.params().all())
    if (p.name.rfind(prefix, 0) == 0) out.push_back(&p);
  return out;
}

void Expect(Outcome &o, const GradCheckReport &r, const std::string &what) {
  o.Check(r.ok && r.checked > 0, what + " (" + r.worst + ")");
}

}  // namespace

Outcome TransducerOracle() {
  Outcome o;
  Rng rng(101);
  double worst = 0;
  for (int trial = 0; trial < 200; ++trial) {
    const int frames = static_cast<int>(rng.UniformInt(1, 5));
    const int labels = static_cast<int>(rng.UniformInt(0, 4));
    const int vocab = static_cast<int>(rng.UniformInt(2, 5));
    Tape t(false);
    Lattice lat = RandomLattice(t, rng, frames, labels, vocab, 1.5);
    std::vector<int> y = RandomLabels(rng, labels, vocab);
    const double fast = RnntLoss(lat, y).item();
    const double slow = RnntLossBruteforce(lat.log_probs.value(), frames, y).loss;
    const double rel = std::abs(fast - slow) / std::max(std::abs(slow), 1e-300);
    worst = std::max(worst, rel);
    o.Check(rel <= kOracleRelTol, "instance " + std::to_string(trial));
  }
  std::ostringstream n;
  n << "worst relative error " << worst;
  o.Note(n.str());
  return o;
}

Outcome GradientChecks() {
  Outcome o;
  Rng rng(102);

  // Losses with respect to the student logits.
  for (int trial = 0; trial < 8; ++trial) {
    const int frames = static_cast<int>(rng.UniformInt(1, 4));
    const int labels = static_cast<int>(rng.UniformInt(0, 3));
    const int vocab = static_cast<int>(rng.UniformInt(2, 5));
    std::vector<int> y = RandomLabels(rng, labels, vocab);
    Parameter s{"student", RandomArray(rng, {frames * (labels + 1), vocab}, 1.5), {}};
    Array teacher = RandomArray(rng, {frames * (labels + 1), vocab}, 1.5);
    std::vector<Parameter *> params = {&s};
    auto student = [&](Tape &t) { return MakeLattice(LogSoftmaxRows(t.Param(s)), frames, labels); };
    auto fixed = [&](Tape &t) { return MakeLattice(LogSoftmaxRows(t.Constant(teacher)), frames, labels); };
    Expect(o, CheckGradients([&](Tape &t) { return RnntLoss(student(t), y); }, params, kFdStep,
                             kFdRel, kFdAbs),
           "rnnt_loss");
    Expect(o, CheckGradients([&](Tape &t) { return FullLatticeKl(fixed(t), student(t)); }, params,
                             kFdStep, kFdRel, kFdAbs),
           "full_lattice_kl");
    Expect(o, CheckGradients([&](Tape &t) { return EfficientKd(fixed(t), student(t), y); }, params,
                             kFdStep, kFdRel, kFdAbs),
           "efficient_kd");
  }

  // Conformer block, both attention modes, weights and input.
  {
    CascadedModel m(TinyConfig(DecoderKind::kLstm), 1);
    Randomise(m, rng);
    Parameter x{"x", RandomArray(rng, {3, 8}), {}};
    Array probe = RandomArray(rng, {3, 8});
    for (auto mode : {AttentionMode::kCausal, AttentionMode::kNoncausal}) {
      std::vector<Parameter *> params = WithPrefix(m, "causal.block0.");
      params.push_back(&x);
      Expect(o,
             CheckGradients(
                 [&](Tape &t) {
                   Graph g{t};
                   DiffArray y = ConformerBlockForward(g, t.Param(x), m.causal_blocks()[0], {2, 4}, mode);
                   return Sum(Mul(y, t.Constant(probe)));
                 },
                 params, kFdStep, kFdRel, kFdAbs),
             "conformer_block_forward");
    }
  }

  // TAR predictor and the joint network (tied output included).
  {
    CascadedModel m(TinyConfig(DecoderKind::kTar), 2);
    Randomise(m, rng);
    std::vector<int> y = RandomLabels(rng, 7, 6);
    const int p = m.config().PredictorOutputDim();
    Array probe = RandomArray(rng, {8, p});
    Expect(o,
           CheckGradients([&](Tape &t) { return Sum(Mul(TarPredict(Graph{t}, m, y), t.Constant(probe))); },
                          WithPrefix(m, "pred."), kFdStep, kFdRel, kFdAbs),
           "tar_predict");

    Parameter enc{"enc", RandomArray(rng, {1, 8}), {}};
    Parameter pred{"pred", RandomArray(rng, {1, p}), {}};
    Array jprobe = RandomArray(rng, {1, 6});
    std::vector<Parameter *> params = WithPrefix(m, "joint.");
    params.push_back(&enc);
    params.push_back(&pred);
    params.push_back(&m.params().Get("pred.embed"));
    Expect(o,
           CheckGradients(
               [&](Tape &t) {
                 DiffArray l = Joint(Graph{t}, m, t.Param(enc), t.Param(pred));
                 return Sum(Mul(l, t.Constant(jprobe)));
               },
               params, kFdStep, kFdRel, kFdAbs),
           "joint");
  }
  return o;
}

Outcome DistillationAlgebra() {
  Outcome o;
  Rng rng(103);
  int compared = 0;
  double min_kd = std::numeric_limits<double>::infinity();
  while (compared < 1000) {
    const int frames = static_cast<int>(rng.UniformInt(1, 4));
    const int labels = static_cast<int>(rng.UniformInt(0, 3));
    const int vocab = static_cast<int>(rng.UniformInt(2, 8));
    Tape t(false);
    Lattice a = RandomLattice(t, rng, frames, labels, vocab, 2.0);
    Lattice b = RandomLattice(t, rng, frames, labels, vocab, 2.0);
    std::vector<int> y = RandomLabels(rng, labels, vocab);
    o.Check(std::abs(FullLatticeKl(a, a).item()) < kKdZero, "full KL of identical lattices");
    o.Check(std::abs(EfficientKd(a, a, y).item()) < kKdZero, "efficient KD of identical lattices");
    const double full = FullLatticeKl(a, b).item();
    const double eff = EfficientKd(a, b, y).item();
    min_kd = std::min({min_kd, full, eff});
    o.Check(full >= -kKdZero, "full KL negative");
    o.Check(eff >= -kKdZero, "efficient KD negative");
    o.Check(eff <= full + kLogSumSlack, "efficient KD above full KL");
    compared += frames * (labels + 1);
  }

  for (int trial = 0; trial < 100; ++trial) {
    const double l = rng.Uniform(0, 50), lp = rng.Uniform(0, 5);
    const double want = (1 - kAlpha) * l + kAlpha * lp;
    o.Check(TotalLoss(l, lp, kAlpha) == want, "scalar total loss");
    Tape t(false);
    Array la(Shape{1, 1}, static_cast<Real>(l)), lb(Shape{1, 1}, static_cast<Real>(lp));
    o.Check(TotalLoss(t.Constant(la), t.Constant(lb), kAlpha).item() == want, "graph total loss");
  }
  std::ostringstream n;
  n << compared << " lattice nodes, smallest KD " << min_kd;
  o.Note(n.str());
  return o;
}

}  // namespace casc::acceptance
