// tests/model_gradcheck_test.cc

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

// Gradient checks of the model and losses, on the 64-bit build.

#include <vector>

#include "casc/loss/distill.h"
#include "casc/model/encoder.h"
#include "casc/model/predictor.h"
#include "casc/tensor/gradcheck.h"
#include "casc/tensor/ops.h"
#include "doctest.h"
#include "test_util.h"

namespace casc {
namespace {

using testing::RandomArray;
using testing::RandomLabels;
using testing::Randomise;
using testing::TinyConfig;

constexpr double kEps = 1e-6;
constexpr double kRel = 1e-4;
constexpr double kAbs = 1e-6;

std::vector<Parameter *> WithPrefix(CascadedModel &m, const std::string &prefix) {
  std::vector<Parameter *> out;
  for (Parameter &p : m.params().all())
    if (p.name.rfind(prefix, 0) == 0) out.push_back(&p);
  return out;
}

void ExpectOk(const GradCheckReport &r) {
  INFO(r.worst);
  CHECK(r.ok);
  CHECK(r.checked > 0);
}

TEST_CASE("conformer block") {
  Rng rng(31);
  CascadedModel m(TinyConfig(DecoderKind::kLstm), 1);
  Randomise(m, rng);
  Parameter x{"x", RandomArray(rng, {3, 8}), {}};
  Array probe = RandomArray(rng, {3, 8});
  for (auto mode : {AttentionMode::kCausal, AttentionMode::kNoncausal}) {
    std::vector<Parameter *> params = WithPrefix(m, "causal.block0.");
    params.push_back(&x);
    ExpectOk(CheckGradients(
        [&](Tape &t) {
          Graph g{t};
          DiffArray y = ConformerBlockForward(g, t.Param(x), m.causal_blocks()[0], {2, 4}, mode);
          return Sum(Mul(y, t.Constant(probe)));
        },
        params, kEps, kRel, kAbs));
  }
}

TEST_CASE("predictors and joint") {
  Rng rng(32);
  for (DecoderKind kind : {DecoderKind::kLstm, DecoderKind::kTar}) {
    CascadedModel m(TinyConfig(kind), 2);
    Randomise(m, rng);
    std::vector<int> y = RandomLabels(rng, 7, 6);
    const int p = m.config().PredictorOutputDim();
    Array probe = RandomArray(rng, {8, p});
    ExpectOk(CheckGradients(
        [&](Tape &t) { return Sum(Mul(Predict(Graph{t}, m, y), t.Constant(probe))); },
        WithPrefix(m, "pred."), kEps, kRel, kAbs));

    Parameter enc{"enc", RandomArray(rng, {1, 8}), {}};
    Parameter pred{"pred", RandomArray(rng, {1, p}), {}};
    Array jprobe = RandomArray(rng, {1, 6});
    std::vector<Parameter *> params = WithPrefix(m, "joint.");
    params.push_back(&enc);
    params.push_back(&pred);
    if (kind == DecoderKind::kTar) params.push_back(&m.params().Get("pred.embed"));
    ExpectOk(CheckGradients(
        [&](Tape &t) {
          DiffArray l = Joint(Graph{t}, m, t.Param(enc), t.Param(pred));
          return Sum(Mul(l, t.Constant(jprobe)));
        },
        params, kEps, kRel, kAbs));
  }
}

TEST_CASE("transducer and distillation losses w.r.t. lattice logits") {
  Rng rng(33);
  for (int trial = 0; trial < 10; ++trial) {
    const int tp = static_cast<int>(rng.UniformInt(1, 4));
    const int u = static_cast<int>(rng.UniformInt(0, 3));
    const int v = static_cast<int>(rng.UniformInt(2, 5));
    std::vector<int> y = RandomLabels(rng, u, v);
    Parameter s{"student", RandomArray(rng, {tp * (u + 1), v}, 1.5), {}};
    Array teacher = RandomArray(rng, {tp * (u + 1), v}, 1.5);
    std::vector<Parameter *> params = {&s};
    auto student = [&](Tape &t) { return MakeLattice(LogSoftmaxRows(t.Param(s)), tp, u); };
    auto fixed = [&](Tape &t) { return MakeLattice(LogSoftmaxRows(t.Constant(teacher)), tp, u); };
    ExpectOk(CheckGradients([&](Tape &t) { return RnntLoss(student(t), y); }, params, kEps,
                            kRel, kAbs));
    ExpectOk(CheckGradients([&](Tape &t) { return FullLatticeKl(fixed(t), student(t)); },
                            params, kEps, kRel, kAbs));
    ExpectOk(CheckGradients([&](Tape &t) { return EfficientKd(fixed(t), student(t), y); },
                            params, kEps, kRel, kAbs));
  }
}

TEST_CASE("end to end cascaded loss") {
  Rng rng(34);
  ModelConfig c = TinyConfig(DecoderKind::kTar);
  c.causal_layers = 1;
  CascadedModel m(c, 3);
  Randomise(m, rng, 0.2);
  Array f = RandomArray(rng, {6, 6});
  std::vector<int> y = {3, 1};
  std::vector<Parameter *> params;
  for (Parameter &p : m.params().all()) params.push_back(&p);
  ExpectOk(CheckGradients(
      [&](Tape &t) {
        Graph g{t};
        DiffArray ce = EncodeCausal(g, m, f);
        DiffArray ne = EncodeNoncausal(g, m, ce);
        DiffArray pred = Predict(g, m, y);
        return CascadedLoss(RnntLoss(BuildLattice(g, m, ce, pred), y),
                            RnntLoss(BuildLattice(g, m, ne, pred), y), 0.8);
      },
      params, kEps, kRel, kAbs));
}

}  // namespace
}  // namespace casc
