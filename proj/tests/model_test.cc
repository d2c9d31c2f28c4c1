// tests/model_test.cc

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

#include "casc/base/errors.h"
#include "casc/loss/transducer.h"
#include "casc/model/encoder.h"
#include "casc/model/predictor.h"
#include "casc/tensor/ops.h"
#include "doctest.h"
#include "test_util.h"

namespace casc {
namespace {

using testing::RandomArray;
using testing::RandomLabels;
using testing::Randomise;
using testing::TinyConfig;

// Closed-form per-block count, written independently of ParamLayout.
std::size_t BlockCountOracle(std::size_t d, std::size_t mult, std::size_t heads,
                             std::size_t rel, std::size_t kernel) {
  const std::size_t ln = 2 * d;
  const std::size_t ffn = ln + (d * mult * d + mult * d) + (mult * d * d + d);
  const std::size_t mhsa = ln + 4 * (d * d + d) + heads * (2 * rel + 1);
  const std::size_t conv = ln + (d * 2 * d + 2 * d) + (kernel * d + d) + ln + (d * d + d);
  return 2 * ffn + mhsa + conv + ln;
}

TEST_CASE("parameter accounting") {
  for (DecoderKind kind : {DecoderKind::kLstm, DecoderKind::kTar}) {
    ModelConfig c = TinyConfig(kind);
    ParamBreakdown b = CountParams(c);
    CHECK(b.total == b.causal_encoder + b.noncausal_encoder + b.predictor + b.joint);
    const std::size_t block = BlockCountOracle(8, 2, 2, 4, 3);
    CHECK(b.causal_encoder == (12 * 8 + 8) + 2 * block);
    CHECK(b.noncausal_encoder == block);
    CascadedModel m(c, 1);
    CHECK(m.CountParams().total == b.total);
    CHECK(m.params().NumValues() == b.total);
  }
  // LSTM decoder oracle: embed + gates + proj, joint enc/pred/out.
  ModelConfig c = TinyConfig(DecoderKind::kLstm);
  ParamBreakdown b = CountParams(c);
  CHECK(b.predictor == 6 * 5 + (5 * 24 + 6 * 24 + 24) + (6 * 24 + 6 * 24 + 24) + (6 * 7 + 7));
  CHECK(b.joint == (8 * 9 + 9) + 7 * 9 + (9 * 6 + 6));
}

TEST_CASE("tying saves exactly one J x V matrix") {
  ModelConfig tied = TinyConfig(DecoderKind::kTar);
  ModelConfig untied = tied;
  untied.tar_tied = false;
  CHECK(CountParams(tied).total + 8 * 6 == CountParams(untied).total);
  CascadedModel m(tied, 3);
  CHECK(m.tied());
  CHECK(m.params().Find("joint.out.w") == nullptr);
}

TEST_CASE("attention mask") {
  auto causal = AttentionMask(3, AttentionMode::kCausal);
  auto full = AttentionMask(3, AttentionMode::kNoncausal);
  int allowed = 0;
  for (uint8_t v : causal) allowed += v;
  CHECK(allowed == 6);
  allowed = 0;
  for (uint8_t v : full) allowed += v;
  CHECK(allowed == 9);
  auto big = AttentionMask(7, AttentionMode::kCausal);
  for (int i = 0; i < 7; ++i) {
    int row = 0;
    for (int j = 0; j < 7; ++j) row += big[i * 7 + j];
    CHECK(row == i + 1);
  }
  CHECK_THROWS_AS(AttentionMask(0, AttentionMode::kCausal), UsageError);
}

Array EncodeC(CascadedModel &m, const Array &f) {
  Tape t(false);
  return EncodeCausal(Graph{t}, m, f).value();
}

Array EncodeNc(CascadedModel &m, const Array &f) {
  Tape t(false);
  Graph g{t};
  return EncodeNoncausal(g, m, EncodeCausal(g, m, f)).value();
}

TEST_CASE("conformer block contract") {
  Rng rng(5);
  CascadedModel m(TinyConfig(DecoderKind::kLstm), 2);
  Randomise(m, rng);
  Tape t(false);
  Graph g{t};
  DiffArray x = t.Constant(RandomArray(rng, {5, 8}));
  for (auto mode : {AttentionMode::kCausal, AttentionMode::kNoncausal}) {
    DiffArray y = ConformerBlockForward(g, x, m.causal_blocks()[0], {2, 4}, mode);
    CHECK(y.shape() == x.shape());
  }
  CHECK_THROWS_AS(ConformerBlockForward(g, t.Constant(Array(Shape{5, 7})),
                                        m.causal_blocks()[0], {2, 4}, AttentionMode::kCausal),
                  UsageError);
  // Causality: rows <= s unchanged when later rows are zeroed.
  for (int s = 0; s < 5; ++s) {
    Array xz = x.value();
    for (int r = s + 1; r < 5; ++r)
      for (int c = 0; c < 8; ++c) xz(r, c) = 0;
    Array y1 = ConformerBlockForward(g, x, m.causal_blocks()[0], {2, 4}, AttentionMode::kCausal).value();
    Array y2 = ConformerBlockForward(g, t.Constant(xz), m.causal_blocks()[0], {2, 4},
                                     AttentionMode::kCausal).value();
    for (int r = 0; r <= s; ++r)
      for (int c = 0; c < 8; ++c) CHECK(y1(r, c) == y2(r, c));
  }
}

TEST_CASE("causal encoder: structural causality at every depth") {
  Rng rng(6);
  for (int depth = 1; depth <= 3; ++depth) {
    ModelConfig c = TinyConfig(DecoderKind::kLstm);
    c.causal_layers = depth;
    CascadedModel m(c, depth);
    Randomise(m, rng);
    Array f = RandomArray(rng, {11, 6});
    Array base = EncodeC(m, f);
    REQUIRE(base.rows() == 6);
    for (int t = 0; t < base.rows(); ++t) {
      Array g = f;
      for (int r = (t + 1) * c.subsample_factor; r < f.rows(); ++r)
        for (int k = 0; k < 6; ++k) g(r, k) += static_cast<Real>(rng.Normal(0, 5));
      Array out = EncodeC(m, g);
      for (int k = 0; k < 8; ++k) CHECK(out(t, k) == base(t, k));
    }
  }
}

TEST_CASE("causal encoder: prefix consistency") {
  Rng rng(7);
  CascadedModel m(TinyConfig(DecoderKind::kLstm), 4);
  Randomise(m, rng);
  Array f = RandomArray(rng, {13, 6});
  Array full = EncodeC(m, f);
  for (int t = 1; t <= 13; ++t) {
    Array prefix(Shape{t, 6});
    for (int r = 0; r < t; ++r)
      for (int k = 0; k < 6; ++k) prefix(r, k) = f(r, k);
    Array part = EncodeC(m, prefix);
    CHECK(part.rows() == (t + 1) / 2);
    // Only complete stacked frames are final.
    for (int r = 0; r < t / 2; ++r)
      for (int k = 0; k < 8; ++k) CHECK(std::abs(part(r, k) - full(r, k)) <= 1e-5);
  }
  Array one = EncodeC(m, Array(Shape{1, 6}, 0.5f));
  CHECK(one.rows() == 1);
  CHECK_THROWS_AS(EncodeC(m, Array(Shape{0, 6})), UsageError);
}

TEST_CASE("non-causal encoder") {
  Rng rng(8);
  ModelConfig c = TinyConfig(DecoderKind::kLstm);
  CascadedModel m(c, 4);
  Randomise(m, rng);
  Array f = RandomArray(rng, {10, 6});
  Array nc = EncodeNc(m, f);
  CHECK(nc.shape() == Shape{5, 8});
  Array g = f;
  g(9, 0) += 1.0f;
  CHECK(EncodeNc(m, g).row(0)[0] != nc.row(0)[0]);

  c.noncausal_layers = 0;
  CascadedModel flat(c, 4);
  Randomise(flat, rng);
  CHECK(EncodeNc(flat, f) == EncodeC(flat, f));

  // One causal encoder feeds both branches.
  Array c_before = EncodeC(m, f);
  m.params().Get("causal.block0.ffn1.up.w").value[0] += 0.5f;
  CHECK_FALSE(EncodeC(m, f) == c_before);
  CHECK_FALSE(EncodeNc(m, f) == nc);
  CHECK(EncodeNc(m, f) == EncodeNc(m, f));
}

TEST_CASE("LSTM predictor") {
  Rng rng(9);
  CascadedModel m(TinyConfig(DecoderKind::kLstm), 10);
  Randomise(m, rng);
  Tape t(false);
  Graph g{t};
  CHECK(LstmPredict(g, m, {}).shape() == Shape{1, 7});
  std::vector<int> y = {3, 1, 4};
  Array rows = LstmPredict(g, m, y).value();
  CHECK(rows.shape() == Shape{4, 7});
  for (int u = 0; u <= 3; ++u) {
    Array trunc = LstmPredict(g, m, std::span<const int>(y).first(u)).value();
    for (int k = 0; k < 7; ++k) CHECK(trunc(u, k) == rows(u, k));
  }
  std::vector<int> bad = {0};
  CHECK_THROWS_AS(LstmPredict(g, m, bad), UsageError);
  bad = {6};
  CHECK_THROWS_AS(LstmPredict(g, m, bad), UsageError);
}

TEST_CASE("TAR predictor invariants") {
  Rng rng(11);
  ModelConfig c = TinyConfig(DecoderKind::kTar);
  CascadedModel m(c, 12);
  Randomise(m, rng);
  Tape t(false);
  Graph g{t};

  SUBCASE("bounded context") {
    for (int trial = 0; trial < 50; ++trial) {
      std::vector<int> suffix = RandomLabels(rng, 5, 6);
      std::vector<int> p = RandomLabels(rng, static_cast<int>(rng.UniformInt(0, 6)), 6);
      std::vector<int> q = RandomLabels(rng, static_cast<int>(rng.UniformInt(0, 6)), 6);
      p.insert(p.end(), suffix.begin(), suffix.end());
      q.insert(q.end(), suffix.begin(), suffix.end());
      Array rp = TarPredict(g, m, p).value();
      Array rq = TarPredict(g, m, q).value();
      for (int k = 0; k < 8; ++k) CHECK(rp(rp.rows() - 1, k) == rq(rq.rows() - 1, k));
    }
  }
  SUBCASE("perturbation probe") {
    std::vector<int> y = {1, 2, 3, 4, 5, 1, 2, 3};
    const int u = 8;
    Array base = TarPredict(g, m, y).value();
    std::vector<int> far = y;
    far[u - 6] = far[u - 6] % 5 + 1;  // outside the last five labels
    std::vector<int> near = y;
    near[u - 1] = near[u - 1] % 5 + 1;
    Array rf = TarPredict(g, m, far).value();
    Array rn = TarPredict(g, m, near).value();
    bool same = true, differs = false;
    for (int k = 0; k < 8; ++k) {
      same = same && rf(u, k) == base(u, k);
      differs = differs || rn(u, k) != base(u, k);
    }
    CHECK(same);
    CHECK(differs);
  }
  SUBCASE("convex combination identity") {
    m.params().Get("pred.positions").value.Fill(0);
    Parameter &e = m.params().Get("pred.embed");
    for (int label = 1; label < 6; ++label) {
      std::vector<int> y(7, label);
      Array pooled = TarPooled(g, m, y).value();
      for (int k = 0; k < 8; ++k) CHECK(pooled(7, k) == e.value(label, k));
    }
  }
}

TEST_CASE("tied storage witness") {
  Rng rng(13);
  CascadedModel m(TinyConfig(DecoderKind::kTar), 14);
  Randomise(m, rng);
  std::vector<int> y = {2, 3};
  Array enc_in = RandomArray(rng, {1, 8});
  auto eval = [&]() {
    Tape t(false);
    Graph g{t};
    DiffArray pred = TarPredict(g, m, y);
    Array logits = Joint(g, m, t.Constant(enc_in), SliceRows(pred, 0, 1)).value();
    Array pooled = TarPooled(g, m, y).value();
    return std::make_pair(logits, pooled);
  };
  auto [l0, p0] = eval();
  CHECK(l0.shape() == Shape{1, 6});
  Parameter &embed = m.params().Get("pred.embed");
  for (int c = 0; c < 8; ++c) embed.value(3, c) += 0.25f;
  auto [l1, p1] = eval();
  CHECK(l1(0, 3) != l0(0, 3));
  CHECK(l1(0, 2) == l0(0, 2));
  CHECK_FALSE(p1 == p0);
}

TEST_CASE("incremental predictor matches the batch rows") {
  Rng rng(15);
  for (DecoderKind kind : {DecoderKind::kLstm, DecoderKind::kTar}) {
    CascadedModel m(TinyConfig(kind), 16);
    Randomise(m, rng);
    std::vector<int> y = RandomLabels(rng, 8, 6);
    Tape t(false);
    Graph g{t};
    Array rows = Predict(g, m, y).value();
    PredictorState s = InitialPredictorState(m);
    for (int u = 0; u <= 8; ++u) {
      for (int k = 0; k < rows.cols(); ++k) CHECK(s.out[k] == rows(u, k));
      if (u < 8) s = AdvancePredictor(m, s, y[u]);
    }
  }
}

TEST_CASE("decoder joint lookup agrees with the lattice") {
  Rng rng(17);
  for (DecoderKind kind : {DecoderKind::kLstm, DecoderKind::kTar}) {
    CascadedModel m(TinyConfig(kind), 18);
    Randomise(m, rng);
    std::vector<int> y = RandomLabels(rng, 3, 6);
    Array f = RandomArray(rng, {7, 6});
    Tape t(false);
    Graph g{t};
    DiffArray enc = EncodeCausal(g, m, f);
    Lattice lat = BuildLattice(g, m, enc, Predict(g, m, y));
    Array proj = ProjectEncoder(m, enc.value());
    PredictorState s = InitialPredictorState(m);
    for (int u = 0; u <= 3; ++u) {
      for (int tt = 0; tt < lat.frames; ++tt) {
        std::vector<double> lp = JointLogProbs(m, proj.row(tt), s);
        for (int k = 0; k < 6; ++k) CHECK(std::abs(lp[k] - lat.At(tt, u, k)) <= 1e-5);
      }
      if (u < 3) s = AdvancePredictor(m, s, y[u]);
    }
  }
}

TEST_CASE("full-size decoder accounting") {
  ModelConfig lstm;
  lstm.model_dim = 256;
  lstm.vocab_size = 1000;
  lstm.lstm_embed_dim = lstm.lstm_hidden_dim = lstm.pred_dim = lstm.joint_dim = 560;
  const double lstm_dec = static_cast<double>(CountParams(lstm).decoder());
  CHECK(std::abs(lstm_dec / 7.0e6 - 1) <= 0.05);
  const double table3[3][2] = {{768, 1.60e6}, {384, 0.65e6}, {192, 0.29e6}};
  for (auto [e, want] : table3) {
    ModelConfig tar = lstm;
    tar.decoder = DecoderKind::kTar;
    tar.tar_embed_dim = static_cast<int>(e);
    const double got = static_cast<double>(CountParams(tar).decoder());
    INFO("E=" << e << " count=" << got);
    CHECK(std::abs(got / want - 1) <= 0.10);
    CHECK(1 - got / lstm_dec >= 0.77);
  }
}

}  // namespace
}  // namespace casc
