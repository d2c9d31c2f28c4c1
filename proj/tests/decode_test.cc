// tests/decode_test.cc

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

#include <algorithm>
#include <functional>

#include "casc/base/errors.h"
#include "casc/decode/decode.h"
#include "doctest.h"
#include "test_util.h"

namespace casc {
namespace {

using testing::RandomArray;
using testing::Randomise;
using testing::TinyConfig;

// Independent recursive edit distance (memoised).
int RecursiveDistance(const std::vector<int> &a, const std::vector<int> &b) {
  std::vector<std::vector<int>> memo(a.size() + 1, std::vector<int>(b.size() + 1, -1));
  std::function<int(std::size_t, std::size_t)> go = [&](std::size_t i, std::size_t j) {
    if (i == a.size()) return static_cast<int>(b.size() - j);
    if (j == b.size()) return static_cast<int>(a.size() - i);
    int &m = memo[i][j];
    if (m >= 0) return m;
    m = std::min({go(i + 1, j + 1) + (a[i] != b[j]), go(i + 1, j) + 1, go(i, j + 1) + 1});
    return m;
  };
  return go(0, 0);
}

std::vector<int> RandomSeq(Rng &rng) {
  std::vector<int> s(rng.UniformInt(0, 8));
  for (int &v : s) v = static_cast<int>(rng.UniformInt(1, 4));
  return s;
}

TEST_CASE("wer examples") {
  CHECK(Wer({1, 2, 3}, {1, 2, 3}).rate() == 0.0);
  EditCounts c = Wer({1, 2}, {1, 3});
  CHECK(c.substitutions == 1);
  CHECK(c.rate() == 0.5);
  c = Wer({1, 2, 3}, {2});
  CHECK(c.deletions == 2);
  CHECK(c.errors() == 2);
  CHECK(c.rate() == doctest::Approx(2.0 / 3));
  c = Wer({}, {4, 4});
  CHECK(c.insertions == 2);
  CHECK(c.rate() == 2.0);
}

TEST_CASE("wer against a recursive oracle") {
  Rng rng(41);
  for (int trial = 0; trial < 300; ++trial) {
    auto a = RandomSeq(rng), b = RandomSeq(rng), c = RandomSeq(rng);
    const int ab = Wer(a, b).errors();
    CHECK(ab == RecursiveDistance(a, b));
    CHECK(ab == Wer(b, a).errors());
    CHECK(Wer(a, c).errors() <= ab + Wer(b, c).errors());
    EditCounts e = Wer(a, b);
    // Counts are consistent with the lengths.
    CHECK(static_cast<int>(b.size()) ==
          static_cast<int>(a.size()) - e.deletions + e.insertions);
  }
}

struct Instance {
  std::unique_ptr<CascadedModel> model;
  Array features;
};

Instance RandomInstance(Rng &rng, DecoderKind kind) {
  Instance in;
  in.model = std::make_unique<CascadedModel>(TinyConfig(kind), rng.NextU64());
  Randomise(*in.model, rng, rng.Uniform(0.2, 1.0));
  // Bias the blank so outputs are neither empty nor saturated.
  in.model->joint().out_bias->value[0] += static_cast<Real>(rng.Uniform(-1, 3));
  in.features = RandomArray(rng, {static_cast<int>(rng.UniformInt(1, 14)), 6});
  return in;
}

TEST_CASE("all-blank model decodes to nothing") {
  CascadedModel m(TinyConfig(DecoderKind::kLstm), 1);
  m.joint().out_bias->value[0] = 100;
  Rng rng(1);
  Array f = RandomArray(rng, {9, 6});
  for (DecodeMode mode : {DecodeMode::kStreaming, DecodeMode::kNonstreaming}) {
    CHECK(GreedyDecode(m, f, mode).tokens.empty());
    CHECK(BeamDecode(m, f, 4, mode).tokens.empty());
  }
}

TEST_CASE("beam 1 reproduces greedy exactly") {
  Rng rng(42);
  for (int trial = 0; trial < 100; ++trial) {
    Instance in = RandomInstance(rng, trial % 2 ? DecoderKind::kTar : DecoderKind::kLstm);
    const DecodeMode mode = trial % 3 ? DecodeMode::kNonstreaming : DecodeMode::kStreaming;
    DecodeResult g = GreedyDecode(*in.model, in.features, mode);
    DecodeResult b = BeamDecode(*in.model, in.features, 1, mode);
    CHECK(g.tokens == b.tokens);
    CHECK(g.log_score == b.log_score);
    CHECK(g.log_score <= 0);
  }
}

TEST_CASE("beam search score and determinism") {
  Rng rng(43);
  int improved = 0;
  for (int trial = 0; trial < 60; ++trial) {
    Instance in = RandomInstance(rng, trial % 2 ? DecoderKind::kTar : DecoderKind::kLstm);
    const Array enc = EncodeForMode(*in.model, in.features, DecodeMode::kNonstreaming);
    const double greedy = GreedySearch(*in.model, enc).log_score;
    const double b4 = BeamSearch(*in.model, enc, 4).log_score;
    CHECK(b4 >= greedy);
    double prev = greedy;
    for (int beam = 2; beam <= 6; ++beam) {
      const double s = BeamSearch(*in.model, enc, beam).log_score;
      CHECK(s >= prev);
      prev = s;
    }
    improved += b4 > greedy;
    DecodeResult again = BeamSearch(*in.model, enc, 4);
    CHECK(again.log_score == b4);
    CHECK(again.tokens == BeamSearch(*in.model, enc, 4).tokens);
  }
  CHECK(improved > 0);
  CHECK_THROWS_AS(BeamSearch(*RandomInstance(rng, DecoderKind::kLstm).model,
                             Array(Shape{1, 8}), 0),
                  UsageError);
}

TEST_CASE("streaming decode ignores the non-causal encoder") {
  Rng rng(44);
  for (int trial = 0; trial < 10; ++trial) {
    Instance in = RandomInstance(rng, DecoderKind::kTar);
    DecodeResult before = BeamDecode(*in.model, in.features, 4, DecodeMode::kStreaming);
    DecodeResult g_before = GreedyDecode(*in.model, in.features, DecodeMode::kStreaming);
    for (Parameter &p : in.model->params().all())
      if (p.name.rfind("noncausal.", 0) == 0)
        for (Real &v : p.value.vec()) v = static_cast<Real>(rng.Normal(0, 2));
    CHECK(BeamDecode(*in.model, in.features, 4, DecodeMode::kStreaming).tokens == before.tokens);
    CHECK(GreedyDecode(*in.model, in.features, DecodeMode::kStreaming).tokens == g_before.tokens);
  }
}

TEST_CASE("streaming recognizer matches offline first and second pass") {
  Rng rng(45);
  for (int trial = 0; trial < 20; ++trial) {
    Instance in = RandomInstance(rng, trial % 2 ? DecoderKind::kTar : DecoderKind::kLstm);
    StreamingRecognizer rec(*in.model);
    const int f = in.features.cols();
    for (int r = 0; r < in.features.rows();) {
      const int n = std::min<int>(static_cast<int>(rng.UniformInt(1, 3)), in.features.rows() - r);
      Array chunk(Shape{n, f});
      for (int i = 0; i < n; ++i)
        for (int k = 0; k < f; ++k) chunk(i, k) = in.features(r + i, k);
      rec.AcceptFrames(chunk);
      r += n;
    }
    DecodeResult first = rec.Finish();
    CHECK(first.tokens == GreedyDecode(*in.model, in.features, DecodeMode::kStreaming).tokens);
    CHECK(rec.SecondPass(4).tokens ==
          BeamDecode(*in.model, in.features, 4, DecodeMode::kNonstreaming).tokens);
  }
}

}  // namespace
}  // namespace casc
