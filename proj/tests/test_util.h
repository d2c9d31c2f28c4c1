// tests/test_util.h

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

#ifndef CASC_TESTS_TEST_UTIL_H_
#define CASC_TESTS_TEST_UTIL_H_

#include <vector>

#include "casc/base/rng.h"
#include "casc/model/config.h"
#include "casc/tensor/array.h"

CASC_BEGIN_NAMESPACE
namespace testing {

// Small cascade for fast structural tests.
inline ModelConfig TinyConfig(DecoderKind decoder) {
  ModelConfig c;
  c.feature_dim = 6;
  c.subsample_factor = 2;
  c.model_dim = 8;
  c.num_heads = 2;
  c.causal_layers = 2;
  c.noncausal_layers = 1;
  c.conv_kernel = 3;
  c.ffn_multiplier = 2;
  c.max_relative_position = 4;
  c.vocab_size = 6;
  c.decoder = decoder;
  c.lstm_embed_dim = 5;
  c.lstm_hidden_dim = 6;
  c.lstm_layers = 2;
  c.pred_dim = 7;
  c.joint_dim = 9;
  c.tar_embed_dim = 8;
  c.tar_history = 5;
  c.tar_heads = 4;
  c.dropout = 0.0;
  return c;
}

inline Array RandomArray(Rng &rng, Shape shape, double sd = 1.0) {
  Array a(std::move(shape));
  for (Real &v : a.vec()) v = static_cast<Real>(rng.Normal(0, sd));
  return a;
}

inline std::vector<int> RandomLabels(Rng &rng, int n, int vocab) {
  std::vector<int> y(n);
  for (int &v : y) v = static_cast<int>(rng.UniformInt(1, vocab - 1));
  return y;
}

// Random parameters everywhere, including the zero-initialised ones.
template <typename Model>
void Randomise(Model &m, Rng &rng, double sd = 0.3) {
  for (auto &p : m.params().all())
    for (Real &v : p.value.vec()) v += static_cast<Real>(rng.Normal(0, sd));
}

}  // namespace testing
CASC_END_NAMESPACE

#endif  // CASC_TESTS_TEST_UTIL_H_
