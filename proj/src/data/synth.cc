// src/data/synth.cc

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

#include "casc/data/synth.h"

#include <limits>

#include "casc/base/errors.h"
#include "casc/base/rng.h"

CASC_BEGIN_NAMESPACE

namespace {
constexpr uint64_t kNoiseStream = 0x6e6f697365ULL;
constexpr uint64_t kTokenStream = 0x746f6b656eULL;
}  // namespace

void SynthTaskSpec::Validate() const {
  if (vocab_size < 2) throw UsageError("vocab_size must be at least 2");
  if (frames_per_token < 1) throw UsageError("frames_per_token must be at least 1");
  if (feature_dim < 1) throw UsageError("feature_dim must be at least 1");
  if (!(noise_std >= 0)) throw UsageError("noise_std must be non-negative");
}

Array TokenPrototype(const SynthTaskSpec &spec, int token) {
  if (token < 1 || token >= spec.vocab_size)
    throw UsageError("TokenPrototype: token " + std::to_string(token) + " out of range");
  Rng rng = Rng::Derive(spec.prototype_seed, static_cast<uint64_t>(token));
  Array proto(Shape{spec.frames_per_token, spec.feature_dim});
  for (Real &v : proto.vec()) v = static_cast<Real>(rng.Normal());
  return proto;
}

Utterance GenerateUtterance(const SynthTaskSpec &spec, int num_tokens, uint64_t seed) {
  spec.Validate();
  if (num_tokens < 1) throw UsageError("GenerateUtterance: num_tokens must be at least 1");
  Utterance utt;
  Rng token_rng = Rng::Derive(seed, kTokenStream);
  utt.tokens.resize(num_tokens);
  for (int &t : utt.tokens) t = static_cast<int>(token_rng.UniformInt(1, spec.vocab_size - 1));

  const int d = spec.frames_per_token, f = spec.feature_dim;
  utt.features = Array(Shape{num_tokens * d, f});
  Rng noise_rng = Rng::Derive(seed, kNoiseStream);
  for (int i = 0; i < num_tokens; ++i) {
    const Array proto = TokenPrototype(spec, utt.tokens[i]);
    for (int r = 0; r < d; ++r) {
      Real *dst = utt.features.row(i * d + r);
      for (int c = 0; c < f; ++c) {
        const double noise = spec.noise_std > 0 ? spec.noise_std * noise_rng.Normal() : 0.0;
        dst[c] = static_cast<Real>(proto(r, c) + noise);
      }
    }
  }
  return utt;
}

std::vector<Utterance> GenerateDataset(const SynthTaskSpec &spec, int count, int min_tokens,
                                       int max_tokens, uint64_t seed,
                                       const std::string &prefix) {
  if (count < 0) throw UsageError("GenerateDataset: negative count");
  if (min_tokens < 1 || max_tokens < min_tokens)
    throw UsageError("GenerateDataset: bad token length range");
  std::vector<Utterance> out;
  out.reserve(count);
  for (int i = 0; i < count; ++i) {
    Rng len_rng = Rng::Derive(seed, 2 * static_cast<uint64_t>(i));
    const int n = static_cast<int>(len_rng.UniformInt(min_tokens, max_tokens));
    Utterance u = GenerateUtterance(spec, n, Rng::Derive(seed, 2 * static_cast<uint64_t>(i) + 1).NextU64());
    u.id = prefix + "-" + std::to_string(i);
    out.push_back(std::move(u));
  }
  return out;
}

Array SpecAugment(const Array &features, int time_masks, int time_width, int freq_masks,
                  int freq_width, uint64_t seed) {
  const int t = features.rows(), f = features.cols();
  if (time_masks < 0 || freq_masks < 0 || time_width < 0 || freq_width < 0)
    throw UsageError("SpecAugment: negative mask parameter");
  if (time_width > t) throw UsageError("SpecAugment: time_width exceeds frame count");
  if (freq_width > f) throw UsageError("SpecAugment: freq_width exceeds feature dim");
  Array out = features;
  Rng rng(seed);
  for (int m = 0; m < time_masks; ++m) {
    const int start = static_cast<int>(rng.UniformInt(0, t - time_width));
    for (int r = start; r < start + time_width; ++r)
      for (int c = 0; c < f; ++c) out(r, c) = 0;
  }
  for (int m = 0; m < freq_masks; ++m) {
    const int start = static_cast<int>(rng.UniformInt(0, f - freq_width));
    for (int r = 0; r < t; ++r)
      for (int c = start; c < start + freq_width; ++c) out(r, c) = 0;
  }
  return out;
}

Array Subsample(const Array &features, int factor) {
  if (factor < 1) throw UsageError("Subsample: factor must be at least 1");
  const int t = features.rows(), f = features.cols();
  const int tp = (t + factor - 1) / factor;
  Array out(Shape{tp, f * factor});
  for (int r = 0; r < t; ++r) {
    Real *dst = out.row(r / factor) + (r % factor) * f;
    const Real *src = features.row(r);
    for (int c = 0; c < f; ++c) dst[c] = src[c];
  }
  return out;
}

Array Unstack(const Array &stacked, int factor, int num_frames) {
  if (factor < 1) throw UsageError("Unstack: factor must be at least 1");
  if (stacked.cols() % factor != 0) throw UsageError("Unstack: width not divisible by factor");
  const int f = stacked.cols() / factor;
  if (num_frames < 0 || num_frames > stacked.rows() * factor)
    throw UsageError("Unstack: num_frames out of range");
  Array out(Shape{num_frames, f});
  for (int r = 0; r < num_frames; ++r) {
    const Real *src = stacked.row(r / factor) + (r % factor) * f;
    for (int c = 0; c < f; ++c) out(r, c) = src[c];
  }
  return out;
}

std::vector<int> NearestPrototypeDecode(const SynthTaskSpec &spec, const Array &features) {
  const int d = spec.frames_per_token;
  if (features.cols() != spec.feature_dim || features.rows() % d != 0)
    throw UsageError("NearestPrototypeDecode: feature shape does not match the task");
  std::vector<Array> protos;
  for (int k = 1; k < spec.vocab_size; ++k) protos.push_back(TokenPrototype(spec, k));
  std::vector<int> out;
  for (int b = 0; b < features.rows() / d; ++b) {
    int best = 0;
    double best_dist = std::numeric_limits<double>::infinity();
    for (int k = 1; k < spec.vocab_size; ++k) {
      double dist = 0;
      for (int r = 0; r < d; ++r)
        for (int c = 0; c < spec.feature_dim; ++c) {
          const double e = features(b * d + r, c) - protos[k - 1](r, c);
          dist += e * e;
        }
      if (dist < best_dist) best_dist = dist, best = k;
    }
    out.push_back(best);
  }
  return out;
}

CASC_END_NAMESPACE
