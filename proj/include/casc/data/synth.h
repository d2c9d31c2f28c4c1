// include/casc/data/synth.h

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

#ifndef CASC_DATA_SYNTH_H_
#define CASC_DATA_SYNTH_H_

#include <cstdint>
#include <string>
#include <vector>

#include "casc/tensor/array.h"

CASC_BEGIN_NAMESPACE

struct SynthTaskSpec {
  int vocab_size = 16;        // includes blank (id 0)
  int frames_per_token = 4;   // d
  int feature_dim = 80;       // F
  double noise_std = 0.1;
  uint64_t prototype_seed = 1;

  void Validate() const;
};

struct Utterance {
  std::string id;
  Array features;             // [T x F]
  std::vector<int> tokens;    // ids in [1, V-1]

  int num_frames() const { return features.rows(); }
  double duration_seconds() const { return num_frames() / 100.0; }
};

// Prototype block [d x F] of a label. Depends only on (prototype_seed, token).
Array TokenPrototype(const SynthTaskSpec &spec, int token);

Utterance GenerateUtterance(const SynthTaskSpec &spec, int num_tokens, uint64_t seed);

// Utterance i has length uniform in [min_tokens, max_tokens] and seed
// derived from (seed, i); ids are "<prefix>-<i>".
std::vector<Utterance> GenerateDataset(const SynthTaskSpec &spec, int count, int min_tokens,
                                       int max_tokens, uint64_t seed,
                                       const std::string &prefix = "utt");

// Zeroes time_masks spans of width time_width and freq_masks bands of width
// freq_width. Start positions are uniform over the valid range.
Array SpecAugment(const Array &features, int time_masks, int time_width, int freq_masks,
                  int freq_width, uint64_t seed);

// Frame stacking: [T x F] -> [ceil(T/factor) x F*factor], zero tail padding.
Array Subsample(const Array &features, int factor);

// Inverse of Subsample for the first num_frames frames.
Array Unstack(const Array &stacked, int factor, int num_frames);

// Labels each d-frame block by its nearest prototype (squared distance).
std::vector<int> NearestPrototypeDecode(const SynthTaskSpec &spec, const Array &features);

CASC_END_NAMESPACE

#endif  // CASC_DATA_SYNTH_H_
