// include/casc/model/encoder.h

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

#ifndef CASC_MODEL_ENCODER_H_
#define CASC_MODEL_ENCODER_H_

#include <cstdint>
#include <vector>

#include "casc/model/model.h"

CASC_BEGIN_NAMESPACE

enum class AttentionMode { kCausal, kNoncausal };

// Row-major [n x n] bytes, 1 = query i may attend to key j.
std::vector<uint8_t> AttentionMask(int num_frames, AttentionMode mode);

struct BlockShape {
  int num_heads = 4;
  int max_relative_position = 16;
};

// Macaron conformer block on x [T x D]: half FFN, masked MHSA with
// relative position bias, convolution module, half FFN, final layer norm.
// The causal mode masks attention to j <= i and left-pads the depthwise
// convolution, so row t depends on rows <= t only.
DiffArray ConformerBlockForward(const Graph &g, const DiffArray &x, const BlockW &w,
                                const BlockShape &shape, AttentionMode mode);

// features [T x F] -> [ceil(T/factor) x D].
DiffArray EncodeCausal(const Graph &g, CascadedModel &model, const Array &features);

// causal_out [T' x D] -> [T' x D]; identity when the model has no
// non-causal layers.
DiffArray EncodeNoncausal(const Graph &g, CascadedModel &model, const DiffArray &causal_out);

CASC_END_NAMESPACE

#endif  // CASC_MODEL_ENCODER_H_
