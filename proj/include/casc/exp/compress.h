// include/casc/exp/compress.h

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

#ifndef CASC_EXP_COMPRESS_H_
#define CASC_EXP_COMPRESS_H_

#include <cstddef>
#include <optional>
#include <string>

#include "casc/exp/config.h"

CASC_BEGIN_NAMESPACE

// Result of scaling a base architecture towards a parameter target.
struct CompressionSpec {
  double factor_percent = 0;
  std::size_t base_total = 0;
  std::size_t target_total = 0;    // (1 - factor/100) * base_total
  std::size_t achieved_total = 0;
  int model_dim = 0;
  int causal_layers = 0;
  int noncausal_layers = 0;
  int embedding_dim = 0;           // TAR embedding, 0 for LSTM decoders
  std::string stage;               // "identity", "cells" or "layers"

  double relative_error() const;
};

struct CompressOptions {
  // Switch the student to this decoder. A TAR decoder taken from an LSTM
  // base starts at embedding width model_dim.
  std::optional<DecoderKind> decoder;
  double tolerance = 0.05;
  // Cells may shrink to this fraction of the base width before layers are
  // removed.
  double min_width_fraction = 0.5;
};

struct CompressResult {
  TrainConfig config;
  CompressionSpec spec;
};

// Deterministic search, cells first and then layers:
//   1. model_dim steps down in multiples of 8 (divisible by num_heads) to
//      min_width_fraction of the base; the width closest to the target
//      wins and is accepted if within tolerance;
//   2. otherwise causal layers are removed one at a time; at each depth
//      the closest width is taken and the first depth within tolerance
//      wins.
// The non-causal encoder keeps its layer count and follows the shared
// width. A TAR embedding scales with model_dim (rounded to 8). The
// LSTM decoder, when kept, is not scaled. factor 0 returns the base
// unchanged. Throws InfeasibleError naming the closest achievable config
// when no candidate is within tolerance, UsageError unless
// 0 <= factor < 90.
CompressResult CompressConfig(const TrainConfig &base, double factor_percent,
                              const CompressOptions &options = {});

CASC_END_NAMESPACE

#endif  // CASC_EXP_COMPRESS_H_
