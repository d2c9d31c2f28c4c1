// include/casc/model/config.h

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

#ifndef CASC_MODEL_CONFIG_H_
#define CASC_MODEL_CONFIG_H_

#include <string>

#include "casc/base/real.h"

CASC_BEGIN_NAMESPACE

enum class DecoderKind { kLstm, kTar };

const char *DecoderKindName(DecoderKind kind);
DecoderKind ParseDecoderKind(const std::string &name);

// Architecture of a cascaded conformer transducer. Widths that belong to
// one decoder flavour are ignored by the other.
struct ModelConfig {
  // Frontend and encoders.
  int feature_dim = 80;
  int subsample_factor = 4;
  int model_dim = 144;         // D
  int causal_layers = 16;
  int noncausal_layers = 6;
  int num_heads = 4;
  int conv_kernel = 7;
  int ffn_multiplier = 4;
  int max_relative_position = 16;

  int vocab_size = 16;         // V, blank is id 0
  DecoderKind decoder = DecoderKind::kLstm;

  // LSTM predictor.
  int lstm_embed_dim = 320;    // E
  int lstm_hidden_dim = 320;   // H
  int lstm_layers = 2;
  int pred_dim = 320;          // P, output projection width
  int joint_dim = 320;         // J

  // TAR predictor. Joint width is tar_embed_dim when tied.
  int tar_embed_dim = 144;
  int tar_history = 5;         // N
  int tar_heads = 4;
  bool tar_tied = true;

  double dropout = 0.1;

  // Width of predictor output rows.
  int PredictorOutputDim() const;
  // Width of the joint hidden layer.
  int JointDim() const;

  // Throws ConfigError naming the first offending field.
  void Validate() const;

  bool operator==(const ModelConfig &) const = default;
};

CASC_END_NAMESPACE

#endif  // CASC_MODEL_CONFIG_H_
