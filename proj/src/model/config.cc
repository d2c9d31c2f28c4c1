// src/model/config.cc

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

#include "casc/model/config.h"

#include "casc/base/errors.h"

CASC_BEGIN_NAMESPACE

const char *DecoderKindName(DecoderKind kind) {
  return kind == DecoderKind::kLstm ? "lstm" : "tar";
}

DecoderKind ParseDecoderKind(const std::string &name) {
  if (name == "lstm") return DecoderKind::kLstm;
  if (name == "tar") return DecoderKind::kTar;
  throw ConfigError("decoder must be \"lstm\" or \"tar\", got \"" + name + "\"");
}

int ModelConfig::PredictorOutputDim() const {
  return decoder == DecoderKind::kLstm ? pred_dim : tar_embed_dim;
}

int ModelConfig::JointDim() const {
  return decoder == DecoderKind::kLstm ? joint_dim : tar_embed_dim;
}

namespace {
void RequireAtLeast(const char *field, int value, int min) {
  if (value < min) {
    throw ConfigError(std::string(field) + " must be >= " + std::to_string(min) + ", got " +
                      std::to_string(value));
  }
}
}  // namespace

void ModelConfig::Validate() const {
  RequireAtLeast("feature_dim", feature_dim, 1);
  RequireAtLeast("subsample_factor", subsample_factor, 1);
  RequireAtLeast("model_dim", model_dim, 1);
  RequireAtLeast("causal_layers", causal_layers, 1);
  RequireAtLeast("noncausal_layers", noncausal_layers, 0);
  RequireAtLeast("num_heads", num_heads, 1);
  RequireAtLeast("conv_kernel", conv_kernel, 1);
  RequireAtLeast("ffn_multiplier", ffn_multiplier, 1);
  RequireAtLeast("max_relative_position", max_relative_position, 0);
  RequireAtLeast("vocab_size", vocab_size, 2);
  if (model_dim % num_heads != 0) {
    throw ConfigError("model_dim " + std::to_string(model_dim) +
                      " is not divisible by num_heads " + std::to_string(num_heads));
  }
  if (noncausal_layers > 0 && conv_kernel % 2 == 0) {
    throw ConfigError("conv_kernel must be odd when noncausal_layers > 0");
  }
  if (decoder == DecoderKind::kLstm) {
    RequireAtLeast("lstm_embed_dim", lstm_embed_dim, 1);
    RequireAtLeast("lstm_hidden_dim", lstm_hidden_dim, 1);
    RequireAtLeast("lstm_layers", lstm_layers, 1);
    RequireAtLeast("pred_dim", pred_dim, 1);
    RequireAtLeast("joint_dim", joint_dim, 1);
  } else {
    RequireAtLeast("tar_embed_dim", tar_embed_dim, 1);
    RequireAtLeast("tar_history", tar_history, 1);
    RequireAtLeast("tar_heads", tar_heads, 1);
  }
  if (!(dropout >= 0 && dropout < 1)) throw ConfigError("dropout must be in [0, 1)");
}

CASC_END_NAMESPACE
