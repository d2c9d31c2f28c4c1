// include/casc/exp/config.h

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

#ifndef CASC_EXP_CONFIG_H_
#define CASC_EXP_CONFIG_H_

#include <optional>
#include <string>
#include <vector>

#include "casc/loss/distill.h"
#include "casc/model/config.h"

#include "json.hpp"

CASC_BEGIN_NAMESPACE

enum class LrDecay { kConstant, kInverseSqrt };

const char *LrDecayName(LrDecay decay);
LrDecay ParseLrDecay(const std::string &name);

// Time and frequency masking applied to training features only. All zero
// disables augmentation.
struct AugmentConfig {
  int time_masks = 0;
  int time_width = 0;
  int freq_masks = 0;
  int freq_width = 0;

  bool enabled() const { return time_masks > 0 || freq_masks > 0; }
  bool operator==(const AugmentConfig &) const = default;
};

// Distillation settings. `teacher` is a checkpoint path. Branch b uses
// KD weight alpha * b_scale, so a zero scale disables KD on that branch.
struct DistillConfig {
  KdConfig kd;
  std::string teacher;
  double causal_scale = 1.0;
  double noncausal_scale = 1.0;

  bool operator==(const DistillConfig &o) const {
    return kd.alpha == o.kd.alpha && kd.temperature == o.kd.temperature &&
           kd.mode == o.kd.mode && teacher == o.teacher && causal_scale == o.causal_scale &&
           noncausal_scale == o.noncausal_scale;
  }
};

// Everything a training run depends on besides the dataset. The schedule
// is linear warmup to learning_rate over warmup_steps, then either held
// constant or decayed as learning_rate * sqrt(warmup_steps / step).
struct TrainConfig {
  ModelConfig model;
  double learning_rate = 3e-4;
  int warmup_steps = 500;
  LrDecay lr_decay = LrDecay::kInverseSqrt;
  double adam_beta1 = 0.9;
  double adam_beta2 = 0.98;
  double adam_eps = 1e-9;
  // Gradient of 0.5 * weight_decay * |theta|^2 added to every trainable
  // parameter.
  double weight_decay = 1e-6;
  // Global gradient norm clip; 0 disables.
  double grad_clip = 5.0;
  double causal_weight = 0.8;
  int batch_size = 16;
  int steps = 5000;
  uint64_t seed = 1;
  AugmentConfig augment;
  std::optional<DistillConfig> distill;

  // Throws ConfigError naming the first offending key.
  void Validate() const;

  bool operator==(const TrainConfig &) const = default;
};

// Structured-text form. Keys mirror the field names; the model section is
// nested under "model", augmentation under "augment" and distillation
// under "distill". Parsing rejects unknown keys and wrong value types.
nlohmann::ordered_json ModelConfigToJson(const ModelConfig &c);
ModelConfig ModelConfigFromJson(const nlohmann::json &j);
nlohmann::ordered_json TrainConfigToJson(const TrainConfig &c);
TrainConfig TrainConfigFromJson(const nlohmann::json &j);

std::string TrainConfigToString(const TrainConfig &c);
TrainConfig TrainConfigFromString(const std::string &text);
TrainConfig LoadTrainConfig(const std::string &path);

// Applies "dotted.key=value" overrides on top of a config. The value is
// read as JSON when it parses, otherwise as a string.
TrainConfig ApplyOverrides(const TrainConfig &base, const std::vector<std::string> &overrides);

// Named starting points:
//   "full"   full-size accounting baseline, V=1000, D=256, 16+6 layers,
//            2-layer LSTM decoder at 560 (never trained here);
//   "desk"   D=144, 16+6 layers, V=16;
//   "toy"    the small teacher trained by the acceptance suite.
TrainConfig Preset(const std::string &name);
std::vector<std::string> PresetNames();

CASC_END_NAMESPACE

#endif  // CASC_EXP_CONFIG_H_
