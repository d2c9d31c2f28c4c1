// include/casc/exp/train.h

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

#ifndef CASC_EXP_TRAIN_H_
#define CASC_EXP_TRAIN_H_

#include <functional>
#include <memory>
#include <string>
#include <vector>

#include "casc/data/synth.h"
#include "casc/exp/config.h"
#include "casc/model/model.h"

#include "json.hpp"

CASC_BEGIN_NAMESPACE

// One optimizer step. Losses are means over the batch; `loss` is the
// objective that was differentiated, without the weight-decay term.
struct StepMetrics {
  int step = 0;
  double learning_rate = 0;
  double loss = 0;
  double rnnt_causal = 0;
  double rnnt_noncausal = 0;
  double kd_causal = 0;      // 0 without a teacher
  double kd_noncausal = 0;
  double grad_norm = 0;      // before clipping
  int tokens = 0;            // reference labels in the batch
  int frames = 0;            // encoder frames in the batch
};

nlohmann::ordered_json StepMetricsToJson(const StepMetrics &m);

using MetricSink = std::function<void(const StepMetrics &)>;

// Learning rate at 1-based step s: linear warmup to the peak over
// warmup_steps, then constant or peak * sqrt(warmup_steps / s).
double LearningRate(const TrainConfig &config, int step);

// Loss terms for one batch on one tape, without an optimizer step.
struct BatchLoss {
  DiffArray objective;
  StepMetrics metrics;
};

// Objective: mean over utterances of
//   w * L_c + (1 - w) * L_n,  L_b = (1 - alpha) * RNNT_b + alpha * KD_b
// (alpha = 0 without a teacher). The teacher branch lattices are computed
// on their own non-recording tape and enter as constants.
BatchLoss ComputeBatchLoss(const Graph &g, CascadedModel &model,
                           const std::vector<const Utterance *> &batch, const TrainConfig &config,
                           CascadedModel *teacher);

// Adam with bias correction over the model's trainable parameters.
class AdamOptimizer {
 public:
  AdamOptimizer(CascadedModel &model, const TrainConfig &config);

  // Applies weight decay, clipping and one update from the current
  // Parameter::grad values. Returns the pre-clip gradient norm.
  double Step(double learning_rate);

 private:
  CascadedModel &model_;
  const TrainConfig config_;
  std::vector<Array> m_, v_;
  int t_ = 0;
};

struct TrainOptions {
  // Frozen teacher for distillation; required iff config.distill is set.
  CascadedModel *teacher = nullptr;
  // Starting parameters; default is a fresh model seeded by config.seed.
  std::unique_ptr<CascadedModel> init;
  MetricSink sink;
};

struct TrainResult {
  std::unique_ptr<CascadedModel> model;
  std::vector<StepMetrics> metrics;
};

// Batches are drawn from per-epoch permutations keyed by config.seed;
// dropout and augmentation draw from streams keyed by (seed, step). The
// result depends only on (config, seed, dataset). Throws DivergenceError
// on a non-finite loss, UsageError on an empty dataset, ConfigError when a
// teacher does not match the student's vocabulary, subsampling or feature
// width.
TrainResult Train(const TrainConfig &config, const std::vector<Utterance> &data,
                  TrainOptions options = {});

// Throws ConfigError when teacher and student cannot share lattices.
void CheckTeacherCompatible(const ModelConfig &teacher, const ModelConfig &student);

CASC_END_NAMESPACE

#endif  // CASC_EXP_TRAIN_H_
