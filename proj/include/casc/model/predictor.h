// include/casc/model/predictor.h

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

#ifndef CASC_MODEL_PREDICTOR_H_
#define CASC_MODEL_PREDICTOR_H_

#include <span>
#include <vector>

#include "casc/model/model.h"

CASC_BEGIN_NAMESPACE

// Predictor rows [(U+1) x P] for a label prefix of length U. Row u is the
// state after the first u labels; row 0 is the start state (blank input).
DiffArray LstmPredict(const Graph &g, CascadedModel &model, std::span<const int> labels);
DiffArray TarPredict(const Graph &g, CascadedModel &model, std::span<const int> labels);
DiffArray Predict(const Graph &g, CascadedModel &model, std::span<const int> labels);

// TAR weighted average before projection, [(U+1) x E].
DiffArray TarPooled(const Graph &g, CascadedModel &model, std::span<const int> labels);

// Last N labels before position u, oldest first, left-padded with blank.
std::vector<int> TarHistory(std::span<const int> labels, int u, int history);

// Joint logits for every (t, u) pair: enc [T x D], pred [U1 x P] ->
// [T*U1 x V], row t*U1 + u.
DiffArray JointLogits(const Graph &g, CascadedModel &model, const DiffArray &enc,
                      const DiffArray &pred);

// Single-pair joint: enc_row [1 x D], pred_row [1 x P] -> [1 x V].
DiffArray Joint(const Graph &g, CascadedModel &model, const DiffArray &enc_row,
                const DiffArray &pred_row);

// Incremental predictor used by the decoders. `out` is the predictor row
// for the labels consumed so far; `joint_in` is its joint projection.
struct PredictorState {
  std::vector<Array> h, c;   // LSTM only
  std::vector<int> history;  // TAR only, length N
  Array out;
  Array joint_in;
};

PredictorState InitialPredictorState(CascadedModel &model);
PredictorState AdvancePredictor(CascadedModel &model, const PredictorState &state, int label);

// Joint projection of encoder rows, [T x J], for repeated decoding lookups.
Array ProjectEncoder(CascadedModel &model, const Array &enc);
// Log-probabilities over V for one encoder projection row and state.
std::vector<double> JointLogProbs(CascadedModel &model, const Real *enc_proj_row,
                                  const PredictorState &state);

CASC_END_NAMESPACE

#endif  // CASC_MODEL_PREDICTOR_H_
