// src/model/predictor.cc

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

#include "casc/model/predictor.h"

#include <cmath>
#include <limits>
#include <string>

#include "casc/base/errors.h"
#include "casc/simd/kernels.h"
#include "casc/tensor/ops.h"

CASC_BEGIN_NAMESPACE

namespace {

void CheckLabels(const ModelConfig &c, std::span<const int> labels) {
  for (int y : labels) {
    if (y < 1 || y >= c.vocab_size) {
      throw UsageError("label " + std::to_string(y) + " outside [1, " +
                       std::to_string(c.vocab_size - 1) + "]");
    }
  }
}

struct LstmCellOut {
  DiffArray h, c;
};

// gates = x_proj + h W_hh with x_proj = x W_ih + b precomputed by the
// caller; gate order i, f, g, o.
LstmCellOut LstmCell(const Graph &g, const LstmLayerW &w, const DiffArray &x_proj,
                     const DiffArray &h, const DiffArray &c) {
  const int hidden = h.cols();
  DiffArray gates = Add(x_proj, MatMul(h, g.P(w.w_hh)));
  DiffArray i = Sigmoid(SliceCols(gates, 0, hidden));
  DiffArray f = Sigmoid(SliceCols(gates, hidden, 2 * hidden));
  DiffArray cand = Tanh(SliceCols(gates, 2 * hidden, 3 * hidden));
  DiffArray o = Sigmoid(SliceCols(gates, 3 * hidden, 4 * hidden));
  DiffArray c_next = Add(Mul(f, c), Mul(i, cand));
  return {Mul(o, Tanh(c_next)), c_next};
}

DiffArray InputProjection(const Graph &g, const LstmLayerW &w, const DiffArray &x) {
  return AddBias(MatMul(x, g.P(w.w_ih)), g.P(w.b));
}

DiffArray PredictorOutput(const Graph &g, CascadedModel &model, const DiffArray &top) {
  const PredictorW &p = model.predictor();
  return Linear(top, g.P(p.proj.w), g.P(p.proj.b));
}

DiffArray TarOutput(const Graph &g, CascadedModel &model, const DiffArray &pooled) {
  const PredictorW &p = model.predictor();
  DiffArray h = Linear(pooled, g.P(p.proj.w), g.P(p.proj.b));
  return Swish(LayerNormRows(h, g.P(p.ln.gamma), g.P(p.ln.beta)));
}

// Joint-side projection of predictor rows: pred W_pred (LSTM) or the rows
// themselves (TAR, where the predictor projection already maps into J).
DiffArray PredictorJointInput(const Graph &g, CascadedModel &model, const DiffArray &pred) {
  const JointW &j = model.joint();
  return j.pred ? MatMul(pred, g.P(j.pred)) : pred;
}

DiffArray JointOutput(const Graph &g, CascadedModel &model, const DiffArray &hidden) {
  const JointW &j = model.joint();
  DiffArray logits = model.tied() ? MatMul(hidden, g.P(model.predictor().embed), true)
                                  : MatMul(hidden, g.P(j.out));
  return AddBias(logits, g.P(j.out_bias));
}

}  // namespace

std::vector<int> TarHistory(std::span<const int> labels, int u, int history) {
  std::vector<int> out(history, 0);
  for (int i = 0; i < history; ++i) {
    const int idx = u - history + i;
    if (idx >= 0) out[i] = labels[idx];
  }
  return out;
}

DiffArray LstmPredict(const Graph &g, CascadedModel &model, std::span<const int> labels) {
  const ModelConfig &cfg = model.config();
  if (cfg.decoder != DecoderKind::kLstm) throw UsageError("LstmPredict on a TAR model");
  CheckLabels(cfg, labels);
  const PredictorW &p = model.predictor();
  const int steps = static_cast<int>(labels.size()) + 1;
  std::vector<int> inputs(steps, 0);
  for (int u = 1; u < steps; ++u) inputs[u] = labels[u - 1];
  DiffArray seq = GatherRows(g.P(p.embed), inputs);
  const int hidden = cfg.lstm_hidden_dim;
  for (const LstmLayerW &w : p.lstm) {
    DiffArray x_proj = InputProjection(g, w, seq);
    DiffArray h = g.tape.Constant(Array(Shape{1, hidden}));
    DiffArray c = h;
    std::vector<DiffArray> outs;
    for (int t = 0; t < steps; ++t) {
      LstmCellOut next = LstmCell(g, w, SliceRows(x_proj, t, t + 1), h, c);
      h = next.h;
      c = next.c;
      outs.push_back(h);
    }
    seq = outs.size() == 1 ? outs[0] : ConcatRows(outs);
  }
  return PredictorOutput(g, model, seq);
}

namespace {

// Pooled rows for flattened histories, N ids per row.
DiffArray TarPoolHistories(const Graph &g, CascadedModel &model, const std::vector<int> &ids) {
  const PredictorW &p = model.predictor();
  const int n = model.config().tar_history;
  std::vector<int> slots(ids.size());
  for (std::size_t i = 0; i < ids.size(); ++i) slots[i] = static_cast<int>(i % n);
  DiffArray x = Add(GatherRows(g.P(p.embed), ids), GatherRows(g.P(p.positions), slots));
  DiffArray weights = MeanRows(SoftmaxRows(g.P(p.head_logits)));
  return AnchoredWeightedSum(x, weights, n);
}

}  // namespace

DiffArray TarPooled(const Graph &g, CascadedModel &model, std::span<const int> labels) {
  const ModelConfig &cfg = model.config();
  if (cfg.decoder != DecoderKind::kTar) throw UsageError("TarPredict on an LSTM model");
  CheckLabels(cfg, labels);
  const int n = cfg.tar_history;
  const int rows = static_cast<int>(labels.size()) + 1;
  std::vector<int> ids;
  ids.reserve(static_cast<std::size_t>(rows) * n);
  for (int u = 0; u < rows; ++u)
    for (int id : TarHistory(labels, u, n)) ids.push_back(id);
  return TarPoolHistories(g, model, ids);
}

DiffArray TarPredict(const Graph &g, CascadedModel &model, std::span<const int> labels) {
  return TarOutput(g, model, TarPooled(g, model, labels));
}

DiffArray Predict(const Graph &g, CascadedModel &model, std::span<const int> labels) {
  return model.config().decoder == DecoderKind::kLstm ? LstmPredict(g, model, labels)
                                                      : TarPredict(g, model, labels);
}

DiffArray JointLogits(const Graph &g, CascadedModel &model, const DiffArray &enc,
                      const DiffArray &pred) {
  const ModelConfig &cfg = model.config();
  if (enc.value().rank() != 2 || enc.cols() != cfg.model_dim)
    throw UsageError("JointLogits: encoder width " + ShapeString(enc.shape()));
  if (pred.value().rank() != 2 || pred.cols() != cfg.PredictorOutputDim())
    throw UsageError("JointLogits: predictor width " + ShapeString(pred.shape()));
  const JointW &j = model.joint();
  DiffArray a = Linear(enc, g.P(j.enc.w), g.P(j.enc.b));
  DiffArray b = PredictorJointInput(g, model, pred);
  return JointOutput(g, model, Tanh(OuterAddRows(a, b)));
}

DiffArray Joint(const Graph &g, CascadedModel &model, const DiffArray &enc_row,
                const DiffArray &pred_row) {
  if (enc_row.rows() != 1 || pred_row.rows() != 1)
    throw UsageError("Joint: expects single rows");
  return JointLogits(g, model, enc_row, pred_row);
}

PredictorState InitialPredictorState(CascadedModel &model) {
  const ModelConfig &cfg = model.config();
  PredictorState s;
  if (cfg.decoder == DecoderKind::kLstm) {
    for (int l = 0; l < cfg.lstm_layers; ++l) {
      s.h.emplace_back(Shape{1, cfg.lstm_hidden_dim});
      s.c.emplace_back(Shape{1, cfg.lstm_hidden_dim});
    }
    return AdvancePredictor(model, s, 0);
  }
  s.history.assign(cfg.tar_history, 0);
  Tape tape(false);
  Graph g{tape};
  s.out = TarOutput(g, model, TarPoolHistories(g, model, s.history)).value();
  s.joint_in = s.out;
  return s;
}

PredictorState AdvancePredictor(CascadedModel &model, const PredictorState &state, int label) {
  const ModelConfig &cfg = model.config();
  Tape tape(false);
  Graph g{tape};
  PredictorState next;
  if (cfg.decoder == DecoderKind::kLstm) {
    // label 0 only as the start input from InitialPredictorState.
    if (label < 0 || label >= cfg.vocab_size) throw UsageError("AdvancePredictor: bad label");
    const PredictorW &p = model.predictor();
    const int one[1] = {label};
    DiffArray x = GatherRows(g.P(p.embed), one);
    for (std::size_t l = 0; l < p.lstm.size(); ++l) {
      LstmCellOut o = LstmCell(g, p.lstm[l], InputProjection(g, p.lstm[l], x),
                               tape.Constant(state.h[l]), tape.Constant(state.c[l]));
      next.h.push_back(o.h.value());
      next.c.push_back(o.c.value());
      x = o.h;
    }
    DiffArray out = PredictorOutput(g, model, x);
    next.out = out.value();
    next.joint_in = PredictorJointInput(g, model, out).value();
    return next;
  }
  if (label < 1 || label >= cfg.vocab_size) throw UsageError("AdvancePredictor: bad label");
  next.history = state.history;
  next.history.erase(next.history.begin());
  next.history.push_back(label);
  next.out = TarOutput(g, model, TarPoolHistories(g, model, next.history)).value();
  next.joint_in = next.out;
  return next;
}

Array ProjectEncoder(CascadedModel &model, const Array &enc) {
  Tape tape(false);
  Graph g{tape};
  const JointW &j = model.joint();
  return Linear(tape.Constant(enc), g.P(j.enc.w), g.P(j.enc.b)).value();
}

std::vector<double> JointLogProbs(CascadedModel &model, const Real *enc_proj_row,
                                  const PredictorState &state) {
  const ModelConfig &cfg = model.config();
  const int jdim = cfg.JointDim(), v = cfg.vocab_size;
  std::vector<Real> hidden(jdim);
  const Real *b = state.joint_in.data();
  for (int i = 0; i < jdim; ++i) hidden[i] = std::tanh(enc_proj_row[i] + b[i]);
  std::vector<Real> logits(v, Real(0));
  if (model.tied()) {
    const Array &embed = model.predictor().embed->value;
    for (int k = 0; k < v; ++k) logits[k] = simd::Dot(hidden.data(), embed.row(k), jdim);
  } else {
    simd::VecMat(hidden.data(), jdim, model.joint().out->value.data(), v, logits.data(), v);
  }
  const Array &bias = model.joint().out_bias->value;
  double mx = -std::numeric_limits<double>::infinity();
  std::vector<double> out(v);
  for (int k = 0; k < v; ++k) {
    out[k] = static_cast<double>(logits[k] + bias[k]);
    mx = std::max(mx, out[k]);
  }
  double s = 0;
  for (double x : out) s += std::exp(x - mx);
  const double lse = mx + std::log(s);
  for (double &x : out) x -= lse;
  return out;
}

CASC_END_NAMESPACE
