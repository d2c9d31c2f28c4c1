// src/model/encoder.cc

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

#include "casc/model/encoder.h"

#include <cmath>
#include <string>

#include "casc/base/errors.h"
#include "casc/data/synth.h"
#include "casc/tensor/ops.h"

CASC_BEGIN_NAMESPACE

namespace {

DiffArray Ln(const Graph &g, const DiffArray &x, const LayerNormW &w) {
  return LayerNormRows(x, g.P(w.gamma), g.P(w.beta));
}

DiffArray Lin(const Graph &g, const DiffArray &x, const LinearW &w) {
  return w.b ? Linear(x, g.P(w.w), g.P(w.b)) : MatMul(x, g.P(w.w));
}

DiffArray FeedForward(const Graph &g, const DiffArray &x, const FfnW &w) {
  DiffArray h = Swish(Lin(g, Ln(g, x, w.ln), w.up));
  return g.MaybeDropout(Lin(g, g.MaybeDropout(h), w.down));
}

DiffArray SelfAttention(const Graph &g, const DiffArray &x, const MhsaW &w,
                        const BlockShape &shape, AttentionMode mode) {
  const int frames = x.rows(), d = x.cols();
  const int dh = d / shape.num_heads;
  const std::vector<uint8_t> mask = AttentionMask(frames, mode);
  DiffArray xn = Ln(g, x, w.ln);
  DiffArray q = Lin(g, xn, w.q), k = Lin(g, xn, w.k), v = Lin(g, xn, w.v);
  DiffArray table = g.P(w.rel_bias);
  const double scale = 1.0 / std::sqrt(static_cast<double>(dh));
  std::vector<DiffArray> heads;
  for (int h = 0; h < shape.num_heads; ++h) {
    DiffArray qh = SliceCols(q, h * dh, (h + 1) * dh);
    DiffArray kh = SliceCols(k, h * dh, (h + 1) * dh);
    DiffArray vh = SliceCols(v, h * dh, (h + 1) * dh);
    DiffArray scores =
        Add(Scale(MatMul(qh, kh, true), scale), RelativePositionBias(table, h, frames));
    heads.push_back(MatMul(SoftmaxRows(scores, 1.0, mask), vh));
  }
  DiffArray merged = heads.size() == 1 ? heads[0] : ConcatCols(heads);
  return g.MaybeDropout(Lin(g, merged, w.o));
}

DiffArray ConvModule(const Graph &g, const DiffArray &x, const ConvW &w, AttentionMode mode) {
  DiffArray h = Glu(Lin(g, Ln(g, x, w.ln), w.pointwise1));
  h = DepthwiseConvTime(h, g.P(w.depthwise.w), g.P(w.depthwise.b),
                        mode == AttentionMode::kCausal);
  h = Swish(Ln(g, h, w.mid_ln));
  return g.MaybeDropout(Lin(g, h, w.pointwise2));
}

}  // namespace

std::vector<uint8_t> AttentionMask(int num_frames, AttentionMode mode) {
  if (num_frames < 1) throw UsageError("AttentionMask: num_frames must be at least 1");
  std::vector<uint8_t> m(static_cast<std::size_t>(num_frames) * num_frames, 1);
  if (mode == AttentionMode::kCausal) {
    for (int i = 0; i < num_frames; ++i)
      for (int j = i + 1; j < num_frames; ++j) m[static_cast<std::size_t>(i) * num_frames + j] = 0;
  }
  return m;
}

DiffArray ConformerBlockForward(const Graph &g, const DiffArray &x, const BlockW &w,
                                const BlockShape &shape, AttentionMode mode) {
  const int d = w.final_ln.gamma->value.cols();
  if (x.value().rank() != 2 || x.cols() != d) {
    throw UsageError("ConformerBlockForward: input " + ShapeString(x.shape()) +
                     " does not match model dim " + std::to_string(d));
  }
  DiffArray y = Add(x, Scale(FeedForward(g, x, w.ffn1), 0.5));
  y = Add(y, SelfAttention(g, y, w.mhsa, shape, mode));
  y = Add(y, ConvModule(g, y, w.conv, mode));
  y = Add(y, Scale(FeedForward(g, y, w.ffn2), 0.5));
  return Ln(g, y, w.final_ln);
}

DiffArray EncodeCausal(const Graph &g, CascadedModel &model, const Array &features) {
  const ModelConfig &c = model.config();
  if (features.rank() != 2 || features.rows() < 1)
    throw UsageError("EncodeCausal: empty feature sequence");
  if (features.cols() != c.feature_dim) {
    throw UsageError("EncodeCausal: feature dim " + std::to_string(features.cols()) +
                     " does not match config " + std::to_string(c.feature_dim));
  }
  DiffArray x = g.tape.Constant(Subsample(features, c.subsample_factor));
  x = Lin(g, x, model.input_proj());
  const BlockShape shape{c.num_heads, c.max_relative_position};
  for (const BlockW &b : model.causal_blocks())
    x = ConformerBlockForward(g, x, b, shape, AttentionMode::kCausal);
  return x;
}

DiffArray EncodeNoncausal(const Graph &g, CascadedModel &model, const DiffArray &causal_out) {
  const ModelConfig &c = model.config();
  if (causal_out.value().rank() != 2 || causal_out.cols() != c.model_dim)
    throw UsageError("EncodeNoncausal: input width does not match model dim");
  DiffArray x = causal_out;
  const BlockShape shape{c.num_heads, c.max_relative_position};
  for (const BlockW &b : model.noncausal_blocks())
    x = ConformerBlockForward(g, x, b, shape, AttentionMode::kNoncausal);
  return x;
}

CASC_END_NAMESPACE
