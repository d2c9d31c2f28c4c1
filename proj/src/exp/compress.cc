// src/exp/compress.cc

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

#include "casc/exp/compress.h"

#include <cmath>
#include <sstream>
#include <vector>

#include "casc/base/errors.h"
#include "casc/model/model.h"

CASC_BEGIN_NAMESPACE

double CompressionSpec::relative_error() const {
  return target_total == 0 ? 0.0
                           : static_cast<double>(achieved_total) / target_total - 1.0;
}

namespace {

int RoundTo8(double x) { return std::max(8, static_cast<int>(std::lround(x / 8.0)) * 8); }

struct Candidate {
  ModelConfig model;
  std::size_t total = 0;
};

}  // namespace

CompressResult CompressConfig(const TrainConfig &base, double factor_percent,
                              const CompressOptions &options) {
  if (!(factor_percent >= 0 && factor_percent < 90))
    throw UsageError("compression factor must be in [0, 90), got " + std::to_string(factor_percent));
  base.Validate();

  ModelConfig start = base.model;
  if (options.decoder && *options.decoder != start.decoder) {
    start.decoder = *options.decoder;
    if (start.decoder == DecoderKind::kTar) start.tar_embed_dim = start.model_dim;
  }
  const std::size_t base_total = CountParams(base.model).total;
  const std::size_t target =
      static_cast<std::size_t>(std::llround(base_total * (1.0 - factor_percent / 100.0)));

  auto make = [&](int dim, int layers) {
    Candidate c{start};
    c.model.model_dim = dim;
    c.model.causal_layers = layers;
    if (c.model.decoder == DecoderKind::kTar)
      c.model.tar_embed_dim =
          RoundTo8(static_cast<double>(start.tar_embed_dim) * dim / start.model_dim);
    c.total = CountParams(c.model).total;
    return c;
  };
  auto distance = [&](const Candidate &c) {
    return std::abs(static_cast<double>(c.total) / target - 1.0);
  };
  auto finish = [&](const Candidate &c, const char *stage) {
    CompressResult r{base, {}};
    r.config.model = c.model;
    CompressionSpec &s = r.spec;
    s.factor_percent = factor_percent;
    s.base_total = base_total;
    s.target_total = target;
    s.achieved_total = c.total;
    s.model_dim = c.model.model_dim;
    s.causal_layers = c.model.causal_layers;
    s.noncausal_layers = c.model.noncausal_layers;
    s.embedding_dim = c.model.decoder == DecoderKind::kTar ? c.model.tar_embed_dim : 0;
    s.stage = stage;
    r.config.Validate();
    return r;
  };

  if (factor_percent == 0 && !options.decoder) return finish(make(start.model_dim, start.causal_layers), "identity");

  // Stage 1: widths.
  const int floor_dim = static_cast<int>(std::ceil(start.model_dim * options.min_width_fraction));
  std::vector<int> widths;
  for (int d = start.model_dim; d >= floor_dim; --d) {
    if (d != start.model_dim && (d % 8 != 0 || d % start.num_heads != 0)) continue;
    widths.push_back(d);
  }
  std::optional<Candidate> best;
  for (int d : widths) {
    Candidate c = make(d, start.causal_layers);
    if (!best || distance(c) < distance(*best)) best = c;
  }
  if (distance(*best) <= options.tolerance) return finish(*best, "cells");

  // Stage 2: remove causal layers one at a time, re-searching the width at
  // each depth; the first depth with a candidate in tolerance wins.
  std::optional<Candidate> closest = best;
  for (int l = start.causal_layers - 1; l >= 1; --l) {
    std::optional<Candidate> at_depth;
    for (int d : widths) {
      Candidate c = make(d, l);
      if (!at_depth || distance(c) < distance(*at_depth)) at_depth = c;
    }
    if (distance(*at_depth) < distance(*closest)) closest = at_depth;
    if (distance(*at_depth) <= options.tolerance) return finish(*at_depth, "layers");
  }

  std::ostringstream msg;
  msg << "compression target " << target << " params (" << factor_percent
      << "% of " << base_total << ") is unreachable within " << options.tolerance * 100
      << "%; closest achievable: model_dim=" << closest->model.model_dim
      << " causal_layers=" << closest->model.causal_layers << " total=" << closest->total;
  throw InfeasibleError(msg.str());
}

CASC_END_NAMESPACE
