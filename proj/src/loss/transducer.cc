// src/loss/transducer.cc

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

#include "casc/loss/transducer.h"

#include <cmath>
#include <string>
#include <vector>

#include "casc/base/errors.h"
#include "casc/model/predictor.h"
#include "casc/tensor/ops.h"

CASC_BEGIN_NAMESPACE

Lattice MakeLattice(const DiffArray &log_probs, int frames, int labels) {
  if (frames < 0 || labels < 0) throw UsageError("MakeLattice: negative size");
  if (log_probs.value().rank() != 2 || log_probs.rows() != frames * (labels + 1)) {
    throw UsageError("MakeLattice: " + ShapeString(log_probs.shape()) + " is not a " +
                     std::to_string(frames) + " x " + std::to_string(labels + 1) + " grid");
  }
  return Lattice{log_probs, frames, labels, log_probs.cols()};
}

Lattice BuildLattice(const Graph &g, CascadedModel &model, const DiffArray &enc,
                     const DiffArray &pred, double temperature) {
  if (!(temperature > 0)) throw UsageError("BuildLattice: temperature must be > 0");
  DiffArray lp = LogSoftmaxRows(JointLogits(g, model, enc, pred), temperature);
  return MakeLattice(lp, enc.rows(), pred.rows() - 1);
}

DiffArray RnntLoss(const Lattice &lat, std::span<const int> labels) {
  const int tp = lat.frames, u_len = lat.labels;
  if (static_cast<int>(labels.size()) != u_len) {
    throw UsageError("RnntLoss: " + std::to_string(labels.size()) + " labels for a lattice of " +
                     std::to_string(u_len));
  }
  if (tp < 1) throw InfeasibleError("RnntLoss: lattice has no frames");
  for (int y : labels) {
    if (y <= kBlank || y >= lat.vocab) throw UsageError("RnntLoss: label out of range");
  }
  Tape &tape = *lat.log_probs.tape();
  const std::size_t v = static_cast<std::size_t>(lat.vocab);
  auto lp = [&](int t, int u, int k) {
    return Pick(lat.log_probs, static_cast<std::size_t>(lat.Row(t, u)) * v + k);
  };
  // alpha over u for the current t.
  std::vector<DiffArray> alpha(u_len + 1);
  alpha[0] = tape.Constant(Real(0));
  for (int u = 1; u <= u_len; ++u) alpha[u] = Add(alpha[u - 1], lp(0, u - 1, labels[u - 1]));
  for (int t = 1; t < tp; ++t) {
    std::vector<DiffArray> next(u_len + 1);
    next[0] = Add(alpha[0], lp(t - 1, 0, kBlank));
    for (int u = 1; u <= u_len; ++u) {
      next[u] = LogAddExp(Add(alpha[u], lp(t - 1, u, kBlank)),
                          Add(next[u - 1], lp(t, u - 1, labels[u - 1])));
    }
    alpha.swap(next);
  }
  return Scale(Add(alpha[u_len], lp(tp - 1, u_len, kBlank)), -1.0);
}

BruteforceResult RnntLossBruteforce(const Array &log_probs, int frames,
                                    std::span<const int> labels) {
  const int u_len = static_cast<int>(labels.size());
  if (frames > 6 || u_len > 5) throw UsageError("RnntLossBruteforce: instance too large");
  if (frames < 1) throw InfeasibleError("RnntLossBruteforce: no frames");
  if (log_probs.rows() != frames * (u_len + 1))
    throw UsageError("RnntLossBruteforce: lattice shape mismatch");
  const int steps = frames + u_len - 1;  // emissions before the final blank
  long double total = 0;
  long paths = 0;
  for (unsigned mask = 0; mask < (1u << steps); ++mask) {
    if (__builtin_popcount(mask) != u_len) continue;
    int t = 0, u = 0;
    long double logp = 0;
    for (int s = 0; s < steps; ++s) {
      const int row = t * (u_len + 1) + u;
      if (mask & (1u << s)) {
        logp += log_probs(row, labels[u]);
        ++u;
      } else {
        logp += log_probs(row, kBlank);
        ++t;
      }
    }
    logp += log_probs(t * (u_len + 1) + u, kBlank);
    total += std::exp(logp);
    ++paths;
  }
  return {static_cast<double>(-std::log(total)), paths};
}

namespace {
void CheckWeight(double w) {
  if (!(w >= 0 && w <= 1)) throw UsageError("causal_weight must be in [0, 1]");
}
}  // namespace

DiffArray CascadedLoss(const DiffArray &causal, const DiffArray &noncausal,
                       double causal_weight) {
  CheckWeight(causal_weight);
  return WeightedSum({causal, noncausal}, {causal_weight, 1.0 - causal_weight});
}

double CascadedLoss(double causal, double noncausal, double causal_weight) {
  CheckWeight(causal_weight);
  return causal_weight * causal + (1.0 - causal_weight) * noncausal;
}

CASC_END_NAMESPACE
