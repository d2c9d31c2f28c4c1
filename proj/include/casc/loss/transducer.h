// include/casc/loss/transducer.h

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

#ifndef CASC_LOSS_TRANSDUCER_H_
#define CASC_LOSS_TRANSDUCER_H_

#include <span>

#include "casc/model/model.h"

CASC_BEGIN_NAMESPACE

constexpr int kBlank = 0;

// log P(k | t, u) for t < frames, u <= labels, k < vocab. Stored as a
// [frames * (labels+1) x vocab] matrix, row t*(labels+1) + u.
struct Lattice {
  DiffArray log_probs;
  int frames = 0;
  int labels = 0;
  int vocab = 0;

  int Row(int t, int u) const { return t * (labels + 1) + u; }
  double At(int t, int u, int k) const {
    return log_probs.value()(Row(t, u), k);
  }
};

// Wraps precomputed log-probabilities (rows normalised by the caller).
Lattice MakeLattice(const DiffArray &log_probs, int frames, int labels);

// log softmax(joint(enc[t], pred[u]) / temperature) over the full grid.
Lattice BuildLattice(const Graph &g, CascadedModel &model, const DiffArray &enc,
                     const DiffArray &pred, double temperature = 1.0);

// -log sum over alignments, by the forward recursion
//   a(t,u) = logaddexp(a(t-1,u) + lp(t-1,u,blank), a(t,u-1) + lp(t,u-1,y_u))
// with a(0,0) = 0 and loss = -(a(T'-1,U) + lp(T'-1,U,blank)). Every
// alignment ends with the blank that leaves the last frame.
DiffArray RnntLoss(const Lattice &lattice, std::span<const int> labels);

struct BruteforceResult {
  double loss = 0;
  long paths = 0;
};

// Enumerates every alignment (placements of U labels among the first
// T'+U-1 emissions; the final emission is blank) and sums in long double.
// Refuses instances with T' > 6 or U > 5.
BruteforceResult RnntLossBruteforce(const Array &log_probs, int frames,
                                    std::span<const int> labels);

// w * causal + (1 - w) * noncausal.
DiffArray CascadedLoss(const DiffArray &causal, const DiffArray &noncausal, double causal_weight);
double CascadedLoss(double causal, double noncausal, double causal_weight);

CASC_END_NAMESPACE

#endif  // CASC_LOSS_TRANSDUCER_H_
