// include/casc/loss/distill.h

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

#ifndef CASC_LOSS_DISTILL_H_
#define CASC_LOSS_DISTILL_H_

#include <span>
#include <string>

#include "casc/loss/transducer.h"

CASC_BEGIN_NAMESPACE

enum class KdMode { kFull, kEfficient };

const char *KdModeName(KdMode mode);
KdMode ParseKdMode(const std::string &name);

struct KdConfig {
  double alpha = 0.02;
  double temperature = 1.0;
  KdMode mode = KdMode::kEfficient;

  void Validate() const;
};

// sum_{t,u} sum_k P_T ln(P_T / P_S). Teacher values are read as constants;
// the gradient flows into the student log-probabilities only. Terms with
// P_T == 0 contribute 0.
DiffArray FullLatticeKl(const Lattice &teacher, const Lattice &student);

// KL between distributions collapsed to {y_{u+1}, blank, rest} at every
// node, or {blank, rest} at u == U. Same constancy contract as above.
DiffArray EfficientKd(const Lattice &teacher, const Lattice &student,
                      std::span<const int> labels);

DiffArray KdLoss(KdMode mode, const Lattice &teacher, const Lattice &student,
                 std::span<const int> labels);

// (1 - alpha) * rnnt + alpha * distill.
DiffArray TotalLoss(const DiffArray &rnnt, const DiffArray &distill, double alpha);
double TotalLoss(double rnnt, double distill, double alpha);

CASC_END_NAMESPACE

#endif  // CASC_LOSS_DISTILL_H_
