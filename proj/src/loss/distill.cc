// src/loss/distill.cc

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

#include "casc/loss/distill.h"

#include <cmath>
#include <limits>
#include <vector>

#include "casc/base/errors.h"
#include "casc/tensor/ops.h"

CASC_BEGIN_NAMESPACE

namespace {

constexpr double kNegInf = -std::numeric_limits<double>::infinity();

void CheckShapes(const Lattice &teacher, const Lattice &student) {
  if (teacher.frames != student.frames || teacher.labels != student.labels ||
      teacher.vocab != student.vocab) {
    throw UsageError("KD: teacher lattice " + ShapeString(teacher.log_probs.shape()) +
                     " and student lattice " + ShapeString(student.log_probs.shape()) +
                     " differ");
  }
}

double LogAdd(double a, double b) {
  const double m = std::max(a, b);
  if (m == kNegInf) return kNegInf;
  return m + std::log(std::exp(a - m) + std::exp(b - m));
}

// p ln(p / q) in the log domain, with 0 ln 0 = 0.
double KlTerm(double log_p, double log_q) {
  if (log_p == kNegInf) return 0.0;
  return std::exp(log_p) * (log_p - log_q);
}

}  // namespace

const char *KdModeName(KdMode mode) { return mode == KdMode::kFull ? "full" : "efficient"; }

KdMode ParseKdMode(const std::string &name) {
  if (name == "full") return KdMode::kFull;
  if (name == "efficient") return KdMode::kEfficient;
  throw ConfigError("kd_mode must be \"full\" or \"efficient\", got \"" + name + "\"");
}

void KdConfig::Validate() const {
  if (!(alpha >= 0 && alpha <= 1)) throw ConfigError("kd alpha must be in [0, 1]");
  if (!(temperature > 0)) throw ConfigError("kd temperature must be > 0");
}

DiffArray FullLatticeKl(const Lattice &teacher, const Lattice &student) {
  CheckShapes(teacher, student);
  const Array &lt = teacher.log_probs.value();
  const Array &ls = student.log_probs.value();
  double total = 0;
  for (std::size_t i = 0; i < lt.size(); ++i) total += KlTerm(lt[i], ls[i]);
  Tape &tape = *student.log_probs.tape();
  const Array teacher_lp = lt;
  const DiffArray s = student.log_probs;
  return tape.Record(Array::Scalar(static_cast<Real>(total)), {s},
                     [s, teacher_lp](Tape &tp, const Array &, const Array &g) {
                       Array &gs = tp.GradBuffer(s);
                       for (std::size_t i = 0; i < gs.size(); ++i) {
                         gs[i] -= static_cast<Real>(g[0] * std::exp(
                                                        static_cast<double>(teacher_lp[i])));
                       }
                     });
}

DiffArray EfficientKd(const Lattice &teacher, const Lattice &student,
                      std::span<const int> labels) {
  CheckShapes(teacher, student);
  if (static_cast<int>(labels.size()) != teacher.labels)
    throw UsageError("EfficientKd: label count does not match the lattice");
  const int v = teacher.vocab;
  const Array &lt = teacher.log_probs.value();
  const Array &ls = student.log_probs.value();
  const int rows = lt.rows();
  // Per row: teacher collapsed probabilities (y, blank, rest) and student
  // rest log-mass, kept for the backward pass.
  struct Node {
    int y;  // -1 at u == U
    double pt_y, pt_b, pt_r, ls_r;
  };
  std::vector<Node> nodes(rows);
  double total = 0;
  for (int t = 0; t < teacher.frames; ++t) {
    for (int u = 0; u <= teacher.labels; ++u) {
      const int r = teacher.Row(t, u);
      const int y = u < teacher.labels ? labels[u] : -1;
      const Real *tr = lt.row(r);
      const Real *sr = ls.row(r);
      double lt_r = kNegInf, ls_r = kNegInf;
      for (int k = 1; k < v; ++k) {
        if (k == y) continue;
        lt_r = LogAdd(lt_r, tr[k]);
        ls_r = LogAdd(ls_r, sr[k]);
      }
      Node n{y, 0, std::exp(static_cast<double>(tr[kBlank])), std::exp(lt_r), ls_r};
      total += KlTerm(tr[kBlank], sr[kBlank]) + KlTerm(lt_r, ls_r);
      if (y >= 0) {
        n.pt_y = std::exp(static_cast<double>(tr[y]));
        total += KlTerm(tr[y], sr[y]);
      }
      nodes[r] = n;
    }
  }
  Tape &tape = *student.log_probs.tape();
  const DiffArray s = student.log_probs;
  return tape.Record(
      Array::Scalar(static_cast<Real>(total)), {s},
      [s, nodes, v](Tape &tp, const Array &, const Array &g) {
        Array &gs = tp.GradBuffer(s);
        const Array &ls = s.value();
        for (std::size_t r = 0; r < nodes.size(); ++r) {
          const auto &n = nodes[r];
          const Real *sr = ls.row(static_cast<int>(r));
          Real *gr = gs.row(static_cast<int>(r));
          gr[kBlank] -= static_cast<Real>(g[0] * n.pt_b);
          if (n.y >= 0) gr[n.y] -= static_cast<Real>(g[0] * n.pt_y);
          if (n.pt_r == 0 || n.ls_r == kNegInf) continue;
          // d/d ls_k of -pt_r * ls_r = -pt_r * softmax within the rest.
          for (int k = 1; k < v; ++k) {
            if (k == n.y) continue;
            gr[k] -= static_cast<Real>(g[0] * n.pt_r * std::exp(sr[k] - n.ls_r));
          }
        }
      });
}

DiffArray KdLoss(KdMode mode, const Lattice &teacher, const Lattice &student,
                 std::span<const int> labels) {
  return mode == KdMode::kFull ? FullLatticeKl(teacher, student)
                               : EfficientKd(teacher, student, labels);
}

namespace {
void CheckAlpha(double alpha) {
  if (!(alpha >= 0 && alpha <= 1)) throw UsageError("alpha must be in [0, 1]");
}
}  // namespace

DiffArray TotalLoss(const DiffArray &rnnt, const DiffArray &distill, double alpha) {
  CheckAlpha(alpha);
  return WeightedSum({rnnt, distill}, {1.0 - alpha, alpha});
}

double TotalLoss(double rnnt, double distill, double alpha) {
  CheckAlpha(alpha);
  return (1.0 - alpha) * rnnt + alpha * distill;
}

CASC_END_NAMESPACE
