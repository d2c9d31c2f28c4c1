// src/tensor/gradcheck.cc

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

#include "casc/tensor/gradcheck.h"

#include <cmath>
#include <sstream>

#include "casc/base/errors.h"

CASC_BEGIN_NAMESPACE

Array FiniteDifferenceGradient(const std::function<double(const Array &)> &f,
                               const Array &x, double eps) {
  if (!(eps > 0)) throw UsageError("FiniteDifferenceGradient: eps must be > 0");
  Array probe = x;
  Array out(x.shape(), Real(0));
  for (std::size_t i = 0; i < x.size(); ++i) {
    const Real orig = x[i];
    const Real plus = static_cast<Real>(orig + eps);
    const Real minus = static_cast<Real>(orig - eps);
    probe[i] = plus;
    const double fp = f(probe);
    probe[i] = minus;
    const double fm = f(probe);
    probe[i] = orig;
    if (!std::isfinite(fp) || !std::isfinite(fm)) {
      throw NumericalError("FiniteDifferenceGradient: non-finite value at coordinate " +
                           std::to_string(i));
    }
    const double step = static_cast<double>(plus) - static_cast<double>(minus);
    out[i] = static_cast<Real>((fp - fm) / step);
  }
  return out;
}

GradCheckReport CheckGradients(const std::function<DiffArray(Tape &)> &loss,
                               std::span<Parameter *const> params, double eps,
                               double rel_tol, double abs_tol) {
  for (Parameter *p : params) p->ZeroGrad();
  {
    Tape tape;
    DiffArray root = loss(tape);
    tape.Backward(root);
  }
  GradCheckReport report;
  double worst_excess = -1;
  for (Parameter *p : params) {
    const Array analytic = p->grad;
    const Array saved = p->value;
    auto eval = [&](const Array &v) {
      p->value = v;
      Tape tape(false);
      return static_cast<double>(loss(tape).item());
    };
    Array numeric = FiniteDifferenceGradient(eval, saved, eps);
    p->value = saved;
    for (std::size_t i = 0; i < analytic.size(); ++i) {
      const double a = analytic[i], n = numeric[i];
      const double err = std::abs(a - n);
      const double scale = std::max(std::abs(a), std::abs(n));
      const double allowed = std::max(rel_tol * scale, abs_tol);
      ++report.checked;
      report.max_abs_error = std::max(report.max_abs_error, err);
      if (scale > 0) report.max_rel_error = std::max(report.max_rel_error, err / scale);
      if (err > allowed) report.ok = false;
      if (err - allowed > worst_excess) {
        worst_excess = err - allowed;
        std::ostringstream os;
        os.precision(10);
        os << p->name << '[' << i << "]: autodiff=" << a << " numeric=" << n;
        report.worst = os.str();
      }
    }
  }
  return report;
}

CASC_END_NAMESPACE
