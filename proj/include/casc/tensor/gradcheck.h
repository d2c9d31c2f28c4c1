// include/casc/tensor/gradcheck.h

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

#ifndef CASC_TENSOR_GRADCHECK_H_
#define CASC_TENSOR_GRADCHECK_H_

#include <functional>
#include <span>
#include <string>

#include "casc/base/real.h"
#include "casc/tensor/array.h"
#include "casc/tensor/tape.h"

CASC_BEGIN_NAMESPACE

// Central differences (f(x + eps e_i) - f(x - eps e_i)) / (2 eps) for every
// coordinate of x. The step actually taken is measured after rounding to
// Real, so the estimate is not biased by representation error. Throws
// NumericalError naming the coordinate if f is non-finite.
Array FiniteDifferenceGradient(const std::function<double(const Array &)> &f,
                               const Array &x, double eps);

struct GradCheckReport {
  bool ok = true;
  std::size_t checked = 0;
  double max_abs_error = 0;
  double max_rel_error = 0;
  std::string worst;  // "param[index]: autodiff=.. numeric=.."
};

// Compares reverse-mode gradients of a scalar loss against central
// differences for every element of `params`. `loss` builds the graph on
// the tape it is given (binding parameters with Tape::Param). An element
// passes when |auto - numeric| <= max(rel_tol * max(|auto|, |numeric|), abs_tol).
GradCheckReport CheckGradients(const std::function<DiffArray(Tape &)> &loss,
                               std::span<Parameter *const> params, double eps,
                               double rel_tol, double abs_tol);

CASC_END_NAMESPACE

#endif  // CASC_TENSOR_GRADCHECK_H_
