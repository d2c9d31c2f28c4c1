// include/casc/base/real.h

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

#ifndef CASC_BASE_REAL_H_
#define CASC_BASE_REAL_H_

// Numeric precision of the model stack. The production build stores
// parameters and activations as 32-bit floats. Defining CASC_REAL_DOUBLE
// compiles the same sources in 64-bit precision under a distinct inline
// namespace, so both variants can be linked into one binary (the gradient
// checker links the double build).

namespace casc {

#ifdef CASC_REAL_DOUBLE
inline namespace f64 {
using Real = double;
}  // namespace f64
#define CASC_BEGIN_NAMESPACE namespace casc { inline namespace f64 {
#define CASC_END_NAMESPACE } }
#else
inline namespace f32 {
using Real = float;
}  // namespace f32
#define CASC_BEGIN_NAMESPACE namespace casc { inline namespace f32 {
#define CASC_END_NAMESPACE } }
#endif

}  // namespace casc

#endif  // CASC_BASE_REAL_H_
