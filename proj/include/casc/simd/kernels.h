// include/casc/simd/kernels.h

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

#ifndef CASC_SIMD_KERNELS_H_
#define CASC_SIMD_KERNELS_H_

#include <cstddef>
#include <string_view>

// Inner-loop arithmetic kernels. Every kernel has a portable scalar
// reference; AVX2+FMA (x86-64) and NEON (aarch64) variants are selected at
// runtime. The selection is made once per process: the best ISA the CPU
// supports, unless the CASC_SIMD environment variable names one of
// "scalar", "avx2", "neon".

namespace casc::simd {

enum class Isa { kScalar, kAvx2, kNeon };

struct KernelTable {
  Isa isa;
  const char *name;

  // Returns sum_i a[i] * b[i].
  float (*dot_f32)(const float *a, const float *b, std::size_t n);
  double (*dot_f64)(const double *a, const double *b, std::size_t n);

  // y[i] += alpha * x[i].
  void (*axpy_f32)(float alpha, const float *x, float *y, std::size_t n);
  void (*axpy_f64)(double alpha, const double *x, double *y, std::size_t n);

  // y[j] += sum_k x[k] * b[k * ldb + j] for j < n. Row vector times a
  // row-major k x n block; the reduction over k runs in ascending order.
  void (*vecmat_f32)(const float *x, std::size_t k, const float *b,
                     std::size_t ldb, float *y, std::size_t n);
  void (*vecmat_f64)(const double *x, std::size_t k, const double *b,
                     std::size_t ldb, double *y, std::size_t n);
};

const KernelTable &ScalarKernels();

// nullptr when the variant is not compiled in or the CPU lacks the ISA.
const KernelTable *Avx2Kernels();
const KernelTable *NeonKernels();

const KernelTable *KernelsFor(Isa isa);
const KernelTable &ActiveKernels();

// Overrides the process-wide selection. Throws UsageError if unsupported.
void SetActiveIsa(Isa isa);

Isa ParseIsa(std::string_view name);

inline float Dot(const float *a, const float *b, std::size_t n) {
  return ActiveKernels().dot_f32(a, b, n);
}
inline double Dot(const double *a, const double *b, std::size_t n) {
  return ActiveKernels().dot_f64(a, b, n);
}
inline void Axpy(float alpha, const float *x, float *y, std::size_t n) {
  ActiveKernels().axpy_f32(alpha, x, y, n);
}
inline void Axpy(double alpha, const double *x, double *y, std::size_t n) {
  ActiveKernels().axpy_f64(alpha, x, y, n);
}
inline void VecMat(const float *x, std::size_t k, const float *b,
                   std::size_t ldb, float *y, std::size_t n) {
  ActiveKernels().vecmat_f32(x, k, b, ldb, y, n);
}
inline void VecMat(const double *x, std::size_t k, const double *b,
                   std::size_t ldb, double *y, std::size_t n) {
  ActiveKernels().vecmat_f64(x, k, b, ldb, y, n);
}

}  // namespace casc::simd

#endif  // CASC_SIMD_KERNELS_H_
