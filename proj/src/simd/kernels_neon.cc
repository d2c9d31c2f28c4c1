// src/simd/kernels_neon.cc

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

#include "casc/simd/kernels.h"

#if defined(__aarch64__)
#include <arm_neon.h>
#endif

namespace casc::simd {

#if defined(__aarch64__)
namespace {

float DotNeon(const float *a, const float *b, std::size_t n) {
  float32x4_t acc0 = vdupq_n_f32(0.0f);
  float32x4_t acc1 = vdupq_n_f32(0.0f);
  std::size_t i = 0;
  for (; i + 8 <= n; i += 8) {
    acc0 = vfmaq_f32(acc0, vld1q_f32(a + i), vld1q_f32(b + i));
    acc1 = vfmaq_f32(acc1, vld1q_f32(a + i + 4), vld1q_f32(b + i + 4));
  }
  for (; i + 4 <= n; i += 4) {
    acc0 = vfmaq_f32(acc0, vld1q_f32(a + i), vld1q_f32(b + i));
  }
  float acc = vaddvq_f32(vaddq_f32(acc0, acc1));
  for (; i < n; ++i) acc += a[i] * b[i];
  return acc;
}

double DotNeon(const double *a, const double *b, std::size_t n) {
  float64x2_t acc0 = vdupq_n_f64(0.0);
  std::size_t i = 0;
  for (; i + 2 <= n; i += 2) {
    acc0 = vfmaq_f64(acc0, vld1q_f64(a + i), vld1q_f64(b + i));
  }
  double acc = vaddvq_f64(acc0);
  for (; i < n; ++i) acc += a[i] * b[i];
  return acc;
}

void AxpyNeon(float alpha, const float *x, float *y, std::size_t n) {
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    vst1q_f32(y + i, vfmaq_n_f32(vld1q_f32(y + i), vld1q_f32(x + i), alpha));
  }
  for (; i < n; ++i) y[i] += alpha * x[i];
}

void AxpyNeon(double alpha, const double *x, double *y, std::size_t n) {
  std::size_t i = 0;
  for (; i + 2 <= n; i += 2) {
    vst1q_f64(y + i, vfmaq_n_f64(vld1q_f64(y + i), vld1q_f64(x + i), alpha));
  }
  for (; i < n; ++i) y[i] += alpha * x[i];
}

void VecMatNeon(const float *x, std::size_t k, const float *b, std::size_t ldb,
                float *y, std::size_t n) {
  std::size_t j = 0;
  for (; j + 16 <= n; j += 16) {
    float32x4_t c0 = vld1q_f32(y + j);
    float32x4_t c1 = vld1q_f32(y + j + 4);
    float32x4_t c2 = vld1q_f32(y + j + 8);
    float32x4_t c3 = vld1q_f32(y + j + 12);
    for (std::size_t kk = 0; kk < k; ++kk) {
      const float *row = b + kk * ldb + j;
      c0 = vfmaq_n_f32(c0, vld1q_f32(row), x[kk]);
      c1 = vfmaq_n_f32(c1, vld1q_f32(row + 4), x[kk]);
      c2 = vfmaq_n_f32(c2, vld1q_f32(row + 8), x[kk]);
      c3 = vfmaq_n_f32(c3, vld1q_f32(row + 12), x[kk]);
    }
    vst1q_f32(y + j, c0);
    vst1q_f32(y + j + 4, c1);
    vst1q_f32(y + j + 8, c2);
    vst1q_f32(y + j + 12, c3);
  }
  for (; j < n; ++j) {
    float acc = y[j];
    for (std::size_t kk = 0; kk < k; ++kk) acc += x[kk] * b[kk * ldb + j];
    y[j] = acc;
  }
}

void VecMatNeon(const double *x, std::size_t k, const double *b,
                std::size_t ldb, double *y, std::size_t n) {
  std::size_t j = 0;
  for (; j + 4 <= n; j += 4) {
    float64x2_t c0 = vld1q_f64(y + j);
    float64x2_t c1 = vld1q_f64(y + j + 2);
    for (std::size_t kk = 0; kk < k; ++kk) {
      const double *row = b + kk * ldb + j;
      c0 = vfmaq_n_f64(c0, vld1q_f64(row), x[kk]);
      c1 = vfmaq_n_f64(c1, vld1q_f64(row + 2), x[kk]);
    }
    vst1q_f64(y + j, c0);
    vst1q_f64(y + j + 2, c1);
  }
  for (; j < n; ++j) {
    double acc = y[j];
    for (std::size_t kk = 0; kk < k; ++kk) acc += x[kk] * b[kk * ldb + j];
    y[j] = acc;
  }
}

const KernelTable kNeon = {
    Isa::kNeon,
    "neon",
    static_cast<float (*)(const float *, const float *, std::size_t)>(&DotNeon),
    static_cast<double (*)(const double *, const double *, std::size_t)>(&DotNeon),
    static_cast<void (*)(float, const float *, float *, std::size_t)>(&AxpyNeon),
    static_cast<void (*)(double, const double *, double *, std::size_t)>(&AxpyNeon),
    static_cast<void (*)(const float *, std::size_t, const float *, std::size_t,
                         float *, std::size_t)>(&VecMatNeon),
    static_cast<void (*)(const double *, std::size_t, const double *,
                         std::size_t, double *, std::size_t)>(&VecMatNeon),
};

}  // namespace
#endif

namespace detail {
const KernelTable *NeonTableIfCompiled() {
#if defined(__aarch64__)
  return &kNeon;
#else
  return nullptr;
#endif
}
}  // namespace detail

}  // namespace casc::simd
