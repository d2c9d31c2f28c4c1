// src/simd/kernels_avx2.cc

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

// Compiled with -mavx2 -mfma; only reached after a runtime CPU check.

#include <immintrin.h>

#include "casc/simd/kernels.h"

namespace casc::simd {
namespace {

inline float HorizontalSum(__m256 v) {
  __m128 lo = _mm256_castps256_ps128(v);
  __m128 hi = _mm256_extractf128_ps(v, 1);
  lo = _mm_add_ps(lo, hi);
  __m128 shuf = _mm_movehdup_ps(lo);
  __m128 sums = _mm_add_ps(lo, shuf);
  shuf = _mm_movehl_ps(shuf, sums);
  sums = _mm_add_ss(sums, shuf);
  return _mm_cvtss_f32(sums);
}

inline double HorizontalSum(__m256d v) {
  __m128d lo = _mm256_castpd256_pd128(v);
  __m128d hi = _mm256_extractf128_pd(v, 1);
  lo = _mm_add_pd(lo, hi);
  __m128d high64 = _mm_unpackhi_pd(lo, lo);
  return _mm_cvtsd_f64(_mm_add_sd(lo, high64));
}

float DotAvx2(const float *a, const float *b, std::size_t n) {
  __m256 acc0 = _mm256_setzero_ps();
  __m256 acc1 = _mm256_setzero_ps();
  std::size_t i = 0;
  for (; i + 16 <= n; i += 16) {
    acc0 = _mm256_fmadd_ps(_mm256_loadu_ps(a + i), _mm256_loadu_ps(b + i), acc0);
    acc1 = _mm256_fmadd_ps(_mm256_loadu_ps(a + i + 8),
                           _mm256_loadu_ps(b + i + 8), acc1);
  }
  for (; i + 8 <= n; i += 8) {
    acc0 = _mm256_fmadd_ps(_mm256_loadu_ps(a + i), _mm256_loadu_ps(b + i), acc0);
  }
  float acc = HorizontalSum(_mm256_add_ps(acc0, acc1));
  for (; i < n; ++i) acc += a[i] * b[i];
  return acc;
}

double DotAvx2(const double *a, const double *b, std::size_t n) {
  __m256d acc0 = _mm256_setzero_pd();
  __m256d acc1 = _mm256_setzero_pd();
  std::size_t i = 0;
  for (; i + 8 <= n; i += 8) {
    acc0 = _mm256_fmadd_pd(_mm256_loadu_pd(a + i), _mm256_loadu_pd(b + i), acc0);
    acc1 = _mm256_fmadd_pd(_mm256_loadu_pd(a + i + 4),
                           _mm256_loadu_pd(b + i + 4), acc1);
  }
  for (; i + 4 <= n; i += 4) {
    acc0 = _mm256_fmadd_pd(_mm256_loadu_pd(a + i), _mm256_loadu_pd(b + i), acc0);
  }
  double acc = HorizontalSum(_mm256_add_pd(acc0, acc1));
  for (; i < n; ++i) acc += a[i] * b[i];
  return acc;
}

void AxpyAvx2(float alpha, const float *x, float *y, std::size_t n) {
  const __m256 va = _mm256_set1_ps(alpha);
  std::size_t i = 0;
  for (; i + 8 <= n; i += 8) {
    _mm256_storeu_ps(y + i, _mm256_fmadd_ps(va, _mm256_loadu_ps(x + i),
                                            _mm256_loadu_ps(y + i)));
  }
  for (; i < n; ++i) y[i] += alpha * x[i];
}

void AxpyAvx2(double alpha, const double *x, double *y, std::size_t n) {
  const __m256d va = _mm256_set1_pd(alpha);
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    _mm256_storeu_pd(y + i, _mm256_fmadd_pd(va, _mm256_loadu_pd(x + i),
                                            _mm256_loadu_pd(y + i)));
  }
  for (; i < n; ++i) y[i] += alpha * x[i];
}

void VecMatAvx2(const float *x, std::size_t k, const float *b, std::size_t ldb,
                float *y, std::size_t n) {
  std::size_t j = 0;
  for (; j + 32 <= n; j += 32) {
    __m256 c0 = _mm256_loadu_ps(y + j);
    __m256 c1 = _mm256_loadu_ps(y + j + 8);
    __m256 c2 = _mm256_loadu_ps(y + j + 16);
    __m256 c3 = _mm256_loadu_ps(y + j + 24);
    for (std::size_t kk = 0; kk < k; ++kk) {
      const __m256 a = _mm256_set1_ps(x[kk]);
      const float *row = b + kk * ldb + j;
      c0 = _mm256_fmadd_ps(a, _mm256_loadu_ps(row), c0);
      c1 = _mm256_fmadd_ps(a, _mm256_loadu_ps(row + 8), c1);
      c2 = _mm256_fmadd_ps(a, _mm256_loadu_ps(row + 16), c2);
      c3 = _mm256_fmadd_ps(a, _mm256_loadu_ps(row + 24), c3);
    }
    _mm256_storeu_ps(y + j, c0);
    _mm256_storeu_ps(y + j + 8, c1);
    _mm256_storeu_ps(y + j + 16, c2);
    _mm256_storeu_ps(y + j + 24, c3);
  }
  for (; j + 8 <= n; j += 8) {
    __m256 c0 = _mm256_loadu_ps(y + j);
    for (std::size_t kk = 0; kk < k; ++kk) {
      c0 = _mm256_fmadd_ps(_mm256_set1_ps(x[kk]),
                           _mm256_loadu_ps(b + kk * ldb + j), c0);
    }
    _mm256_storeu_ps(y + j, c0);
  }
  for (; j < n; ++j) {
    float acc = y[j];
    for (std::size_t kk = 0; kk < k; ++kk) acc += x[kk] * b[kk * ldb + j];
    y[j] = acc;
  }
}

void VecMatAvx2(const double *x, std::size_t k, const double *b,
                std::size_t ldb, double *y, std::size_t n) {
  std::size_t j = 0;
  for (; j + 16 <= n; j += 16) {
    __m256d c0 = _mm256_loadu_pd(y + j);
    __m256d c1 = _mm256_loadu_pd(y + j + 4);
    __m256d c2 = _mm256_loadu_pd(y + j + 8);
    __m256d c3 = _mm256_loadu_pd(y + j + 12);
    for (std::size_t kk = 0; kk < k; ++kk) {
      const __m256d a = _mm256_set1_pd(x[kk]);
      const double *row = b + kk * ldb + j;
      c0 = _mm256_fmadd_pd(a, _mm256_loadu_pd(row), c0);
      c1 = _mm256_fmadd_pd(a, _mm256_loadu_pd(row + 4), c1);
      c2 = _mm256_fmadd_pd(a, _mm256_loadu_pd(row + 8), c2);
      c3 = _mm256_fmadd_pd(a, _mm256_loadu_pd(row + 12), c3);
    }
    _mm256_storeu_pd(y + j, c0);
    _mm256_storeu_pd(y + j + 4, c1);
    _mm256_storeu_pd(y + j + 8, c2);
    _mm256_storeu_pd(y + j + 12, c3);
  }
  for (; j + 4 <= n; j += 4) {
    __m256d c0 = _mm256_loadu_pd(y + j);
    for (std::size_t kk = 0; kk < k; ++kk) {
      c0 = _mm256_fmadd_pd(_mm256_set1_pd(x[kk]),
                           _mm256_loadu_pd(b + kk * ldb + j), c0);
    }
    _mm256_storeu_pd(y + j, c0);
  }
  for (; j < n; ++j) {
    double acc = y[j];
    for (std::size_t kk = 0; kk < k; ++kk) acc += x[kk] * b[kk * ldb + j];
    y[j] = acc;
  }
}

const KernelTable kAvx2 = {
    Isa::kAvx2,
    "avx2",
    static_cast<float (*)(const float *, const float *, std::size_t)>(&DotAvx2),
    static_cast<double (*)(const double *, const double *, std::size_t)>(&DotAvx2),
    static_cast<void (*)(float, const float *, float *, std::size_t)>(&AxpyAvx2),
    static_cast<void (*)(double, const double *, double *, std::size_t)>(&AxpyAvx2),
    static_cast<void (*)(const float *, std::size_t, const float *, std::size_t,
                         float *, std::size_t)>(&VecMatAvx2),
    static_cast<void (*)(const double *, std::size_t, const double *,
                         std::size_t, double *, std::size_t)>(&VecMatAvx2),
};

}  // namespace

namespace detail {
const KernelTable *Avx2TableIfCompiled() { return &kAvx2; }
}  // namespace detail

}  // namespace casc::simd
