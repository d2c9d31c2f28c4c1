// src/simd/kernels.cc

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

#include <atomic>
#include <cstdlib>
#include <string>

#include "casc/base/errors.h"

namespace casc::simd {

namespace detail {
const KernelTable *Avx2TableIfCompiled();
const KernelTable *NeonTableIfCompiled();
}  // namespace detail

namespace {

template <typename T>
T DotScalar(const T *a, const T *b, std::size_t n) {
  T acc = 0;
  for (std::size_t i = 0; i < n; ++i) acc += a[i] * b[i];
  return acc;
}

template <typename T>
void AxpyScalar(T alpha, const T *x, T *y, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) y[i] += alpha * x[i];
}

template <typename T>
void VecMatScalar(const T *x, std::size_t k, const T *b, std::size_t ldb,
                  T *y, std::size_t n) {
  for (std::size_t j = 0; j < n; ++j) {
    T acc = y[j];
    for (std::size_t kk = 0; kk < k; ++kk) acc += x[kk] * b[kk * ldb + j];
    y[j] = acc;
  }
}

const KernelTable kScalar = {
    Isa::kScalar,          "scalar",
    &DotScalar<float>,     &DotScalar<double>,
    &AxpyScalar<float>,    &AxpyScalar<double>,
    &VecMatScalar<float>,  &VecMatScalar<double>,
};

const KernelTable *SelectDefault() {
  if (const char *env = std::getenv("CASC_SIMD"); env != nullptr && *env) {
    const KernelTable *t = KernelsFor(ParseIsa(env));
    if (t == nullptr) {
      throw UsageError(std::string("CASC_SIMD=") + env +
                       " is not supported on this machine");
    }
    return t;
  }
  if (const KernelTable *t = Avx2Kernels()) return t;
  if (const KernelTable *t = NeonKernels()) return t;
  return &kScalar;
}

std::atomic<const KernelTable *> &ActiveSlot() {
  static std::atomic<const KernelTable *> slot{SelectDefault()};
  return slot;
}

}  // namespace

const KernelTable &ScalarKernels() { return kScalar; }

const KernelTable *Avx2Kernels() {
#if defined(__x86_64__) || defined(_M_X64)
  static const bool ok =
      __builtin_cpu_supports("avx2") && __builtin_cpu_supports("fma");
  return ok ? detail::Avx2TableIfCompiled() : nullptr;
#else
  return nullptr;
#endif
}

const KernelTable *NeonKernels() { return detail::NeonTableIfCompiled(); }

const KernelTable *KernelsFor(Isa isa) {
  switch (isa) {
    case Isa::kScalar:
      return &kScalar;
    case Isa::kAvx2:
      return Avx2Kernels();
    case Isa::kNeon:
      return NeonKernels();
  }
  return nullptr;
}

const KernelTable &ActiveKernels() {
  return *ActiveSlot().load(std::memory_order_relaxed);
}

void SetActiveIsa(Isa isa) {
  const KernelTable *t = KernelsFor(isa);
  if (t == nullptr) throw UsageError("requested SIMD variant is unsupported");
  ActiveSlot().store(t, std::memory_order_relaxed);
}

Isa ParseIsa(std::string_view name) {
  if (name == "scalar") return Isa::kScalar;
  if (name == "avx2") return Isa::kAvx2;
  if (name == "neon") return Isa::kNeon;
  throw UsageError("unknown SIMD variant '" + std::string(name) + "'");
}

}  // namespace casc::simd
