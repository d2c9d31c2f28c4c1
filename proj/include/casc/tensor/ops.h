// include/casc/tensor/ops.h

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

#ifndef CASC_TENSOR_OPS_H_
#define CASC_TENSOR_OPS_H_

#include <cstdint>
#include <span>
#include <vector>

#include "casc/base/real.h"
#include "casc/base/rng.h"
#include "casc/tensor/tape.h"

// Differentiable operations on DiffArray. Matrices are rank-2 row-major;
// a rank-1 array of length n is accepted wherever a 1 x n row is. All
// reductions accumulate in double.

CASC_BEGIN_NAMESPACE

// Elementwise, identical shapes.
DiffArray Add(const DiffArray &a, const DiffArray &b);
DiffArray Sub(const DiffArray &a, const DiffArray &b);
DiffArray Mul(const DiffArray &a, const DiffArray &b);
DiffArray Scale(const DiffArray &a, double s);

// x [r x c] + bias broadcast over rows; bias holds c values.
DiffArray AddBias(const DiffArray &x, const DiffArray &bias);

// a [m x k] * b [k x n], or a * b^T with b [n x k] when transpose_b.
DiffArray MatMul(const DiffArray &a, const DiffArray &b, bool transpose_b = false);

// x * w + bias, w [in x out].
DiffArray Linear(const DiffArray &x, const DiffArray &w, const DiffArray &bias);

DiffArray Tanh(const DiffArray &x);
DiffArray Sigmoid(const DiffArray &x);
// x * sigmoid(x).
DiffArray Swish(const DiffArray &x);

// Row-wise log softmax of x / temperature.
DiffArray LogSoftmaxRows(const DiffArray &x, double temperature = 1.0);

// Row-wise softmax of x / temperature. With a mask (rows*cols bytes,
// nonzero = allowed) disallowed entries get probability exactly zero.
DiffArray SoftmaxRows(const DiffArray &x, double temperature = 1.0,
                      std::span<const uint8_t> mask = {});

// Probability vector softmax(logits / temperature) for a 1-D logit vector.
DiffArray SoftmaxWithTemperature(const DiffArray &logits, double temperature);

DiffArray LayerNormRows(const DiffArray &x, const DiffArray &gamma,
                        const DiffArray &beta, double eps = 1e-5);

// x [r x 2c] -> first_half * sigmoid(second_half), [r x c].
DiffArray Glu(const DiffArray &x);

// Depthwise 1-D convolution over rows (time). x [T x C], w [K x C],
// bias [C]. Causal: output t sees rows t-K+1..t. Otherwise centred (K odd).
DiffArray DepthwiseConvTime(const DiffArray &x, const DiffArray &w,
                            const DiffArray &bias, bool causal);

DiffArray SliceRows(const DiffArray &x, int begin, int end);
DiffArray SliceCols(const DiffArray &x, int begin, int end);
DiffArray ConcatRows(const std::vector<DiffArray> &parts);
DiffArray ConcatCols(const std::vector<DiffArray> &parts);
DiffArray Reshape(const DiffArray &x, Shape shape);

// Rows of table [n x c] selected by ids.
DiffArray GatherRows(const DiffArray &table, std::span<const int> ids);

// a [T x J], b [U x J] -> [T*U x J], row t*U+u = a_t + b_u.
DiffArray OuterAddRows(const DiffArray &a, const DiffArray &b);

// Column means of x [r x c] -> [1 x c].
DiffArray MeanRows(const DiffArray &x);

// Inverted dropout; identity when p == 0.
DiffArray Dropout(const DiffArray &x, double p, Rng &rng);

// Bias matrix [T x T] with entry (i, j) = table[head, clip(j - i) + R] for
// table [H x (2R+1)].
DiffArray RelativePositionBias(const DiffArray &table, int head, int frames);

// out_r = X[r*N] + sum_{i>=1} w_i (X[r*N+i] - X[r*N]) for X [R*N x E] and
// weights w (N values). Equals sum_i w_i X[r*N+i] whenever sum w = 1, and
// is exact when all N slots coincide.
DiffArray AnchoredWeightedSum(const DiffArray &x, const DiffArray &weights, int slots);

// Scalar reductions and scalar arithmetic.
DiffArray Sum(const DiffArray &x);
DiffArray Mean(const DiffArray &x);
DiffArray Pick(const DiffArray &x, std::size_t flat_index);
DiffArray LogAddExp(const DiffArray &a, const DiffArray &b);
// log sum_i exp(x_i) over all entries; -inf entries allowed; empty input is
// a usage error.
DiffArray LogSumExp(const DiffArray &x);
// Weighted sum of scalars.
DiffArray WeightedSum(const std::vector<DiffArray> &xs, const std::vector<double> &w);

CASC_END_NAMESPACE

#endif  // CASC_TENSOR_OPS_H_
