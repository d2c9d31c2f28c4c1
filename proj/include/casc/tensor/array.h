// include/casc/tensor/array.h

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

#ifndef CASC_TENSOR_ARRAY_H_
#define CASC_TENSOR_ARRAY_H_

#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include "casc/base/real.h"

CASC_BEGIN_NAMESPACE

using Shape = std::vector<int>;

std::size_t NumElements(const Shape &shape);
std::string ShapeString(const Shape &shape);

// Dense row-major array of Real. Rank 0 (shape {}) holds one scalar.
class Array {
 public:
  Array() : shape_{0} {}
  explicit Array(Shape shape, Real fill = 0);
  Array(Shape shape, std::vector<Real> data);

  static Array Scalar(Real v) { return Array(Shape{}, std::vector<Real>{v}); }

  const Shape &shape() const { return shape_; }
  int rank() const { return static_cast<int>(shape_.size()); }
  int dim(int i) const { return shape_.at(i); }
  // Matrix view: rank-1 arrays read as a single row.
  int rows() const;
  int cols() const;
  std::size_t size() const { return data_.size(); }

  Real *data() { return data_.data(); }
  const Real *data() const { return data_.data(); }
  std::span<Real> span() { return data_; }
  std::span<const Real> span() const { return data_; }
  std::vector<Real> &vec() { return data_; }
  const std::vector<Real> &vec() const { return data_; }

  Real &operator[](std::size_t i) { return data_[i]; }
  Real operator[](std::size_t i) const { return data_[i]; }
  Real &operator()(int r, int c) { return data_[static_cast<std::size_t>(r) * cols() + c]; }
  Real operator()(int r, int c) const {
    return data_[static_cast<std::size_t>(r) * cols() + c];
  }
  Real *row(int r) { return data_.data() + static_cast<std::size_t>(r) * cols(); }
  const Real *row(int r) const {
    return data_.data() + static_cast<std::size_t>(r) * cols();
  }

  // Value of a one-element array.
  Real item() const;

  void Fill(Real v);
  Array Reshaped(Shape shape) const;

  bool operator==(const Array &other) const = default;

 private:
  Shape shape_;
  std::vector<Real> data_;
};

CASC_END_NAMESPACE

#endif  // CASC_TENSOR_ARRAY_H_
