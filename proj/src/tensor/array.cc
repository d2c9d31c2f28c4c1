// src/tensor/array.cc

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

#include "casc/tensor/array.h"

#include <algorithm>
#include <sstream>

#include "casc/base/errors.h"

CASC_BEGIN_NAMESPACE

std::size_t NumElements(const Shape &shape) {
  std::size_t n = 1;
  for (int d : shape) {
    if (d < 0) throw UsageError("negative dimension in shape");
    n *= static_cast<std::size_t>(d);
  }
  return n;
}

std::string ShapeString(const Shape &shape) {
  std::ostringstream os;
  os << '[';
  for (std::size_t i = 0; i < shape.size(); ++i) {
    if (i) os << 'x';
    os << shape[i];
  }
  os << ']';
  return os.str();
}

Array::Array(Shape shape, Real fill)
    : shape_(std::move(shape)), data_(NumElements(shape_), fill) {}

Array::Array(Shape shape, std::vector<Real> data)
    : shape_(std::move(shape)), data_(std::move(data)) {
  if (NumElements(shape_) != data_.size()) {
    throw UsageError("Array: shape " + ShapeString(shape_) + " does not match " +
                     std::to_string(data_.size()) + " values");
  }
}

int Array::rows() const {
  if (rank() == 2) return shape_[0];
  if (rank() <= 1) return 1;
  throw UsageError("Array::rows: rank " + std::to_string(rank()) + " is not a matrix");
}

int Array::cols() const {
  if (rank() == 2) return shape_[1];
  if (rank() == 1) return shape_[0];
  if (rank() == 0) return 1;
  throw UsageError("Array::cols: rank " + std::to_string(rank()) + " is not a matrix");
}

Real Array::item() const {
  if (data_.size() != 1) {
    throw UsageError("Array::item on array of shape " + ShapeString(shape_));
  }
  return data_[0];
}

void Array::Fill(Real v) { std::fill(data_.begin(), data_.end(), v); }

Array Array::Reshaped(Shape shape) const {
  if (NumElements(shape) != data_.size()) {
    throw UsageError("Reshaped: " + ShapeString(shape_) + " -> " + ShapeString(shape));
  }
  return Array(std::move(shape), data_);
}

CASC_END_NAMESPACE
