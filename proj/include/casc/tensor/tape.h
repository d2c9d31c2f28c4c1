// include/casc/tensor/tape.h

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

#ifndef CASC_TENSOR_TAPE_H_
#define CASC_TENSOR_TAPE_H_

#include <functional>
#include <initializer_list>
#include <optional>
#include <string>
#include <unordered_map>
#include <vector>

#include "casc/base/real.h"
#include "casc/tensor/array.h"

CASC_BEGIN_NAMESPACE

// A named trainable array. `grad` is filled by Tape::Backward and consumed
// by the optimizer. Frozen parameters enter a tape as constants.
struct Parameter {
  std::string name;
  Array value;
  Array grad;
  bool frozen = false;

  void ZeroGrad() { grad = Array(value.shape(), Real(0)); }
};

class Tape;

// Handle to a node on a differentiation tape: the value, and after
// Tape::Backward its gradient. Cheap to copy; valid while the tape lives.
class DiffArray {
 public:
  DiffArray() = default;

  // Valid until the next node is recorded on the tape; copy to keep.
  const Array &value() const;
  const Shape &shape() const { return value().shape(); }
  int rows() const { return value().rows(); }
  int cols() const { return value().cols(); }
  std::size_t size() const { return value().size(); }
  Real item() const { return value().item(); }

  // Gradient of the backward root w.r.t. this node; nullptr if no gradient
  // reached it (or the tape is not recording).
  const Array *grad() const;
  bool requires_grad() const;

  Tape *tape() const { return tape_; }
  int id() const { return id_; }
  int tape_id() const;
  bool valid() const { return tape_ != nullptr; }

 private:
  friend class Tape;
  DiffArray(Tape *tape, int id) : tape_(tape), id_(id) {}

  Tape *tape_ = nullptr;
  int id_ = -1;
};

// One reverse-mode differentiation tape. Nodes are appended in evaluation
// order; Backward walks them in reverse. A tape is owned by one thread.
// With recording disabled the tape only evaluates values (inference).
class Tape {
 public:
  // Receives the node's output value and gradient and pushes gradients to
  // the inputs through Tape::AccumulateGrad / Tape::GradBuffer.
  using BackwardFn =
      std::function<void(Tape &, const Array &out_value, const Array &out_grad)>;

  explicit Tape(bool record_gradients = true);
  Tape(const Tape &) = delete;
  Tape &operator=(const Tape &) = delete;

  int id() const { return id_; }
  bool recording() const { return recording_; }
  std::size_t num_nodes() const { return nodes_.size(); }

  DiffArray Constant(Array value);
  DiffArray Constant(Real value) { return Constant(Array::Scalar(value)); }

  // Leaf bound to a parameter. Repeated calls return the same node, so a
  // parameter used in two places (weight tying) has one gradient.
  DiffArray Param(Parameter &p);

  // Appends the result of an operation on `inputs`. `backward` runs only
  // when recording and at least one input requires a gradient.
  DiffArray Record(Array value, std::initializer_list<DiffArray> inputs,
                   BackwardFn backward);
  DiffArray Record(Array value, const std::vector<DiffArray> &inputs,
                   BackwardFn backward);

  const Array &value(const DiffArray &x) const;
  bool requires_grad(const DiffArray &x) const;
  const Array *grad(const DiffArray &x) const;

  // Adds `g` (same shape as x) into x's gradient buffer. No-op when x does
  // not require a gradient.
  void AccumulateGrad(const DiffArray &x, const Array &g);
  // Mutable gradient buffer (zero-initialised on first access). Only valid
  // for nodes that require a gradient.
  Array &GradBuffer(const DiffArray &x);

  // Reverse sweep from a one-element root. Afterwards every parameter bound
  // to this tape (and not frozen) has its gradient added into
  // Parameter::grad; parameters reached by no path receive zeros.
  void Backward(const DiffArray &root);

 private:
  struct Node {
    Array own;
    const Array *external = nullptr;
    std::optional<Array> grad;
    BackwardFn backward;
    Parameter *param = nullptr;
    bool requires_grad = false;

    const Array &value() const { return external ? *external : own; }
  };

  void Check(const DiffArray &x) const;

  int id_;
  bool recording_;
  bool backward_done_ = false;
  std::vector<Node> nodes_;
  std::unordered_map<const Parameter *, int> param_nodes_;
};

CASC_END_NAMESPACE

#endif  // CASC_TENSOR_TAPE_H_
