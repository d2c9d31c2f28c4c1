// src/tensor/tape.cc

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

#include "casc/tensor/tape.h"

#include <atomic>

#include "casc/base/errors.h"
#include "casc/simd/kernels.h"

CASC_BEGIN_NAMESPACE

namespace {
std::atomic<int> next_tape_id{1};
}  // namespace

const Array &DiffArray::value() const {
  if (!tape_) throw UsageError("DiffArray: empty handle");
  return tape_->value(*this);
}

const Array *DiffArray::grad() const { return tape_ ? tape_->grad(*this) : nullptr; }

bool DiffArray::requires_grad() const {
  return tape_ != nullptr && tape_->requires_grad(*this);
}

int DiffArray::tape_id() const { return tape_ ? tape_->id() : 0; }

Tape::Tape(bool record_gradients)
    : id_(next_tape_id.fetch_add(1)), recording_(record_gradients) {}

void Tape::Check(const DiffArray &x) const {
  if (x.tape_ != this || x.id_ < 0 || x.id_ >= static_cast<int>(nodes_.size())) {
    throw UsageError("DiffArray does not belong to this tape");
  }
}

DiffArray Tape::Constant(Array value) {
  Node n;
  n.own = std::move(value);
  nodes_.push_back(std::move(n));
  return DiffArray(this, static_cast<int>(nodes_.size()) - 1);
}

DiffArray Tape::Param(Parameter &p) {
  if (auto it = param_nodes_.find(&p); it != param_nodes_.end()) {
    return DiffArray(this, it->second);
  }
  Node n;
  n.external = &p.value;
  n.param = &p;
  n.requires_grad = recording_ && !p.frozen;
  nodes_.push_back(std::move(n));
  const int id = static_cast<int>(nodes_.size()) - 1;
  param_nodes_.emplace(&p, id);
  return DiffArray(this, id);
}

DiffArray Tape::Record(Array value, std::initializer_list<DiffArray> inputs,
                       BackwardFn backward) {
  bool needs = false;
  for (const DiffArray &in : inputs) {
    Check(in);
    needs = needs || nodes_[in.id_].requires_grad;
  }
  Node n;
  n.own = std::move(value);
  if (recording_ && needs) {
    n.requires_grad = true;
    n.backward = std::move(backward);
  }
  nodes_.push_back(std::move(n));
  return DiffArray(this, static_cast<int>(nodes_.size()) - 1);
}

DiffArray Tape::Record(Array value, const std::vector<DiffArray> &inputs,
                       BackwardFn backward) {
  bool needs = false;
  for (const DiffArray &in : inputs) {
    Check(in);
    needs = needs || nodes_[in.id_].requires_grad;
  }
  Node n;
  n.own = std::move(value);
  if (recording_ && needs) {
    n.requires_grad = true;
    n.backward = std::move(backward);
  }
  nodes_.push_back(std::move(n));
  return DiffArray(this, static_cast<int>(nodes_.size()) - 1);
}

const Array &Tape::value(const DiffArray &x) const {
  Check(x);
  return nodes_[x.id_].value();
}

bool Tape::requires_grad(const DiffArray &x) const {
  Check(x);
  return nodes_[x.id_].requires_grad;
}

const Array *Tape::grad(const DiffArray &x) const {
  Check(x);
  const auto &g = nodes_[x.id_].grad;
  return g ? &*g : nullptr;
}

Array &Tape::GradBuffer(const DiffArray &x) {
  Check(x);
  Node &n = nodes_[x.id_];
  if (!n.requires_grad) throw UsageError("GradBuffer on a node without gradient");
  if (!n.grad) n.grad.emplace(n.value().shape(), Real(0));
  return *n.grad;
}

void Tape::AccumulateGrad(const DiffArray &x, const Array &g) {
  Check(x);
  if (!nodes_[x.id_].requires_grad) return;
  Array &buf = GradBuffer(x);
  if (buf.size() != g.size()) {
    throw UsageError("AccumulateGrad: gradient shape " + ShapeString(g.shape()) +
                     " vs value " + ShapeString(buf.shape()));
  }
  simd::Axpy(Real(1), g.data(), buf.data(), g.size());
}

void Tape::Backward(const DiffArray &root) {
  Check(root);
  if (!recording_) throw UsageError("Backward on a non-recording tape");
  if (backward_done_) throw UsageError("Backward called twice on one tape");
  backward_done_ = true;
  Node &r = nodes_[root.id_];
  if (r.value().size() != 1) {
    throw UsageError("Backward root must hold one value, got " +
                     ShapeString(r.value().shape()));
  }
  if (r.requires_grad) r.grad.emplace(r.value().shape(), Real(1));
  for (int i = root.id_; i >= 0; --i) {
    Node &n = nodes_[i];
    if (!n.requires_grad || !n.grad || !n.backward) continue;
    n.backward(*this, n.value(), *n.grad);
  }
  for (Node &n : nodes_) {
    if (n.param == nullptr || n.param->frozen) continue;
    Parameter &p = *n.param;
    if (p.grad.shape() != p.value.shape()) p.ZeroGrad();
    if (n.grad) simd::Axpy(Real(1), n.grad->data(), p.grad.data(), p.grad.size());
  }
}

CASC_END_NAMESPACE
