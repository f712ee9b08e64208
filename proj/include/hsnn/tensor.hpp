// Copyright 2026 The hybrid-snn Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
// http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

#include <cstddef>
#include <functional>
#include <memory>
#include <span>
#include <string>
#include <vector>

namespace hsnn {

using Shape = std::vector<std::size_t>;

std::size_t shape_numel(const Shape& shape);
std::string shape_str(const Shape& shape);

namespace detail {

// One recorded value in the autodiff graph. Non-leaf nodes keep references to
// their inputs and a rule that pushes this node's gradient back into them.
struct Node {
  Shape shape;
  std::vector<double> value;
  std::vector<double> grad;  // empty until something flows into it
  bool requires_grad = false;
  const char* op = "leaf";
  std::vector<std::shared_ptr<Node>> inputs;
  std::function<void(const Node&)> backward_fn;

  bool is_leaf() const { return !backward_fn; }
  std::vector<double>& grad_buffer() {
    if (grad.empty()) grad.assign(value.size(), 0.0);
    return grad;
  }
};

}  // namespace detail

// Dense row-major tensor of doubles with reverse-mode autodiff.
//
// Values are immutable once an op has produced them. Leaves created with
// requires_grad=true receive gradients from backward(); their values may be
// updated in place by an optimizer between graph constructions.
class Tensor {
 public:
  Tensor() = default;

  static Tensor from(Shape shape, std::vector<double> data, bool requires_grad = false);
  static Tensor zeros(Shape shape, bool requires_grad = false);
  static Tensor full(Shape shape, double value, bool requires_grad = false);
  static Tensor scalar(double value, bool requires_grad = false);

  bool defined() const { return node_ != nullptr; }
  const Shape& shape() const { return node_->shape; }
  std::size_t dim(std::size_t axis) const { return node_->shape.at(axis); }
  std::size_t rank() const { return node_->shape.size(); }
  std::size_t numel() const { return node_->value.size(); }
  std::span<const double> data() const { return node_->value; }
  double operator[](std::size_t i) const { return node_->value[i]; }
  double item() const;

  bool requires_grad() const { return node_ && node_->requires_grad; }
  bool is_leaf() const { return node_->is_leaf(); }

  // Gradient accumulated by the last backward(); empty span if none reached this tensor.
  std::span<const double> grad() const { return node_->grad; }
  void zero_grad() { node_->grad.clear(); }

  // In-place update of a leaf's values (optimizer use only).
  std::span<double> mutable_leaf_data();

  // Same values, no graph history, no gradient tracking.
  Tensor detach() const;
  std::vector<double> to_vector() const { return node_->value; }

  const std::shared_ptr<detail::Node>& node() const { return node_; }
  explicit Tensor(std::shared_ptr<detail::Node> node) : node_(std::move(node)) {}

 private:
  std::shared_ptr<detail::Node> node_;
};

// Builds the output of an op. The backward rule and input references are kept
// only when at least one input requires a gradient.
Tensor make_result(Shape shape, std::vector<double> value, std::vector<Tensor> inputs,
                   std::function<void(const detail::Node&)> backward_fn, const char* op);

// Reverse-mode sweep from a scalar loss. Every reachable leaf with
// requires_grad gets its gradient accumulated; intermediate gradients are
// released and the recorded graph is consumed. Returns the leaves reached.
std::vector<Tensor> backward(const Tensor& loss);

// Scalar matrix kernel: c[m x n] += a[m x k] * b[k x n]. Each c[i][j]
// accumulates its k products in ascending order.
void gemm_accumulate(const double* a, const double* b, double* c, std::size_t m, std::size_t k,
                     std::size_t n);

// out[cols x rows] = transpose(in[rows x cols])
void transpose_into(const double* in, double* out, std::size_t rows, std::size_t cols);

}  // namespace hsnn
