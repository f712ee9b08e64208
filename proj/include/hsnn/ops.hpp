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

#include <array>
#include <cstddef>

#include "hsnn/tensor.hpp"

// Differentiable dense-tensor operations. Every op records a backward rule
// when any input requires a gradient; reductions run in a fixed
// left-to-right order so forward results are bit-reproducible.
namespace hsnn::ops {

Tensor add(const Tensor& a, const Tensor& b);
Tensor mul(const Tensor& a, const Tensor& b);
Tensor scale(const Tensor& a, double factor);
Tensor sum(const Tensor& a);

Tensor reshape(const Tensor& a, Shape shape);
Tensor flatten(const Tensor& a);
// out[idx[perm[0]], idx[perm[1]], ...] layout: output axis i is input axis perm[i].
Tensor permute(const Tensor& a, std::array<std::size_t, 4> perm);
Tensor transpose(const Tensor& a);

Tensor matmul(const Tensor& a, const Tensor& b);

struct Conv2dOptions {
  std::size_t stride = 1;
  std::size_t pad = 0;
};

// Cross-correlation. x is (N, C, H, W) or (C, H, W); w is (F, C, k, k);
// bias is (F) or undefined. Output keeps x's rank.
Tensor conv2d(const Tensor& x, const Tensor& w, const Tensor& bias, Conv2dOptions opts = {});
inline Tensor conv2d(const Tensor& x, const Tensor& w, Conv2dOptions opts = {}) {
  return conv2d(x, w, Tensor{}, opts);
}

Tensor relu(const Tensor& a);

// 2x2 stride-2 max pooling over the two trailing axes. Ties resolve to the
// lowest flat index within the window.
Tensor maxpool2d(const Tensor& a);

// Affine map y = W x + b for x of shape (in), W (out, in), b (out) or undefined.
Tensor dense(const Tensor& x, const Tensor& w, const Tensor& bias);

// Softmax cross entropy of a logit vector against one class index (scalar).
Tensor softmax_cross_entropy(const Tensor& logits, std::size_t label);

// Identity in the forward pass; multiplies the incoming gradient by factor.
Tensor grad_scale(const Tensor& a, double factor);

std::size_t argmax(const Tensor& a);

}  // namespace hsnn::ops
