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
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "hsnn/spiking.hpp"
#include "hsnn/tensor.hpp"

// Spiking -> non-spiking bridge. Spikes are summed over consecutive groups of
// `interval` timesteps and the group sums are concatenated along channels,
// group-major and channel-minor:
//
//   A[g*C + c, h, w] = sum_{k<I} S[c, h, w, g*I + k]
//
// That flattening order is also the wire layout of the hardware counter bank.
namespace hsnn {

struct AccumulatorConfig {
  std::size_t interval = 1;   // I
  std::size_t timesteps = 1;  // T
  // Zero-pad the final partial group instead of rejecting I not dividing T.
  bool pad_partial_group = false;

  void validate() const;
  std::size_t groups() const { return (timesteps + interval - 1) / interval; }
  std::size_t output_channels(std::size_t channels) const { return channels * groups(); }
};

// Shape of the accumulated tensor: (C*T/I, H, W).
Shape accumulated_shape(const Shape& spike_shape, const AccumulatorConfig& cfg);

// Forward pass on a binary spike tensor (C, H, W, T).
Tensor accumulate_forward(const SpikeTensor& spikes, const AccumulatorConfig& cfg);

// Backward pass: gS[c, h, w, t] = gA[C*floor(t/I) + c, h, w].
// spike_shape is the (C, H, W, T) shape the gradient is produced for.
Tensor accumulate_backward(const Tensor& grad_accumulated, const Shape& spike_shape, const AccumulatorConfig& cfg);

struct AccumulateOptions {
  // Reject inputs that are not exactly {0,1}. Disabled for relaxed spikes.
  bool require_binary = true;
};

// Differentiable accumulator on a real (C, H, W, T) tensor; backward applies
// accumulate_backward to the incoming gradient.
Tensor accumulate(const Tensor& spikes_chwt, const AccumulatorConfig& cfg, const AccumulateOptions& opts = {});

struct AdjointCheck {
  bool ok = true;
  std::optional<std::size_t> first_bad_pair;
  std::string detail;
};

// Verifies <forward(x), y> == <x, backward(y)> exactly over `pairs` random
// integer-valued (x, y) pairs.
AdjointCheck jacobian_check(const AccumulatorConfig& cfg, std::size_t channels, std::size_t height,
                            std::size_t width, std::size_t pairs = 100, std::uint64_t seed = 1);

}  // namespace hsnn
