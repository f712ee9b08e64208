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
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "hsnn/tensor.hpp"

namespace hsnn {

// Binary event tensor laid out (C, H, W, T) with time as the trailing axis.
class SpikeTensor {
 public:
  SpikeTensor() = default;
  SpikeTensor(std::size_t channels, std::size_t height, std::size_t width, std::size_t timesteps);
  // Validates that every element is exactly 0 or 1.
  SpikeTensor(std::size_t channels, std::size_t height, std::size_t width, std::size_t timesteps,
              std::vector<double> data);
  static SpikeTensor from_tensor(const Tensor& t);

  std::size_t channels() const { return c_; }
  std::size_t height() const { return h_; }
  std::size_t width() const { return w_; }
  std::size_t timesteps() const { return t_; }
  Shape shape() const { return {c_, h_, w_, t_}; }
  std::size_t size() const { return data_.size(); }

  std::size_t index(std::size_t c, std::size_t y, std::size_t x, std::size_t t) const {
    return ((c * h_ + y) * w_ + x) * t_ + t;
  }
  double at(std::size_t c, std::size_t y, std::size_t x, std::size_t t) const {
    return data_[index(c, y, x, t)];
  }
  void set(std::size_t c, std::size_t y, std::size_t x, std::size_t t, bool on) {
    data_[index(c, y, x, t)] = on ? 1.0 : 0.0;
  }
  std::span<const double> data() const { return data_; }
  std::size_t count() const;

  Tensor to_tensor(bool requires_grad = false) const;

  bool operator==(const SpikeTensor&) const = default;

 private:
  std::size_t c_ = 0, h_ = 0, w_ = 0, t_ = 0;
  std::vector<double> data_;
};

struct CubaLifParams {
  double current_decay = 0.25;  // alpha_u
  double voltage_decay = 0.1;   // alpha_v
  double threshold = 1.0;
  double surrogate_width = 0.5;

  void validate() const;
};

// Synaptic current and membrane voltage of one layer.
struct CubaLifState {
  std::vector<double> u;
  std::vector<double> v;

  static CubaLifState zeros(std::size_t neurons) {
    return {std::vector<double>(neurons, 0.0), std::vector<double>(neurons, 0.0)};
  }
};

struct LifStepResult {
  CubaLifState state;
  std::vector<double> spikes;
  std::vector<double> pre_reset_voltage;
};

// One CUBA-LIF update with hard reset:
//   u' = (1-a_u) u + x,  v' = (1-a_v) v + u',  s = [v' >= theta],  v' <- 0 where s.
// `layer` and `timestep` only label the NumericError raised on NaN input.
LifStepResult cuba_lif_step(const CubaLifState& state, std::span<const double> input,
                            const CubaLifParams& params, const std::string& layer = "lif",
                            std::size_t timestep = 0);

// Spike-escape surrogate for dS/dV: exp(-|v - theta| / sigma) / (2 sigma).
double surrogate_derivative(double v, const CubaLifParams& params);
Tensor surrogate_grad(const Tensor& v, const CubaLifParams& params);

enum class SpikeFunction {
  kHeaviside,  // binary spikes, surrogate derivative in backward
  kRelaxed,    // smooth Laplace-CDF spikes whose exact derivative is the surrogate
};

struct LifOptions {
  SpikeFunction spike_fn = SpikeFunction::kHeaviside;
  // Drop the reset term's contribution to the voltage gradient.
  bool detach_reset = false;
  std::string layer = "lif";
};

// CUBA-LIF over a whole sequence, recorded as one BPTT node.
// drive is time-major (T, ...); the output spikes have the same shape and the
// state starts at zero. Backward carries gradients through both the current
// and voltage recurrences.
Tensor cuba_lif(const Tensor& drive, const CubaLifParams& params, const LifOptions& opts = {});

enum class SpikePoolMode {
  kOr,            // any spike in the 2x2 window
  kSumThreshold,  // spike when the window sum reaches the pool threshold
};

struct SpikePoolOptions {
  SpikePoolMode mode = SpikePoolMode::kOr;
  double sum_threshold = 2.0;
  SpikeFunction spike_fn = SpikeFunction::kHeaviside;
  double surrogate_width = 0.5;
};

// 2x2 stride-2 pooling over the trailing spatial axes of a time-major spike
// tensor (T, C, H, W) or any tensor whose last two axes are (H, W).
Tensor spike_pool(const Tensor& spikes, const SpikePoolOptions& opts = {});
SpikeTensor spike_pool(const SpikeTensor& x, const SpikePoolOptions& opts = {});

// Spiking convolution: per timestep conv2d (stride 1, pad = k/2) drives a
// CUBA-LIF layer. Input and output are (C, H, W, T).
SpikeTensor spk_conv_forward(const SpikeTensor& x, const Tensor& weight, const CubaLifParams& params);

// Differentiable form on time-major tensors: (T, C, H, W) -> (T, F, H', W').
Tensor spk_conv(const Tensor& x_time_major, const Tensor& weight, const CubaLifParams& params,
                const LifOptions& opts = {});

// Axis moves between (C, H, W, T) and (T, C, H, W).
Tensor to_time_major(const Tensor& chwt);
Tensor to_time_minor(const Tensor& tchw);

// Rough byte count retained by a BPTT unroll of one layer with `neurons`
// outputs over `timesteps` steps; used to enforce a memory budget.
std::size_t bptt_retained_bytes(std::size_t neurons, std::size_t timesteps);

}  // namespace hsnn
