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

#include "hsnn/spiking.hpp"

#include <cmath>
#include <memory>

#include "hsnn/error.hpp"
#include "hsnn/ops.hpp"

namespace hsnn {
namespace {

void check_binary(std::span<const double> data) {
  for (std::size_t i = 0; i < data.size(); ++i) {
    if (data[i] != 0.0 && data[i] != 1.0) {
      throw ContractError("spike tensor element " + std::to_string(i) + " is " +
                          std::to_string(data[i]) + ", expected 0 or 1");
    }
  }
}

void check_lif_params(const CubaLifParams& p) {
  if (!(p.current_decay >= 0.0 && p.current_decay <= 1.0) ||
      !(p.voltage_decay >= 0.0 && p.voltage_decay <= 1.0)) {
    throw ConfigError("CUBA-LIF decays must lie in [0, 1]");
  }
  if (!(p.surrogate_width > 0.0)) throw ConfigError("surrogate width must be positive");
  if (std::isnan(p.threshold)) throw ConfigError("threshold is NaN");
}

// Laplace CDF centred on the threshold; its derivative is the surrogate kernel.
double relaxed_spike(double v, double threshold, double width) {
  const double z = v - threshold;
  return z < 0.0 ? 0.5 * std::exp(z / width) : 1.0 - 0.5 * std::exp(-z / width);
}

double kernel(double z, double width) { return std::exp(-std::abs(z) / width) / (2.0 * width); }

}  // namespace

SpikeTensor::SpikeTensor(std::size_t channels, std::size_t height, std::size_t width, std::size_t timesteps)
    : c_(channels), h_(height), w_(width), t_(timesteps), data_(channels * height * width * timesteps, 0.0) {
  if (timesteps == 0) throw DimensionError("spike tensor needs T >= 1");
}

SpikeTensor::SpikeTensor(std::size_t channels, std::size_t height, std::size_t width, std::size_t timesteps,
                         std::vector<double> data)
    : c_(channels), h_(height), w_(width), t_(timesteps), data_(std::move(data)) {
  if (timesteps == 0) throw DimensionError("spike tensor needs T >= 1");
  if (data_.size() != c_ * h_ * w_ * t_) {
    throw DimensionError("spike tensor of shape " + shape_str(shape()) + " given " +
                         std::to_string(data_.size()) + " values");
  }
  check_binary(data_);
}

SpikeTensor SpikeTensor::from_tensor(const Tensor& t) {
  if (t.rank() != 4) throw DimensionError("spike tensor must be rank 4 (C,H,W,T), got " + shape_str(t.shape()));
  return SpikeTensor(t.dim(0), t.dim(1), t.dim(2), t.dim(3), t.to_vector());
}

std::size_t SpikeTensor::count() const {
  std::size_t n = 0;
  for (double v : data_) n += v != 0.0;
  return n;
}

Tensor SpikeTensor::to_tensor(bool requires_grad) const { return Tensor::from(shape(), data_, requires_grad); }

void CubaLifParams::validate() const {
  check_lif_params(*this);
  if (!(threshold > 0.0)) throw ConfigError("CUBA-LIF threshold must be positive");
}

LifStepResult cuba_lif_step(const CubaLifState& state, std::span<const double> input, const CubaLifParams& params,
                            const std::string& layer, std::size_t timestep) {
  check_lif_params(params);
  if (input.size() != state.u.size() || state.u.size() != state.v.size()) {
    throw DimensionError("cuba_lif_step: input has " + std::to_string(input.size()) + " neurons, state has " +
                         std::to_string(state.u.size()));
  }
  const double keep_u = 1.0 - params.current_decay;
  const double keep_v = 1.0 - params.voltage_decay;
  LifStepResult r;
  r.state = CubaLifState::zeros(input.size());
  r.spikes.assign(input.size(), 0.0);
  r.pre_reset_voltage.assign(input.size(), 0.0);
  for (std::size_t i = 0; i < input.size(); ++i) {
    if (std::isnan(input[i])) {
      throw NumericError("NaN input to layer '" + layer + "' at timestep " + std::to_string(timestep) +
                         ", neuron " + std::to_string(i));
    }
    const double u = keep_u * state.u[i] + input[i];
    const double v = keep_v * state.v[i] + u;
    const bool fire = v >= params.threshold;
    r.state.u[i] = u;
    r.state.v[i] = fire ? 0.0 : v;
    r.spikes[i] = fire ? 1.0 : 0.0;
    r.pre_reset_voltage[i] = v;
  }
  return r;
}

double surrogate_derivative(double v, const CubaLifParams& params) {
  return kernel(v - params.threshold, params.surrogate_width);
}

Tensor surrogate_grad(const Tensor& v, const CubaLifParams& params) {
  std::vector<double> out(v.numel());
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = surrogate_derivative(v[i], params);
  return Tensor::from(v.shape(), std::move(out));
}

Tensor cuba_lif(const Tensor& drive, const CubaLifParams& params, const LifOptions& opts) {
  check_lif_params(params);
  if (drive.rank() < 1) throw DimensionError("cuba_lif: drive must be time-major (T, ...)");
  const std::size_t steps = drive.dim(0);
  const std::size_t neurons = drive.numel() / steps;
  const double keep_u = 1.0 - params.current_decay;
  const double keep_v = 1.0 - params.voltage_decay;
  const double theta = params.threshold;
  const double width = params.surrogate_width;
  const bool relaxed = opts.spike_fn == SpikeFunction::kRelaxed;

  std::vector<double> spikes(drive.numel());
  auto pre_reset = std::make_shared<std::vector<double>>(drive.numel());
  std::vector<double> u(neurons, 0.0), v(neurons, 0.0);
  const double* x = drive.data().data();
  for (std::size_t t = 0; t < steps; ++t) {
    const std::size_t base = t * neurons;
    for (std::size_t i = 0; i < neurons; ++i) {
      const double in = x[base + i];
      if (!std::isfinite(in)) {
        throw NumericError("non-finite drive into layer '" + opts.layer + "' at timestep " + std::to_string(t) +
                           ", neuron " + std::to_string(i));
      }
      u[i] = keep_u * u[i] + in;
      const double p = keep_v * v[i] + u[i];
      const double s = relaxed ? relaxed_spike(p, theta, width) : (p >= theta ? 1.0 : 0.0);
      (*pre_reset)[base + i] = p;
      spikes[base + i] = s;
      v[i] = p * (1.0 - s);
    }
  }
  auto spike_copy = std::make_shared<std::vector<double>>(spikes);
  const bool detach_reset = opts.detach_reset;
  return make_result(
      drive.shape(), std::move(spikes), {drive},
      [=](const detail::Node& self) {
        auto& gx = self.inputs[0]->grad_buffer();
        // Carried gradients w.r.t. u_t and post-reset v_t from step t+1.
        std::vector<double> carry_u(neurons, 0.0), carry_v(neurons, 0.0);
        for (std::size_t t = steps; t-- > 0;) {
          const std::size_t base = t * neurons;
          for (std::size_t i = 0; i < neurons; ++i) {
            const double p = (*pre_reset)[base + i];
            const double s = (*spike_copy)[base + i];
            const double ds = kernel(p - theta, width);
            const double dv_dp = detach_reset ? (1.0 - s) : (1.0 - s - p * ds);
            const double gp = carry_v[i] * dv_dp + self.grad[base + i] * ds;
            const double gu = gp + carry_u[i];
            gx[base + i] += gu;
            carry_u[i] = keep_u * gu;
            carry_v[i] = keep_v * gp;
          }
        }
      },
      "cuba_lif");
}

Tensor spike_pool(const Tensor& spikes, const SpikePoolOptions& opts) {
  if (opts.mode == SpikePoolMode::kOr) {
    // On {0,1} inputs the window max is the logical OR.
    return ops::maxpool2d(spikes);
  }
  if (spikes.rank() < 2) throw DimensionError("spike_pool: need at least 2 axes");
  const std::size_t h = spikes.dim(spikes.rank() - 2), w = spikes.dim(spikes.rank() - 1);
  if (h % 2 != 0 || w % 2 != 0) {
    throw DimensionError("spike_pool: spatial dims must be even, got " + shape_str(spikes.shape()));
  }
  const std::size_t planes = spikes.numel() / (h * w);
  const std::size_t ho = h / 2, wo = w / 2;
  Shape out_shape = spikes.shape();
  out_shape[out_shape.size() - 2] = ho;
  out_shape[out_shape.size() - 1] = wo;
  std::vector<double> out(planes * ho * wo);
  auto window_sum = std::make_shared<std::vector<double>>(out.size());
  const bool relaxed = opts.spike_fn == SpikeFunction::kRelaxed;
  for (std::size_t pl = 0; pl < planes; ++pl) {
    for (std::size_t i = 0; i < ho; ++i) {
      for (std::size_t j = 0; j < wo; ++j) {
        const std::size_t b = pl * h * w + 2 * i * w + 2 * j;
        const double s = spikes[b] + spikes[b + 1] + spikes[b + w] + spikes[b + w + 1];
        const std::size_t o = (pl * ho + i) * wo + j;
        (*window_sum)[o] = s;
        out[o] = relaxed ? relaxed_spike(s, opts.sum_threshold, opts.surrogate_width)
                         : (s >= opts.sum_threshold ? 1.0 : 0.0);
      }
    }
  }
  const double threshold = opts.sum_threshold, width = opts.surrogate_width;
  return make_result(
      std::move(out_shape), std::move(out), {spikes},
      [=](const detail::Node& self) {
        auto& g = self.inputs[0]->grad_buffer();
        for (std::size_t pl = 0; pl < planes; ++pl) {
          for (std::size_t i = 0; i < ho; ++i) {
            for (std::size_t j = 0; j < wo; ++j) {
              const std::size_t o = (pl * ho + i) * wo + j;
              const double d = self.grad[o] * kernel((*window_sum)[o] - threshold, width);
              const std::size_t b = pl * h * w + 2 * i * w + 2 * j;
              g[b] += d;
              g[b + 1] += d;
              g[b + w] += d;
              g[b + w + 1] += d;
            }
          }
        }
      },
      "spike_pool");
}

SpikeTensor spike_pool(const SpikeTensor& x, const SpikePoolOptions& opts) {
  Tensor pooled = to_time_minor(spike_pool(to_time_major(x.to_tensor()), opts));
  return SpikeTensor::from_tensor(pooled);
}

Tensor to_time_major(const Tensor& chwt) { return ops::permute(chwt, {3, 0, 1, 2}); }
Tensor to_time_minor(const Tensor& tchw) { return ops::permute(tchw, {1, 2, 3, 0}); }

Tensor spk_conv(const Tensor& x_time_major, const Tensor& weight, const CubaLifParams& params,
                const LifOptions& opts) {
  if (weight.rank() != 4) throw DimensionError("spk_conv: weight must be (F,C,k,k), got " + shape_str(weight.shape()));
  const Tensor drive = ops::conv2d(x_time_major, weight, ops::Conv2dOptions{1, weight.dim(2) / 2});
  return cuba_lif(drive, params, opts);
}

SpikeTensor spk_conv_forward(const SpikeTensor& x, const Tensor& weight, const CubaLifParams& params) {
  Tensor out = spk_conv(to_time_major(x.to_tensor()), weight.detach(), params);
  return SpikeTensor::from_tensor(to_time_minor(out));
}

std::size_t bptt_retained_bytes(std::size_t neurons, std::size_t timesteps) {
  // drive, pre-reset voltage, spikes, spike copy and the drive gradient
  return neurons * timesteps * sizeof(double) * 5;
}

}  // namespace hsnn
