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

#include "hsnn/accumulator.hpp"

#include <random>

#include "hsnn/error.hpp"

namespace hsnn {
namespace {

struct Dims {
  std::size_t c, h, w, t;
  std::size_t sites() const { return h * w; }
};

Dims spike_dims(const Shape& shape) {
  if (shape.size() != 4) throw DimensionError("accumulator expects (C,H,W,T) input, got " + shape_str(shape));
  return {shape[0], shape[1], shape[2], shape[3]};
}

void check_timesteps(const Dims& d, const AccumulatorConfig& cfg) {
  if (d.t != cfg.timesteps) {
    throw ConfigError("accumulator configured for T=" + std::to_string(cfg.timesteps) + " but input has T=" +
                      std::to_string(d.t));
  }
}

std::vector<double> forward_values(std::span<const double> s, const Dims& d, const AccumulatorConfig& cfg) {
  const std::size_t groups = cfg.groups();
  std::vector<double> out(d.c * groups * d.sites(), 0.0);
  for (std::size_t g = 0; g < groups; ++g) {
    const std::size_t t0 = g * cfg.interval;
    const std::size_t t1 = std::min(d.t, t0 + cfg.interval);
    for (std::size_t c = 0; c < d.c; ++c) {
      double* dst = out.data() + (g * d.c + c) * d.sites();
      const double* src = s.data() + c * d.sites() * d.t;
      for (std::size_t site = 0; site < d.sites(); ++site) {
        double acc = 0.0;
        for (std::size_t t = t0; t < t1; ++t) acc += src[site * d.t + t];
        dst[site] = acc;
      }
    }
  }
  return out;
}

void backward_into(std::span<const double> ga, const Dims& d, const AccumulatorConfig& cfg, double* gs) {
  for (std::size_t c = 0; c < d.c; ++c) {
    for (std::size_t site = 0; site < d.sites(); ++site) {
      double* dst = gs + (c * d.sites() + site) * d.t;
      for (std::size_t t = 0; t < d.t; ++t) {
        dst[t] += ga[((t / cfg.interval) * d.c + c) * d.sites() + site];
      }
    }
  }
}

}  // namespace

void AccumulatorConfig::validate() const {
  if (interval == 0 || timesteps == 0) throw ConfigError("accumulate interval and timesteps must be positive");
  if (interval > timesteps) {
    throw ConfigError("accumulate interval " + std::to_string(interval) + " exceeds T=" + std::to_string(timesteps));
  }
  if (timesteps % interval != 0 && !pad_partial_group) {
    throw ConfigError("accumulate interval " + std::to_string(interval) + " does not divide T=" +
                      std::to_string(timesteps));
  }
}

Shape accumulated_shape(const Shape& spike_shape, const AccumulatorConfig& cfg) {
  cfg.validate();
  const Dims d = spike_dims(spike_shape);
  check_timesteps(d, cfg);
  return {cfg.output_channels(d.c), d.h, d.w};
}

Tensor accumulate_forward(const SpikeTensor& spikes, const AccumulatorConfig& cfg) {
  return accumulate(spikes.to_tensor(), cfg);
}

Tensor accumulate_backward(const Tensor& grad_accumulated, const Shape& spike_shape, const AccumulatorConfig& cfg) {
  const Shape expected = accumulated_shape(spike_shape, cfg);
  if (grad_accumulated.shape() != expected) {
    throw DimensionError("accumulate_backward: gradient shape " + shape_str(grad_accumulated.shape()) +
                         " does not match " + shape_str(expected));
  }
  const Dims d = spike_dims(spike_shape);
  std::vector<double> gs(shape_numel(spike_shape), 0.0);
  backward_into(grad_accumulated.data(), d, cfg, gs.data());
  return Tensor::from(spike_shape, std::move(gs));
}

Tensor accumulate(const Tensor& spikes_chwt, const AccumulatorConfig& cfg, const AccumulateOptions& opts) {
  const Shape out_shape = accumulated_shape(spikes_chwt.shape(), cfg);
  const Dims d = spike_dims(spikes_chwt.shape());
  if (opts.require_binary) {
    const auto data = spikes_chwt.data();
    for (std::size_t i = 0; i < data.size(); ++i) {
      if (data[i] != 0.0 && data[i] != 1.0) {
        throw ContractError("accumulator input element " + std::to_string(i) + " is not binary");
      }
    }
  }
  std::vector<double> out = forward_values(spikes_chwt.data(), d, cfg);
  return make_result(
      out_shape, std::move(out), {spikes_chwt},
      [d, cfg](const detail::Node& self) {
        backward_into(self.grad, d, cfg, self.inputs[0]->grad_buffer().data());
      },
      "accumulate");
}

AdjointCheck jacobian_check(const AccumulatorConfig& cfg, std::size_t channels, std::size_t height,
                            std::size_t width, std::size_t pairs, std::uint64_t seed) {
  const Shape s_shape{channels, height, width, cfg.timesteps};
  const Shape a_shape = accumulated_shape(s_shape, cfg);
  const Dims d = spike_dims(s_shape);
  std::mt19937_64 rng(seed);
  AdjointCheck result;
  std::vector<double> x(shape_numel(s_shape)), y(shape_numel(a_shape));
  for (std::size_t pair = 0; pair < pairs; ++pair) {
    // Small integers keep every product and partial sum exact in binary64.
    for (auto& v : x) v = static_cast<double>(static_cast<int>(rng() % 7) - 3);
    for (auto& v : y) v = static_cast<double>(static_cast<int>(rng() % 7) - 3);
    const std::vector<double> ax = forward_values(x, d, cfg);
    std::vector<double> aty(x.size(), 0.0);
    backward_into(y, d, cfg, aty.data());
    double lhs = 0.0, rhs = 0.0;
    for (std::size_t i = 0; i < ax.size(); ++i) lhs += ax[i] * y[i];
    for (std::size_t i = 0; i < x.size(); ++i) rhs += x[i] * aty[i];
    if (lhs != rhs) {
      result.ok = false;
      result.first_bad_pair = pair;
      result.detail = "<A x, y> = " + std::to_string(lhs) + " but <x, A^T y> = " + std::to_string(rhs);
      return result;
    }
  }
  return result;
}

}  // namespace hsnn
