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
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "hsnn/accumulator.hpp"
#include "hsnn/spiking.hpp"
#include "hsnn/tensor.hpp"

namespace hsnn {

enum class ModelKind { kAnn, kHybrid, kSnn };

// Declarative description of an S_kA_m network: k spiking convolutions
// followed by m = 5 - k ordinary ones and a three-layer dense head. The
// accumulator sits after the last spiking convolution (at the very front for
// the ANN baseline). The SNN baseline is all-spiking with no accumulator.
struct HybridModelSpec {
  ModelKind kind = ModelKind::kHybrid;
  std::size_t spiking_convs = 2;
  std::size_t interval = 5;
  std::array<std::size_t, 4> input_shape{2, 32, 32, 20};  // (C, H, W, T)
  std::vector<std::size_t> channel_schedule{16, 32, 64, 64, 128};
  std::size_t kernel_size = 3;
  std::vector<bool> pool_after{true, true, true, false, true};
  std::vector<std::size_t> dense_widths{256, 128};  // hidden widths; the head adds `classes`
  std::size_t classes = 3;
  CubaLifParams lif{};
  SpikePoolOptions spike_pool{};

  static constexpr std::size_t kConvLayers = 5;

  // "ann", "snn" or "s<k>a<5-k>" for k in 1..5.
  static HybridModelSpec named(const std::string& name, std::size_t interval = 5);
  std::string name() const;
  std::size_t timesteps() const { return input_shape[3]; }
  bool has_accumulator() const { return kind != ModelKind::kSnn; }
  std::size_t non_spiking_convs() const { return kConvLayers - spiking_convs; }
};

// Every model name the factory knows, ANN first and SNN last.
const std::vector<std::string>& model_names();

enum class LayerKind { kSpkConv, kConv, kAccumulate, kDense, kSpkDense };
const char* layer_kind_name(LayerKind kind);

struct LayerDesc {
  std::string name;
  LayerKind kind;
  Shape in_shape;    // per timestep for spiking layers; (C,H,W,T) for the accumulator
  Shape out_shape;   // after pooling
  bool pool = false;
  Shape weight_shape;  // empty for the accumulator
  Shape bias_shape;    // empty when the layer has no bias
  std::size_t neurons = 0;  // LIF neurons (spiking) or output units before pooling
  std::size_t macs = 0;     // multiply-accumulates per inference (per timestep for spiking layers)
  std::size_t fan_out = 0;  // synapses driven by one presynaptic spike

  std::size_t parameter_count() const { return shape_numel_or_zero(weight_shape) + shape_numel_or_zero(bias_shape); }
  bool spiking() const { return kind == LayerKind::kSpkConv || kind == LayerKind::kSpkDense; }

  static std::size_t shape_numel_or_zero(const Shape& s) { return s.empty() ? 0 : shape_numel(s); }
};

struct BuiltModel {
  HybridModelSpec spec;
  std::vector<LayerDesc> layers;
  std::optional<std::size_t> accumulator_index;
  std::size_t parameter_count = 0;

  AccumulatorConfig accumulator_config() const { return {spec.interval, spec.timesteps(), false}; }
};

// Shape-checks the whole chain; DimensionError/ConfigError name the offending layer.
BuiltModel build(const HybridModelSpec& spec);
std::size_t count_parameters(const BuiltModel& model);

struct NeuronCount {
  std::string layer;
  std::size_t neurons;
};
std::vector<NeuronCount> neuron_census(const BuiltModel& model);

// Named, ordered parameter tensors of a built model.
class ParameterStore {
 public:
  struct Entry {
    std::string name;
    Tensor value;
  };

  void add(std::string name, Tensor value);
  const Tensor& get(const std::string& name) const;
  const Tensor* find(const std::string& name) const;
  std::vector<Entry>& entries() { return entries_; }
  const std::vector<Entry>& entries() const { return entries_; }
  std::size_t total_size() const;

  // Deep copy with fresh leaf tensors (gradients not copied).
  ParameterStore clone(bool requires_grad = true) const;
  void zero_grad();
  bool operator==(const ParameterStore& other) const;

 private:
  std::vector<Entry> entries_;
};

// Deterministic initialisation. Each tensor draws from its own stream keyed by
// (seed, parameter name), so identically named layers match across variants.
ParameterStore init_parameters(const BuiltModel& model, std::uint64_t seed);

struct ForwardOptions {
  SpikeFunction spike_fn = SpikeFunction::kHeaviside;
  bool detach_reset = false;
  // Multiplies gradients crossing the accumulator (probe for gradient connectivity).
  double accumulator_grad_scale = 1.0;
  std::size_t memory_budget_bytes = std::size_t{2} << 30;
};

struct LayerActivity {
  std::string layer;
  double input_spikes = 0.0;   // presynaptic spikes over all timesteps
  double output_spikes = 0.0;  // spikes leaving the layer after pooling
  std::size_t neurons = 0;
};

struct ForwardResult {
  Tensor logits;
  std::vector<LayerActivity> activity;  // one entry per spiking layer
  double accumulator_input_spikes = 0.0;
  std::size_t accumulator_neurons = 0;  // C*H*W entering the accumulator
};

ForwardResult forward(const BuiltModel& model, const ParameterStore& params, const SpikeTensor& input,
                      const ForwardOptions& opts = {});

// Spike tensor (C,H,W,T) delivered to the accumulator, for hardware co-simulation.
SpikeTensor accumulator_input(const BuiltModel& model, const ParameterStore& params, const SpikeTensor& input);

}  // namespace hsnn
