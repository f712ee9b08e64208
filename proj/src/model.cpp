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

#include "hsnn/model.hpp"

#include <cmath>
#include <random>

#include "hsnn/error.hpp"
#include "hsnn/ops.hpp"

namespace hsnn {
namespace {

// Initial weight scale of spiking layers relative to 1/sqrt(fan_in). The LIF
// integrator has a large DC gain, so spiking weights start smaller than the
// ReLU layers' Kaiming range.
constexpr double kSpikingInitGain = 1.5;

std::uint64_t fnv1a(const std::string& s) {
  std::uint64_t h = 1469598103934665603ull;
  for (unsigned char ch : s) {
    h ^= ch;
    h *= 1099511628211ull;
  }
  return h;
}

double unit_uniform(std::mt19937_64& rng) { return static_cast<double>(rng() >> 11) * 0x1.0p-53; }

[[noreturn]] void layer_error(const std::string& layer, const std::string& what) {
  throw DimensionError("layer " + layer + ": " + what);
}

}  // namespace

HybridModelSpec HybridModelSpec::named(const std::string& name, std::size_t interval) {
  HybridModelSpec spec;
  spec.interval = interval;
  if (name == "ann") {
    spec.kind = ModelKind::kAnn;
    spec.spiking_convs = 0;
  } else if (name == "snn") {
    spec.kind = ModelKind::kSnn;
    spec.spiking_convs = kConvLayers;
  } else if (name.size() == 4 && name[0] == 's' && name[2] == 'a' && name[1] >= '1' && name[1] <= '5' &&
             static_cast<std::size_t>(name[3] - '0') == kConvLayers - static_cast<std::size_t>(name[1] - '0')) {
    spec.kind = ModelKind::kHybrid;
    spec.spiking_convs = static_cast<std::size_t>(name[1] - '0');
  } else {
    throw ConfigError("unknown model '" + name + "' (expected ann, snn or s1a4..s5a0)");
  }
  return spec;
}

std::string HybridModelSpec::name() const {
  switch (kind) {
    case ModelKind::kAnn:
      return "ann";
    case ModelKind::kSnn:
      return "snn";
    case ModelKind::kHybrid:
      break;
  }
  return "s" + std::to_string(spiking_convs) + "a" + std::to_string(kConvLayers - spiking_convs);
}

const std::vector<std::string>& model_names() {
  static const std::vector<std::string> names{"ann", "s1a4", "s2a3", "s3a2", "s4a1", "s5a0", "snn"};
  return names;
}

const char* layer_kind_name(LayerKind kind) {
  switch (kind) {
    case LayerKind::kSpkConv:
      return "SpkConv";
    case LayerKind::kConv:
      return "Conv";
    case LayerKind::kAccumulate:
      return "Accumulate";
    case LayerKind::kDense:
      return "Dense";
    case LayerKind::kSpkDense:
      return "SpkDense";
  }
  return "?";
}

BuiltModel build(const HybridModelSpec& spec) {
  switch (spec.kind) {
    case ModelKind::kAnn:
      if (spec.spiking_convs != 0) throw ConfigError("ANN baseline cannot have spiking convolutions");
      break;
    case ModelKind::kSnn:
      if (spec.spiking_convs != HybridModelSpec::kConvLayers) throw ConfigError("SNN baseline must be all-spiking");
      break;
    case ModelKind::kHybrid:
      if (spec.spiking_convs < 1 || spec.spiking_convs > HybridModelSpec::kConvLayers) {
        throw ConfigError("hybrid models need 1..5 spiking convolutions");
      }
      break;
  }
  if (spec.channel_schedule.size() != HybridModelSpec::kConvLayers ||
      spec.pool_after.size() != HybridModelSpec::kConvLayers) {
    throw ConfigError("channel schedule and pool placement need exactly 5 entries");
  }
  if (spec.kernel_size == 0 || spec.kernel_size % 2 == 0) throw ConfigError("kernel size must be odd");
  if (spec.classes < 2) throw ConfigError("need at least 2 classes");
  for (auto d : spec.input_shape) {
    if (d == 0) throw ConfigError("input shape dimensions must be positive");
  }
  for (auto c : spec.channel_schedule) {
    if (c == 0) throw ConfigError("channel counts must be positive");
  }
  if (spec.kind != ModelKind::kAnn) spec.lif.validate();

  BuiltModel model;
  model.spec = spec;
  const std::size_t steps = spec.timesteps();
  const AccumulatorConfig acc_cfg{spec.interval, steps, false};
  std::size_t c = spec.input_shape[0], h = spec.input_shape[1], w = spec.input_shape[2];

  auto add_accumulator = [&] {
    try {
      acc_cfg.validate();
    } catch (const ConfigError& e) {
      throw ConfigError(std::string("layer accumulate: ") + e.what());
    }
    LayerDesc acc;
    acc.name = "accumulate";
    acc.kind = LayerKind::kAccumulate;
    acc.in_shape = {c, h, w, steps};
    c = acc_cfg.output_channels(c);
    acc.out_shape = {c, h, w};
    acc.neurons = acc.in_shape[0] * h * w;
    model.accumulator_index = model.layers.size();
    model.layers.push_back(std::move(acc));
  };

  if (spec.kind == ModelKind::kAnn) add_accumulator();

  const std::size_t k = spec.kernel_size;
  const std::size_t pad = k / 2;
  for (std::size_t i = 0; i < HybridModelSpec::kConvLayers; ++i) {
    LayerDesc layer;
    layer.name = "conv" + std::to_string(i + 1);
    const bool spiking = i < spec.spiking_convs;
    layer.kind = spiking ? LayerKind::kSpkConv : LayerKind::kConv;
    if (k > h + 2 * pad || k > w + 2 * pad) {
      layer_error(layer.name, "kernel " + std::to_string(k) + " larger than padded input " + shape_str({c, h, w}));
    }
    const std::size_t f = spec.channel_schedule[i];
    const std::size_t ho = h + 2 * pad - k + 1, wo = w + 2 * pad - k + 1;
    layer.in_shape = {c, h, w};
    layer.weight_shape = {f, c, k, k};
    if (!spiking) layer.bias_shape = {f};
    layer.neurons = f * ho * wo;
    layer.macs = f * c * k * k * ho * wo;
    layer.fan_out = f * k * k;
    layer.pool = spec.pool_after[i];
    std::size_t oh = ho, ow = wo;
    if (layer.pool) {
      if (ho % 2 != 0 || wo % 2 != 0) {
        layer_error(layer.name, "cannot 2x2-pool odd spatial dims " + shape_str({f, ho, wo}));
      }
      oh /= 2;
      ow /= 2;
    }
    layer.out_shape = {f, oh, ow};
    model.layers.push_back(std::move(layer));
    c = f;
    h = oh;
    w = ow;
    if (spec.kind == ModelKind::kHybrid && i + 1 == spec.spiking_convs) add_accumulator();
  }

  std::size_t width_in = c * h * w;
  std::vector<std::size_t> widths = spec.dense_widths;
  widths.push_back(spec.classes);
  for (std::size_t i = 0; i < widths.size(); ++i) {
    LayerDesc layer;
    layer.name = "fc" + std::to_string(i + 1);
    const bool spiking = spec.kind == ModelKind::kSnn;
    layer.kind = spiking ? LayerKind::kSpkDense : LayerKind::kDense;
    if (widths[i] == 0) layer_error(layer.name, "zero width");
    layer.in_shape = {width_in};
    layer.out_shape = {widths[i]};
    layer.weight_shape = {widths[i], width_in};
    if (!spiking) layer.bias_shape = {widths[i]};
    layer.neurons = widths[i];
    layer.macs = widths[i] * width_in;
    layer.fan_out = widths[i];
    model.layers.push_back(std::move(layer));
    width_in = widths[i];
  }
  model.parameter_count = count_parameters(model);
  return model;
}

std::size_t count_parameters(const BuiltModel& model) {
  std::size_t n = 0;
  for (const auto& layer : model.layers) n += layer.parameter_count();
  return n;
}

std::vector<NeuronCount> neuron_census(const BuiltModel& model) {
  std::vector<NeuronCount> census;
  for (const auto& layer : model.layers) {
    if (layer.spiking()) census.push_back({layer.name, layer.neurons});
  }
  return census;
}

void ParameterStore::add(std::string name, Tensor value) {
  if (find(name)) throw ConfigError("duplicate parameter '" + name + "'");
  entries_.push_back({std::move(name), std::move(value)});
}

const Tensor* ParameterStore::find(const std::string& name) const {
  for (const auto& e : entries_) {
    if (e.name == name) return &e.value;
  }
  return nullptr;
}

const Tensor& ParameterStore::get(const std::string& name) const {
  const Tensor* t = find(name);
  if (!t) throw ConfigError("missing parameter '" + name + "'");
  return *t;
}

std::size_t ParameterStore::total_size() const {
  std::size_t n = 0;
  for (const auto& e : entries_) n += e.value.numel();
  return n;
}

ParameterStore ParameterStore::clone(bool requires_grad) const {
  ParameterStore out;
  for (const auto& e : entries_) out.add(e.name, Tensor::from(e.value.shape(), e.value.to_vector(), requires_grad));
  return out;
}

void ParameterStore::zero_grad() {
  for (auto& e : entries_) e.value.zero_grad();
}

bool ParameterStore::operator==(const ParameterStore& other) const {
  if (entries_.size() != other.entries_.size()) return false;
  for (std::size_t i = 0; i < entries_.size(); ++i) {
    const auto& a = entries_[i];
    const auto& b = other.entries_[i];
    if (a.name != b.name || a.value.shape() != b.value.shape()) return false;
    if (!std::equal(a.value.data().begin(), a.value.data().end(), b.value.data().begin())) return false;
  }
  return true;
}

ParameterStore init_parameters(const BuiltModel& model, std::uint64_t seed) {
  ParameterStore store;
  for (const auto& layer : model.layers) {
    if (layer.weight_shape.empty()) continue;
    const std::string wname = layer.name + ".weight";
    std::mt19937_64 rng(seed ^ fnv1a(wname));
    const std::size_t fan_in = shape_numel(layer.weight_shape) / layer.weight_shape[0];
    const double bound = layer.spiking() ? kSpikingInitGain / std::sqrt(static_cast<double>(fan_in))
                                         : std::sqrt(6.0 / static_cast<double>(fan_in));
    std::vector<double> values(shape_numel(layer.weight_shape));
    for (auto& v : values) v = (2.0 * unit_uniform(rng) - 1.0) * bound;
    store.add(wname, Tensor::from(layer.weight_shape, std::move(values), true));
    if (!layer.bias_shape.empty()) store.add(layer.name + ".bias", Tensor::zeros(layer.bias_shape, true));
  }
  return store;
}

namespace {

struct Runner {
  const BuiltModel& model;
  const ParameterStore& params;
  const ForwardOptions& opts;

  LifOptions lif_options(const std::string& layer) const {
    LifOptions o;
    o.spike_fn = opts.spike_fn;
    o.detach_reset = opts.detach_reset;
    o.layer = layer;
    return o;
  }

  SpikePoolOptions pool_options() const {
    SpikePoolOptions p = model.spec.spike_pool;
    p.spike_fn = opts.spike_fn;
    return p;
  }

  void check_budget() const {
    std::size_t bytes = 0;
    for (const auto& layer : model.layers) {
      if (layer.spiking()) bytes += bptt_retained_bytes(layer.neurons, model.spec.timesteps());
    }
    if (bytes > opts.memory_budget_bytes) {
      throw ResourceError("BPTT unroll needs about " + std::to_string(bytes >> 20) + " MiB, budget is " +
                          std::to_string(opts.memory_budget_bytes >> 20) +
                          " MiB; use fewer timesteps or a smaller batch");
    }
  }
};

}  // namespace

ForwardResult forward(const BuiltModel& model, const ParameterStore& params, const SpikeTensor& input,
                      const ForwardOptions& opts) {
  const auto& spec = model.spec;
  if (input.channels() != spec.input_shape[0] || input.height() != spec.input_shape[1] ||
      input.width() != spec.input_shape[2] || input.timesteps() != spec.input_shape[3]) {
    throw DimensionError("model " + spec.name() + " expects input " +
                         shape_str({spec.input_shape[0], spec.input_shape[1], spec.input_shape[2],
                                    spec.input_shape[3]}) +
                         ", got " + shape_str(input.shape()));
  }
  Runner run{model, params, opts};
  run.check_budget();

  ForwardResult result;
  const bool relaxed = opts.spike_fn == SpikeFunction::kRelaxed;
  const std::size_t steps = spec.timesteps();
  Tensor x = input.to_tensor();
  bool time_major = false;  // spiking activations travel as (T, C, H, W)
  double spikes_in = static_cast<double>(input.count());

  for (std::size_t li = 0; li < model.layers.size(); ++li) {
    const LayerDesc& layer = model.layers[li];
    const bool last = li + 1 == model.layers.size();
    switch (layer.kind) {
      case LayerKind::kSpkConv: {
        if (!time_major) {
          x = to_time_major(x);
          time_major = true;
        }
        x = spk_conv(x, params.get(layer.name + ".weight"), spec.lif, run.lif_options(layer.name));
        if (layer.pool) x = spike_pool(x, run.pool_options());
        double out_spikes = 0.0;
        for (double v : x.data()) out_spikes += v;
        result.activity.push_back({layer.name, spikes_in, out_spikes, layer.neurons});
        spikes_in = out_spikes;
        break;
      }
      case LayerKind::kAccumulate: {
        if (time_major) {
          x = to_time_minor(x);
          time_major = false;
        }
        result.accumulator_input_spikes = spikes_in;
        result.accumulator_neurons = layer.neurons;
        if (opts.accumulator_grad_scale != 1.0) x = ops::grad_scale(x, opts.accumulator_grad_scale);
        x = accumulate(x, model.accumulator_config(), AccumulateOptions{!relaxed});
        break;
      }
      case LayerKind::kConv: {
        x = ops::conv2d(x, params.get(layer.name + ".weight"), params.get(layer.name + ".bias"),
                        ops::Conv2dOptions{1, spec.kernel_size / 2});
        x = ops::relu(x);
        if (layer.pool) x = ops::maxpool2d(x);
        break;
      }
      case LayerKind::kDense: {
        x = ops::dense(ops::flatten(x), params.get(layer.name + ".weight"), params.get(layer.name + ".bias"));
        if (!last) x = ops::relu(x);
        break;
      }
      case LayerKind::kSpkDense: {
        // Time-major activations flatten to (T, features); one matmul covers all steps.
        x = ops::reshape(x, {steps, x.numel() / steps});
        const Tensor drive = ops::matmul(x, ops::transpose(params.get(layer.name + ".weight")));
        x = cuba_lif(drive, spec.lif, run.lif_options(layer.name));
        double out_spikes = 0.0;
        for (double v : x.data()) out_spikes += v;
        result.activity.push_back({layer.name, spikes_in, out_spikes, layer.neurons});
        spikes_in = out_spikes;
        if (last) {
          // Spike-count readout: logits are output spikes summed over time.
          x = ops::reshape(ops::matmul(Tensor::full({1, steps}, 1.0), x), {layer.neurons});
        }
        break;
      }
    }
  }
  result.logits = x;
  return result;
}

SpikeTensor accumulator_input(const BuiltModel& model, const ParameterStore& params, const SpikeTensor& input) {
  if (!model.accumulator_index) throw ConfigError("model " + model.spec.name() + " has no accumulator");
  const auto& spec = model.spec;
  Tensor x = input.to_tensor();
  bool time_major = false;
  for (std::size_t li = 0; li < *model.accumulator_index; ++li) {
    const LayerDesc& layer = model.layers[li];
    if (!time_major) {
      x = to_time_major(x);
      time_major = true;
    }
    LifOptions lif_opts;
    lif_opts.layer = layer.name;
    x = spk_conv(x, params.get(layer.name + ".weight").detach(), spec.lif, lif_opts);
    if (layer.pool) x = spike_pool(x, spec.spike_pool);
  }
  if (time_major) x = to_time_minor(x);
  return SpikeTensor::from_tensor(x);
}

}  // namespace hsnn
