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
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "hsnn/events.hpp"
#include "hsnn/hw_sim.hpp"
#include "hsnn/model.hpp"

namespace hsnn {

struct NeuromorphicProfile {
  std::string name = "neuromorphic";
  std::size_t neurons_per_core = 1024;
  std::size_t cores_per_chip = 128;
  double synapses_per_chip = 128e6;
  double energy_per_synaptic_event_j = 0.0;
  double energy_per_core_timestep_j = 0.0;
  double timestep_s = 0.0;
};

struct EdgeProfile {
  std::string name = "edge";
  double energy_per_mac_j = 0.0;
  double idle_power_w = 0.0;
  double throughput_macs_per_s = 0.0;
  // Terms beyond MAC energy and idle power; see README.
  double memory_bandwidth_bytes_per_s = 0.0;
  double energy_per_weight_byte_j = 0.0;
  double bytes_per_weight = 4.0;
  double layer_overhead_s = 0.0;
};

struct ProfileSet {
  std::string provenance;
  NeuromorphicProfile neuromorphic;
  EdgeProfile edge;
  HwEnergyModel accumulator;
  double link_energy_j = 0.0;
  double link_latency_s = 0.0;
};

// Throws ConfigError naming every missing or non-positive field.
ProfileSet parse_profiles(const std::string& json_text);
ProfileSet load_profiles(const std::filesystem::path& path);
std::string profiles_to_json(const ProfileSet& profiles);
// Calibration shipped with the artifact (mirrors profiles/default_profiles.json).
const ProfileSet& default_profiles();

struct CoreAllocation {
  struct Layer {
    std::string layer;
    std::size_t neurons = 0;
    std::size_t cores = 0;

    bool operator==(const Layer&) const = default;
  };
  std::vector<Layer> layers;
  std::size_t total = 0;
  bool multi_chip = false;
};

CoreAllocation allocate_cores(const std::vector<NeuronCount>& census, const NeuromorphicProfile& profile);

// Loihi core counts of the full-scale models, attached to reports for reference.
std::optional<std::size_t> reference_cores(const std::string& model_name);

struct ComponentCost {
  std::string name;
  double latency_s = 0.0;
  double power_w = 0.0;
  double energy_j = 0.0;

  bool operator==(const ComponentCost&) const = default;
};

// Sets power = energy / latency and then energy = power * latency, so the
// identity holds exactly on the stored values.
ComponentCost make_component(const std::string& name, double latency_s, double energy_j);

struct CostReport {
  std::string model;
  std::size_t interval = 0;
  std::size_t timesteps = 0;
  std::vector<ComponentCost> components;  // spiking, accumulator, link, ann
  ComponentCost total;
  std::vector<CoreAllocation::Layer> cores;
  std::size_t total_cores = 0;
  bool multi_chip = false;
  std::optional<std::size_t> reference_cores;
  double synaptic_events = 0.0;
  double macs = 0.0;

  const ComponentCost& component(const std::string& name) const;
  bool operator==(const CostReport&) const = default;
};

// Mean per-layer presynaptic spike counts measured on probe inputs.
struct ActivityProfile {
  std::vector<LayerActivity> layers;
  double accumulator_spikes = 0.0;
};

ActivityProfile measure_activity(const BuiltModel& model, const ParameterStore& params,
                                 const std::vector<SpikeTensor>& probe);

CostReport estimate(const BuiltModel& model, const ActivityProfile& activity, const ProfileSet& profiles);
CostReport estimate(const BuiltModel& model, const ParameterStore& params, const std::vector<SpikeTensor>& probe,
                    const ProfileSet& profiles);

// Largest relative deviation of energy from power * latency over every component.
double max_consistency_error(const CostReport& report);

std::string report_to_jsonl(const CostReport& report);
CostReport report_from_jsonl(const std::string& line);
std::string report_table(const std::vector<CostReport>& reports);

// Writes <stem>.txt (table) and <stem>.jsonl (one record per report).
void emit_reports(const std::vector<CostReport>& reports, const std::filesystem::path& stem);
std::vector<CostReport> load_reports(const std::filesystem::path& jsonl);

struct OrderingCheck {
  std::string name;
  bool ok = false;
  bool skipped = false;  // the sweep lacks the reports this check needs
  std::string detail;
};

// Qualitative orderings expected of the default calibration.
std::vector<OrderingCheck> check_orderings(const std::vector<CostReport>& reports);

}  // namespace hsnn
