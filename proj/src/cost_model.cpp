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

#include "hsnn/cost_model.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <sstream>

#include <json.hpp>

#include "hsnn/error.hpp"

namespace hsnn {
namespace {

using nlohmann::json;
using nlohmann::ordered_json;

const char* kDefaultProfilesJson = R"json(
{
  "provenance": "Invented calibration constants chosen so the model reproduces qualitative orderings; not measurements of any device.",
  "neuromorphic": {
    "name": "loihi-like",
    "neurons_per_core": 1024,
    "cores_per_chip": 128,
    "synapses_per_chip": 128000000,
    "energy_per_synaptic_event_j": 2.36e-11,
    "energy_per_core_timestep_j": 1.0e-9,
    "timestep_s": 2.0e-5
  },
  "edge": {
    "name": "jetson-like",
    "energy_per_mac_j": 4.6e-12,
    "idle_power_w": 1.5,
    "throughput_macs_per_s": 2.5e11,
    "memory_bandwidth_bytes_per_s": 2.5e10,
    "energy_per_weight_byte_j": 5.0e-10,
    "bytes_per_weight": 4,
    "layer_overhead_s": 6.7e-4
  },
  "accumulator": {
    "clock_hz": 1.0e9,
    "counter_bit_tick_j": 7.5e-16,
    "increment_j": 5.0e-17,
    "latch_bit_j": 1.0e-16,
    "banks": 1
  },
  "link_energy_j": 0,
  "link_latency_s": 0
}
)json";

struct FieldReader {
  const json& root;
  std::vector<std::string> missing;

  const json* node(const std::string& section) {
    if (!root.contains(section) || !root[section].is_object()) {
      missing.push_back(section);
      return nullptr;
    }
    return &root[section];
  }

  double number(const json* obj, const std::string& section, const std::string& key, bool allow_zero = false) {
    const std::string path = section.empty() ? key : section + "." + key;
    const json& src = obj ? *obj : root;
    if (!src.contains(key) || !src[key].is_number()) {
      missing.push_back(path);
      return 0.0;
    }
    const double v = src[key].get<double>();
    if (!std::isfinite(v) || v < 0.0 || (!allow_zero && v == 0.0)) {
      missing.push_back(path + " (must be " + (allow_zero ? "non-negative" : "positive") + ")");
    }
    return v;
  }

  std::string text(const json* obj, const std::string& key, const std::string& fallback) {
    if (obj && obj->contains(key) && (*obj)[key].is_string()) return (*obj)[key].get<std::string>();
    return fallback;
  }
};

ordered_json component_json(const ComponentCost& c) {
  return {{"name", c.name}, {"latency_s", c.latency_s}, {"power_w", c.power_w}, {"energy_j", c.energy_j}};
}

ComponentCost component_from(const json& j) {
  return {j.at("name").get<std::string>(), j.at("latency_s").get<double>(), j.at("power_w").get<double>(),
          j.at("energy_j").get<double>()};
}

double relative_gap(double a, double b) {
  const double scale = std::max(std::abs(a), std::abs(b));
  return scale == 0.0 ? 0.0 : std::abs(a - b) / scale;
}

}  // namespace

ProfileSet parse_profiles(const std::string& json_text) {
  json root;
  try {
    root = json::parse(json_text);
  } catch (const json::parse_error& e) {
    throw ConfigError(std::string("profile file is not valid JSON: ") + e.what());
  }
  if (!root.is_object()) throw ConfigError("profile file must hold a JSON object");
  FieldReader r{root, {}};
  ProfileSet p;
  p.provenance = root.value("provenance", std::string());
  if (const json* n = r.node("neuromorphic")) {
    p.neuromorphic.name = r.text(n, "name", p.neuromorphic.name);
    p.neuromorphic.neurons_per_core = static_cast<std::size_t>(r.number(n, "neuromorphic", "neurons_per_core"));
    p.neuromorphic.cores_per_chip = static_cast<std::size_t>(r.number(n, "neuromorphic", "cores_per_chip"));
    p.neuromorphic.synapses_per_chip = r.number(n, "neuromorphic", "synapses_per_chip");
    p.neuromorphic.energy_per_synaptic_event_j = r.number(n, "neuromorphic", "energy_per_synaptic_event_j");
    p.neuromorphic.energy_per_core_timestep_j = r.number(n, "neuromorphic", "energy_per_core_timestep_j");
    p.neuromorphic.timestep_s = r.number(n, "neuromorphic", "timestep_s");
  }
  if (const json* e = r.node("edge")) {
    p.edge.name = r.text(e, "name", p.edge.name);
    p.edge.energy_per_mac_j = r.number(e, "edge", "energy_per_mac_j");
    p.edge.idle_power_w = r.number(e, "edge", "idle_power_w", true);
    p.edge.throughput_macs_per_s = r.number(e, "edge", "throughput_macs_per_s");
    p.edge.memory_bandwidth_bytes_per_s = r.number(e, "edge", "memory_bandwidth_bytes_per_s");
    p.edge.energy_per_weight_byte_j = r.number(e, "edge", "energy_per_weight_byte_j", true);
    p.edge.bytes_per_weight = r.number(e, "edge", "bytes_per_weight");
    p.edge.layer_overhead_s = r.number(e, "edge", "layer_overhead_s", true);
  }
  if (const json* a = r.node("accumulator")) {
    p.accumulator.clock_hz = r.number(a, "accumulator", "clock_hz");
    p.accumulator.counter_bit_tick_j = r.number(a, "accumulator", "counter_bit_tick_j", true);
    p.accumulator.increment_j = r.number(a, "accumulator", "increment_j", true);
    p.accumulator.latch_bit_j = r.number(a, "accumulator", "latch_bit_j", true);
    p.accumulator.banks = r.number(a, "accumulator", "banks");
  }
  // The cross-device link is optional and defaults to free.
  if (root.contains("link_energy_j")) p.link_energy_j = r.number(nullptr, "", "link_energy_j", true);
  if (root.contains("link_latency_s")) p.link_latency_s = r.number(nullptr, "", "link_latency_s", true);
  if (!r.missing.empty()) {
    std::string msg = "profile is missing or has invalid fields:";
    for (const auto& m : r.missing) msg += " " + m;
    throw ConfigError(msg);
  }
  return p;
}

ProfileSet load_profiles(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot read profile file " + path.string());
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_profiles(ss.str());
}

std::string profiles_to_json(const ProfileSet& p) {
  ordered_json j;
  j["provenance"] = p.provenance;
  j["neuromorphic"] = {{"name", p.neuromorphic.name},
                       {"neurons_per_core", p.neuromorphic.neurons_per_core},
                       {"cores_per_chip", p.neuromorphic.cores_per_chip},
                       {"synapses_per_chip", p.neuromorphic.synapses_per_chip},
                       {"energy_per_synaptic_event_j", p.neuromorphic.energy_per_synaptic_event_j},
                       {"energy_per_core_timestep_j", p.neuromorphic.energy_per_core_timestep_j},
                       {"timestep_s", p.neuromorphic.timestep_s}};
  j["edge"] = {{"name", p.edge.name},
               {"energy_per_mac_j", p.edge.energy_per_mac_j},
               {"idle_power_w", p.edge.idle_power_w},
               {"throughput_macs_per_s", p.edge.throughput_macs_per_s},
               {"memory_bandwidth_bytes_per_s", p.edge.memory_bandwidth_bytes_per_s},
               {"energy_per_weight_byte_j", p.edge.energy_per_weight_byte_j},
               {"bytes_per_weight", p.edge.bytes_per_weight},
               {"layer_overhead_s", p.edge.layer_overhead_s}};
  j["accumulator"] = {{"clock_hz", p.accumulator.clock_hz},
                      {"counter_bit_tick_j", p.accumulator.counter_bit_tick_j},
                      {"increment_j", p.accumulator.increment_j},
                      {"latch_bit_j", p.accumulator.latch_bit_j},
                      {"banks", p.accumulator.banks}};
  j["link_energy_j"] = p.link_energy_j;
  j["link_latency_s"] = p.link_latency_s;
  return j.dump(2) + "\n";
}

const ProfileSet& default_profiles() {
  static const ProfileSet profiles = parse_profiles(kDefaultProfilesJson);
  return profiles;
}

CoreAllocation allocate_cores(const std::vector<NeuronCount>& census, const NeuromorphicProfile& profile) {
  if (profile.neurons_per_core == 0) throw ConfigError("neurons_per_core must be positive");
  CoreAllocation out;
  for (const auto& layer : census) {
    const std::size_t cores = (layer.neurons + profile.neurons_per_core - 1) / profile.neurons_per_core;
    out.layers.push_back({layer.layer, layer.neurons, cores});
    out.total += cores;
  }
  out.multi_chip = out.total > profile.cores_per_chip;
  return out;
}

std::optional<std::size_t> reference_cores(const std::string& model_name) {
  static const std::map<std::string, std::size_t> table = {{"ann", 0},   {"s1a4", 16}, {"s2a3", 32}, {"s3a2", 36},
                                                           {"s4a1", 38}, {"s5a0", 42}, {"snn", 58}};
  const auto it = table.find(model_name);
  if (it == table.end()) return std::nullopt;
  return it->second;
}

ComponentCost make_component(const std::string& name, double latency_s, double energy_j) {
  ComponentCost c;
  c.name = name;
  c.latency_s = latency_s;
  if (latency_s > 0.0) {
    c.power_w = energy_j / latency_s;
    c.energy_j = c.power_w * latency_s;
  }
  return c;
}

const ComponentCost& CostReport::component(const std::string& name) const {
  for (const auto& c : components) {
    if (c.name == name) return c;
  }
  throw ContractError("report has no component '" + name + "'");
}

ActivityProfile measure_activity(const BuiltModel& model, const ParameterStore& params,
                                 const std::vector<SpikeTensor>& probe) {
  ActivityProfile out;
  if (probe.empty()) throw ConfigError("activity probe needs at least one input");
  for (const auto& input : probe) {
    const ForwardResult fr = forward(model, params, input);
    if (out.layers.empty()) {
      out.layers = fr.activity;
      for (auto& l : out.layers) l.input_spikes = l.output_spikes = 0.0;
    }
    for (std::size_t i = 0; i < fr.activity.size(); ++i) {
      out.layers[i].input_spikes += fr.activity[i].input_spikes;
      out.layers[i].output_spikes += fr.activity[i].output_spikes;
    }
    out.accumulator_spikes += fr.accumulator_input_spikes;
  }
  const double n = static_cast<double>(probe.size());
  for (auto& l : out.layers) {
    l.input_spikes /= n;
    l.output_spikes /= n;
  }
  out.accumulator_spikes /= n;
  return out;
}

CostReport estimate(const BuiltModel& model, const ActivityProfile& activity, const ProfileSet& profiles) {
  const auto& neuro = profiles.neuromorphic;
  const auto& edge = profiles.edge;
  const std::size_t T = model.spec.timesteps();
  CostReport r;
  r.model = model.spec.name();
  r.interval = model.spec.interval;
  r.timesteps = T;
  r.reference_cores = reference_cores(r.model);

  // Spiking side: event-driven synaptic energy plus per-core timestep overhead.
  std::vector<NeuronCount> census;
  double events = 0.0;
  std::size_t spiking_layer = 0;
  for (const auto& layer : model.layers) {
    if (!layer.spiking()) continue;
    census.push_back({layer.name, layer.neurons});
    if (spiking_layer >= activity.layers.size() || activity.layers[spiking_layer].layer != layer.name) {
      throw ContractError("activity profile does not match spiking layer " + layer.name);
    }
    events += activity.layers[spiking_layer].input_spikes * static_cast<double>(layer.fan_out);
    ++spiking_layer;
  }
  const CoreAllocation alloc = allocate_cores(census, neuro);
  r.cores = alloc.layers;
  r.total_cores = alloc.total;
  r.multi_chip = alloc.multi_chip;
  r.synaptic_events = events;
  if (census.empty()) {
    r.components.push_back(make_component("spiking", 0.0, 0.0));
  } else {
    const double energy = events * neuro.energy_per_synaptic_event_j +
                          static_cast<double>(alloc.total) * neuro.energy_per_core_timestep_j * static_cast<double>(T);
    r.components.push_back(make_component("spiking", static_cast<double>(T) * neuro.timestep_s, energy));
  }

  // Accumulator: counter bank serving every neuron entering it.
  if (model.accumulator_index) {
    const Shape& in = model.layers[*model.accumulator_index].in_shape;
    const PartitionPlan plan = make_plan(in[0] * in[1] * in[2]);
    const HwCost hw = hw_cost(plan, model.spec.interval, T, activity.accumulator_spikes, profiles.accumulator);
    r.components.push_back(make_component("accumulator", hw.latency_s, hw.energy_j));
    r.components.push_back(make_component("link", profiles.link_latency_s, profiles.link_energy_j));
  } else {
    r.components.push_back(make_component("accumulator", 0.0, 0.0));
    r.components.push_back(make_component("link", 0.0, 0.0));
  }

  // Non-spiking side: per-layer roofline latency, MAC and weight-fetch energy, idle power.
  double ann_latency = 0.0, ann_energy = 0.0, macs = 0.0;
  for (const auto& layer : model.layers) {
    if (layer.spiking() || layer.kind == LayerKind::kAccumulate) continue;
    const double m = static_cast<double>(layer.macs);
    const double bytes = static_cast<double>(layer.parameter_count()) * edge.bytes_per_weight;
    const double latency =
        std::max(m / edge.throughput_macs_per_s, bytes / edge.memory_bandwidth_bytes_per_s) + edge.layer_overhead_s;
    ann_latency += latency;
    ann_energy += m * edge.energy_per_mac_j + bytes * edge.energy_per_weight_byte_j;
    macs += m;
  }
  ann_energy += edge.idle_power_w * ann_latency;
  r.macs = macs;
  r.components.push_back(make_component("ann", ann_latency, ann_energy));

  double latency = 0.0, energy = 0.0;
  for (const auto& c : r.components) {
    latency += c.latency_s;
    energy += c.energy_j;
  }
  r.total = make_component("total", latency, energy);
  return r;
}

CostReport estimate(const BuiltModel& model, const ParameterStore& params, const std::vector<SpikeTensor>& probe,
                    const ProfileSet& profiles) {
  return estimate(model, measure_activity(model, params, probe), profiles);
}

double max_consistency_error(const CostReport& report) {
  double worst = relative_gap(report.total.energy_j, report.total.power_w * report.total.latency_s);
  for (const auto& c : report.components) {
    worst = std::max(worst, relative_gap(c.energy_j, c.power_w * c.latency_s));
  }
  return worst;
}

std::string report_to_jsonl(const CostReport& r) {
  ordered_json j;
  j["model"] = r.model;
  j["interval"] = r.interval;
  j["timesteps"] = r.timesteps;
  j["components"] = ordered_json::array();
  for (const auto& c : r.components) j["components"].push_back(component_json(c));
  j["total"] = component_json(r.total);
  j["cores"] = ordered_json::array();
  for (const auto& c : r.cores) j["cores"].push_back({{"layer", c.layer}, {"neurons", c.neurons}, {"cores", c.cores}});
  j["total_cores"] = r.total_cores;
  j["multi_chip"] = r.multi_chip;
  j["reference_cores"] = r.reference_cores ? ordered_json(*r.reference_cores) : ordered_json(nullptr);
  j["synaptic_events"] = r.synaptic_events;
  j["macs"] = r.macs;
  return j.dump();
}

CostReport report_from_jsonl(const std::string& line) {
  CostReport r;
  try {
    const json j = json::parse(line);
    r.model = j.at("model").get<std::string>();
    r.interval = j.at("interval").get<std::size_t>();
    r.timesteps = j.at("timesteps").get<std::size_t>();
    for (const auto& c : j.at("components")) r.components.push_back(component_from(c));
    r.total = component_from(j.at("total"));
    for (const auto& c : j.at("cores")) {
      r.cores.push_back({c.at("layer").get<std::string>(), c.at("neurons").get<std::size_t>(),
                         c.at("cores").get<std::size_t>()});
    }
    r.total_cores = j.at("total_cores").get<std::size_t>();
    r.multi_chip = j.at("multi_chip").get<bool>();
    if (!j.at("reference_cores").is_null()) r.reference_cores = j.at("reference_cores").get<std::size_t>();
    r.synaptic_events = j.at("synaptic_events").get<double>();
    r.macs = j.at("macs").get<double>();
  } catch (const json::exception& e) {
    throw FormatError(std::string("bad cost report record: ") + e.what(), 0);
  }
  return r;
}

std::string report_table(const std::vector<CostReport>& reports) {
  std::ostringstream os;
  os << std::left << std::setw(6) << "model" << std::right << std::setw(4) << "I" << std::setw(13) << "component"
     << std::setw(16) << "latency_s" << std::setw(16) << "power_w" << std::setw(16) << "energy_j" << std::setw(7)
     << "cores" << std::setw(6) << "ref" << '\n';
  os << std::setprecision(6) << std::scientific;
  for (const auto& r : reports) {
    auto row = [&](const ComponentCost& c, bool first) {
      os << std::left << std::setw(6) << (first ? r.model : "") << std::right << std::setw(4)
         << (first ? std::to_string(r.interval) : "") << std::setw(13) << c.name << std::setw(16) << c.latency_s
         << std::setw(16) << c.power_w << std::setw(16) << c.energy_j;
      if (first) {
        os << std::setw(7) << r.total_cores << std::setw(6)
           << (r.reference_cores ? std::to_string(*r.reference_cores) : "-");
      }
      os << '\n';
    };
    row(r.total, true);
    for (const auto& c : r.components) row(c, false);
  }
  return os.str();
}

void emit_reports(const std::vector<CostReport>& reports, const std::filesystem::path& stem) {
  auto with_ext = [&](const char* ext) {
    auto p = stem;
    p += ext;
    return p;
  };
  std::ofstream txt(with_ext(".txt"));
  std::ofstream jsonl(with_ext(".jsonl"));
  if (!txt || !jsonl) throw IoError("cannot write report files at " + stem.string());
  txt << report_table(reports);
  for (const auto& r : reports) jsonl << report_to_jsonl(r) << '\n';
  if (!txt || !jsonl) throw IoError("failed writing report files at " + stem.string());
}

std::vector<CostReport> load_reports(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot read report file " + path.string());
  std::vector<CostReport> out;
  std::string line;
  while (std::getline(in, line)) {
    if (!line.empty()) out.push_back(report_from_jsonl(line));
  }
  return out;
}

std::vector<OrderingCheck> check_orderings(const std::vector<CostReport>& reports) {
  auto find = [&](const std::string& model, std::size_t interval) -> const CostReport* {
    for (const auto& r : reports) {
      if (r.model == model && (r.interval == interval || model == "snn")) return &r;
    }
    return nullptr;
  };
  std::vector<OrderingCheck> checks;
  std::ostringstream os;
  os << std::setprecision(4);

  {
    OrderingCheck c{"accumulator energy below 1e-3 of system energy", !reports.empty(), reports.empty(), ""};
    double worst = 0.0;
    for (const auto& r : reports) {
      const double frac = r.total.energy_j > 0.0 ? r.component("accumulator").energy_j / r.total.energy_j : 0.0;
      worst = std::max(worst, frac);
    }
    c.ok = c.ok && worst < 1e-3;
    os.str("");
    os << "worst fraction " << worst;
    c.detail = os.str();
    checks.push_back(c);
  }
  {
    OrderingCheck c{"energy falls for k=1..4 and rises at k=5 (I=5)", true, false, ""};
    const char* names[] = {"s1a4", "s2a3", "s3a2", "s4a1", "s5a0"};
    double e[5];
    os.str("");
    for (int k = 0; k < 5; ++k) {
      const CostReport* r = find(names[k], 5);
      if (!r) {
        c.ok = false;
        os << names[k] << " missing ";
        continue;
      }
      e[k] = r->total.energy_j;
      os << names[k] << "=" << e[k] << " ";
    }
    if (c.ok) c.ok = e[0] > e[1] && e[1] > e[2] && e[2] > e[3] && e[4] > e[3];
    else c.skipped = true;
    c.detail = os.str();
    checks.push_back(c);
  }
  {
    OrderingCheck c{"energy equals power x latency to 1e-9", !reports.empty(), reports.empty(), ""};
    double worst = 0.0;
    for (const auto& r : reports) worst = std::max(worst, max_consistency_error(r));
    c.ok = c.ok && worst <= 1e-9;
    os.str("");
    os << "worst relative gap " << worst;
    c.detail = os.str();
    checks.push_back(c);
  }
  {
    OrderingCheck c{"spiking power below non-spiking power at equal layer count", false, false, ""};
    const CostReport* snn = find("snn", 0);
    const CostReport* ann = nullptr;
    for (const auto& r : reports) {
      if (r.model == "ann") ann = &r;
    }
    if (snn && ann) {
      c.ok = snn->component("spiking").power_w < ann->component("ann").power_w;
      os.str("");
      os << "snn " << snn->component("spiking").power_w << " W, ann " << ann->component("ann").power_w << " W";
      c.detail = os.str();
    } else {
      c.skipped = true;
      c.detail = "needs ann and snn reports";
    }
    checks.push_back(c);
  }
  {
    OrderingCheck c{"larger I lowers non-spiking energy", true, false, ""};
    os.str("");
    std::size_t compared = 0;
    for (const auto& name : model_names()) {
      if (name == "snn") continue;
      const CostReport* prev = nullptr;
      for (std::size_t interval : {5, 10, 25}) {
        const CostReport* r = find(name, interval);
        if (!r) continue;
        if (prev && !(r->component("ann").energy_j < prev->component("ann").energy_j)) {
          c.ok = false;
          os << name << " I=" << interval << " not lower; ";
        }
        if (prev) ++compared;
        prev = r;
      }
    }
    if (compared == 0) {
      c.ok = false;
      c.skipped = true;
      os << "no interval pairs in sweep";
    }
    c.detail = os.str().empty() ? std::to_string(compared) + " pairs decreasing" : os.str();
    checks.push_back(c);
  }
  return checks;
}

}  // namespace hsnn
