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

#include "hsnn/hw_sim.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <istream>
#include <ostream>
#include <sstream>

#include "hsnn/error.hpp"

namespace hsnn {
namespace {

constexpr std::size_t kMaxSaturationRecords = 16;

std::string hex_value(std::uint32_t v, unsigned bits) {
  const unsigned digits = std::max(1u, (bits + 3) / 4);
  char buf[16];
  std::snprintf(buf, sizeof(buf), "%0*x", static_cast<int>(digits), v);
  return buf;
}

void write_latch(std::ostream& os, std::uint64_t tick, const CounterBank& bank) {
  os << tick << " L";
  for (auto v : bank.output_latch()) os << ' ' << hex_value(v, bank.bits());
  os << '\n';
}

}  // namespace

unsigned counter_bits_for(std::size_t interval) {
  if (interval == 0) throw ConfigError("interval must be at least 1");
  unsigned k = 0;
  while (((std::uint64_t{1} << k) - 1) < interval) ++k;
  return k;
}

unsigned interval_register_bits(std::size_t interval) {
  if (interval == 0) throw ConfigError("interval must be at least 1");
  unsigned k = 0;
  while ((std::uint64_t{1} << k) < interval) ++k;
  return std::max(1u, k);
}

CounterBank::CounterBank(std::size_t lanes, unsigned bits, std::size_t interval)
    : lanes_(lanes), bits_(bits), interval_(interval) {
  if (lanes == 0) throw ConfigError("counter bank needs at least one lane");
  if (bits == 0 || bits > 31) throw ConfigError("counter width must be in [1, 31] bits");
  if (interval == 0) throw ConfigError("interval must be at least 1");
  max_count_ = (std::uint32_t{1} << bits) - 1;
  counters_.assign(lanes, 0);
  latch_.assign(lanes, 0);
}

bool CounterBank::clock_tick(const std::vector<std::uint8_t>& spikes) {
  if (spikes.size() != lanes_) {
    throw DimensionError("clock_tick: expected " + std::to_string(lanes_) + " spike bits, got " +
                         std::to_string(spikes.size()));
  }
  ++ticks_;
  for (std::size_t i = 0; i < lanes_; ++i) {
    if (!spikes[i]) continue;
    if (counters_[i] == max_count_) {
      ++saturation_events_;
      if (!first_saturated_lane_) first_saturated_lane_ = i;
    } else {
      ++counters_[i];
      ++increments_;
    }
  }
  if (++interval_reg_ < interval_) return false;
  latch_ = counters_;
  std::fill(counters_.begin(), counters_.end(), 0);
  interval_reg_ = 0;
  ++latch_events_;
  return true;
}

void CounterBank::sync() {
  std::fill(counters_.begin(), counters_.end(), 0);
  interval_reg_ = 0;
}

void CounterBank::load_context(const BankContext& ctx) {
  if (ctx.counters.size() != lanes_ || ctx.interval_reg >= interval_) {
    throw ContractError("load_context: context does not fit this bank");
  }
  counters_ = ctx.counters;
  interval_reg_ = ctx.interval_reg;
}

void PartitionPlan::validate() const {
  if (neurons == 0 || lanes == 0) throw ConfigError("partition plan: neurons and lanes must be positive");
  if (partitions * lanes < neurons) throw ConfigError("partition plan: partitions do not cover every neuron");
  if (partitions != (neurons + lanes - 1) / lanes) throw ConfigError("partition plan: partition count is not ceil(M/N)");
  std::vector<std::size_t> sorted = slot_order;
  std::sort(sorted.begin(), sorted.end());
  for (std::size_t p = 0; p < sorted.size(); ++p) {
    if (sorted[p] != p) throw ConfigError("partition plan: slot order is not a permutation of the partitions");
  }
  if (sorted.size() != partitions) throw ConfigError("partition plan: slot order length differs from partition count");
}

PartitionPlan make_plan(std::size_t neurons, std::size_t lanes) {
  PartitionPlan plan;
  plan.neurons = neurons;
  plan.lanes = lanes;
  plan.partitions = lanes == 0 ? 0 : (neurons + lanes - 1) / lanes;
  for (std::size_t p = 0; p < plan.partitions; ++p) plan.slot_order.push_back(p);
  plan.validate();
  return plan;
}

LayerRun run_layer(const std::vector<std::uint8_t>& spikes, std::size_t timesteps, const PartitionPlan& plan,
                   std::size_t interval, const RunOptions& opts) {
  plan.validate();
  if (interval == 0 || timesteps == 0) throw ConfigError("run_layer: interval and timesteps must be positive");
  if (timesteps % interval != 0) {
    throw ConfigError("run_layer: interval " + std::to_string(interval) + " does not divide T=" +
                      std::to_string(timesteps));
  }
  if (spikes.size() != plan.neurons * timesteps) {
    throw ConfigError("run_layer: layer has " + std::to_string(spikes.size()) + " spike bits, plan expects " +
                      std::to_string(plan.neurons) + "x" + std::to_string(timesteps));
  }
  const unsigned bits = opts.bits.value_or(counter_bits_for(interval));
  const std::size_t N = plan.lanes, M = plan.neurons, P = plan.partitions;
  CounterBank bank(N, bits, interval);
  std::vector<BankContext> contexts(P, bank.save_context());

  LayerRun run;
  run.neurons = M;
  run.groups = timesteps / interval;
  run.counts.assign(run.groups * M, 0);

  if (opts.trace) {
    *opts.trace << "# hsnn counter-bank trace\n"
                << "# lanes " << N << " bits " << bits << " interval " << interval << " partitions " << P
                << " timesteps " << timesteps << "\n"
                << "# stimulus: <tick> <hex lanes, lane 0 = lsb>; latch: <tick> L <one hex value per lane>\n";
  }

  std::vector<std::uint8_t> lane_bits(N);
  std::uint64_t tick = 0;
  for (std::size_t t = 0; t < timesteps; ++t) {
    for (std::size_t slot = 0; slot < P; ++slot, ++tick) {
      const std::size_t p = plan.slot_order[slot];
      for (std::size_t lane = 0; lane < N; ++lane) {
        const std::size_t m = p * N + lane;
        lane_bits[lane] = m < M ? spikes[m * timesteps + t] : 0;
      }
      bank.load_context(contexts[p]);
      const std::uint64_t sat_before = bank.saturation_events();
      const bool latched = bank.clock_tick(lane_bits);
      if (bank.saturation_events() != sat_before && run.saturations.size() < kMaxSaturationRecords) {
        run.saturations.push_back({tick, p, *bank.first_saturated_lane()});
      }
      contexts[p] = bank.save_context();
      if (opts.trace) *opts.trace << tick << ' ' << to_hex_bits(lane_bits) << '\n';
      if (latched) {
        const std::size_t g = t / interval;
        const auto& latch = bank.output_latch();
        for (std::size_t lane = 0; lane < N; ++lane) {
          const std::size_t m = p * N + lane;
          if (m < M) run.counts[g * M + m] = latch[lane];
        }
        if (opts.trace) write_latch(*opts.trace, tick, bank);
      }
    }
  }
  run.cycles = bank.ticks();
  run.increments = bank.increments();
  run.latch_events = bank.latch_events();
  run.saturation_events = bank.saturation_events();
  return run;
}

LayerRun run_layer(const SpikeTensor& spikes, std::size_t interval, const RunOptions& opts) {
  const Shape& s = spikes.shape();
  const std::size_t M = s[0] * s[1] * s[2], T = s[3];
  // SpikeTensor storage is already (C, H, W, T) row-major, i.e. m * T + t.
  std::vector<std::uint8_t> flat(M * T);
  const auto data = spikes.data();
  for (std::size_t i = 0; i < flat.size(); ++i) flat[i] = data[i] != 0.0;
  return run_layer(flat, T, make_plan(M), interval, opts);
}

std::vector<double> run_as_accumulated(const LayerRun& run) {
  return std::vector<double>(run.counts.begin(), run.counts.end());
}

std::string to_hex_bits(const std::vector<std::uint8_t>& bits) {
  const std::size_t digits = (bits.size() + 3) / 4;
  std::string out(digits, '0');
  for (std::size_t d = 0; d < digits; ++d) {
    unsigned nibble = 0;
    for (unsigned b = 0; b < 4; ++b) {
      const std::size_t i = d * 4 + b;
      if (i < bits.size() && bits[i]) nibble |= 1u << b;
    }
    out[digits - 1 - d] = "0123456789abcdef"[nibble];
  }
  return out;
}

std::vector<std::uint8_t> from_hex_bits(const std::string& hex, std::size_t lanes) {
  const std::size_t digits = (lanes + 3) / 4;
  if (hex.size() != digits) throw FormatError("hex vector has " + std::to_string(hex.size()) + " digits, expected " +
                                              std::to_string(digits), 0);
  std::vector<std::uint8_t> bits(lanes, 0);
  for (std::size_t d = 0; d < digits; ++d) {
    const char c = hex[digits - 1 - d];
    unsigned nibble;
    if (c >= '0' && c <= '9') nibble = c - '0';
    else if (c >= 'a' && c <= 'f') nibble = c - 'a' + 10;
    else if (c >= 'A' && c <= 'F') nibble = c - 'A' + 10;
    else throw FormatError(std::string("bad hex digit '") + c + "'", d);
    for (unsigned b = 0; b < 4; ++b) {
      const std::size_t i = d * 4 + b;
      if (nibble & (1u << b)) {
        if (i >= lanes) throw FormatError("hex vector sets a bit beyond the last lane", d);
        bits[i] = 1;
      }
    }
  }
  return bits;
}

TraceCheck verify_trace(std::istream& in) {
  TraceCheck check;
  std::size_t lanes = 0, interval = 0, partitions = 0, timesteps = 0;
  unsigned bits = 0;
  std::optional<CounterBank> bank;
  std::vector<BankContext> contexts;
  std::uint64_t last_tick = 0;
  bool have_tick = false, pending_latch = false;
  std::string line;
  std::size_t lineno = 0;
  auto fail = [&](const std::string& why) {
    check.ok = false;
    check.detail = "line " + std::to_string(lineno) + ": " + why;
    return check;
  };
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    if (line[0] == '#') {
      std::istringstream hs(line.substr(1));
      std::string key;
      hs >> key;
      if (key == "lanes") {
        std::string k2, k3, k4, k5;
        hs >> lanes >> k2 >> bits >> k3 >> interval >> k4 >> partitions >> k5 >> timesteps;
        if (!hs || k2 != "bits" || k3 != "interval" || k4 != "partitions" || k5 != "timesteps") {
          return fail("malformed parameter header");
        }
        bank.emplace(lanes, bits, interval);
        contexts.assign(partitions, bank->save_context());
      }
      continue;
    }
    if (!bank) return fail("stimulus before parameter header");
    std::istringstream ls(line);
    std::uint64_t tick;
    std::string field;
    ls >> tick >> field;
    if (!ls) return fail("malformed line");
    if (field == "L") {
      if (!pending_latch || tick != last_tick) return fail("latch recorded where the model did not latch");
      for (std::size_t lane = 0; lane < lanes; ++lane) {
        std::string v;
        if (!(ls >> v)) return fail("latch line has too few values");
        const unsigned long value = std::stoul(v, nullptr, 16);
        if (value != bank->output_latch()[lane]) {
          return fail("latch mismatch at lane " + std::to_string(lane) + ": trace " + std::to_string(value) +
                      ", model " + std::to_string(bank->output_latch()[lane]));
        }
      }
      pending_latch = false;
      ++check.latch_lines;
      continue;
    }
    if (pending_latch) return fail("model latched at tick " + std::to_string(last_tick) + " but trace has no latch");
    if (have_tick && tick != last_tick + 1) return fail("non-consecutive tick index");
    if (!have_tick && tick != 0) return fail("trace must start at tick 0");
    const std::size_t p = tick % partitions;
    bank->load_context(contexts[p]);
    pending_latch = bank->clock_tick(from_hex_bits(field, lanes));
    contexts[p] = bank->save_context();
    last_tick = tick;
    have_tick = true;
    ++check.stimulus_lines;
  }
  if (!bank) return fail("missing parameter header");
  if (pending_latch) return fail("trace ends before the final latch");
  if (check.stimulus_lines != partitions * timesteps) return fail("stimulus length differs from partitions x timesteps");
  check.ok = true;
  return check;
}

HwCost hw_cost(const PartitionPlan& plan, std::size_t interval, std::size_t timesteps, double increments,
               const HwEnergyModel& model, std::optional<unsigned> bits) {
  plan.validate();
  if (!(model.clock_hz > 0.0)) throw ConfigError("hw_cost: clock must be positive");
  if (!(model.banks >= 1.0)) throw ConfigError("hw_cost: need at least one bank");
  if (interval == 0 || timesteps == 0) throw ConfigError("hw_cost: interval and timesteps must be positive");
  const unsigned k = bits.value_or(counter_bits_for(interval));
  const double P = static_cast<double>(plan.partitions);
  const double bus_bits = static_cast<double>(plan.lanes * k);
  const double slots = P * static_cast<double>(timesteps);
  const double latches = P * static_cast<double>(timesteps / interval);
  HwCost c;
  c.cycles = static_cast<std::uint64_t>(std::ceil(P / model.banks)) * timesteps;
  c.latency_s = static_cast<double>(c.cycles) / model.clock_hz;
  c.energy_j = slots * bus_bits * model.counter_bit_tick_j + increments * model.increment_j +
               latches * bus_bits * model.latch_bit_j;
  c.power_w = c.energy_j / c.latency_s;
  return c;
}

HwCost hw_cost(const LayerRun& run, const PartitionPlan& plan, std::size_t interval, const HwEnergyModel& model,
               std::optional<unsigned> bits) {
  const std::size_t T = run.groups * interval;
  return hw_cost(plan, interval, T, static_cast<double>(run.increments), model, bits);
}

}  // namespace hsnn
