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
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "hsnn/spiking.hpp"

namespace hsnn {

inline constexpr std::size_t kCounterLanes = 128;

// Smallest k with 2^k - 1 >= interval.
unsigned counter_bits_for(std::size_t interval);

// Bits needed for the interval register to count 0..interval-1.
unsigned interval_register_bits(std::size_t interval);

// Saved per-partition state when one bank is time-multiplexed.
struct BankContext {
  std::vector<std::uint32_t> counters;
  std::size_t interval_reg = 0;
};

// N saturating k-bit counters sharing an interval register and an output latch.
class CounterBank {
 public:
  CounterBank(std::size_t lanes, unsigned bits, std::size_t interval);

  // One clock edge. Returns true when the latch was updated on this edge.
  bool clock_tick(const std::vector<std::uint8_t>& spikes);
  void sync();

  BankContext save_context() const { return {counters_, interval_reg_}; }
  void load_context(const BankContext& ctx);

  std::size_t lanes() const { return lanes_; }
  unsigned bits() const { return bits_; }
  std::size_t interval() const { return interval_; }
  std::uint32_t max_count() const { return max_count_; }
  std::size_t output_bus_bits() const { return lanes_ * bits_; }

  const std::vector<std::uint32_t>& counters() const { return counters_; }
  std::size_t interval_reg() const { return interval_reg_; }
  const std::vector<std::uint32_t>& output_latch() const { return latch_; }

  std::uint64_t ticks() const { return ticks_; }
  std::uint64_t increments() const { return increments_; }
  std::uint64_t latch_events() const { return latch_events_; }
  std::uint64_t saturation_events() const { return saturation_events_; }
  // Lane of the first saturated increment, if any.
  std::optional<std::size_t> first_saturated_lane() const { return first_saturated_lane_; }

 private:
  std::size_t lanes_;
  unsigned bits_;
  std::size_t interval_;
  std::uint32_t max_count_;
  std::vector<std::uint32_t> counters_;
  std::size_t interval_reg_ = 0;
  std::vector<std::uint32_t> latch_;
  std::uint64_t ticks_ = 0, increments_ = 0, latch_events_ = 0, saturation_events_ = 0;
  std::optional<std::size_t> first_saturated_lane_;
};

struct PartitionPlan {
  std::size_t neurons = 0;            // M
  std::size_t lanes = kCounterLanes;  // N
  std::size_t partitions = 0;         // P = ceil(M / N)
  // Order in which partitions occupy the sub-slots of every timestep.
  std::vector<std::size_t> slot_order;

  std::size_t padded_lanes() const { return partitions * lanes - neurons; }
  void validate() const;
};

PartitionPlan make_plan(std::size_t neurons, std::size_t lanes = kCounterLanes);

struct SaturationRecord {
  std::uint64_t tick = 0;
  std::size_t partition = 0;
  std::size_t lane = 0;
};

struct LayerRun {
  std::size_t neurons = 0;
  std::size_t groups = 0;
  // counts[g * neurons + m]: spikes of neuron m within interval g.
  std::vector<std::uint32_t> counts;
  std::uint64_t cycles = 0;
  std::uint64_t increments = 0;
  std::uint64_t latch_events = 0;
  std::uint64_t saturation_events = 0;
  std::vector<SaturationRecord> saturations;  // first few only
};

struct RunOptions {
  // Overrides counter_bits_for(interval); used to provoke saturation.
  std::optional<unsigned> bits;
  std::ostream* trace = nullptr;
};

// spikes[m * timesteps + t] for neuron m at timestep t.
LayerRun run_layer(const std::vector<std::uint8_t>& spikes, std::size_t timesteps, const PartitionPlan& plan,
                   std::size_t interval, const RunOptions& opts = {});

// Flattens (C, H, W, T) with neuron index m = (c * H + h) * W + w.
LayerRun run_layer(const SpikeTensor& spikes, std::size_t interval, const RunOptions& opts = {});

// Flattened view of run.counts reshaped as the software accumulator output (G*C, H, W).
std::vector<double> run_as_accumulated(const LayerRun& run);

// Trace text: header comments, stimulus lines "<tick> <hex>", latch lines "<tick> L <hex> ...".
std::string to_hex_bits(const std::vector<std::uint8_t>& bits);
std::vector<std::uint8_t> from_hex_bits(const std::string& hex, std::size_t lanes);

struct TraceCheck {
  bool ok = false;
  std::size_t stimulus_lines = 0;
  std::size_t latch_lines = 0;
  std::string detail;
};

// Re-simulates a trace file's stimulus and compares every recorded latch.
TraceCheck verify_trace(std::istream& in);

struct HwEnergyModel {
  double clock_hz = 1e9;
  double counter_bit_tick_j = 0.75e-15;  // clocking one counter bit for one cycle
  double increment_j = 0.05e-15;         // one counter increment
  double latch_bit_j = 0.10e-15;         // moving one bit into the output latch
  double banks = 1.0;                    // physical banks sharing the partitions
};

struct HwCost {
  std::uint64_t cycles = 0;
  double latency_s = 0.0;
  double energy_j = 0.0;
  double power_w = 0.0;
};

// Analytical cost for a layer of `plan.neurons` neurons, T timesteps and an
// expected number of spike increments.
HwCost hw_cost(const PartitionPlan& plan, std::size_t interval, std::size_t timesteps, double increments,
               const HwEnergyModel& model = {}, std::optional<unsigned> bits = std::nullopt);

// Cost from a simulated run (exact increment and latch counts).
HwCost hw_cost(const LayerRun& run, const PartitionPlan& plan, std::size_t interval, const HwEnergyModel& model = {},
               std::optional<unsigned> bits = std::nullopt);

}  // namespace hsnn
