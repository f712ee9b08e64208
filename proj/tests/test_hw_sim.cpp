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

#include <gtest/gtest.h>

#include <random>
#include <sstream>

#include "hsnn/accumulator.hpp"
#include "hsnn/error.hpp"
#include "hsnn/hw_sim.hpp"

namespace hsnn {
namespace {

std::vector<std::uint8_t> random_bits(std::size_t n, double density, std::mt19937_64& rng) {
  std::bernoulli_distribution d(density);
  std::vector<std::uint8_t> v(n);
  for (auto& b : v) b = d(rng);
  return v;
}

SpikeTensor random_spikes(std::size_t c, std::size_t h, std::size_t w, std::size_t t, std::mt19937_64& rng) {
  SpikeTensor s(c, h, w, t);
  std::bernoulli_distribution d(0.4);
  for (std::size_t ci = 0; ci < c; ++ci)
    for (std::size_t y = 0; y < h; ++y)
      for (std::size_t x = 0; x < w; ++x)
        for (std::size_t ti = 0; ti < t; ++ti) s.set(ci, y, x, ti, d(rng));
  return s;
}

TEST(Sizing, CounterBits) {
  EXPECT_EQ(counter_bits_for(1), 1u);
  EXPECT_EQ(counter_bits_for(3), 2u);
  EXPECT_EQ(counter_bits_for(4), 3u);
  EXPECT_EQ(counter_bits_for(5), 3u);
  EXPECT_EQ(counter_bits_for(7), 3u);
  EXPECT_EQ(counter_bits_for(8), 4u);
  EXPECT_EQ(counter_bits_for(10), 4u);
  EXPECT_EQ(counter_bits_for(25), 5u);
  EXPECT_EQ(interval_register_bits(25), 5u);
  EXPECT_EQ(interval_register_bits(1), 1u);
}

TEST(Bank, AllZeroInterval) {
  CounterBank bank(128, 3, 5);
  const std::vector<std::uint8_t> zeros(128, 0);
  for (int i = 0; i < 4; ++i) EXPECT_FALSE(bank.clock_tick(zeros));
  EXPECT_TRUE(bank.clock_tick(zeros));
  for (auto v : bank.output_latch()) EXPECT_EQ(v, 0u);
  EXPECT_EQ(bank.output_bus_bits(), 384u);
}

TEST(Bank, SteadySpikeLatchesFiveAtTickFive) {
  CounterBank bank(4, 3, 5);
  const std::vector<std::uint8_t> spikes{0, 1, 0, 0};
  for (int tick = 1; tick <= 5; ++tick) {
    EXPECT_LT(bank.interval_reg(), 5u);
    EXPECT_EQ(bank.clock_tick(spikes), tick == 5);
  }
  EXPECT_EQ(bank.output_latch()[1], 5u);
  EXPECT_EQ(bank.output_latch()[0], 0u);
  EXPECT_EQ(bank.counters()[1], 0u);
  EXPECT_EQ(bank.interval_reg(), 0u);
  // Hold semantics: the latch keeps its value through the next interval.
  bank.clock_tick(spikes);
  EXPECT_EQ(bank.output_latch()[1], 5u);
}

TEST(Bank, SaturatesAtSeven) {
  CounterBank bank(2, 3, 100);
  const std::vector<std::uint8_t> spikes{1, 0};
  for (int i = 0; i < 8; ++i) bank.clock_tick(spikes);
  EXPECT_EQ(bank.counters()[0], 7u);
  EXPECT_EQ(bank.saturation_events(), 1u);
  ASSERT_TRUE(bank.first_saturated_lane());
  EXPECT_EQ(*bank.first_saturated_lane(), 0u);
}

TEST(Bank, SyncDiscardsPartialInterval) {
  CounterBank bank(2, 3, 4);
  const std::vector<std::uint8_t> on{1, 1}, half{1, 0};
  for (int i = 0; i < 4; ++i) bank.clock_tick(on);
  EXPECT_EQ(bank.output_latch()[0], 4u);
  bank.clock_tick(on);
  bank.clock_tick(on);
  bank.sync();
  EXPECT_EQ(bank.counters(), (std::vector<std::uint32_t>{0, 0}));
  EXPECT_EQ(bank.interval_reg(), 0u);
  EXPECT_EQ(bank.output_latch()[0], 4u);
  for (int i = 0; i < 3; ++i) EXPECT_FALSE(bank.clock_tick(half));
  EXPECT_TRUE(bank.clock_tick(half));
  EXPECT_EQ(bank.output_latch(), (std::vector<std::uint32_t>{4, 0}));
}

TEST(Bank, SyncOnFreshBank) {
  CounterBank bank(8, 2, 3);
  bank.sync();
  EXPECT_EQ(bank.counters(), std::vector<std::uint32_t>(8, 0));
  EXPECT_EQ(bank.output_latch(), std::vector<std::uint32_t>(8, 0));
}

TEST(Plan, PaddingArithmetic) {
  const PartitionPlan p = make_plan(300);
  EXPECT_EQ(p.partitions, 3u);
  EXPECT_EQ(p.padded_lanes(), 84u);
  EXPECT_EQ(make_plan(128).partitions, 1u);
  EXPECT_EQ(make_plan(129).partitions, 2u);
  PartitionPlan bad = p;
  bad.partitions = 2;
  EXPECT_THROW(bad.validate(), ConfigError);
}

TEST(Plan, PaddedLanesStayZeroInTrace) {
  std::mt19937_64 rng(3);
  const std::size_t M = 300, T = 10;
  std::vector<std::uint8_t> ones(M * T, 1);
  std::ostringstream trace;
  RunOptions o;
  o.trace = &trace;
  run_layer(ones, T, make_plan(M), 5, o);
  std::istringstream in(trace.str());
  std::string line;
  std::size_t stimulus = 0;
  while (std::getline(in, line)) {
    if (line.empty() || line[0] == '#' || line.find(" L ") != std::string::npos) continue;
    std::istringstream fields(line);
    std::uint64_t tick;
    std::string hex;
    fields >> tick >> hex;
    const auto bits = from_hex_bits(hex, 128);
    const std::size_t valid = tick % 3 == 2 ? 44 : 128;
    for (std::size_t lane = 0; lane < 128; ++lane) ASSERT_EQ(bits[lane], lane < valid ? 1 : 0) << line;
    ++stimulus;
  }
  EXPECT_EQ(stimulus, 30u);
}

TEST(RunLayer, SingleNeuronTotal) {
  const std::vector<std::uint8_t> s{1, 0, 1, 1, 0, 1};
  const LayerRun r = run_layer(s, 6, make_plan(1), 6);
  EXPECT_EQ(r.counts, (std::vector<std::uint32_t>{4}));
  EXPECT_EQ(r.cycles, 6u);
}

TEST(RunLayer, MatchesSoftwareAccumulator) {
  std::mt19937_64 rng(17);
  for (std::size_t I : {1, 5, 10, 25}) {
    for (std::size_t M : {1, 127, 128, 129, 300}) {
      const std::size_t T = 50;
      const SpikeTensor s = random_spikes(M, 1, 1, T, rng);
      const LayerRun r = run_layer(s, I);
      const Tensor sw = accumulate_forward(s, {I, T, false});
      EXPECT_EQ(run_as_accumulated(r), sw.to_vector()) << "I=" << I << " M=" << M;
      EXPECT_EQ(r.saturation_events, 0u);
      EXPECT_EQ(r.cycles, make_plan(M).partitions * T);
    }
  }
  const SpikeTensor s = random_spikes(4, 5, 7, 10, rng);
  EXPECT_EQ(run_as_accumulated(run_layer(s, 5)), accumulate_forward(s, {5, 10, false}).to_vector());
}

TEST(RunLayer, RejectsMismatch) {
  EXPECT_THROW(run_layer(std::vector<std::uint8_t>(10), 10, make_plan(2), 5), ConfigError);
  EXPECT_THROW(run_layer(std::vector<std::uint8_t>(9), 9, make_plan(1), 5), ConfigError);
}

TEST(RunLayer, UndersizedCountersSaturate) {
  std::vector<std::uint8_t> ones(10, 1);
  RunOptions o;
  o.bits = 3;
  const LayerRun r = run_layer(ones, 10, make_plan(1), 10, o);
  EXPECT_EQ(r.counts[0], 7u);
  EXPECT_GT(r.saturation_events, 0u);
  ASSERT_FALSE(r.saturations.empty());
  EXPECT_EQ(r.saturations[0].lane, 0u);
}

TEST(Trace, DeterministicAndVerifiable) {
  std::mt19937_64 rng(9);
  const auto spikes = random_bits(200 * 20, 0.3, rng);
  std::ostringstream a, b;
  RunOptions oa, ob;
  oa.trace = &a;
  ob.trace = &b;
  run_layer(spikes, 20, make_plan(200), 5, oa);
  run_layer(spikes, 20, make_plan(200), 5, ob);
  EXPECT_EQ(a.str(), b.str());
  std::istringstream in(a.str());
  const TraceCheck ok = verify_trace(in);
  EXPECT_TRUE(ok.ok) << ok.detail;
  EXPECT_EQ(ok.stimulus_lines, 40u);
  EXPECT_EQ(ok.latch_lines, 8u);

  // Flip one latched value.
  std::string text = a.str();
  const std::size_t pos = text.find(" L ", text.find("\n0 "));
  ASSERT_NE(pos, std::string::npos);
  char& digit = text[pos + 3];
  digit = digit == '0' ? '1' : '0';
  std::istringstream tampered(text);
  EXPECT_FALSE(verify_trace(tampered).ok);
}

TEST(HexBits, RoundTrip) {
  std::mt19937_64 rng(4);
  const auto bits = random_bits(128, 0.5, rng);
  EXPECT_EQ(from_hex_bits(to_hex_bits(bits), 128), bits);
  EXPECT_EQ(to_hex_bits({1, 0, 0, 0, 0, 1}), "21");
}

TEST(Cost, LatencyLinearInPartitions) {
  const HwCost one = hw_cost(make_plan(128), 5, 50, 0.0);
  const HwCost two = hw_cost(make_plan(256), 5, 50, 0.0);
  EXPECT_EQ(one.cycles, 50u);
  EXPECT_DOUBLE_EQ(one.latency_s, 50e-9);
  EXPECT_DOUBLE_EQ(two.latency_s, 2 * one.latency_s);
  EXPECT_DOUBLE_EQ(one.power_w, one.energy_j / one.latency_s);
}

TEST(Cost, SmallerIntervalNeverCheaper) {
  // Fixed counter width so only the latch count varies with I.
  const PartitionPlan plan = make_plan(300);
  double prev = 0.0;
  for (std::size_t I : {50, 25, 10, 5, 2, 1}) {
    const double e = hw_cost(plan, I, 50, 1000.0, {}, 6).energy_j;
    EXPECT_GE(e, prev) << "I=" << I;
    prev = e;
  }
}

TEST(Cost, FromRunUsesExactIncrements) {
  std::mt19937_64 rng(2);
  const auto spikes = random_bits(150 * 10, 0.5, rng);
  const PartitionPlan plan = make_plan(150);
  const LayerRun r = run_layer(spikes, 10, plan, 5);
  std::uint64_t ones = 0;
  for (auto b : spikes) ones += b;
  EXPECT_EQ(r.increments, ones);
  const HwCost a = hw_cost(r, plan, 5), b = hw_cost(plan, 5, 10, static_cast<double>(ones));
  EXPECT_DOUBLE_EQ(a.energy_j, b.energy_j);
  EXPECT_EQ(a.cycles, r.cycles);
}

}  // namespace
}  // namespace hsnn
