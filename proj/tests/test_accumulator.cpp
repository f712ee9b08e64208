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

#include "hsnn/accumulator.hpp"
#include "hsnn/error.hpp"
#include "hsnn/ops.hpp"
#include "test_util.hpp"

namespace hsnn {
namespace {

SpikeTensor random_spikes(std::size_t c, std::size_t h, std::size_t w, std::size_t t, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::vector<double> v(c * h * w * t);
  for (auto& x : v) x = static_cast<double>(rng() & 1);
  return SpikeTensor(c, h, w, t, std::move(v));
}

std::vector<double> forward_oracle(const SpikeTensor& s, std::size_t I) {
  const std::size_t C = s.channels(), H = s.height(), W = s.width(), G = s.timesteps() / I;
  std::vector<double> a(G * C * H * W, 0.0);
  for (std::size_t g = 0; g < G; ++g)
    for (std::size_t c = 0; c < C; ++c)
      for (std::size_t h = 0; h < H; ++h)
        for (std::size_t w = 0; w < W; ++w)
          for (std::size_t k = 0; k < I; ++k) a[((g * C + c) * H + h) * W + w] += s.at(c, h, w, g * I + k);
  return a;
}

TEST(AccumulateForward, WorkedExample) {
  SpikeTensor s(2, 1, 1, 4, {1, 0, 1, 1, 0, 1, 0, 1});
  const Tensor a = accumulate_forward(s, {2, 4, false});
  EXPECT_EQ(a.shape(), (Shape{4, 1, 1}));
  EXPECT_EQ(a.to_vector(), (std::vector<double>{1, 1, 2, 1}));
}

TEST(AccumulateForward, FullCollapseCountsSpikes) {
  const SpikeTensor s = random_spikes(3, 2, 2, 6, 1);
  const Tensor a = accumulate_forward(s, {6, 6, false});
  ASSERT_EQ(a.shape(), (Shape{3, 2, 2}));
  for (std::size_t c = 0; c < 3; ++c)
    for (std::size_t h = 0; h < 2; ++h)
      for (std::size_t w = 0; w < 2; ++w) {
        double total = 0;
        for (std::size_t t = 0; t < 6; ++t) total += s.at(c, h, w, t);
        EXPECT_EQ(a[(c * 2 + h) * 2 + w], total);
      }
}

TEST(AccumulateForward, UnitIntervalIsAReordering) {
  const SpikeTensor s = random_spikes(2, 3, 3, 5, 2);
  const AccumulatorConfig cfg{1, 5, false};
  const Tensor a = accumulate_forward(s, cfg);
  EXPECT_EQ(a.shape(), (Shape{10, 3, 3}));
  for (std::size_t t = 0; t < 5; ++t)
    for (std::size_t c = 0; c < 2; ++c)
      for (std::size_t i = 0; i < 9; ++i) EXPECT_EQ(a[(t * 2 + c) * 9 + i], s.at(c, i / 3, i % 3, t));
  const Tensor back = accumulate_backward(a, s.shape(), cfg);
  EXPECT_EQ(back.to_vector(), std::vector<double>(s.data().begin(), s.data().end()));
}

TEST(AccumulateForward, NineStepsIntervalThreeKeepsTemporalOrder) {
  SpikeTensor s(1, 1, 1, 9);
  s.set(0, 0, 0, 0, true);  // group 0
  s.set(0, 0, 0, 4, true);  // group 1
  s.set(0, 0, 0, 5, true);
  s.set(0, 0, 0, 8, true);  // group 2
  const Tensor a = accumulate_forward(s, {3, 9, false});
  EXPECT_EQ(a.shape(), (Shape{3, 1, 1}));
  EXPECT_EQ(a.to_vector(), (std::vector<double>{1, 2, 1}));
}

TEST(AccumulateForward, MatchesScalarOracleOnRandomInputs) {
  std::mt19937_64 rng(9);
  for (int trial = 0; trial < 50; ++trial) {
    const std::size_t I = 1 + rng() % 4, G = 1 + rng() % 4;
    const std::size_t C = 1 + rng() % 4, H = 1 + rng() % 3, W = 1 + rng() % 3;
    const SpikeTensor s = random_spikes(C, H, W, I * G, rng());
    EXPECT_EQ(accumulate_forward(s, {I, I * G, false}).to_vector(), forward_oracle(s, I));
  }
}

TEST(AccumulateForward, InvariantsHold) {
  const SpikeTensor a = random_spikes(3, 2, 2, 10, 4), b = random_spikes(3, 2, 2, 10, 5);
  const AccumulatorConfig cfg{5, 10, false};
  const Tensor fa = accumulate_forward(a, cfg), fb = accumulate_forward(b, cfg);
  EXPECT_EQ(fa.dim(0), 3u * 10 / 5);
  double sum_a = 0, sum_s = 0;
  for (double v : fa.data()) {
    sum_a += v;
    EXPECT_LE(v, 5.0);
    EXPECT_GE(v, 0.0);
  }
  for (double v : a.data()) sum_s += v;
  EXPECT_EQ(sum_a, sum_s);
  // Linearity on real-valued inputs through the differentiable op.
  AccumulateOptions relaxed;
  relaxed.require_binary = false;
  const Tensor sum_in = ops::add(a.to_tensor(), b.to_tensor());
  const Tensor f_sum = accumulate(sum_in, cfg, relaxed);
  const Tensor sum_f = ops::add(fa, fb);
  EXPECT_EQ(f_sum.to_vector(), sum_f.to_vector());
}

TEST(AccumulateBackward, WorkedExample) {
  const Tensor g = Tensor::from({4, 1, 1}, {10, 20, 30, 40});
  const Tensor gs = accumulate_backward(g, {2, 1, 1, 4}, {2, 4, false});
  EXPECT_EQ(gs.to_vector(), (std::vector<double>{10, 10, 30, 30, 20, 20, 40, 40}));
}

TEST(AccumulateBackward, OnesMapToOnes) {
  const Tensor gs = accumulate_backward(Tensor::full({6, 2, 3}, 1.0), {2, 2, 3, 15}, {5, 15, false});
  for (double v : gs.data()) EXPECT_EQ(v, 1.0);
}

TEST(AccumulateOp, GradientIsAccumulateBackward) {
  std::mt19937_64 rng(3);
  const SpikeTensor s = random_spikes(2, 2, 2, 6, 6);
  Tensor x = s.to_tensor(true);
  const AccumulatorConfig cfg{3, 6, false};
  const Tensor r = testing::random_tensor({4, 2, 2}, rng);
  backward(ops::sum(ops::mul(accumulate(x, cfg), r)));
  EXPECT_EQ(std::vector<double>(x.grad().begin(), x.grad().end()), accumulate_backward(r, s.shape(), cfg).to_vector());
  EXPECT_THROW(accumulate(Tensor::full({1, 1, 1, 2}, 0.5), {1, 2, false}), ContractError);
}

TEST(JacobianCheck, AdjointHolds) {
  EXPECT_TRUE(jacobian_check({2, 6, false}, 3, 2, 2, 100, 1).ok);
  EXPECT_TRUE(jacobian_check({1, 1, false}, 2, 3, 3, 20, 2).ok);
  EXPECT_TRUE(jacobian_check({25, 50, false}, 2, 4, 4, 20, 3).ok);
}

TEST(AccumulateForward, IdentityAtUnitTimesteps) {
  const SpikeTensor s = random_spikes(3, 2, 2, 1, 8);
  const AccumulatorConfig cfg{1, 1, false};
  EXPECT_EQ(accumulate_forward(s, cfg).to_vector(), std::vector<double>(s.data().begin(), s.data().end()));
  std::mt19937_64 rng(1);
  const Tensor g = testing::random_tensor({3, 2, 2}, rng);
  EXPECT_EQ(accumulate_backward(g, s.shape(), cfg).to_vector(), g.to_vector());
}

TEST(AccumulatorConfig, DivisibilityEnforcedUnlessPadding) {
  const SpikeTensor s = random_spikes(1, 1, 1, 7, 1);
  EXPECT_THROW(accumulate_forward(s, {3, 7, false}), ConfigError);
  EXPECT_THROW(AccumulatorConfig({0, 4, false}).validate(), ConfigError);
  EXPECT_THROW(AccumulatorConfig({5, 4, false}).validate(), ConfigError);
  const Tensor a = accumulate_forward(s, {3, 7, true});
  EXPECT_EQ(a.dim(0), 3u);
  double total = 0;
  for (double v : a.data()) total += v;
  EXPECT_EQ(total, static_cast<double>(s.count()));
}

}  // namespace
}  // namespace hsnn
