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

#include <cmath>

#include "hsnn/trainer.hpp"

namespace hsnn {
namespace {

HybridModelSpec small_spec(std::size_t k) {
  HybridModelSpec spec = HybridModelSpec::named("s" + std::to_string(k) + "a" + std::to_string(5 - k), 4);
  spec.input_shape = {2, 12, 12, 8};
  spec.channel_schedule = {4, 4, 8, 8, 8};
  spec.pool_after = {true, true, false, false, false};
  spec.dense_widths = {16, 8};
  return spec;
}

std::vector<Sample> small_data(std::size_t per_class) {
  SynthOptions so;
  so.samples_per_class = per_class;
  so.height = 12;
  so.width = 12;
  so.timesteps = 8;
  return synth_gestures(so);
}

std::size_t index_of(const ParameterStore& p, const std::string& name) {
  for (std::size_t i = 0; i < p.entries().size(); ++i) {
    if (p.entries()[i].name == name) return i;
  }
  throw std::runtime_error("missing " + name);
}

double sum_abs(const std::vector<double>& v) {
  double s = 0.0;
  for (double x : v) s += std::fabs(x);
  return s;
}

TEST(Config, Validation) {
  TrainConfig c;
  EXPECT_NO_THROW(c.validate());
  c.learning_rate = -1;
  EXPECT_THROW(c.validate(), ConfigError);
  c = {};
  c.optimizer = "rmsprop";
  EXPECT_THROW(c.validate(), ConfigError);
  c = {};
  c.batch_size = 0;
  EXPECT_THROW(c.validate(), ConfigError);
}

TEST(Train, ZeroLearningRateIsNullStep) {
  const BuiltModel m = build(small_spec(2));
  ParameterStore p = init_parameters(m, 1);
  const ParameterStore before = p.clone(false);
  TrainConfig cfg;
  cfg.epochs = 1;
  cfg.learning_rate = 0.0;
  Optimizer opt(cfg);
  train(m, p, opt, small_data(4), cfg);
  EXPECT_TRUE(p == before);
  EXPECT_EQ(opt.steps(), 2u);
}

TEST(Train, OverfitsEightSamples) {
  for (std::size_t k : {1, 2, 3}) {
    const BuiltModel m = build(small_spec(k));
    ParameterStore p = init_parameters(m, 2);
    auto data = small_data(3);
    data.resize(8);
    TrainConfig cfg;
    cfg.epochs = 200;
    cfg.learning_rate = 3e-3;
    Optimizer opt(cfg);
    double best = 1e9;
    std::size_t steps = 0;
    try {
      train(m, p, opt, data, cfg, nullptr, [&](const EpochRecord& r, const ParameterStore&) {
        ++steps;
        best = std::min(best, r.loss);
        if (r.loss < 0.05) throw std::runtime_error("done");
      });
    } catch (const std::runtime_error&) {
    }
    EXPECT_LT(best, 0.05) << "k=" << k;
    EXPECT_LE(steps, 200u);
  }
}

TEST(Gradients, EverySpikingWeightReceivesGradient) {
  const BuiltModel m = build(HybridModelSpec::named("s2a3", 5));
  const ParameterStore p = init_parameters(m, 1);
  SynthOptions so;
  so.samples_per_class = 1;
  const auto data = synth_gestures(so);
  const std::vector<const Sample*> batch{&data[0], &data[2]};
  const BatchGradients g = batch_gradients(m, p, batch, {}, 1);
  EXPECT_GT(sum_abs(g.grads[index_of(p, "conv1.weight")]), 0.0);
  EXPECT_GT(sum_abs(g.grads[index_of(p, "conv2.weight")]), 0.0);

  ForwardOptions cut;
  cut.accumulator_grad_scale = 0.0;
  const BatchGradients z = batch_gradients(m, p, batch, cut, 1);
  EXPECT_EQ(sum_abs(z.grads[index_of(p, "conv1.weight")]), 0.0);
  EXPECT_EQ(sum_abs(z.grads[index_of(p, "conv2.weight")]), 0.0);
  EXPECT_GT(sum_abs(z.grads[index_of(p, "conv3.weight")]), 0.0);
  EXPECT_EQ(z.grads[index_of(p, "conv3.weight")], g.grads[index_of(p, "conv3.weight")]);
}

TEST(Gradients, IndependentOfThreadCount) {
  const BuiltModel m = build(small_spec(2));
  const ParameterStore p = init_parameters(m, 1);
  const auto data = small_data(3);
  std::vector<const Sample*> batch;
  for (const auto& s : data) batch.push_back(&s);
  const BatchGradients a = batch_gradients(m, p, batch, {}, 1);
  const BatchGradients b = batch_gradients(m, p, batch, {}, 3);
  EXPECT_EQ(a.grads, b.grads);
  EXPECT_EQ(a.loss_sum, b.loss_sum);
}

TEST(Train, SameSeedSameWeights) {
  const BuiltModel m = build(small_spec(2));
  const auto data = small_data(4);
  auto run = [&](std::size_t threads) {
    ParameterStore p = init_parameters(m, 5);
    TrainConfig cfg;
    cfg.epochs = 2;
    cfg.batch_size = 4;
    cfg.threads = threads;
    Optimizer opt(cfg);
    train(m, p, opt, data, cfg);
    return p;
  };
  const ParameterStore a = run(1);
  EXPECT_TRUE(a == run(1));
  EXPECT_TRUE(a == run(2));
}

TEST(Train, DivergenceKeepsLastFiniteParameters) {
  const BuiltModel m = build(small_spec(1));
  ParameterStore p = init_parameters(m, 1);
  TrainConfig cfg;
  cfg.epochs = 50;
  cfg.optimizer = "sgd";
  cfg.learning_rate = 1e300;
  cfg.grad_clip = 0.0;
  Optimizer opt(cfg);
  EXPECT_THROW(train(m, p, opt, small_data(4), cfg), DivergenceError);
  for (const auto& e : p.entries())
    for (double v : e.value.to_vector()) ASSERT_TRUE(std::isfinite(v)) << e.name;
}

TEST(Evaluate, ConstantLogitsGiveChance) {
  const BuiltModel m = build(small_spec(2));
  ParameterStore p = init_parameters(m, 1);
  const std::string head = m.layers.back().name;
  const Shape ws = p.get(head + ".weight").shape(), bs = p.get(head + ".bias").shape();
  for (auto& e : p.entries()) {
    if (e.name == head + ".weight") e.value = Tensor::zeros(ws);
    if (e.name == head + ".bias") e.value = Tensor::zeros(bs);
  }
  const auto data = small_data(6);
  const EvalReport r = evaluate(m, p, data);
  EXPECT_NEAR(r.accuracy, 1.0 / 3.0, 1e-12);
  EXPECT_NEAR(r.mean_loss, std::log(3.0), 1e-12);
}

TEST(Evaluate, ConfusionRowsMatchClassCounts) {
  const BuiltModel m = build(small_spec(2));
  const ParameterStore p = init_parameters(m, 3);
  auto data = small_data(5);
  data.pop_back();  // unbalanced: 5, 5, 4
  const EvalReport r = evaluate(m, p, data, 2);
  ASSERT_EQ(r.confusion.size(), 3u);
  const std::vector<std::size_t> expected{5, 5, 4};
  std::size_t diag = 0;
  for (std::size_t i = 0; i < 3; ++i) {
    std::size_t row = 0;
    for (std::size_t v : r.confusion[i]) row += v;
    EXPECT_EQ(row, expected[i]);
    diag += r.confusion[i][i];
  }
  EXPECT_EQ(r.total(), 14u);
  EXPECT_EQ(r.correct(), diag);
  EXPECT_DOUBLE_EQ(r.accuracy, static_cast<double>(diag) / 14.0);
  const double pair = subset_accuracy(r, {0, 1});
  EXPECT_DOUBLE_EQ(pair, static_cast<double>(r.confusion[0][0] + r.confusion[1][1]) / 10.0);
}

TEST(Optimizer, StateRoundTrip) {
  const BuiltModel m = build(small_spec(2));
  ParameterStore p = init_parameters(m, 1);
  TrainConfig cfg;
  cfg.epochs = 1;
  Optimizer opt(cfg);
  train(m, p, opt, small_data(3), cfg);
  Optimizer restored(cfg);
  restored.load_state(p, opt.state(p));
  EXPECT_EQ(restored.steps(), opt.steps());
  EXPECT_TRUE(restored.state(p) == opt.state(p));
}

}  // namespace
}  // namespace hsnn
