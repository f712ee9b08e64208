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
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "hsnn/error.hpp"
#include "hsnn/events.hpp"
#include "hsnn/model.hpp"

namespace hsnn {

struct TrainConfig {
  std::size_t epochs = 10;
  std::size_t batch_size = 8;
  double learning_rate = 1e-3;
  std::string optimizer = "adam";  // "adam" or "sgd"
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;
  double grad_clip = 5.0;  // global L2 norm; 0 disables
  std::uint64_t seed = 1;
  std::size_t threads = 1;
  ForwardOptions forward{};

  void validate() const;
};

struct EvalReport {
  double accuracy = 0.0;
  double mean_loss = 0.0;
  std::vector<std::vector<std::size_t>> confusion;  // [true][predicted]
  std::vector<double> loss_curve;                   // per-epoch mean training loss

  std::size_t total() const;
  std::size_t correct() const;
};

struct EpochRecord {
  std::size_t epoch = 0;
  double loss = 0.0;
  double accuracy = 0.0;                  // training accuracy seen during the epoch
  std::optional<double> eval_accuracy;    // on the held-out set, when given
};

// Adam or plain SGD over a ParameterStore. State is keyed by parameter order.
class Optimizer {
 public:
  explicit Optimizer(const TrainConfig& cfg) : cfg_(cfg) {}

  void step(ParameterStore& params, const std::vector<std::vector<double>>& grads);
  std::uint64_t steps() const { return steps_; }

  // Moments and step count as named tensors for checkpointing.
  ParameterStore state(const ParameterStore& params) const;
  void load_state(const ParameterStore& params, const ParameterStore& state);

 private:
  TrainConfig cfg_;
  std::uint64_t steps_ = 0;
  std::vector<std::vector<double>> m_, v_;
};

// Loss went non-finite. Parameters are left at the last finite step.
class DivergenceError : public NumericError {
 public:
  DivergenceError(const std::string& what, std::size_t epoch, std::size_t step)
      : NumericError(what), epoch_(epoch), step_(step) {}
  std::size_t epoch() const { return epoch_; }
  std::size_t step() const { return step_; }

 private:
  std::size_t epoch_, step_;
};

struct BatchGradients {
  std::vector<std::vector<double>> grads;  // per parameter, averaged over the batch
  double loss_sum = 0.0;
  std::size_t correct = 0;
};

// Per-sample graphs, optionally on worker threads; per-sample gradients are
// merged in sample order so the result does not depend on the thread count.
BatchGradients batch_gradients(const BuiltModel& model, const ParameterStore& params,
                               const std::vector<const Sample*>& batch, const ForwardOptions& opts,
                               std::size_t threads);

using EpochCallback = std::function<void(const EpochRecord&, const ParameterStore&)>;

struct TrainResult {
  EvalReport report;  // on eval data when given, else on the training data
  std::vector<EpochRecord> history;
};

// One optimizer step per batch over a seeded shuffle of `data` each epoch.
TrainResult train(const BuiltModel& model, ParameterStore& params, Optimizer& optimizer, const std::vector<Sample>& data,
                  const TrainConfig& cfg, const std::vector<Sample>* eval_data = nullptr,
                  const EpochCallback& on_epoch = {});

EvalReport evaluate(const BuiltModel& model, const ParameterStore& params, const std::vector<Sample>& data,
                    std::size_t threads = 1);

// Accuracy restricted to samples whose label is in `labels`.
double subset_accuracy(const EvalReport& report, const std::vector<std::size_t>& labels);

// Worker count from HSNN_THREADS, falling back to 1.
std::size_t threads_from_env();

}  // namespace hsnn
