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

#include "hsnn/trainer.hpp"

#include <cmath>
#include <cstdlib>
#include <random>
#include <thread>

#include "hsnn/error.hpp"
#include "hsnn/ops.hpp"

namespace hsnn {
namespace {

// Runs fn(i) for i in [0, n) across `threads` workers, index-strided.
template <typename Fn>
void parallel_for(std::size_t n, std::size_t threads, Fn&& fn) {
  threads = std::max<std::size_t>(1, std::min(threads, n));
  if (threads == 1) {
    for (std::size_t i = 0; i < n; ++i) fn(i, 0);
    return;
  }
  std::vector<std::exception_ptr> errors(threads);
  std::vector<std::thread> pool;
  for (std::size_t w = 0; w < threads; ++w) {
    pool.emplace_back([&, w] {
      try {
        for (std::size_t i = w; i < n; i += threads) fn(i, w);
      } catch (...) {
        errors[w] = std::current_exception();
      }
    });
  }
  for (auto& t : pool) t.join();
  for (auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }
}

}  // namespace

void TrainConfig::validate() const {
  if (epochs == 0 || batch_size == 0) throw ConfigError("epochs and batch size must be positive");
  if (!(learning_rate >= 0.0)) throw ConfigError("learning rate must be non-negative");
  if (optimizer != "adam" && optimizer != "sgd") throw ConfigError("unknown optimizer '" + optimizer + "'");
  if (!(beta1 >= 0.0 && beta1 < 1.0 && beta2 >= 0.0 && beta2 < 1.0 && epsilon > 0.0)) {
    throw ConfigError("invalid Adam hyperparameters");
  }
  if (!(grad_clip >= 0.0)) throw ConfigError("gradient clip must be non-negative");
}

std::size_t EvalReport::total() const {
  std::size_t n = 0;
  for (const auto& row : confusion)
    for (auto v : row) n += v;
  return n;
}

std::size_t EvalReport::correct() const {
  std::size_t n = 0;
  for (std::size_t i = 0; i < confusion.size(); ++i) n += confusion[i][i];
  return n;
}

void Optimizer::step(ParameterStore& params, const std::vector<std::vector<double>>& grads) {
  auto& entries = params.entries();
  if (grads.size() != entries.size()) throw ContractError("optimizer: gradient count does not match parameters");
  ++steps_;
  if (cfg_.optimizer == "sgd") {
    for (std::size_t p = 0; p < entries.size(); ++p) {
      auto values = entries[p].value.mutable_leaf_data();
      for (std::size_t i = 0; i < values.size(); ++i) values[i] -= cfg_.learning_rate * grads[p][i];
    }
    return;
  }
  if (m_.empty()) {
    for (const auto& e : entries) {
      m_.emplace_back(e.value.numel(), 0.0);
      v_.emplace_back(e.value.numel(), 0.0);
    }
  }
  const double t = static_cast<double>(steps_);
  const double bias1 = 1.0 - std::pow(cfg_.beta1, t);
  const double bias2 = 1.0 - std::pow(cfg_.beta2, t);
  for (std::size_t p = 0; p < entries.size(); ++p) {
    auto values = entries[p].value.mutable_leaf_data();
    auto& m = m_[p];
    auto& v = v_[p];
    for (std::size_t i = 0; i < values.size(); ++i) {
      const double g = grads[p][i];
      m[i] = cfg_.beta1 * m[i] + (1.0 - cfg_.beta1) * g;
      v[i] = cfg_.beta2 * v[i] + (1.0 - cfg_.beta2) * g * g;
      const double mhat = m[i] / bias1;
      const double vhat = v[i] / bias2;
      values[i] -= cfg_.learning_rate * mhat / (std::sqrt(vhat) + cfg_.epsilon);
    }
  }
}

ParameterStore Optimizer::state(const ParameterStore& params) const {
  ParameterStore out;
  out.add("optimizer.step", Tensor::scalar(static_cast<double>(steps_)));
  for (std::size_t p = 0; p < m_.size(); ++p) {
    const auto& e = params.entries()[p];
    out.add("adam.m." + e.name, Tensor::from(e.value.shape(), m_[p]));
    out.add("adam.v." + e.name, Tensor::from(e.value.shape(), v_[p]));
  }
  return out;
}

void Optimizer::load_state(const ParameterStore& params, const ParameterStore& state) {
  steps_ = static_cast<std::uint64_t>(state.get("optimizer.step").item());
  m_.clear();
  v_.clear();
  if (!state.find("adam.m." + (params.entries().empty() ? std::string() : params.entries()[0].name))) return;
  for (const auto& e : params.entries()) {
    m_.push_back(state.get("adam.m." + e.name).to_vector());
    v_.push_back(state.get("adam.v." + e.name).to_vector());
  }
}

BatchGradients batch_gradients(const BuiltModel& model, const ParameterStore& params,
                               const std::vector<const Sample*>& batch, const ForwardOptions& opts,
                               std::size_t threads) {
  const std::size_t n = batch.size();
  const std::size_t workers = std::max<std::size_t>(1, std::min(threads, n));
  std::vector<ParameterStore> local;
  for (std::size_t w = 0; w < workers; ++w) local.push_back(params.clone(true));

  std::vector<std::vector<std::vector<double>>> per_sample(n);
  std::vector<double> losses(n, 0.0);
  std::vector<char> hits(n, 0);
  parallel_for(n, workers, [&](std::size_t i, std::size_t w) {
    ParameterStore& store = local[w];
    store.zero_grad();
    ForwardResult fr = forward(model, store, batch[i]->frames, opts);
    Tensor loss = ops::softmax_cross_entropy(fr.logits, batch[i]->label);
    losses[i] = loss.item();
    hits[i] = ops::argmax(fr.logits) == batch[i]->label;
    backward(loss);
    auto& grads = per_sample[i];
    for (const auto& e : store.entries()) {
      const auto g = e.value.grad();
      grads.emplace_back(g.empty() ? std::vector<double>(e.value.numel(), 0.0) : std::vector<double>(g.begin(), g.end()));
    }
  });

  BatchGradients out;
  for (const auto& e : params.entries()) out.grads.emplace_back(e.value.numel(), 0.0);
  for (std::size_t i = 0; i < n; ++i) {
    out.loss_sum += losses[i];
    out.correct += hits[i] ? 1 : 0;
    for (std::size_t p = 0; p < out.grads.size(); ++p) {
      auto& dst = out.grads[p];
      const auto& src = per_sample[i][p];
      for (std::size_t k = 0; k < dst.size(); ++k) dst[k] += src[k];
    }
  }
  const double inv = 1.0 / static_cast<double>(n);
  for (auto& g : out.grads)
    for (auto& v : g) v *= inv;
  return out;
}

TrainResult train(const BuiltModel& model, ParameterStore& params, Optimizer& optimizer, const std::vector<Sample>& data,
                  const TrainConfig& cfg, const std::vector<Sample>* eval_data, const EpochCallback& on_epoch) {
  cfg.validate();
  if (data.empty()) throw ConfigError("training set is empty");
  TrainResult result;
  std::vector<std::size_t> order(data.size());
  std::size_t global_step = 0;
  for (std::size_t epoch = 0; epoch < cfg.epochs; ++epoch) {
    for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
    std::mt19937_64 rng(cfg.seed * 1000003ull + epoch);
    for (std::size_t i = order.size(); i > 1; --i) std::swap(order[i - 1], order[rng() % i]);

    double loss_sum = 0.0;
    std::size_t correct = 0;
    for (std::size_t start = 0; start < order.size(); start += cfg.batch_size) {
      std::vector<const Sample*> batch;
      for (std::size_t i = start; i < std::min(order.size(), start + cfg.batch_size); ++i) batch.push_back(&data[order[i]]);
      BatchGradients bg = batch_gradients(model, params, batch, cfg.forward, cfg.threads);
      double norm2 = 0.0;
      for (const auto& g : bg.grads)
        for (double v : g) norm2 += v * v;
      if (!std::isfinite(bg.loss_sum) || !std::isfinite(norm2)) {
        throw DivergenceError("loss diverged at epoch " + std::to_string(epoch) + ", step " + std::to_string(global_step),
                              epoch, global_step);
      }
      const double norm = std::sqrt(norm2);
      if (cfg.grad_clip > 0.0 && norm > cfg.grad_clip) {
        const double s = cfg.grad_clip / norm;
        for (auto& g : bg.grads)
          for (auto& v : g) v *= s;
      }
      optimizer.step(params, bg.grads);
      ++global_step;
      loss_sum += bg.loss_sum;
      correct += bg.correct;
    }
    EpochRecord rec;
    rec.epoch = epoch + 1;
    rec.loss = loss_sum / static_cast<double>(data.size());
    rec.accuracy = static_cast<double>(correct) / static_cast<double>(data.size());
    if (eval_data) rec.eval_accuracy = evaluate(model, params, *eval_data, cfg.threads).accuracy;
    result.history.push_back(rec);
    result.report.loss_curve.push_back(rec.loss);
    if (on_epoch) on_epoch(rec, params);
  }
  auto curve = result.report.loss_curve;
  result.report = evaluate(model, params, eval_data ? *eval_data : data, cfg.threads);
  result.report.loss_curve = std::move(curve);
  return result;
}

EvalReport evaluate(const BuiltModel& model, const ParameterStore& params, const std::vector<Sample>& data,
                    std::size_t threads) {
  const std::size_t classes = model.spec.classes;
  EvalReport report;
  report.confusion.assign(classes, std::vector<std::size_t>(classes, 0));
  if (data.empty()) return report;
  const ParameterStore frozen = params.clone(false);
  std::vector<std::size_t> predicted(data.size());
  std::vector<double> losses(data.size());
  parallel_for(data.size(), threads, [&](std::size_t i, std::size_t) {
    ForwardResult fr = forward(model, frozen, data[i].frames);
    predicted[i] = ops::argmax(fr.logits);
    losses[i] = ops::softmax_cross_entropy(fr.logits, data[i].label).item();
  });
  double loss_sum = 0.0;
  for (std::size_t i = 0; i < data.size(); ++i) {
    if (data[i].label >= classes) throw ConfigError("sample label " + std::to_string(data[i].label) + " out of range");
    ++report.confusion[data[i].label][predicted[i]];
    loss_sum += losses[i];
  }
  report.accuracy = static_cast<double>(report.correct()) / static_cast<double>(report.total());
  report.mean_loss = loss_sum / static_cast<double>(data.size());
  return report;
}

double subset_accuracy(const EvalReport& report, const std::vector<std::size_t>& labels) {
  std::size_t hit = 0, total = 0;
  for (auto l : labels) {
    if (l >= report.confusion.size()) continue;
    hit += report.confusion[l][l];
    for (auto v : report.confusion[l]) total += v;
  }
  return total == 0 ? 0.0 : static_cast<double>(hit) / static_cast<double>(total);
}

std::size_t threads_from_env() {
  if (const char* v = std::getenv("HSNN_THREADS")) {
    char* end = nullptr;
    const long n = std::strtol(v, &end, 10);
    if (end != v && n > 0) return static_cast<std::size_t>(n);
  }
  return 1;
}

}  // namespace hsnn
