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

// Acceptance suite: one PASS/FAIL/SKIP line per criterion, nonzero exit if
// any gating criterion fails. Tolerances and budgets are pinned below.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include <unistd.h>

#include "hsnn/accumulator.hpp"
#include "hsnn/commands.hpp"
#include "hsnn/cost_model.hpp"
#include "hsnn/hw_sim.hpp"
#include "hsnn/ops.hpp"
#include "hsnn/trainer.hpp"

namespace fs = std::filesystem;
using namespace hsnn;

namespace {

// Runtime budgets in seconds.
constexpr double kBudgetAccumulator = 30.0;
constexpr double kBudgetGradients = 300.0;
constexpr double kBudgetHardware = 60.0;
constexpr double kBudgetTemporal = 900.0;
constexpr double kBudgetCost = 60.0;

// Gradient check.
constexpr double kFdStep = 1e-5;
constexpr double kFdRel = 1e-4;
constexpr double kFdAbs = 1e-6;

// Temporal probe thresholds.
constexpr double kAnnPairCeiling = 0.60;
constexpr double kHybridFloor = 0.90;
constexpr std::size_t kEpochLimit = 30;
constexpr std::size_t kHybridEpochs = 8;
constexpr std::size_t kAnnEpochs = 20;

// Cost checks.
constexpr double kAccumulatorFraction = 1e-3;
constexpr double kConsistency = 1e-9;

constexpr const char* kDvsGestureEnv = "HSNN_DVSGESTURE_ROOT";

struct Outcome {
  enum Status { kPass, kFail, kSkip } status = kFail;
  std::string detail;
};

double seconds_since(std::chrono::steady_clock::time_point start) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
}

std::string fmt(const char* f, double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, f, v);
  return buf;
}

SpikeTensor random_spikes(std::size_t c, std::size_t h, std::size_t w, std::size_t t, std::mt19937_64& rng,
                          double density = 0.5) {
  std::bernoulli_distribution d(density);
  std::vector<double> v(c * h * w * t);
  for (auto& x : v) x = d(rng) ? 1.0 : 0.0;
  return SpikeTensor(c, h, w, t, std::move(v));
}

std::vector<std::size_t> divisors(std::size_t n) {
  std::vector<std::size_t> out;
  for (std::size_t d = 1; d <= n; ++d)
    if (n % d == 0) out.push_back(d);
  return out;
}

// 1. Accumulator against scalar-loop oracles.
Outcome accumulator_correctness() {
  const auto start = std::chrono::steady_clock::now();
  std::mt19937_64 rng(20260101);
  std::size_t failures = 0;
  std::string first;
  for (int trial = 0; trial < 1000; ++trial) {
    std::size_t C, H, W, T;
    do {
      C = 1 + rng() % 8;
      H = 1 + rng() % 12;
      W = 1 + rng() % 12;
      T = 1 + rng() % 30;
    } while (C * H * W * T > 10000);
    const auto ds = divisors(T);
    const std::size_t I = ds[rng() % ds.size()], G = T / I;
    const SpikeTensor s = random_spikes(C, H, W, T, rng, 0.3 + 0.4 * ((rng() % 100) / 100.0));
    const AccumulatorConfig cfg{I, T, false};

    std::vector<double> fwd(G * C * H * W, 0.0);
    for (std::size_t g = 0; g < G; ++g)
      for (std::size_t c = 0; c < C; ++c)
        for (std::size_t h = 0; h < H; ++h)
          for (std::size_t w = 0; w < W; ++w)
            for (std::size_t k = 0; k < I; ++k) fwd[((g * C + c) * H + h) * W + w] += s.at(c, h, w, g * I + k);

    std::vector<double> y(G * C * H * W);
    for (auto& v : y) v = static_cast<double>(static_cast<int>(rng() % 2001) - 1000);
    std::vector<double> bwd(C * H * W * T);
    for (std::size_t c = 0; c < C; ++c)
      for (std::size_t h = 0; h < H; ++h)
        for (std::size_t w = 0; w < W; ++w)
          for (std::size_t t = 0; t < T; ++t)
            bwd[((c * H + h) * W + w) * T + t] = y[(((t / I) * C + c) * H + h) * W + w];

    const auto a = accumulate_forward(s, cfg).to_vector();
    const auto b = accumulate_backward(Tensor::from({G * C, H, W}, y), s.shape(), cfg).to_vector();
    double lhs = 0.0, rhs = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) lhs += a[i] * y[i];
    const auto xs = s.data();
    for (std::size_t i = 0; i < b.size(); ++i) rhs += xs[i] * b[i];

    const bool ok = a == fwd && b == bwd && lhs == rhs;
    if (!ok && failures++ == 0) {
      std::ostringstream os;
      os << "trial " << trial << " C=" << C << " H=" << H << " W=" << W << " T=" << T << " I=" << I
         << (a != fwd ? " forward" : "") << (b != bwd ? " backward" : "") << (lhs != rhs ? " adjoint" : "");
      first = os.str();
    }
  }
  const double secs = seconds_since(start);
  std::ostringstream os;
  os << "1000 configs, " << failures << " mismatches" << (first.empty() ? "" : " (first: " + first + ")") << ", "
     << fmt("%.1f s", secs);
  return {failures == 0 && secs < kBudgetAccumulator ? Outcome::kPass : Outcome::kFail, os.str()};
}

// 2. Relaxed S_2A_3 gradients against central differences.
Outcome gradient_fidelity() {
  const auto start = std::chrono::steady_clock::now();
  HybridModelSpec spec = HybridModelSpec::named("s2a3", 3);
  spec.input_shape = {2, 8, 8, 6};
  spec.channel_schedule = {4, 4, 6, 6, 8};
  spec.pool_after = {true, true, true, false, false};
  spec.dense_widths = {12, 8};
  const BuiltModel model = build(spec);
  ParameterStore params = init_parameters(model, 11).clone(true);

  std::mt19937_64 rng(5);
  const std::vector<SpikeTensor> inputs{random_spikes(2, 8, 8, 6, rng, 0.4), random_spikes(2, 8, 8, 6, rng, 0.4)};
  ForwardOptions opts;
  opts.spike_fn = SpikeFunction::kRelaxed;
  auto loss_fn = [&] {
    Tensor loss = ops::softmax_cross_entropy(forward(model, params, inputs[0], opts).logits, 0);
    return ops::add(loss, ops::softmax_cross_entropy(forward(model, params, inputs[1], opts).logits, 2));
  };

  params.zero_grad();
  backward(loss_fn());
  std::size_t checked = 0, bad = 0, spiking_nonzero = 0, spiking_total = 0;
  double worst = 0.0;
  std::string first;
  for (auto& e : params.entries()) {
    const auto g = e.value.grad();
    const std::vector<double> analytic = g.empty() ? std::vector<double>(e.value.numel(), 0.0)
                                                   : std::vector<double>(g.begin(), g.end());
    if (e.name == "conv1.weight" || e.name == "conv2.weight") {
      spiking_total += analytic.size();
      for (double v : analytic) spiking_nonzero += v != 0.0;
    }
    auto data = e.value.mutable_leaf_data();
    for (std::size_t i = 0; i < data.size(); ++i) {
      const double saved = data[i];
      data[i] = saved + kFdStep;
      const double up = loss_fn().item();
      data[i] = saved - kFdStep;
      const double down = loss_fn().item();
      data[i] = saved;
      const double numeric = (up - down) / (2.0 * kFdStep);
      const double gap = std::fabs(analytic[i] - numeric);
      const double scale = std::max(std::fabs(analytic[i]), std::fabs(numeric));
      worst = std::max(worst, gap / (kFdAbs + kFdRel * scale));
      if (gap > kFdAbs + kFdRel * scale && bad++ == 0) {
        first = e.name + "[" + std::to_string(i) + "] analytic " + fmt("%.6e", analytic[i]) + " numeric " +
                fmt("%.6e", numeric);
      }
      ++checked;
    }
  }
  const double secs = seconds_since(start);
  std::ostringstream os;
  os << checked << " parameters, " << bad << " outside tolerance, worst gap/tol " << fmt("%.2e", worst)
     << ", spiking weights with nonzero gradient " << spiking_nonzero << "/" << spiking_total
     << (first.empty() ? "" : " (first: " + first + ")") << ", " << fmt("%.1f s", secs);
  const bool ok = bad == 0 && checked == model.parameter_count && spiking_nonzero > 0 && secs < kBudgetGradients;
  return {ok ? Outcome::kPass : Outcome::kFail,
          os.str()};
}

// 3. Counter-bank simulation against the software accumulator.
Outcome hardware_equivalence() {
  const auto start = std::chrono::steady_clock::now();
  const std::size_t T = 50;
  const std::vector<std::size_t> intervals{1, 5, 10, 25}, sizes{1, 127, 128, 129, 300};
  std::mt19937_64 rng(77);
  std::size_t traces = 0, mismatches = 0;
  std::uint64_t saturation = 0;
  const bool sizing = counter_bits_for(5) == 3 && counter_bits_for(10) == 4 && counter_bits_for(25) == 5;
  while (traces < 200) {
    for (std::size_t I : intervals) {
      for (std::size_t M : sizes) {
        const SpikeTensor s = random_spikes(M, 1, 1, T, rng, 0.2 + 0.8 * ((rng() % 100) / 100.0));
        const LayerRun run = run_layer(s, I);
        mismatches += run_as_accumulated(run) != accumulate_forward(s, {I, T, false}).to_vector();
        saturation += run.saturation_events;
        ++traces;
      }
    }
  }
  const double secs = seconds_since(start);
  std::ostringstream os;
  os << traces << " traces, " << mismatches << " mismatches, " << saturation << " saturation events, k(5/10/25)="
     << counter_bits_for(5) << "/" << counter_bits_for(10) << "/" << counter_bits_for(25) << ", " << fmt("%.1f s", secs);
  return {mismatches == 0 && saturation == 0 && sizing && secs < kBudgetHardware ? Outcome::kPass : Outcome::kFail,
          os.str()};
}

// 4. Parameter-count structure across intervals.
Outcome structural_phenomena() {
  auto built = [](const std::string& name, std::size_t I) {
    HybridModelSpec spec = HybridModelSpec::named(name, I);
    spec.input_shape = {2, 32, 32, 50};
    return build(spec);
  };
  const std::vector<std::size_t> intervals{5, 10, 25};
  std::ostringstream os;
  bool a = true, b = true, c = true;
  std::vector<std::size_t> snn, s5;
  for (std::size_t I : intervals) {
    snn.push_back(built("snn", I).parameter_count);
    s5.push_back(built("s5a0", I).parameter_count);
  }
  a = snn[0] == snn[1] && snn[1] == snn[2];
  b = s5[0] > s5[1] && s5[1] > s5[2];
  for (std::size_t k = 1; k <= 4; ++k) {
    for (std::size_t I : intervals) {
      const BuiltModel m = built("s" + std::to_string(k) + "a" + std::to_string(5 - k), I);
      const LayerDesc& acc = m.layers[*m.accumulator_index];
      const LayerDesc& next = m.layers[*m.accumulator_index + 1];
      c = c && next.weight_shape[1] == acc.in_shape[0] * 50 / I;
    }
  }
  os << "(a) snn " << snn[0] << "/" << snn[1] << "/" << snn[2] << (a ? " equal" : " DIFFER") << "; (b) s5a0 " << s5[0]
     << " > " << s5[1] << " > " << s5[2] << (b ? "" : " VIOLATED") << "; (c) C*T/I channels after accumulator "
     << (c ? "ok" : "VIOLATED");
  return {a && b && c ? Outcome::kPass : Outcome::kFail, os.str()};
}

// 5. Reversal pairs separate I=T from I=5.
Outcome temporal_information() {
  const auto start = std::chrono::steady_clock::now();
  SynthOptions so;  // 3 classes x 60 at (2, 32, 32, 20), seed 7
  const auto all = synth_gestures(so);
  const Split split = stratified_split(all, so.class_count, 0.8, 1);
  auto run = [&](const std::string& name, std::size_t I, std::size_t epochs) {
    const BuiltModel model = build(HybridModelSpec::named(name, I));
    ParameterStore params = init_parameters(model, 1);
    TrainConfig cfg;
    cfg.epochs = epochs;
    cfg.seed = 1;
    cfg.threads = threads_from_env();
    Optimizer opt(cfg);
    return train(model, params, opt, split.train, cfg, &split.test).report;
  };
  const EvalReport ann = run("ann", so.timesteps, kAnnEpochs);
  const EvalReport hybrid = run("s2a3", 5, kHybridEpochs);
  const double ann_pair = subset_accuracy(ann, {0, 1});
  const double secs = seconds_since(start);
  std::ostringstream os;
  os << "ann I=20 reversal-pair acc " << fmt("%.3f", ann_pair) << " (overall " << fmt("%.3f", ann.accuracy)
     << ", " << kAnnEpochs << " epochs), s2a3 I=5 test acc " << fmt("%.3f", hybrid.accuracy) << " (" << kHybridEpochs
     << " epochs), " << split.test.size() << " test samples, " << fmt("%.1f s", secs);
  const bool ok = ann_pair <= kAnnPairCeiling && hybrid.accuracy >= kHybridFloor && kHybridEpochs <= kEpochLimit &&
                  secs < kBudgetTemporal;
  return {ok ? Outcome::kPass : Outcome::kFail, os.str()};
}

// 6. Cost-model orderings under the shipped calibration.
Outcome cost_orderings(const fs::path& work) {
  const auto start = std::chrono::steady_clock::now();
  const ProfileSet& profiles = default_profiles();
  SynthOptions so;
  so.samples_per_class = 2;
  so.timesteps = 50;
  so.seed = 1;
  std::vector<SpikeTensor> probe;
  for (const auto& s : synth_gestures(so)) probe.push_back(s.frames);

  std::vector<CostReport> reports;
  for (const auto& name : model_names()) {
    for (std::size_t I : {5, 10, 25}) {
      HybridModelSpec spec = HybridModelSpec::named(name, I);
      spec.input_shape = {2, 32, 32, 50};
      const BuiltModel model = build(spec);
      reports.push_back(estimate(model, init_parameters(model, 1), probe, profiles));
    }
  }
  emit_reports(reports, work / "cost_report");
  const auto reloaded = load_reports(work / "cost_report.jsonl");

  double worst_fraction = 0.0, worst_gap = 0.0;
  for (const auto& r : reloaded) {
    worst_fraction = std::max(worst_fraction, r.component("accumulator").energy_j / r.total.energy_j);
    worst_gap = std::max(worst_gap, max_consistency_error(r));
  }
  bool ordering = true;
  std::string sweep;
  const char* names[] = {"s1a4", "s2a3", "s3a2", "s4a1", "s5a0"};
  std::vector<double> e;
  for (const char* n : names) {
    for (const auto& r : reloaded) {
      if (r.model == n && r.interval == 5) e.push_back(r.total.energy_j);
    }
  }
  ordering = e.size() == 5 && e[0] > e[1] && e[1] > e[2] && e[2] > e[3] && e[4] > e[3];
  for (std::size_t k = 0; k < e.size(); ++k) sweep += std::string(k ? " " : "") + names[k] + "=" + fmt("%.3e", e[k]);

  const double secs = seconds_since(start);
  std::ostringstream os;
  os << reloaded.size() << " reports; (a) max accumulator fraction " << fmt("%.2e", worst_fraction) << "; (b) I=5 "
     << sweep << "; (c) max |E-PL|/E " << fmt("%.1e", worst_gap) << ", " << fmt("%.1f s", secs);
  const bool ok = reloaded.size() == 21 && reloaded == reports && worst_fraction < kAccumulatorFraction &&
                  ordering && worst_gap <= kConsistency && secs < kBudgetCost;
  return {ok ? Outcome::kPass : Outcome::kFail, os.str()};
}

// 7. Training replay from its manifest.
Outcome determinism(const fs::path& work) {
  std::ostringstream log;
  cli::GenDataOptions gen;
  gen.count = 8;
  gen.out = work / "data";
  if (cli::cmd_gen_data(gen, log) != 0) return {Outcome::kFail, "gen-data failed"};
  cli::TrainOptions tr;
  tr.data = gen.out;
  tr.epochs = 2;
  tr.out = work / "ckpt";
  if (cli::cmd_train(tr, log) != 0) return {Outcome::kFail, "train failed"};
  const fs::path again = work / "ckpt_replay";
  const cli::ReplayResult r = cli::replay(tr.out / cli::kRunManifestName, again, log);

  auto bytes = [](const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    return std::string(std::istreambuf_iterator<char>(in), {});
  };
  const std::string w0 = bytes(tr.out / "weights.bin"), w1 = bytes(again / "weights.bin");
  const bool identical = !w0.empty() && w0 == w1;
  std::ostringstream os;
  os << "replayed " << r.compared << " artifacts, " << r.mismatched.size() << " mismatched; weights.bin "
     << (identical ? "byte-identical" : "DIFFERS") << " (" << w0.size() << " bytes)";
  return {r.exit_code == 0 && r.mismatched.empty() && r.compared > 0 && identical ? Outcome::kPass : Outcome::kFail,
          os.str()};
}

// 8. DvsGesture sample counts (optional).
Outcome dvs_gesture() {
  const char* root = std::getenv(kDvsGestureEnv);
  if (!root || !*root) return {Outcome::kSkip, std::string(kDvsGestureEnv) + " not set"};
  const DvsGestureCounts counts = count_dvs_gesture(root);
  std::ostringstream os;
  os << counts.train << " train / " << counts.test << " test windows of (2,128,128,50), expected 14672 / 3793";
  return {counts.train == 14672 && counts.test == 3793 ? Outcome::kPass : Outcome::kFail, os.str()};
}

}  // namespace

// Optional arguments select criteria by number, e.g. `acceptance 2 6`.
int main(int argc, char** argv) {
  const fs::path work = fs::temp_directory_path() / ("hsnn_acceptance_" + std::to_string(::getpid()));
  fs::create_directories(work);

  struct Criterion {
    int id;
    const char* name;
    bool gating;
    std::function<Outcome()> run;
  };
  const std::vector<Criterion> criteria{
      {1, "accumulator correctness", true, accumulator_correctness},
      {2, "gradient fidelity", true, gradient_fidelity},
      {3, "hardware/software equivalence", true, hardware_equivalence},
      {4, "structural parameter phenomena", true, structural_phenomena},
      {5, "temporal-information property", true, temporal_information},
      {6, "cost-model orderings", true, [&] { return cost_orderings(work); }},
      {7, "determinism", true, [&] { return determinism(work); }},
      {8, "DvsGesture ingestion (optional)", false, dvs_gesture},
  };

  std::vector<int> only;
  for (int i = 1; i < argc; ++i) only.push_back(std::atoi(argv[i]));

  int failed = 0;
  for (const auto& c : criteria) {
    if (!only.empty() && std::find(only.begin(), only.end(), c.id) == only.end()) continue;
    Outcome o;
    try {
      o = c.run();
    } catch (const std::exception& e) {
      o = {Outcome::kFail, std::string("exception: ") + e.what()};
    }
    const char* status = o.status == Outcome::kPass ? "PASS" : o.status == Outcome::kSkip ? "SKIP" : "FAIL";
    std::cout << "criterion " << c.id << ": " << status << "  " << c.name << " - " << o.detail << std::endl;
    if (c.gating && o.status == Outcome::kFail) ++failed;
  }
  std::error_code ec;
  fs::remove_all(work, ec);
  std::cout << (failed ? "acceptance: FAIL (" + std::to_string(failed) + " gating criteria failed)" : "acceptance: PASS")
            << std::endl;
  return failed ? 1 : 0;
}
