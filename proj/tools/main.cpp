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

#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "hsnn/commands.hpp"
#include "hsnn/model.hpp"

namespace {

using namespace hsnn::cli;

// Accepts only 2,H,W,T (two polarity channels).
bool apply_shape(const std::vector<std::size_t>& shape, GenDataOptions& o) {
  if (shape.size() != 4 || shape[0] != 2) return false;
  o.height = shape[1];
  o.width = shape[2];
  o.timesteps = shape[3];
  return true;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Hybrid spiking/non-spiking network toolkit"};
  app.require_subcommand(1);
  app.set_version_flag("--version", "hsnn 1.0.0");

  GenDataOptions gen;
  std::vector<std::size_t> shape;
  std::string gen_out = gen.out.string();
  auto* gen_cmd = app.add_subcommand("gen-data", "Generate the synthetic direction-reversal dataset");
  gen_cmd->add_option("--classes", gen.classes, "Number of classes")->capture_default_str();
  gen_cmd->add_option("--count", gen.count, "Samples per class")->capture_default_str();
  gen_cmd->add_option("--shape", shape, "Sample shape 2,H,W,T (default 2,32,32,20)")->delimiter(',')->expected(4);
  gen_cmd->add_option("--bin-ms", gen.bin_ms, "Frame width in milliseconds")->capture_default_str();
  gen_cmd->add_option("--noise", gen.noise, "Background event rate")->capture_default_str();
  gen_cmd->add_option("--seed", gen.seed, "Random seed")->capture_default_str();
  gen_cmd->add_option("--out", gen_out, "Output directory")->capture_default_str();

  TrainOptions tr;
  std::size_t interval = 0;
  std::string tr_data = tr.data.string(), tr_out = tr.out.string();
  auto* train_cmd = app.add_subcommand("train", "Train a model end to end");
  train_cmd->add_option("--model", tr.model, "ann, s1a4..s5a0 or snn")->capture_default_str();
  auto* interval_opt = train_cmd->add_option("--interval", interval, "Accumulate interval I (default 5)");
  train_cmd->add_option("--data", tr_data, "Dataset directory")->capture_default_str();
  train_cmd->add_option("--epochs", tr.epochs)->capture_default_str();
  train_cmd->add_option("--batch-size", tr.batch_size)->capture_default_str();
  train_cmd->add_option("--lr", tr.learning_rate)->capture_default_str();
  train_cmd->add_option("--optimizer", tr.optimizer)->check(CLI::IsMember({"adam", "sgd"}))->capture_default_str();
  train_cmd->add_option("--grad-clip", tr.grad_clip)->capture_default_str();
  train_cmd->add_option("--train-fraction", tr.train_fraction)->capture_default_str();
  train_cmd->add_option("--seed", tr.seed)->capture_default_str();
  train_cmd->add_option("--threads", tr.threads, "Worker threads (0 reads HSNN_THREADS)")->capture_default_str();
  train_cmd->add_option("--out", tr_out, "Checkpoint directory")->capture_default_str();

  EvalOptions ev;
  std::string ev_ckpt = ev.checkpoint.string(), ev_data = ev.data.string(), ev_out;
  auto* eval_cmd = app.add_subcommand("eval", "Evaluate a checkpoint");
  eval_cmd->add_option("--checkpoint", ev_ckpt)->capture_default_str();
  eval_cmd->add_option("--data", ev_data)->capture_default_str();
  eval_cmd->add_option("--split", ev.split)->check(CLI::IsMember({"test", "train", "all"}))->capture_default_str();
  eval_cmd->add_option("--train-fraction", ev.train_fraction)->capture_default_str();
  eval_cmd->add_option("--seed", ev.seed, "Split seed (the training seed)")->capture_default_str();
  eval_cmd->add_option("--threads", ev.threads)->capture_default_str();
  eval_cmd->add_option("--out", ev_out, "Report directory (default: <checkpoint>/eval)");

  SimulateHwOptions hw;
  std::string hw_ckpt, hw_data = hw.data.string(), hw_out = hw.out.string();
  unsigned hw_bits = 0;
  auto* hw_cmd = app.add_subcommand("simulate-hw", "Run the counter-bank simulator against the software accumulator");
  hw_cmd->add_option("--checkpoint", hw_ckpt, "Use accumulator input of this model (random stimulus otherwise)");
  hw_cmd->add_option("--data", hw_data, "Dataset for --checkpoint mode")->capture_default_str();
  hw_cmd->add_option("--sample", hw.sample)->capture_default_str();
  hw_cmd->add_option("--interval", hw.interval)->capture_default_str();
  hw_cmd->add_option("--neurons", hw.neurons)->capture_default_str();
  hw_cmd->add_option("--timesteps", hw.timesteps)->capture_default_str();
  hw_cmd->add_option("--density", hw.density, "Spike probability of random stimulus")->capture_default_str();
  auto* bits_opt = hw_cmd->add_option("--counter-bits", hw_bits, "Override counter width k");
  hw_cmd->add_option("--seed", hw.seed)->capture_default_str();
  hw_cmd->add_option("--out", hw_out, "Directory for trace and verdict")->capture_default_str();

  ProfileOptions pr;
  std::string pr_ckpt, pr_profiles, pr_out = pr.out.string();
  auto* profile_cmd = app.add_subcommand("profile", "Estimate latency, power and energy");
  profile_cmd->add_option("--checkpoint", pr_ckpt, "Profile one trained model instead of the sweep");
  profile_cmd->add_option("--profiles", pr_profiles, "Device profile JSON (built-in defaults otherwise)");
  profile_cmd->add_option("--models", pr.models, "Models to sweep (default all)")->delimiter(',');
  profile_cmd->add_option("--intervals", pr.intervals, "Intervals to sweep")->delimiter(',')->capture_default_str();
  profile_cmd->add_option("--height", pr.height)->capture_default_str();
  profile_cmd->add_option("--width", pr.width)->capture_default_str();
  profile_cmd->add_option("--timesteps", pr.timesteps)->capture_default_str();
  profile_cmd->add_option("--probe", pr.probe, "Probe inputs for activity measurement")->capture_default_str();
  profile_cmd->add_option("--seed", pr.seed)->capture_default_str();
  profile_cmd->add_option("--out", pr_out)->capture_default_str();

  std::string rp_manifest, rp_out;
  auto* replay_cmd = app.add_subcommand("replay", "Rerun a command from its run manifest and compare artifacts");
  replay_cmd->add_option("manifest", rp_manifest, "run.json to replay")->required();
  replay_cmd->add_option("--out", rp_out, "Output directory (default: the original)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kOk : kUsage;
  }

  return run_guarded(
      [&]() -> int {
        if (*gen_cmd) {
          if (!shape.empty() && !apply_shape(shape, gen)) {
            std::cerr << "error: --shape must be 2,H,W,T\n";
            return kUsage;
          }
          gen.out = gen_out;
          return cmd_gen_data(gen, std::cout);
        }
        if (*train_cmd) {
          tr.data = tr_data;
          tr.out = tr_out;
          if (*interval_opt) tr.interval = interval;
          else if (tr.model == "snn") tr.interval.reset();
          return cmd_train(tr, std::cout);
        }
        if (*eval_cmd) {
          ev.checkpoint = ev_ckpt;
          ev.data = ev_data;
          ev.out = ev_out;
          return cmd_eval(ev, std::cout);
        }
        if (*hw_cmd) {
          if (!hw_ckpt.empty()) hw.checkpoint = hw_ckpt;
          if (*bits_opt) hw.counter_bits = hw_bits;
          hw.data = hw_data;
          hw.out = hw_out;
          return cmd_simulate_hw(hw, std::cout);
        }
        if (*profile_cmd) {
          if (!pr_ckpt.empty()) pr.checkpoint = pr_ckpt;
          if (!pr_profiles.empty()) pr.profiles = pr_profiles;
          pr.out = pr_out;
          return cmd_profile(pr, std::cout);
        }
        if (*replay_cmd) {
          std::optional<std::filesystem::path> out;
          if (!rp_out.empty()) out = rp_out;
          return replay(rp_manifest, out, std::cout).exit_code;
        }
        return kUsage;
      },
      std::cerr);
}
