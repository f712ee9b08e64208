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
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

namespace hsnn::cli {

// Stable process exit codes.
enum ExitCode : int { kOk = 0, kUsage = 2, kIo = 3, kNumeric = 4, kVerification = 5 };

inline constexpr const char* kRunManifestName = "run.json";

struct GenDataOptions {
  std::size_t classes = 3;
  std::size_t count = 60;  // samples per class
  std::size_t height = 32;
  std::size_t width = 32;
  std::size_t timesteps = 20;
  std::uint32_t bin_ms = 10;
  double noise = 0.002;
  std::uint64_t seed = 7;
  std::filesystem::path out = "data";
};

struct TrainOptions {
  std::string model = "s2a3";
  std::optional<std::size_t> interval = 5;
  std::filesystem::path data = "data";
  std::size_t epochs = 10;
  std::size_t batch_size = 8;
  double learning_rate = 1e-3;
  std::string optimizer = "adam";
  double grad_clip = 5.0;
  double train_fraction = 0.8;
  std::uint64_t seed = 1;
  std::size_t threads = 0;  // 0 reads HSNN_THREADS
  std::filesystem::path out = "ckpt";
};

struct EvalOptions {
  std::filesystem::path checkpoint = "ckpt";
  std::filesystem::path data = "data";
  std::string split = "test";  // test | train | all
  double train_fraction = 0.8;
  std::uint64_t seed = 1;  // split seed; matches the training seed
  std::size_t threads = 0;
  std::filesystem::path out;  // defaults to <checkpoint>/eval
};

struct SimulateHwOptions {
  std::optional<std::filesystem::path> checkpoint;  // random stimulus when absent
  std::filesystem::path data = "data";
  std::size_t sample = 0;
  std::size_t interval = 10;
  std::size_t neurons = 300;
  std::size_t timesteps = 50;
  double density = 0.5;
  std::optional<unsigned> counter_bits;
  std::uint64_t seed = 1;
  std::filesystem::path out = "hwsim";
};

struct ProfileOptions {
  std::optional<std::filesystem::path> checkpoint;
  std::optional<std::filesystem::path> profiles;  // built-in defaults when absent
  std::vector<std::string> models;                // all models when empty
  std::vector<std::size_t> intervals{5, 10, 25};
  std::size_t height = 32;
  std::size_t width = 32;
  std::size_t timesteps = 50;
  std::size_t probe = 6;
  std::uint64_t seed = 1;
  std::filesystem::path out = "profile";
};

// Each command writes its artifacts plus one run manifest into its output
// directory and returns an exit code. Errors propagate as exceptions; use
// run_guarded() to turn them into exit codes.
int cmd_gen_data(const GenDataOptions& opts, std::ostream& log);
int cmd_train(const TrainOptions& opts, std::ostream& log);
int cmd_eval(const EvalOptions& opts, std::ostream& log);
int cmd_simulate_hw(const SimulateHwOptions& opts, std::ostream& log);
int cmd_profile(const ProfileOptions& opts, std::ostream& log);

struct ReplayResult {
  int exit_code = kOk;
  std::vector<std::string> mismatched;  // artifacts whose hash changed
  std::size_t compared = 0;
};

// Reruns the command recorded in a run manifest, writing to `out` (or the
// original directory), and compares artifact hashes.
ReplayResult replay(const std::filesystem::path& manifest, const std::optional<std::filesystem::path>& out,
                    std::ostream& log);

template <typename Fn>
int run_guarded(Fn&& fn, std::ostream& err);

int exit_code_for_current_exception(std::ostream& err);

template <typename Fn>
int run_guarded(Fn&& fn, std::ostream& err) {
  try {
    return fn();
  } catch (...) {
    return exit_code_for_current_exception(err);
  }
}

}  // namespace hsnn::cli
