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
#include <sys/wait.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <nlohmann/json.hpp>
#include <sstream>

namespace {

namespace fs = std::filesystem;

struct CliRun {
  int code = -1;
  std::string output;
};

fs::path scratch() {
  static const fs::path dir = [] {
    fs::path d = fs::temp_directory_path() / "hsnn_test_cli";
    fs::remove_all(d);
    fs::create_directories(d);
    return d;
  }();
  return dir;
}

CliRun hsnn(const std::string& args) {
  const char* bin = std::getenv("HSNN_CLI");
  if (!bin) throw std::runtime_error("HSNN_CLI is not set");
  const fs::path log = scratch() / "last_output.txt";
  const std::string cmd = std::string("\"") + bin + "\" " + args + " > \"" + log.string() + "\" 2>&1";
  const int status = std::system(cmd.c_str());
  CliRun r;
  r.code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  std::ifstream in(log);
  r.output.assign(std::istreambuf_iterator<char>(in), {});
  return r;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  return {std::istreambuf_iterator<char>(in), {}};
}

nlohmann::json read_json(const fs::path& p) { return nlohmann::json::parse(slurp(p)); }

// Small dataset shared by the train/eval/replay tests.
const fs::path& desk_data() {
  static const fs::path dir = [] {
    const fs::path d = scratch() / "data";
    const CliRun r = hsnn("gen-data --count 20 --seed 7 --out " + d.string());
    if (r.code != 0) throw std::runtime_error(r.output);
    return d;
  }();
  return dir;
}

TEST(Cli, HelpAndBadFlags) {
  EXPECT_EQ(hsnn("--help").code, 0);
  EXPECT_EQ(hsnn("train --no-such-flag").code, 2);
  EXPECT_EQ(hsnn("frobnicate").code, 2);
  EXPECT_EQ(hsnn("gen-data --shape 2,32,32").code, 2);
}

TEST(Cli, GenDataDefaultsAndDeterminism) {
  const fs::path a = scratch() / "gen_a", b = scratch() / "gen_b";
  ASSERT_EQ(hsnn("gen-data --count 3 --out " + a.string()).code, 0);
  ASSERT_EQ(hsnn("gen-data --count 3 --out " + b.string()).code, 0);
  std::size_t files = 0;
  for (const auto& e : fs::directory_iterator(a)) {
    if (e.path().filename() == "run.json") continue;
    EXPECT_EQ(slurp(e.path()), slurp(b / e.path().filename())) << e.path();
    ++files;
  }
  EXPECT_EQ(files, 9u + 2u);  // 3 classes x 3 samples, manifest.txt, dataset.json
  EXPECT_EQ(read_json(a / "dataset.json")["classes"], 3);
}

TEST(Cli, GenDataEmpty) {
  const fs::path d = scratch() / "gen_empty";
  ASSERT_EQ(hsnn("gen-data --count 0 --out " + d.string()).code, 0);
  std::istringstream manifest(slurp(d / "manifest.txt"));
  std::string line;
  std::size_t entries = 0;
  while (std::getline(manifest, line)) entries += !line.empty() && line[0] != '#';
  EXPECT_EQ(entries, 0u);
}

TEST(Cli, TrainRejectsNonDividingInterval) {
  const CliRun r = hsnn("train --model s2a3 --interval 7 --epochs 1 --data " + desk_data().string() + " --out " +
                     (scratch() / "bad_interval").string());
  EXPECT_EQ(r.code, 2);
  EXPECT_NE(r.output.find("divide"), std::string::npos) << r.output;
}

TEST(Cli, TrainMissingDataIsIoError) {
  EXPECT_EQ(hsnn("train --epochs 1 --data /nonexistent/data --out " + (scratch() / "nodata").string()).code, 3);
}

TEST(Cli, SnnIgnoresIntervalWithWarning) {
  const fs::path out = scratch() / "snn";
  const CliRun r = hsnn("train --model snn --interval 25 --epochs 1 --data " + desk_data().string() + " --out " +
                     out.string());
  EXPECT_EQ(r.code, 0) << r.output;
  EXPECT_NE(r.output.find("ignored"), std::string::npos) << r.output;
}

TEST(Cli, TrainEvalReplay) {
  const fs::path out = scratch() / "s2a3";
  const CliRun r = hsnn("train --model s2a3 --interval 5 --epochs 6 --lr 3e-3 --data " + desk_data().string() +
                     " --out " + out.string());
  ASSERT_EQ(r.code, 0) << r.output;
  for (const char* f : {"model.json", "weights.bin", "optimizer.bin", "metrics.jsonl", "eval.json", "run.json"})
    EXPECT_TRUE(fs::exists(out / f)) << f;
  const double acc = read_json(out / "eval.json")["accuracy"];
  EXPECT_GT(acc, 1.0 / 3.0) << "held-out accuracy at chance";

  const CliRun ev = hsnn("eval --checkpoint " + out.string() + " --data " + desk_data().string());
  ASSERT_EQ(ev.code, 0) << ev.output;
  EXPECT_EQ(read_json(out / "eval" / "eval_report.json")["accuracy"].get<double>(), acc);

  const fs::path again = scratch() / "s2a3_replay";
  const CliRun rp = hsnn("replay " + (out / "run.json").string() + " --out " + again.string());
  EXPECT_EQ(rp.code, 0) << rp.output;
  ASSERT_TRUE(fs::exists(again / "weights.bin"));
  EXPECT_TRUE(slurp(out / "weights.bin") == slurp(again / "weights.bin")) << "replayed weights differ";
}

TEST(Cli, SimulateHwPassAndForcedSaturation) {
  const fs::path ok = scratch() / "hw_ok";
  const CliRun pass = hsnn("simulate-hw --neurons 300 --timesteps 50 --interval 10 --out " + ok.string());
  EXPECT_EQ(pass.code, 0) << pass.output;
  EXPECT_NE(pass.output.find("PASS"), std::string::npos);
  EXPECT_TRUE(fs::exists(ok / "trace.txt"));

  const CliRun fail = hsnn("simulate-hw --neurons 300 --timesteps 50 --interval 10 --counter-bits 3 --out " +
                        (scratch() / "hw_fail").string());
  EXPECT_EQ(fail.code, 5);
  EXPECT_NE(fail.output.find("FAIL"), std::string::npos);
  EXPECT_NE(fail.output.find("saturat"), std::string::npos) << fail.output;

  const CliRun empty = hsnn("simulate-hw --neurons 0 --out " + (scratch() / "hw_empty").string());
  EXPECT_EQ(empty.code, 0) << empty.output;
  EXPECT_NE(empty.output.find("PASS"), std::string::npos);
}

TEST(Cli, ProfileSweepAndBadProfile) {
  const fs::path out = scratch() / "profile";
  const CliRun r = hsnn("profile --height 16 --width 16 --timesteps 50 --probe 1 --out " + out.string());
  ASSERT_EQ(r.code, 0) << r.output;
  std::istringstream jsonl(slurp(out / "cost_report.jsonl"));
  std::string line;
  std::size_t reports = 0;
  while (std::getline(jsonl, line)) reports += !line.empty();
  EXPECT_EQ(reports, 21u);
  const auto summary = read_json(out / "orderings.json");
  EXPECT_TRUE(summary["round_trip"].get<bool>());
  EXPECT_EQ(summary["orderings"].size(), 5u);

  const fs::path bad = scratch() / "bad_profile.json";
  std::ofstream(bad) << R"({"neuromorphic": {"neurons_per_core": 1024}})";
  EXPECT_EQ(hsnn("profile --models s2a3 --intervals 5 --profiles " + bad.string() + " --out " +
                 (scratch() / "profile_bad").string())
                .code,
            3);
}

}  // namespace
