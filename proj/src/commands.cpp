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

#include "hsnn/commands.hpp"

#include <chrono>
#include <ctime>
#include <fstream>
#include <iomanip>
#include <map>
#include <ostream>
#include <random>
#include <sstream>

#include <json.hpp>

#include "hsnn/accumulator.hpp"
#include "hsnn/checkpoint.hpp"
#include "hsnn/cost_model.hpp"
#include "hsnn/error.hpp"
#include "hsnn/events.hpp"
#include "hsnn/hw_sim.hpp"
#include "hsnn/trainer.hpp"

namespace hsnn::cli {
namespace {

namespace fs = std::filesystem;
using nlohmann::json;
using nlohmann::ordered_json;

constexpr const char* kToolVersion = "hsnn 1.0.0";

std::string utc_now() {
  const auto now = std::chrono::system_clock::now();
  const std::time_t t = std::chrono::system_clock::to_time_t(now);
  std::tm tm{};
  gmtime_r(&t, &tm);
  std::ostringstream os;
  os << std::put_time(&tm, "%Y-%m-%dT%H:%M:%SZ");
  return os.str();
}

void ensure_dir(const fs::path& dir) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec || !fs::is_directory(dir)) throw IoError("cannot create directory " + dir.string());
}

void write_text(const fs::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot write " + path.string());
  out << text;
  if (!out) throw IoError("failed writing " + path.string());
}

std::string read_text(const fs::path& path) {
  const auto bytes = read_file_bytes(path);
  return std::string(bytes.begin(), bytes.end());
}

class RunManifest {
 public:
  RunManifest(std::string command, ordered_json config, std::uint64_t seed)
      : command_(std::move(command)), config_(std::move(config)), seed_(seed), started_(utc_now()) {}

  void artifact(const fs::path& dir, const std::string& name) { artifacts_[name] = sha256_file(dir / name); }

  void write(const fs::path& dir) const {
    ordered_json j;
    j["command"] = command_;
    j["config"] = config_;
    j["seed"] = seed_;
    ordered_json hashes = ordered_json::object();
    for (const auto& [name, hash] : artifacts_) hashes[name] = hash;
    j["artifacts"] = hashes;
    j["started_at"] = started_;
    j["finished_at"] = utc_now();
    j["tool_version"] = kToolVersion;
    write_text(dir / kRunManifestName, j.dump(2) + "\n");
  }

 private:
  std::string command_;
  ordered_json config_;
  std::uint64_t seed_;
  std::string started_;
  std::map<std::string, std::string> artifacts_;
};

// Option structs <-> JSON for manifests and replay.

ordered_json to_json(const GenDataOptions& o) {
  return {{"classes", o.classes}, {"count", o.count},   {"height", o.height}, {"width", o.width},
          {"timesteps", o.timesteps}, {"bin_ms", o.bin_ms}, {"noise", o.noise}, {"seed", o.seed},
          {"out", o.out.string()}};
}

GenDataOptions gen_data_from(const json& j) {
  GenDataOptions o;
  o.classes = j.at("classes");
  o.count = j.at("count");
  o.height = j.at("height");
  o.width = j.at("width");
  o.timesteps = j.at("timesteps");
  o.bin_ms = j.at("bin_ms");
  o.noise = j.at("noise");
  o.seed = j.at("seed");
  o.out = j.at("out").get<std::string>();
  return o;
}

ordered_json to_json(const TrainOptions& o) {
  return {{"model", o.model},
          {"interval", o.interval ? ordered_json(*o.interval) : ordered_json(nullptr)},
          {"data", o.data.string()},
          {"epochs", o.epochs},
          {"batch_size", o.batch_size},
          {"learning_rate", o.learning_rate},
          {"optimizer", o.optimizer},
          {"grad_clip", o.grad_clip},
          {"train_fraction", o.train_fraction},
          {"seed", o.seed},
          {"threads", o.threads},
          {"out", o.out.string()}};
}

TrainOptions train_from(const json& j) {
  TrainOptions o;
  o.model = j.at("model");
  if (j.at("interval").is_null()) o.interval.reset();
  else o.interval = j.at("interval").get<std::size_t>();
  o.data = j.at("data").get<std::string>();
  o.epochs = j.at("epochs");
  o.batch_size = j.at("batch_size");
  o.learning_rate = j.at("learning_rate");
  o.optimizer = j.at("optimizer");
  o.grad_clip = j.at("grad_clip");
  o.train_fraction = j.at("train_fraction");
  o.seed = j.at("seed");
  o.threads = j.at("threads");
  o.out = j.at("out").get<std::string>();
  return o;
}

ordered_json to_json(const EvalOptions& o) {
  return {{"checkpoint", o.checkpoint.string()}, {"data", o.data.string()}, {"split", o.split},
          {"train_fraction", o.train_fraction},  {"seed", o.seed},          {"threads", o.threads},
          {"out", o.out.string()}};
}

EvalOptions eval_from(const json& j) {
  EvalOptions o;
  o.checkpoint = j.at("checkpoint").get<std::string>();
  o.data = j.at("data").get<std::string>();
  o.split = j.at("split");
  o.train_fraction = j.at("train_fraction");
  o.seed = j.at("seed");
  o.threads = j.at("threads");
  o.out = j.at("out").get<std::string>();
  return o;
}

ordered_json to_json(const SimulateHwOptions& o) {
  return {{"checkpoint", o.checkpoint ? ordered_json(o.checkpoint->string()) : ordered_json(nullptr)},
          {"data", o.data.string()},
          {"sample", o.sample},
          {"interval", o.interval},
          {"neurons", o.neurons},
          {"timesteps", o.timesteps},
          {"density", o.density},
          {"counter_bits", o.counter_bits ? ordered_json(*o.counter_bits) : ordered_json(nullptr)},
          {"seed", o.seed},
          {"out", o.out.string()}};
}

SimulateHwOptions simulate_hw_from(const json& j) {
  SimulateHwOptions o;
  if (!j.at("checkpoint").is_null()) o.checkpoint = fs::path(j.at("checkpoint").get<std::string>());
  o.data = j.at("data").get<std::string>();
  o.sample = j.at("sample");
  o.interval = j.at("interval");
  o.neurons = j.at("neurons");
  o.timesteps = j.at("timesteps");
  o.density = j.at("density");
  if (!j.at("counter_bits").is_null()) o.counter_bits = j.at("counter_bits").get<unsigned>();
  o.seed = j.at("seed");
  o.out = j.at("out").get<std::string>();
  return o;
}

ordered_json to_json(const ProfileOptions& o) {
  return {{"checkpoint", o.checkpoint ? ordered_json(o.checkpoint->string()) : ordered_json(nullptr)},
          {"profiles", o.profiles ? ordered_json(o.profiles->string()) : ordered_json(nullptr)},
          {"models", o.models},
          {"intervals", o.intervals},
          {"height", o.height},
          {"width", o.width},
          {"timesteps", o.timesteps},
          {"probe", o.probe},
          {"seed", o.seed},
          {"out", o.out.string()}};
}

ProfileOptions profile_from(const json& j) {
  ProfileOptions o;
  if (!j.at("checkpoint").is_null()) o.checkpoint = fs::path(j.at("checkpoint").get<std::string>());
  if (!j.at("profiles").is_null()) o.profiles = fs::path(j.at("profiles").get<std::string>());
  o.models = j.at("models").get<std::vector<std::string>>();
  o.intervals = j.at("intervals").get<std::vector<std::size_t>>();
  o.height = j.at("height");
  o.width = j.at("width");
  o.timesteps = j.at("timesteps");
  o.probe = j.at("probe");
  o.seed = j.at("seed");
  o.out = j.at("out").get<std::string>();
  return o;
}

struct DatasetInfo {
  std::size_t classes = 0, height = 0, width = 0, timesteps = 0;
  std::uint32_t bin_ms = 10;
};

DatasetInfo read_dataset_info(const fs::path& dir) {
  const fs::path path = dir / "dataset.json";
  if (!fs::exists(path)) throw IoError("dataset description " + path.string() + " not found");
  try {
    const json j = json::parse(read_text(path));
    return {j.at("classes"), j.at("height"), j.at("width"), j.at("timesteps"), j.at("bin_ms")};
  } catch (const json::exception& e) {
    throw FormatError(path.string() + ": " + e.what(), 0);
  }
}

std::vector<Sample> load_samples(const fs::path& dir, const DatasetInfo& info) {
  DatasetOptions opts;
  opts.height = info.height;
  opts.width = info.width;
  opts.bin = {info.bin_ms, info.timesteps, 0};
  return load_dataset(dir, opts);
}

std::size_t resolve_threads(std::size_t requested) { return requested ? requested : threads_from_env(); }

struct LoadedCheckpoint {
  HybridModelSpec spec;
  BuiltModel model;
  ParameterStore params;
};

LoadedCheckpoint load_checkpoint(const fs::path& dir) {
  LoadedCheckpoint c;
  c.spec = spec_from_json(read_text(dir / "model.json"));
  c.model = build(c.spec);
  c.params = read_weights(dir / "weights.bin");
  check_weights_match(c.model, c.params);
  return c;
}

ordered_json eval_json(const EvalReport& r) {
  return {{"accuracy", r.accuracy}, {"mean_loss", r.mean_loss}, {"confusion", r.confusion}, {"loss_curve", r.loss_curve}};
}

}  // namespace

int cmd_gen_data(const GenDataOptions& opts, std::ostream& log) {
  if (opts.classes == 0) throw ConfigError("--classes must be positive");
  if (opts.height == 0 || opts.width == 0 || opts.timesteps == 0) throw ConfigError("--shape entries must be positive");
  if (opts.height > 65535 || opts.width > 65535) throw ConfigError("sensor dimensions must fit in 16 bits");
  ensure_dir(opts.out);
  RunManifest manifest("gen-data", to_json(opts), opts.seed);

  std::vector<Sample> samples;
  if (opts.count > 0) {
    SynthOptions so;
    so.class_count = opts.classes;
    so.samples_per_class = opts.count;
    so.height = opts.height;
    so.width = opts.width;
    so.timesteps = opts.timesteps;
    so.seed = opts.seed;
    so.noise_rate = opts.noise;
    samples = synth_gestures(so);
  }
  std::vector<ManifestEntry> entries;
  for (std::size_t i = 0; i < samples.size(); ++i) {
    std::ostringstream name;
    name << "sample_" << std::setw(5) << std::setfill('0') << i << ".evs";
    write_events(opts.out / name.str(), frames_to_events(samples[i].frames, opts.bin_ms));
    entries.push_back({name.str(), 0, samples[i].label});
    manifest.artifact(opts.out, name.str());
  }
  write_dataset_manifest(opts.out / "manifest.txt", entries);
  ordered_json info = {{"classes", opts.classes},     {"height", opts.height}, {"width", opts.width},
                       {"timesteps", opts.timesteps}, {"bin_ms", opts.bin_ms}, {"samples", samples.size()}};
  write_text(opts.out / "dataset.json", info.dump(2) + "\n");
  manifest.artifact(opts.out, "manifest.txt");
  manifest.artifact(opts.out, "dataset.json");
  manifest.write(opts.out);
  log << "wrote " << samples.size() << " samples (" << opts.classes << " classes) to " << opts.out.string() << "\n";
  return kOk;
}

int cmd_train(const TrainOptions& opts, std::ostream& log) {
  const DatasetInfo info = read_dataset_info(opts.data);
  HybridModelSpec spec = HybridModelSpec::named(opts.model, 1);
  spec.input_shape = {2, info.height, info.width, info.timesteps};
  spec.classes = info.classes;
  TrainOptions resolved = opts;
  if (spec.kind == ModelKind::kSnn) {
    if (opts.interval) log << "warning: model snn has no accumulator; --interval " << *opts.interval << " ignored\n";
    resolved.interval.reset();
    spec.interval = info.timesteps;
  } else {
    if (!opts.interval) throw ConfigError("--interval is required for model " + opts.model);
    const std::size_t I = *opts.interval;
    if (I == 0 || I > info.timesteps || info.timesteps % I != 0) {
      throw ConfigError("--interval " + std::to_string(I) + " must divide T=" + std::to_string(info.timesteps));
    }
    spec.interval = I;
  }
  if (!(opts.train_fraction > 0.0 && opts.train_fraction <= 1.0)) throw ConfigError("--train-fraction must be in (0, 1]");

  TrainConfig cfg;
  cfg.epochs = opts.epochs;
  cfg.batch_size = opts.batch_size;
  cfg.learning_rate = opts.learning_rate;
  cfg.optimizer = opts.optimizer;
  cfg.grad_clip = opts.grad_clip;
  cfg.seed = opts.seed;
  cfg.threads = resolve_threads(opts.threads);
  cfg.validate();

  const BuiltModel model = build(spec);
  const std::vector<Sample> all = load_samples(opts.data, info);
  const Split split = stratified_split(all, info.classes, opts.train_fraction, opts.seed);
  ensure_dir(opts.out);
  RunManifest manifest("train", to_json(resolved), opts.seed);

  ParameterStore params = init_parameters(model, opts.seed);
  Optimizer optimizer(cfg);
  write_text(opts.out / "model.json", spec_to_json(spec));
  std::ofstream metrics(opts.out / "metrics.jsonl", std::ios::trunc);
  if (!metrics) throw IoError("cannot write metrics to " + opts.out.string());
  log << "training " << spec.name() << " (" << model.parameter_count << " parameters) on " << split.train.size()
      << " samples, testing on " << split.test.size() << "\n";

  auto save = [&] {
    write_weights(opts.out / "weights.bin", params);
    write_weights(opts.out / "optimizer.bin", optimizer.state(params));
  };
  TrainResult result;
  try {
    result = train(model, params, optimizer, split.train, cfg, split.test.empty() ? nullptr : &split.test,
                   [&](const EpochRecord& r, const ParameterStore&) {
                     ordered_json j = {{"epoch", r.epoch}, {"loss", r.loss}, {"accuracy", r.accuracy}};
                     if (r.eval_accuracy) j["test_accuracy"] = *r.eval_accuracy;
                     metrics << j.dump() << "\n" << std::flush;
                     log << "epoch " << r.epoch << " loss " << r.loss << " train acc " << r.accuracy;
                     if (r.eval_accuracy) log << " test acc " << *r.eval_accuracy;
                     log << "\n";
                   });
  } catch (const DivergenceError&) {
    // Parameters are still the last finite ones: the check runs before the update.
    save();
    throw;
  }
  metrics.close();
  save();
  write_text(opts.out / "eval.json", eval_json(result.report).dump(2) + "\n");
  for (const char* name : {"model.json", "weights.bin", "optimizer.bin", "metrics.jsonl", "eval.json"}) {
    manifest.artifact(opts.out, name);
  }
  manifest.write(opts.out);
  log << "final accuracy " << result.report.accuracy << " written to " << opts.out.string() << "\n";
  return kOk;
}

int cmd_eval(const EvalOptions& opts, std::ostream& log) {
  if (opts.split != "test" && opts.split != "train" && opts.split != "all") {
    throw ConfigError("--split must be test, train or all");
  }
  const LoadedCheckpoint ckpt = load_checkpoint(opts.checkpoint);
  const DatasetInfo info = read_dataset_info(opts.data);
  const auto& in = ckpt.spec.input_shape;
  if (in[1] != info.height || in[2] != info.width || in[3] != info.timesteps || ckpt.spec.classes != info.classes) {
    throw ConfigError("dataset shape does not match the checkpoint's model");
  }
  const std::vector<Sample> all = load_samples(opts.data, info);
  std::vector<Sample> data;
  if (opts.split == "all") {
    data = all;
  } else {
    Split split = stratified_split(all, info.classes, opts.train_fraction, opts.seed);
    data = opts.split == "test" ? std::move(split.test) : std::move(split.train);
  }
  const EvalReport report = evaluate(ckpt.model, ckpt.params, data, resolve_threads(opts.threads));
  const fs::path out = opts.out.empty() ? opts.checkpoint / "eval" : opts.out;
  ensure_dir(out);
  RunManifest manifest("eval", to_json(opts), opts.seed);
  write_text(out / "eval_report.json", eval_json(report).dump(2) + "\n");
  manifest.artifact(out, "eval_report.json");
  manifest.write(out);
  log << "accuracy " << report.accuracy << " on " << data.size() << " samples (" << opts.split << ")\n";
  for (std::size_t c = 0; c < report.confusion.size(); ++c) {
    log << "  class " << c << ":";
    for (auto v : report.confusion[c]) log << ' ' << v;
    log << "\n";
  }
  return kOk;
}

int cmd_simulate_hw(const SimulateHwOptions& opts, std::ostream& log) {
  if (opts.interval == 0) throw ConfigError("--interval must be positive");
  ensure_dir(opts.out);
  RunManifest manifest("simulate-hw", to_json(opts), opts.seed);

  SpikeTensor layer;
  std::size_t interval = opts.interval;
  if (opts.checkpoint) {
    const LoadedCheckpoint ckpt = load_checkpoint(*opts.checkpoint);
    if (!ckpt.model.accumulator_index) throw ConfigError("model snn has no accumulator to simulate");
    interval = ckpt.spec.interval;
    const DatasetInfo info = read_dataset_info(opts.data);
    const std::vector<Sample> all = load_samples(opts.data, info);
    if (opts.sample >= all.size()) throw ConfigError("--sample out of range");
    layer = accumulator_input(ckpt.model, ckpt.params, all[opts.sample].frames);
  } else if (opts.neurons > 0) {
    if (opts.timesteps == 0) throw ConfigError("--timesteps must be positive");
    if (opts.timesteps % interval != 0) {
      throw ConfigError("--interval " + std::to_string(interval) + " must divide T=" + std::to_string(opts.timesteps));
    }
    std::mt19937_64 rng(opts.seed);
    std::bernoulli_distribution fire(opts.density);
    std::vector<double> bits(opts.neurons * opts.timesteps);
    for (auto& b : bits) b = fire(rng) ? 1.0 : 0.0;
    layer = SpikeTensor(opts.neurons, 1, 1, opts.timesteps, std::move(bits));
  }

  const unsigned sized = counter_bits_for(interval);
  const unsigned bits = opts.counter_bits.value_or(sized);
  const fs::path trace_path = opts.out / "trace.txt";
  std::ofstream trace(trace_path, std::ios::trunc);
  if (!trace) throw IoError("cannot write " + trace_path.string());

  bool pass = true;
  ordered_json verdict;
  if (layer.size() == 0) {
    trace << "# hsnn counter-bank trace\n# empty layer\n";
    verdict = {{"neurons", 0}, {"pass", true}};
    log << "empty layer: nothing to simulate\n";
  } else {
    RunOptions ro;
    ro.bits = bits;
    ro.trace = &trace;
    const LayerRun run = run_layer(layer, interval, ro);
    trace.flush();
    AccumulatorConfig cfg{interval, layer.timesteps(), false};
    const Tensor software = accumulate_forward(layer, cfg);
    const std::vector<double> hardware = run_as_accumulated(run);
    std::size_t mismatches = 0;
    const auto sw = software.data();
    for (std::size_t i = 0; i < hardware.size(); ++i) mismatches += hardware[i] != sw[i];
    pass = mismatches == 0 && run.saturation_events == 0;
    const std::size_t M = run.neurons;
    const PartitionPlan plan = make_plan(M);
    std::ifstream reread(trace_path);
    const TraceCheck tc = verify_trace(reread);
    verdict = {{"neurons", M},
               {"timesteps", layer.timesteps()},
               {"interval", interval},
               {"counter_bits", bits},
               {"sized_bits", sized},
               {"partitions", plan.partitions},
               {"padded_lanes", plan.padded_lanes()},
               {"cycles", run.cycles},
               {"latch_events", run.latch_events},
               {"mismatches", mismatches},
               {"saturation_events", run.saturation_events},
               {"trace_replay_ok", tc.ok},
               {"pass", pass}};
    log << "neurons " << M << ", partitions " << plan.partitions << ", T " << layer.timesteps() << ", I " << interval
        << ", k " << bits << " (sized " << sized << ")\n";
    if (run.saturation_events > 0) {
      const auto& first = run.saturations.front();
      log << "saturation: " << run.saturation_events << " increments lost; first at tick " << first.tick
          << ", partition " << first.partition << ", lane " << first.lane << " (k=" << bits << " holds at most "
          << ((1u << bits) - 1) << ", I=" << interval << " needs k=" << sized << ")\n";
      ordered_json sat = ordered_json::array();
      for (const auto& s : run.saturations) sat.push_back({{"tick", s.tick}, {"partition", s.partition}, {"lane", s.lane}});
      verdict["saturations"] = sat;
    }
    if (!tc.ok) log << "trace replay failed: " << tc.detail << "\n";
    log << mismatches << " mismatching counts against the software accumulator\n";
  }
  trace.close();
  write_text(opts.out / "verdict.json", verdict.dump(2) + "\n");
  manifest.artifact(opts.out, "trace.txt");
  manifest.artifact(opts.out, "verdict.json");
  manifest.write(opts.out);
  log << (pass ? "PASS" : "FAIL") << "\n";
  return pass ? kOk : kVerification;
}

int cmd_profile(const ProfileOptions& opts, std::ostream& log) {
  ProfileSet profiles;
  if (opts.profiles) {
    try {
      profiles = load_profiles(*opts.profiles);
    } catch (const ConfigError& e) {
      throw IoError(opts.profiles->string() + ": " + e.what());
    }
  } else {
    profiles = default_profiles();
  }
  if (opts.probe == 0) throw ConfigError("--probe must be positive");
  ensure_dir(opts.out);
  RunManifest manifest("profile", to_json(opts), opts.seed);

  std::vector<CostReport> reports;
  auto probe_for = [&](std::size_t classes, std::size_t height, std::size_t width, std::size_t T) {
    SynthOptions so;
    so.class_count = classes;
    so.samples_per_class = (opts.probe + classes - 1) / classes;
    so.height = height;
    so.width = width;
    so.timesteps = T;
    so.seed = opts.seed;
    std::vector<SpikeTensor> probe;
    for (const auto& s : synth_gestures(so)) {
      if (probe.size() < opts.probe) probe.push_back(s.frames);
    }
    return probe;
  };

  if (opts.checkpoint) {
    const LoadedCheckpoint ckpt = load_checkpoint(*opts.checkpoint);
    const auto& in = ckpt.spec.input_shape;
    reports.push_back(estimate(ckpt.model, ckpt.params, probe_for(ckpt.spec.classes, in[1], in[2], in[3]), profiles));
  } else {
    const std::vector<std::string> models = opts.models.empty() ? model_names() : opts.models;
    const auto probe = probe_for(3, opts.height, opts.width, opts.timesteps);
    for (const auto& name : models) {
      for (std::size_t interval : opts.intervals) {
        HybridModelSpec spec = HybridModelSpec::named(name, interval);
        spec.input_shape = {2, opts.height, opts.width, opts.timesteps};
        const BuiltModel model = build(spec);
        reports.push_back(estimate(model, init_parameters(model, opts.seed), probe, profiles));
      }
    }
  }

  emit_reports(reports, opts.out / "cost_report");
  const std::vector<CostReport> reloaded = load_reports(opts.out / "cost_report.jsonl");
  bool consistent = reloaded.size() == reports.size();
  double worst = 0.0;
  for (std::size_t i = 0; consistent && i < reports.size(); ++i) {
    consistent = reloaded[i] == reports[i];
    worst = std::max(worst, max_consistency_error(reloaded[i]));
  }
  consistent = consistent && worst <= 1e-9;

  const auto checks = check_orderings(reports);
  ordered_json summary = {{"reports", reports.size()}, {"round_trip", consistent}, {"worst_consistency_gap", worst}};
  ordered_json checks_json = ordered_json::array();
  for (const auto& c : checks) {
    checks_json.push_back({{"check", c.name}, {"ok", c.ok}, {"skipped", c.skipped}, {"detail", c.detail}});
  }
  summary["orderings"] = checks_json;
  write_text(opts.out / "orderings.json", summary.dump(2) + "\n");
  for (const char* name : {"cost_report.txt", "cost_report.jsonl", "orderings.json"}) manifest.artifact(opts.out, name);
  manifest.write(opts.out);

  log << report_table(reports);
  log << reports.size() << " reports; reload " << (consistent ? "consistent" : "INCONSISTENT") << "\n";
  for (const auto& c : checks) {
    log << (c.skipped ? "  skip  " : c.ok ? "  ok    " : "  FAIL  ") << c.name << " (" << c.detail << ")\n";
  }
  return consistent ? kOk : kVerification;
}

ReplayResult replay(const fs::path& manifest_path, const std::optional<fs::path>& out, std::ostream& log) {
  json m;
  try {
    m = json::parse(read_text(manifest_path));
  } catch (const json::exception& e) {
    throw FormatError(manifest_path.string() + ": " + e.what(), 0);
  }
  const std::string command = m.at("command");
  json config = m.at("config");
  const fs::path original_out = config.contains("out") && !config["out"].get<std::string>().empty()
                                    ? fs::path(config["out"].get<std::string>())
                                    : manifest_path.parent_path();
  fs::path target = out.value_or(original_out);
  if (out) config["out"] = out->string();

  ReplayResult result;
  log << "replaying " << command << " into " << target.string() << "\n";
  if (command == "gen-data") {
    result.exit_code = cmd_gen_data(gen_data_from(config), log);
  } else if (command == "train") {
    result.exit_code = cmd_train(train_from(config), log);
  } else if (command == "eval") {
    EvalOptions o = eval_from(config);
    if (o.out.empty()) o.out = target = manifest_path.parent_path();
    result.exit_code = cmd_eval(o, log);
  } else if (command == "simulate-hw") {
    result.exit_code = cmd_simulate_hw(simulate_hw_from(config), log);
  } else if (command == "profile") {
    result.exit_code = cmd_profile(profile_from(config), log);
  } else {
    throw ConfigError("manifest names unknown command '" + command + "'");
  }

  for (const auto& [name, hash] : m.at("artifacts").items()) {
    ++result.compared;
    const fs::path p = target / name;
    if (!fs::exists(p) || sha256_file(p) != hash.get<std::string>()) result.mismatched.push_back(name);
  }
  log << result.compared - result.mismatched.size() << "/" << result.compared << " artifacts reproduced\n";
  for (const auto& n : result.mismatched) log << "  differs: " << n << "\n";
  if (result.exit_code == kOk && !result.mismatched.empty()) result.exit_code = kVerification;
  return result;
}

int exit_code_for_current_exception(std::ostream& err) {
  try {
    throw;
  } catch (const DivergenceError& e) {
    err << "error: " << e.what() << "\n";
    return kNumeric;
  } catch (const NumericError& e) {
    err << "error: " << e.what() << "\n";
    return kNumeric;
  } catch (const IoError& e) {
    err << "error: " << e.what() << "\n";
    return kIo;
  } catch (const FormatError& e) {
    err << "error: " << e.what() << "\n";
    return kIo;
  } catch (const ConfigError& e) {
    err << "error: " << e.what() << "\n";
    return kUsage;
  } catch (const DimensionError& e) {
    err << "error: " << e.what() << "\n";
    return kUsage;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return kIo;
  }
}

}  // namespace hsnn::cli
