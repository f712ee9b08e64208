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

#include "hsnn/checkpoint.hpp"

#include <bit>
#include <cstring>
#include <fstream>

#include <json.hpp>
#include <openssl/evp.h>

#include "hsnn/error.hpp"

namespace hsnn {
namespace {

using nlohmann::json;
using nlohmann::ordered_json;

static_assert(std::endian::native == std::endian::little, "weight container assumes a little-endian host");

void put_u64(std::vector<unsigned char>& out, std::uint64_t v) {
  for (int i = 0; i < 8; ++i) out.push_back(static_cast<unsigned char>(v >> (8 * i)));
}

std::uint64_t get_u64(const unsigned char* p) {
  std::uint64_t v = 0;
  for (int i = 0; i < 8; ++i) v |= std::uint64_t{p[i]} << (8 * i);
  return v;
}

const char* pool_mode_name(SpikePoolMode m) { return m == SpikePoolMode::kOr ? "or" : "sum_threshold"; }

}  // namespace

std::vector<unsigned char> serialize_weights(const ParameterStore& params) {
  ordered_json manifest = ordered_json::array();
  std::size_t offset = 0;
  for (const auto& e : params.entries()) {
    manifest.push_back({{"name", e.name}, {"shape", e.value.shape()}, {"offset", offset}});
    offset += e.value.numel();
  }
  const std::string text = manifest.dump();
  std::vector<unsigned char> out(kWeightsMagic, kWeightsMagic + 8);
  put_u64(out, text.size());
  out.insert(out.end(), text.begin(), text.end());
  for (const auto& e : params.entries()) {
    for (double v : e.value.data()) {
      const auto bits = std::bit_cast<std::uint64_t>(v);
      put_u64(out, bits);
    }
  }
  return out;
}

ParameterStore parse_weights(const std::vector<unsigned char>& bytes) {
  if (bytes.size() < 16) throw FormatError("weight file shorter than its header", bytes.size());
  if (std::memcmp(bytes.data(), kWeightsMagic, 8) != 0) throw FormatError("bad weight file magic", 0);
  const std::uint64_t len = get_u64(bytes.data() + 8);
  if (len > bytes.size() - 16) throw FormatError("weight manifest runs past end of file", 16);
  json manifest;
  try {
    manifest = json::parse(bytes.begin() + 16, bytes.begin() + 16 + static_cast<std::ptrdiff_t>(len));
  } catch (const json::exception& e) {
    throw FormatError(std::string("bad weight manifest: ") + e.what(), 16);
  }
  const std::size_t payload = 16 + len;
  const std::size_t available = (bytes.size() - payload) / 8;
  if ((bytes.size() - payload) % 8 != 0) throw FormatError("weight payload is not a whole number of f64", payload);
  ParameterStore store;
  std::size_t expected_offset = 0;
  for (const auto& entry : manifest) {
    const std::string name = entry.at("name").get<std::string>();
    const Shape shape = entry.at("shape").get<Shape>();
    const std::size_t offset = entry.at("offset").get<std::size_t>();
    const std::size_t n = shape_numel(shape);
    if (offset != expected_offset) throw FormatError("tensor " + name + " has a non-contiguous offset", payload);
    if (offset + n > available) throw FormatError("tensor " + name + " runs past end of payload", payload + offset * 8);
    std::vector<double> values(n);
    for (std::size_t i = 0; i < n; ++i) values[i] = std::bit_cast<double>(get_u64(bytes.data() + payload + (offset + i) * 8));
    store.add(name, Tensor::from(shape, std::move(values)));
    expected_offset = offset + n;
  }
  if (expected_offset != available) throw FormatError("trailing bytes after weight payload", payload + expected_offset * 8);
  return store;
}

void write_weights(const std::filesystem::path& path, const ParameterStore& params) {
  write_file_bytes(path, serialize_weights(params));
}

ParameterStore read_weights(const std::filesystem::path& path) { return parse_weights(read_file_bytes(path)); }

std::string spec_to_json(const HybridModelSpec& spec) {
  ordered_json j;
  j["model"] = spec.name();
  j["interval"] = spec.interval;
  j["input_shape"] = spec.input_shape;
  j["channel_schedule"] = spec.channel_schedule;
  j["kernel_size"] = spec.kernel_size;
  j["pool_after"] = spec.pool_after;
  j["dense_widths"] = spec.dense_widths;
  j["classes"] = spec.classes;
  j["lif"] = {{"current_decay", spec.lif.current_decay},
              {"voltage_decay", spec.lif.voltage_decay},
              {"threshold", spec.lif.threshold},
              {"surrogate_width", spec.lif.surrogate_width}};
  j["spike_pool"] = {{"mode", pool_mode_name(spec.spike_pool.mode)}, {"sum_threshold", spec.spike_pool.sum_threshold}};
  return j.dump(2) + "\n";
}

HybridModelSpec spec_from_json(const std::string& text) {
  try {
    const json j = json::parse(text);
    HybridModelSpec spec = HybridModelSpec::named(j.at("model").get<std::string>(), j.at("interval").get<std::size_t>());
    // Only model and interval are mandatory; the rest default to the canonical schedule.
    if (j.contains("input_shape")) spec.input_shape = j["input_shape"].get<std::array<std::size_t, 4>>();
    if (j.contains("channel_schedule")) spec.channel_schedule = j["channel_schedule"].get<std::vector<std::size_t>>();
    if (j.contains("kernel_size")) spec.kernel_size = j["kernel_size"].get<std::size_t>();
    if (j.contains("pool_after")) spec.pool_after = j["pool_after"].get<std::vector<bool>>();
    if (j.contains("dense_widths")) spec.dense_widths = j["dense_widths"].get<std::vector<std::size_t>>();
    if (j.contains("classes")) spec.classes = j["classes"].get<std::size_t>();
    if (j.contains("lif")) {
      const auto& l = j["lif"];
      spec.lif.current_decay = l.value("current_decay", spec.lif.current_decay);
      spec.lif.voltage_decay = l.value("voltage_decay", spec.lif.voltage_decay);
      spec.lif.threshold = l.value("threshold", spec.lif.threshold);
      spec.lif.surrogate_width = l.value("surrogate_width", spec.lif.surrogate_width);
    }
    if (j.contains("spike_pool")) {
      const auto& p = j["spike_pool"];
      const std::string mode = p.value("mode", std::string("or"));
      if (mode == "or") spec.spike_pool.mode = SpikePoolMode::kOr;
      else if (mode == "sum_threshold") spec.spike_pool.mode = SpikePoolMode::kSumThreshold;
      else throw ConfigError("unknown spike pool mode '" + mode + "'");
      spec.spike_pool.sum_threshold = p.value("sum_threshold", spec.spike_pool.sum_threshold);
    }
    return spec;
  } catch (const json::exception& e) {
    throw ConfigError(std::string("bad model spec: ") + e.what());
  }
}

void check_weights_match(const BuiltModel& model, const ParameterStore& params) {
  const ParameterStore ref = init_parameters(model, 0);
  if (ref.entries().size() != params.entries().size()) {
    throw ConfigError("weight file holds " + std::to_string(params.entries().size()) + " tensors, model " +
                      model.spec.name() + " needs " + std::to_string(ref.entries().size()));
  }
  for (std::size_t i = 0; i < ref.entries().size(); ++i) {
    const auto& a = ref.entries()[i];
    const auto& b = params.entries()[i];
    if (a.name != b.name || a.value.shape() != b.value.shape()) {
      throw ConfigError("weight tensor " + b.name + " " + shape_str(b.value.shape()) + " does not match " + a.name +
                        " " + shape_str(a.value.shape()));
    }
  }
}

std::vector<unsigned char> read_file_bytes(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path.string());
  return std::vector<unsigned char>(std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>());
}

void write_file_bytes(const std::filesystem::path& path, const std::vector<unsigned char>& bytes) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot write " + path.string());
  out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
  if (!out) throw IoError("failed writing " + path.string());
}

std::string sha256_hex(const std::vector<unsigned char>& bytes) {
  unsigned char digest[EVP_MAX_MD_SIZE];
  unsigned int len = 0;
  if (EVP_Digest(bytes.data(), bytes.size(), digest, &len, EVP_sha256(), nullptr) != 1) {
    throw Error("SHA-256 computation failed");
  }
  static const char* hex = "0123456789abcdef";
  std::string out;
  for (unsigned i = 0; i < len; ++i) {
    out.push_back(hex[digest[i] >> 4]);
    out.push_back(hex[digest[i] & 15]);
  }
  return out;
}

std::string sha256_file(const std::filesystem::path& path) { return sha256_hex(read_file_bytes(path)); }

}  // namespace hsnn
