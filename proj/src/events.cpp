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

#include "hsnn/events.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iterator>
#include <random>
#include <sstream>

#include "hsnn/error.hpp"

namespace hsnn {
namespace {

template <typename T>
void put_le(std::vector<unsigned char>& out, T value) {
  for (std::size_t i = 0; i < sizeof(T); ++i) out.push_back(static_cast<unsigned char>((value >> (8 * i)) & 0xff));
}

template <typename T>
T get_le(const std::vector<unsigned char>& in, std::size_t offset) {
  T value = 0;
  for (std::size_t i = 0; i < sizeof(T); ++i) value |= static_cast<T>(static_cast<T>(in[offset + i]) << (8 * i));
  return value;
}

std::vector<unsigned char> read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path.string());
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

}  // namespace

std::vector<unsigned char> serialize_events(const EventStream& stream) {
  std::vector<unsigned char> out;
  out.reserve(kEvsHeaderBytes + stream.events.size() * kEvsRecordBytes);
  out.insert(out.end(), std::begin(kEvsMagic), std::end(kEvsMagic));
  put_le<std::uint16_t>(out, stream.width);
  put_le<std::uint16_t>(out, stream.height);
  put_le<std::uint64_t>(out, stream.events.size());
  for (const auto& e : stream.events) {
    put_le<std::uint32_t>(out, e.t_us);
    put_le<std::uint16_t>(out, e.x);
    put_le<std::uint16_t>(out, e.y);
    out.push_back(e.polarity);
  }
  return out;
}

void write_events(const std::filesystem::path& path, const EventStream& stream) {
  const auto bytes = serialize_events(stream);
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot write " + path.string());
  out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
  if (!out) throw IoError("short write to " + path.string());
}

EventStream parse_events(const std::vector<unsigned char>& bytes, const LoadOptions& opts) {
  if (bytes.size() < kEvsHeaderBytes) throw FormatError("truncated EVS1 header", bytes.size());
  if (!std::equal(std::begin(kEvsMagic), std::end(kEvsMagic), bytes.begin())) {
    throw FormatError("bad magic, expected EVS1", 0);
  }
  EventStream stream;
  stream.width = get_le<std::uint16_t>(bytes, 4);
  stream.height = get_le<std::uint16_t>(bytes, 6);
  const auto count = get_le<std::uint64_t>(bytes, 8);
  const std::size_t payload = bytes.size() - kEvsHeaderBytes;
  if (count > payload / kEvsRecordBytes) {
    throw FormatError("header declares " + std::to_string(count) + " events but only " +
                          std::to_string(payload / kEvsRecordBytes) + " complete records follow",
                      kEvsHeaderBytes + (payload / kEvsRecordBytes) * kEvsRecordBytes);
  }
  if (payload != count * kEvsRecordBytes) {
    throw FormatError("trailing bytes after " + std::to_string(count) + " events",
                      kEvsHeaderBytes + count * kEvsRecordBytes);
  }
  stream.events.resize(count);
  bool needs_sort = false;
  std::uint32_t latest = 0;
  for (std::size_t i = 0; i < count; ++i) {
    const std::size_t off = kEvsHeaderBytes + i * kEvsRecordBytes;
    Event& e = stream.events[i];
    e.t_us = get_le<std::uint32_t>(bytes, off);
    e.x = get_le<std::uint16_t>(bytes, off + 4);
    e.y = get_le<std::uint16_t>(bytes, off + 6);
    e.polarity = bytes[off + 8];
    if (e.polarity > 1) throw FormatError("polarity must be 0 or 1", off + 8);
    if (e.t_us < latest) {
      if (latest - e.t_us > opts.reorder_tolerance_us) {
        throw FormatError("event " + std::to_string(i) + " goes back " + std::to_string(latest - e.t_us) +
                              " us in time",
                          off);
      }
      needs_sort = true;
    }
    latest = std::max(latest, e.t_us);
  }
  if (needs_sort) {
    std::stable_sort(stream.events.begin(), stream.events.end(),
                     [](const Event& a, const Event& b) { return a.t_us < b.t_us; });
  }
  return stream;
}

EventStream load_events(const std::filesystem::path& path, const LoadOptions& opts) {
  return parse_events(read_file(path), opts);
}

BinResult bin_events(const EventStream& stream, std::size_t width, std::size_t height, const BinOptions& opts) {
  if (opts.bin_ms == 0 || opts.frames_per_sample == 0) throw ConfigError("bin size and frames per sample must be positive");
  const std::uint64_t bin_us = static_cast<std::uint64_t>(opts.bin_ms) * 1000;
  const std::size_t steps = opts.frames_per_sample;
  std::size_t total_frames = opts.total_frames;
  if (total_frames == 0 && !stream.events.empty()) {
    std::uint32_t last = 0;
    for (const auto& e : stream.events) last = std::max(last, e.t_us);
    total_frames = static_cast<std::size_t>(last / bin_us) + 1;
  }
  BinResult result;
  const std::size_t windows = total_frames / steps;
  result.windows.assign(windows, SpikeTensor(2, height, width, steps));
  for (const auto& e : stream.events) {
    if (e.x >= width || e.y >= height) {
      ++result.rejected_events;
      continue;
    }
    const std::size_t frame = static_cast<std::size_t>(e.t_us / bin_us);
    const std::size_t w = frame / steps;
    if (w >= windows) continue;
    result.windows[w].set(e.polarity ? 1 : 0, e.y, e.x, frame % steps, true);
  }
  return result;
}

EventStream frames_to_events(const SpikeTensor& frames, std::uint32_t bin_ms) {
  if (frames.channels() != 2) throw DimensionError("event frames need 2 polarity channels, got " + shape_str(frames.shape()));
  EventStream stream;
  stream.width = static_cast<std::uint16_t>(frames.width());
  stream.height = static_cast<std::uint16_t>(frames.height());
  const std::uint32_t bin_us = bin_ms * 1000;
  for (std::size_t t = 0; t < frames.timesteps(); ++t) {
    for (std::size_t p = 0; p < 2; ++p) {
      for (std::size_t y = 0; y < frames.height(); ++y) {
        for (std::size_t x = 0; x < frames.width(); ++x) {
          if (frames.at(p, y, x, t) != 0.0) {
            stream.events.push_back({static_cast<std::uint32_t>(t) * bin_us, static_cast<std::uint16_t>(x),
                                     static_cast<std::uint16_t>(y), static_cast<std::uint8_t>(p)});
          }
        }
      }
    }
  }
  return stream;
}

std::size_t reversal_partner(std::size_t label, std::size_t class_count) {
  const std::size_t partner = label ^ 1u;
  return partner < class_count ? partner : label;
}

namespace {

double unit_uniform(std::mt19937_64& rng) { return static_cast<double>(rng() >> 11) * 0x1.0p-53; }

// Bar geometry for one base sample along one motion axis.
struct Bar {
  int axis;        // 0: x, 1: y, 2: diagonal (x+y), 3: anti-diagonal (x-y)
  double start;    // leading coordinate at t = 0
  double speed;    // coordinate units per frame
  double width;    // thickness along the motion coordinate
  double lo, hi;   // extent along the perpendicular coordinate

  bool covers(double x, double y, double t) const {
    double along = 0.0, across = 0.0;
    switch (axis) {
      case 0: along = x; across = y; break;
      case 1: along = y; across = x; break;
      case 2: along = x + y; across = x - y; break;
      default: along = x - y; across = x + y; break;
    }
    const double pos = start + speed * t;
    return along >= pos && along < pos + width && across >= lo && across < hi;
  }
};

SpikeTensor render_base(const Bar& bar, const SynthOptions& o, std::mt19937_64& rng) {
  SpikeTensor frames(2, o.height, o.width, o.timesteps);
  for (std::size_t t = 0; t < o.timesteps; ++t) {
    for (std::size_t y = 0; y < o.height; ++y) {
      for (std::size_t x = 0; x < o.width; ++x) {
        const double cx = static_cast<double>(x) + 0.5, cy = static_cast<double>(y) + 0.5;
        const bool now = bar.covers(cx, cy, static_cast<double>(t));
        const bool before = bar.covers(cx, cy, static_cast<double>(t) - 1.0);
        if (now && !before) frames.set(1, y, x, t, true);   // brightening edge
        if (!now && before) frames.set(0, y, x, t, true);   // darkening edge
      }
    }
  }
  if (o.noise_rate > 0.0) {
    for (std::size_t p = 0; p < 2; ++p)
      for (std::size_t y = 0; y < o.height; ++y)
        for (std::size_t x = 0; x < o.width; ++x)
          for (std::size_t t = 0; t < o.timesteps; ++t)
            if (unit_uniform(rng) < o.noise_rate) frames.set(p, y, x, t, true);
  }
  return frames;
}

SpikeTensor time_reversed(const SpikeTensor& s) {
  SpikeTensor out(s.channels(), s.height(), s.width(), s.timesteps());
  const std::size_t steps = s.timesteps();
  for (std::size_t c = 0; c < s.channels(); ++c)
    for (std::size_t y = 0; y < s.height(); ++y)
      for (std::size_t x = 0; x < s.width(); ++x)
        for (std::size_t t = 0; t < steps; ++t) out.set(c, y, x, t, s.at(c, y, x, steps - 1 - t) != 0.0);
  return out;
}

Bar random_bar(int axis, double speed_scale, const SynthOptions& o, std::mt19937_64& rng) {
  const double h = static_cast<double>(o.height), w = static_cast<double>(o.width);
  const double steps = static_cast<double>(o.timesteps);
  double along_min = 0.0, along_max = w, across_min = 0.0, across_max = h;
  switch (axis) {
    case 1: along_max = h; across_max = w; break;
    case 2: along_max = w + h; across_min = -h; across_max = w; break;
    case 3: along_min = -h; along_max = w; across_max = w + h; break;
    default: break;
  }
  const double span = along_max - along_min;
  Bar bar{};
  bar.axis = axis;
  bar.width = 3.0 + std::floor(unit_uniform(rng) * 4.0);
  // Cross most of the field of view over the sample.
  bar.speed = speed_scale * (0.6 + 0.4 * unit_uniform(rng)) * span / steps;
  const double travel = bar.speed * steps;
  const double slack = std::max(0.0, span - travel);
  bar.start = along_min - bar.width + unit_uniform(rng) * (slack + bar.width);
  const double across_span = across_max - across_min;
  const double length = across_span * (0.5 + 0.5 * unit_uniform(rng));
  bar.lo = across_min + unit_uniform(rng) * (across_span - length);
  bar.hi = bar.lo + length;
  return bar;
}

}  // namespace

std::vector<Sample> synth_gestures(const SynthOptions& opts) {
  if (opts.class_count < 2) throw ConfigError("synthetic gestures need at least 2 classes");
  if (opts.height == 0 || opts.width == 0 || opts.timesteps == 0) throw ConfigError("synthetic shape must be positive");
  std::vector<Sample> out;
  out.reserve(opts.class_count * opts.samples_per_class);
  std::vector<std::vector<SpikeTensor>> bases;
  for (std::size_t label = 0; label < opts.class_count; ++label) {
    const std::size_t pair = label / 2;
    if (label % 2 == 0) {
      std::mt19937_64 rng(opts.seed * 0x9e3779b97f4a7c15ull + pair);
      const int axis = static_cast<int>(pair % 4);
      const double speed_scale = 1.0 + static_cast<double>(pair / 4);
      std::vector<SpikeTensor> base;
      base.reserve(opts.samples_per_class);
      for (std::size_t i = 0; i < opts.samples_per_class; ++i) {
        const Bar bar = random_bar(axis, speed_scale, opts, rng);
        base.push_back(render_base(bar, opts, rng));
      }
      for (const auto& frames : base) out.push_back({frames, label});
      bases.push_back(std::move(base));
    } else {
      for (const auto& frames : bases[pair]) out.push_back({time_reversed(frames), label});
    }
  }
  return out;
}

void write_dataset_manifest(const std::filesystem::path& path, const std::vector<ManifestEntry>& entries) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw IoError("cannot write " + path.string());
  out << "# hsnn dataset: file window label\n";
  for (const auto& e : entries) out << e.file << ' ' << e.window << ' ' << e.label << '\n';
  if (!out) throw IoError("short write to " + path.string());
}

std::vector<ManifestEntry> read_dataset_manifest(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open " + path.string());
  std::vector<ManifestEntry> entries;
  std::string line;
  std::size_t offset = 0;
  while (std::getline(in, line)) {
    const std::size_t line_start = offset;
    offset += line.size() + 1;
    if (line.empty() || line[0] == '#') continue;
    std::istringstream fields(line);
    ManifestEntry e;
    if (!(fields >> e.file >> e.window >> e.label)) throw FormatError("malformed manifest line '" + line + "'", line_start);
    entries.push_back(std::move(e));
  }
  return entries;
}

std::vector<Sample> load_dataset(const std::filesystem::path& dir, const DatasetOptions& opts) {
  const auto entries = read_dataset_manifest(dir / "manifest.txt");
  std::vector<Sample> samples;
  samples.reserve(entries.size());
  for (const auto& e : entries) {
    const EventStream stream = load_events(dir / e.file);
    BinOptions bin = opts.bin;
    bin.total_frames = std::max(bin.total_frames, (e.window + 1) * bin.frames_per_sample);
    BinResult binned = bin_events(stream, opts.width, opts.height, bin);
    if (binned.rejected_events != 0) {
      throw FormatError(e.file + ": " + std::to_string(binned.rejected_events) + " events outside the " +
                            std::to_string(opts.width) + "x" + std::to_string(opts.height) + " sensor",
                        0);
    }
    samples.push_back({std::move(binned.windows[e.window]), e.label});
  }
  return samples;
}

Split stratified_split(const std::vector<Sample>& samples, std::size_t class_count, double train_fraction,
                       std::uint64_t seed) {
  std::vector<std::vector<std::size_t>> by_class(class_count);
  for (std::size_t i = 0; i < samples.size(); ++i) {
    if (samples[i].label >= class_count) throw ConfigError("sample label out of range");
    by_class[samples[i].label].push_back(i);
  }
  std::size_t longest = 0;
  for (const auto& c : by_class) longest = std::max(longest, c.size());
  std::vector<std::size_t> perm(longest);
  for (std::size_t i = 0; i < longest; ++i) perm[i] = i;
  std::mt19937_64 rng(seed);
  for (std::size_t i = longest; i > 1; --i) std::swap(perm[i - 1], perm[rng() % i]);

  Split split;
  for (const auto& members : by_class) {
    const auto n_train = static_cast<std::size_t>(std::lround(train_fraction * static_cast<double>(members.size())));
    std::size_t placed = 0;
    for (std::size_t p : perm) {
      if (p >= members.size()) continue;
      (placed++ < n_train ? split.train : split.test).push_back(samples[members[p]]);
    }
  }
  return split;
}

}  // namespace hsnn
