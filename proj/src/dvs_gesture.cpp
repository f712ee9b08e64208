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

// DvsGesture ingestion: AEDAT 3.1 polarity packets and per-recording label CSVs.

#include <algorithm>
#include <cctype>
#include <fstream>
#include <iterator>
#include <sstream>

#include "hsnn/error.hpp"
#include "hsnn/events.hpp"

namespace hsnn {
namespace {

constexpr std::size_t kPacketHeaderBytes = 28;
constexpr std::int16_t kPolarityEventType = 1;

std::uint32_t le32(const std::vector<unsigned char>& b, std::size_t off) {
  return static_cast<std::uint32_t>(b[off]) | (static_cast<std::uint32_t>(b[off + 1]) << 8) |
         (static_cast<std::uint32_t>(b[off + 2]) << 16) | (static_cast<std::uint32_t>(b[off + 3]) << 24);
}

struct RawEvent {
  std::uint64_t t_us;
  std::uint16_t x, y;
  std::uint8_t polarity;
};

struct Gesture {
  std::size_t label;
  std::uint64_t start_us, end_us;
};

std::vector<RawEvent> read_aedat31(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path.string());
  std::vector<unsigned char> bytes{std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
  static const std::string kEndHeader = "#!END-HEADER\r\n";
  auto it = std::search(bytes.begin(), bytes.end(), kEndHeader.begin(), kEndHeader.end());
  if (it == bytes.end()) throw FormatError("AEDAT header terminator not found", 0);
  std::size_t off = static_cast<std::size_t>(it - bytes.begin()) + kEndHeader.size();

  std::vector<RawEvent> events;
  while (off + kPacketHeaderBytes <= bytes.size()) {
    const auto type = static_cast<std::int16_t>(bytes[off] | (bytes[off + 1] << 8));
    const std::uint32_t size = le32(bytes, off + 4);
    const std::uint32_t ts_offset = le32(bytes, off + 8);
    const std::uint64_t ts_overflow = le32(bytes, off + 12);
    const std::uint32_t number = le32(bytes, off + 20);
    const std::size_t body = off + kPacketHeaderBytes;
    const std::size_t body_bytes = static_cast<std::size_t>(size) * number;
    if (size == 0 || body + body_bytes > bytes.size()) throw FormatError("truncated AEDAT packet", off);
    if (type == kPolarityEventType) {
      if (size < 8 || ts_offset + 4 > size) throw FormatError("unexpected polarity event layout", off);
      for (std::uint32_t i = 0; i < number; ++i) {
        const std::size_t e = body + static_cast<std::size_t>(i) * size;
        const std::uint32_t data = le32(bytes, e);
        if ((data & 1u) == 0) continue;  // invalidated event
        const std::uint32_t ts = le32(bytes, e + ts_offset);
        events.push_back({(ts_overflow << 31) | ts, static_cast<std::uint16_t>((data >> 17) & 0x7fff),
                          static_cast<std::uint16_t>((data >> 2) & 0x7fff),
                          static_cast<std::uint8_t>((data >> 1) & 1u)});
      }
    }
    off = body + body_bytes;
  }
  std::stable_sort(events.begin(), events.end(), [](const RawEvent& a, const RawEvent& b) { return a.t_us < b.t_us; });
  return events;
}

std::vector<Gesture> read_labels(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open " + path.string());
  std::vector<Gesture> gestures;
  std::string line;
  std::size_t offset = 0;
  while (std::getline(in, line)) {
    const std::size_t start = offset;
    offset += line.size() + 1;
    if (line.empty() || !std::isdigit(static_cast<unsigned char>(line[0]))) continue;  // header
    std::replace(line.begin(), line.end(), ',', ' ');
    std::istringstream fields(line);
    std::size_t cls = 0;
    std::uint64_t s = 0, e = 0;
    if (!(fields >> cls >> s >> e) || cls == 0) throw FormatError("malformed label line", start);
    gestures.push_back({cls - 1, s, e});
  }
  return gestures;
}

struct Window {
  std::uint64_t start_us;
  std::size_t label;
};

std::vector<Window> labelled_windows(const std::vector<RawEvent>& events, const std::vector<Gesture>& gestures,
                                     const BinOptions& opts) {
  std::vector<Window> windows;
  if (events.empty()) return windows;
  const std::uint64_t span = static_cast<std::uint64_t>(opts.bin_ms) * 1000 * opts.frames_per_sample;
  const std::uint64_t t0 = events.front().t_us;
  const std::uint64_t t_end = events.back().t_us;
  for (std::uint64_t ws = t0; ws + span <= t_end + 1; ws += span) {
    const std::uint64_t we = ws + span;
    for (const auto& g : gestures) {
      const std::uint64_t lo = std::max(ws, g.start_us), hi = std::min(we, g.end_us);
      if (hi > lo && 2 * (hi - lo) > span) {
        windows.push_back({ws, g.label});
        break;
      }
    }
  }
  return windows;
}

std::vector<std::string> trial_list(const std::filesystem::path& file) {
  std::ifstream in(file);
  if (!in) throw IoError("cannot open " + file.string());
  std::vector<std::string> names;
  std::string line;
  while (std::getline(in, line)) {
    while (!line.empty() && std::isspace(static_cast<unsigned char>(line.back()))) line.pop_back();
    if (!line.empty()) names.push_back(line);
  }
  return names;
}

std::filesystem::path labels_for(const std::filesystem::path& aedat) {
  auto p = aedat;
  p.replace_filename(aedat.stem().string() + "_labels.csv");
  return p;
}

}  // namespace

EventStream load_aedat31(const std::filesystem::path& path) {
  const auto raw = read_aedat31(path);
  EventStream stream;
  stream.width = 128;
  stream.height = 128;
  const std::uint64_t t0 = raw.empty() ? 0 : raw.front().t_us;
  stream.events.reserve(raw.size());
  for (const auto& e : raw) {
    stream.events.push_back({static_cast<std::uint32_t>(e.t_us - t0), e.x, e.y, e.polarity});
  }
  return stream;
}

std::vector<Sample> dvs_gesture_samples(const std::filesystem::path& aedat, const std::filesystem::path& labels_csv,
                                        const BinOptions& opts) {
  const auto raw = read_aedat31(aedat);
  const auto windows = labelled_windows(raw, read_labels(labels_csv), opts);
  const std::uint64_t bin_us = static_cast<std::uint64_t>(opts.bin_ms) * 1000;
  std::vector<Sample> samples;
  samples.reserve(windows.size());
  auto cursor = raw.begin();
  for (const auto& w : windows) {
    SpikeTensor frames(2, 128, 128, opts.frames_per_sample);
    const std::uint64_t we = w.start_us + bin_us * opts.frames_per_sample;
    cursor = std::lower_bound(cursor, raw.end(), w.start_us,
                              [](const RawEvent& e, std::uint64_t t) { return e.t_us < t; });
    for (auto it = cursor; it != raw.end() && it->t_us < we; ++it) {
      if (it->x >= 128 || it->y >= 128) continue;
      frames.set(it->polarity, it->y, it->x, static_cast<std::size_t>((it->t_us - w.start_us) / bin_us), true);
    }
    samples.push_back({std::move(frames), w.label});
  }
  return samples;
}

DvsGestureCounts count_dvs_gesture(const std::filesystem::path& root, const BinOptions& opts) {
  DvsGestureCounts counts;
  auto count_list = [&](const std::string& list) {
    std::size_t n = 0;
    for (const auto& name : trial_list(root / list)) {
      const auto aedat = root / name;
      n += labelled_windows(read_aedat31(aedat), read_labels(labels_for(aedat)), opts).size();
    }
    return n;
  };
  counts.train = count_list("trials_to_train.txt");
  counts.test = count_list("trials_to_test.txt");
  return counts;
}

}  // namespace hsnn
