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
#include <string>
#include <vector>

#include "hsnn/spiking.hpp"

namespace hsnn {

struct Event {
  std::uint32_t t_us = 0;
  std::uint16_t x = 0;
  std::uint16_t y = 0;
  std::uint8_t polarity = 0;  // 0 = off, 1 = on

  bool operator==(const Event&) const = default;
};

struct EventStream {
  std::uint16_t width = 0;
  std::uint16_t height = 0;
  std::vector<Event> events;

  bool operator==(const EventStream&) const = default;
};

// EVS1 container, little-endian:
//   "EVS1" | u16 width | u16 height | u64 count | count x (u32 t_us, u16 x, u16 y, u8 polarity)
inline constexpr char kEvsMagic[4] = {'E', 'V', 'S', '1'};
inline constexpr std::size_t kEvsHeaderBytes = 16;
inline constexpr std::size_t kEvsRecordBytes = 9;

void write_events(const std::filesystem::path& path, const EventStream& stream);

struct LoadOptions {
  // Events may step back in time by at most this much; they are re-sorted.
  // Larger inversions are a format error.
  std::uint32_t reorder_tolerance_us = 0;
};

EventStream load_events(const std::filesystem::path& path, const LoadOptions& opts = {});
EventStream parse_events(const std::vector<unsigned char>& bytes, const LoadOptions& opts = {});
std::vector<unsigned char> serialize_events(const EventStream& stream);

struct Sample {
  SpikeTensor frames;  // (2, H, W, T), indexed [polarity, y, x, t]
  std::size_t label = 0;
};

struct BinOptions {
  std::uint32_t bin_ms = 10;
  std::size_t frames_per_sample = 50;
  // Recording length in frames; 0 infers it from the last event.
  std::size_t total_frames = 0;
};

struct BinResult {
  std::vector<SpikeTensor> windows;  // consecutive disjoint windows of T frames
  std::size_t rejected_events = 0;   // outside the sensor bounds
};

// Bins events into saturating binary frames; frame f collects events with
// floor(t / bin) == f and window w holds frames [w*T, (w+1)*T).
BinResult bin_events(const EventStream& stream, std::size_t width, std::size_t height, const BinOptions& opts = {});

// Inverse of bin_events for binary frames: one event per set pixel, placed at
// the start of its bin.
EventStream frames_to_events(const SpikeTensor& frames, std::uint32_t bin_ms = 10);

struct SynthOptions {
  std::size_t class_count = 3;
  std::size_t samples_per_class = 60;
  std::size_t height = 32;
  std::size_t width = 32;
  std::size_t timesteps = 20;
  std::uint64_t seed = 7;
  double noise_rate = 0.002;  // background events per pixel, polarity and frame
};

// Moving-bar gestures. Classes come in direction-reversal pairs: class 2j+1
// sample i is the exact time reversal of class 2j sample i, so the two have
// identical per-pixel spike totals and differ only in temporal order.
// Even classes move along distinct axes (x, y, diagonal, anti-diagonal, then
// the same axes at double speed). Output is class-major.
std::vector<Sample> synth_gestures(const SynthOptions& opts);

// Index of the reversal partner of a class, or the class itself if unpaired.
std::size_t reversal_partner(std::size_t label, std::size_t class_count);

struct ManifestEntry {
  std::string file;  // relative to the manifest's directory
  std::size_t window = 0;
  std::size_t label = 0;
};

// Text manifest: "# hsnn dataset" header, then "file window label" per line.
void write_dataset_manifest(const std::filesystem::path& path, const std::vector<ManifestEntry>& entries);
std::vector<ManifestEntry> read_dataset_manifest(const std::filesystem::path& path);

struct DatasetOptions {
  std::size_t height = 32;
  std::size_t width = 32;
  BinOptions bin{10, 20, 0};
};

// Loads every manifest entry through load_events + bin_events.
std::vector<Sample> load_dataset(const std::filesystem::path& dir, const DatasetOptions& opts);

// 80/20-style split. The same seeded permutation of in-class indices is used
// for every class, so reversal partners always land in the same split.
struct Split {
  std::vector<Sample> train;
  std::vector<Sample> test;
};
Split stratified_split(const std::vector<Sample>& samples, std::size_t class_count, double train_fraction,
                       std::uint64_t seed);

// Optional DvsGesture ingestion (AEDAT 3.1 polarity packets + label CSV).
// A 50-frame window takes the label of the gesture covering more than half of
// it; windows with no majority gesture are dropped.
struct DvsGestureCounts {
  std::size_t train = 0;
  std::size_t test = 0;
};
EventStream load_aedat31(const std::filesystem::path& path);
std::vector<Sample> dvs_gesture_samples(const std::filesystem::path& aedat, const std::filesystem::path& labels_csv,
                                        const BinOptions& opts = {});
DvsGestureCounts count_dvs_gesture(const std::filesystem::path& root, const BinOptions& opts = {});

}  // namespace hsnn
