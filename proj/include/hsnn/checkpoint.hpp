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

#include <filesystem>
#include <string>
#include <vector>

#include "hsnn/model.hpp"

namespace hsnn {

inline constexpr char kWeightsMagic[8] = {'H', 'S', 'N', 'N', 'W', 'T', '0', '1'};

// Container: 8-byte magic, u64 manifest length, JSON manifest
// [{"name", "shape", "offset"}] with offsets in elements, then little-endian
// f64 payload in manifest order.
std::vector<unsigned char> serialize_weights(const ParameterStore& params);
ParameterStore parse_weights(const std::vector<unsigned char>& bytes);
void write_weights(const std::filesystem::path& path, const ParameterStore& params);
ParameterStore read_weights(const std::filesystem::path& path);

std::string spec_to_json(const HybridModelSpec& spec);
HybridModelSpec spec_from_json(const std::string& text);

// Loads a weight file and checks every tensor against the model's layout.
void check_weights_match(const BuiltModel& model, const ParameterStore& params);

std::vector<unsigned char> read_file_bytes(const std::filesystem::path& path);
void write_file_bytes(const std::filesystem::path& path, const std::vector<unsigned char>& bytes);
std::string sha256_hex(const std::vector<unsigned char>& bytes);
std::string sha256_file(const std::filesystem::path& path);

}  // namespace hsnn
