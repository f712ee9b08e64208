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

#include <stdexcept>
#include <string>

namespace hsnn {

// Base for every error raised by the library. The CLI maps the concrete
// subclasses onto its exit-code contract.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Tensor shapes do not line up.
class DimensionError : public Error {
 public:
  using Error::Error;
};

// A caller broke an operation precondition (non-scalar loss, non-binary spikes).
class ContractError : public Error {
 public:
  using Error::Error;
};

// NaN/Inf encountered in a numeric path.
class NumericError : public Error {
 public:
  using Error::Error;
};

// Invalid or incomplete configuration.
class ConfigError : public Error {
 public:
  using Error::Error;
};

// Malformed file contents. Carries the byte offset where parsing stopped.
class FormatError : public Error {
 public:
  FormatError(const std::string& what, std::size_t offset)
      : Error(what + " (at byte offset " + std::to_string(offset) + ")"), offset_(offset) {}
  std::size_t offset() const { return offset_; }

 private:
  std::size_t offset_;
};

class IoError : public Error {
 public:
  using Error::Error;
};

// A requested computation would exceed its memory budget.
class ResourceError : public Error {
 public:
  using Error::Error;
};

}  // namespace hsnn
