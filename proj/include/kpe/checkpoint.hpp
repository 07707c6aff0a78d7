// Copyright 2026 The kpe Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

#include <cstdint>
#include <filesystem>
#include <string>

#include "kpe/autodiff.hpp"

namespace kpe {

// Binary checkpoint layout (all integers little-endian):
//
//   "KPECKPT\0"                     8-byte magic
//   u32  format version
//   u64  digest length, bytes       hex SHA-256 of the config block
//   u64  config length, bytes       JSON config (model config, vocabulary)
//   u64  record count
//   per record:
//     u32 name length, bytes
//     u32 rank, rank x u64 dims
//     u64 value count, value count x f64 (IEEE-754, little-endian)
//
// Values round-trip bit-exactly.
inline constexpr std::uint32_t kCheckpointVersion = 1;

struct Checkpoint {
  std::uint32_t version = kCheckpointVersion;
  std::string config_digest;
  std::string config_json;
  ParameterRegistry parameters;
};

// Atomic (temp file + rename).
void save_checkpoint(const std::filesystem::path& path, const ParameterRegistry& parameters,
                     const std::string& config_json);

// Verifies magic, version and config digest.
Checkpoint load_checkpoint(const std::filesystem::path& path);

// Copies every value from `source` into `target`. Names and shapes must
// match exactly; otherwise a ShapeError lists every offending parameter.
void assign_parameters(ParameterRegistry& target, const ParameterRegistry& source);

}  // namespace kpe
