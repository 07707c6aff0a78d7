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

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

#include "kpe/model.hpp"
#include "kpe/training.hpp"

namespace kpe {

struct DataConfig {
  // Sidecar vectors for embedding_mode = frozen_file.
  std::string frozen_vectors;
  std::string stopwords;
  std::string blocklist;
  std::size_t chunk_len = 256;
  std::size_t predict_k = 10;
};

// Everything a command needs, addressable by flat dotted keys such as
// "model.filters" or "train.lr_start". Config files are flat JSON objects
// over the same keys; unknown keys are rejected.
class RunConfig {
 public:
  ModelConfig model;
  TrainingConfig training;
  DataConfig data;
  std::uint64_t seed = 0;
  std::size_t threads = 1;

  static RunConfig full_scale();

  // Every key with its current value, sorted by key.
  nlohmann::json to_flat_json() const;
  void apply_flat_json(const nlohmann::json& j, const std::string& source = "config");
  void merge_file(const std::filesystem::path& path);
  // Sets one key from its command-line spelling ("true", "0.5", "64", ...).
  void set(const std::string& key, const std::string& value);
  // Comma-separated ablation names: no_transformer, no_position, no_visual.
  void apply_ablations(std::string_view list);

  static std::vector<std::string> keys();
  void validate() const;
  // SHA-256 of the canonical flat JSON.
  std::string digest() const;
};

}  // namespace kpe
