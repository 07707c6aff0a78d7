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
#include <filesystem>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "kpe/document.hpp"
#include "kpe/visual.hpp"

namespace kpe {

struct DatasetReport {
  std::size_t lines = 0;
  std::size_t loaded = 0;
  // Documents whose text tokenized to nothing.
  std::size_t rejected_empty = 0;
  std::size_t dropped_empty_keyphrases = 0;
  VisualReport visual;
};

// One JSON-lines record: {"id", "text", "visual"?, "keyphrases"?,
// "provenance"?}. Visual rows must align 1:1 with tokenize(text).
LabeledDocument document_from_json(const nlohmann::json& j, DatasetReport* report = nullptr);
nlohmann::json document_to_json(const LabeledDocument& doc, const std::string& provenance = "");

struct Dataset {
  std::vector<LabeledDocument> documents;
  DatasetReport report;
};

// Reads a dataset file. Schema violations raise ParseError/AlignmentError
// with the line number; empty-text documents are skipped and counted.
Dataset read_dataset(const std::filesystem::path& path);
void write_dataset(const std::filesystem::path& path, const std::vector<LabeledDocument>& docs,
                   const std::string& provenance = "");

}  // namespace kpe
