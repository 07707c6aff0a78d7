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

#include <filesystem>
#include <functional>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

namespace kpe::io {

std::string read_file(const std::filesystem::path& path);

// Writes to a sibling temporary file and renames it over `path`, so readers
// never observe a partially written output.
void atomic_write(const std::filesystem::path& path, std::string_view content);

// Parses a JSON-lines file. Blank lines are skipped; a malformed line raises
// ParseError with its line number and column.
std::vector<nlohmann::json> read_jsonl(const std::filesystem::path& path);
void for_each_jsonl(const std::filesystem::path& path,
                    const std::function<void(std::size_t line_no, const nlohmann::json&)>& fn);
void write_jsonl(const std::filesystem::path& path, const std::vector<nlohmann::json>& rows);

// Parses a whole JSON document, converting errors to ParseError with
// line/column computed from the byte offset.
nlohmann::json parse_json(std::string_view text, const std::string& source);

// Lowercase hex SHA-256 of `data`.
std::string sha256_hex(std::string_view data);

}  // namespace kpe::io
