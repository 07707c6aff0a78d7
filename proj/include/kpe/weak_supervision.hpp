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
#include <set>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "kpe/document.hpp"

namespace kpe {

inline constexpr const char* kQueryPredictionProvenance = "query_prediction";

struct QueryLogRecord {
  std::string id;
  std::vector<std::string> queries;
};

// Click log: JSON-lines {"id": str, "queries": [str...]}. Empty queries are
// a schema error.
std::vector<QueryLogRecord> read_click_log(const std::filesystem::path& path);

// One normalized query per line; blank lines and '#' comments ignored.
std::set<std::string> read_blocklist(const std::filesystem::path& path);

struct QueryMatch {
  // Normalized queries that occur verbatim in the document, sorted.
  std::vector<std::string> matched;
  // Every occurrence of every matched query, sorted.
  std::vector<Span> spans;
  std::size_t unmatched = 0;
  std::size_t too_long = 0;
};

QueryMatch filter_queries(const Document& doc, const std::vector<std::string>& queries, std::size_t max_ngram);

struct MeanStd {
  double mean = 0.0;
  double std = 0.0;
};

struct QpStatistics {
  std::size_t log_records = 0;
  std::size_t documents = 0;
  std::size_t excluded_no_match = 0;
  std::size_t missing_documents = 0;
  std::size_t duplicate_queries = 0;
  std::size_t blocked_queries = 0;
  std::size_t unmatched_queries = 0;
  std::size_t too_long_queries = 0;
  MeanStd doc_length;
  MeanStd queries_per_doc;
  MeanStd query_length;
  std::size_t doc_vocabulary = 0;
  std::size_t query_vocabulary = 0;
  std::size_t unique_queries = 0;

  nlohmann::json to_json() const;
  // Fixed-width text table with Mean / STD columns.
  std::string to_table() const;
};

struct QpDataset {
  // Matched queries sit in the keyphrases slot. Sorted by document id.
  std::vector<LabeledDocument> examples;
  QpStatistics stats;
  std::vector<std::string> warnings;
};

// Records for the same id are merged and exact duplicate queries dropped,
// so the result does not depend on line order. Matching is done against the
// first max_length tokens, the part the model actually sees.
QpDataset build_qp_dataset(const std::vector<QueryLogRecord>& log, const std::vector<LabeledDocument>& docs,
                           std::size_t max_ngram, std::size_t max_length = 256,
                           const std::set<std::string>& blocklist = {});

}  // namespace kpe
