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
#include <functional>
#include <map>
#include <span>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "kpe/document.hpp"
#include "kpe/model.hpp"

namespace kpe {

struct ScoredPhrase {
  // Normalized (space-joined lowercase tokens).
  std::string phrase;
  double score = 0.0;
  // Best-scoring occurrence, in source-document token coordinates.
  Span span;
};

// Ranked, scores non-increasing, phrases unique.
using Prediction = std::vector<ScoredPhrase>;

// Sorts spans by probability (ties: earlier start, then shorter), collapses
// identical phrases keeping the best occurrence and returns the first k.
// Masked spans never appear. k == 0 is a ConfigError.
Prediction predict_topk(const SpanDistribution& dist, const Document& doc, std::size_t k);

// phrase -> (chunk index, score) entries.
using ChunkScoreTable = std::map<std::string, std::vector<std::pair<std::size_t, double>>>;

// score(phrase) = sum_p score_p * decay^p, ranked descending. Ties keep the
// phrase that appeared in the earlier chunk at the better rank, which is the
// order the entries were inserted in when `first_seen` is given.
Prediction merge_chunk_scores(const ChunkScoreTable& table, std::size_t k, double decay = 0.9,
                              const std::map<std::string, std::size_t>* first_seen = nullptr);

using ChunkPredictor = std::function<Prediction(const Document& chunk)>;

// Splits into consecutive chunks of chunk_len tokens, ranks every phrase of
// every chunk with `predictor` and merges with weights 0.9^p. Empty
// documents are an error.
Prediction chunk_and_merge(const Document& doc, const ChunkPredictor& predictor, std::size_t k,
                           std::size_t chunk_len = 256, double decay = 0.9);
Prediction chunk_and_merge(const Document& doc, const KeyphraseModel& model, std::size_t k,
                           std::size_t chunk_len = 256, double decay = 0.9);

// Drops every phrase ranked below the top ceil(n/4) that is a contiguous
// token run of some top-ranked phrase. Top-ranked phrases are always kept.
Prediction dedup_substrings(const Prediction& ranked);

// True when `needle` occurs as a contiguous token run inside `haystack`.
bool is_token_substring(const std::string& needle, const std::string& haystack);

struct PredictionRecord {
  std::string id;
  Prediction phrases;
};

// JSON-lines {"id": str, "phrases": [[str, score]...]}.
std::vector<PredictionRecord> read_predictions(const std::filesystem::path& path);
void write_predictions(const std::filesystem::path& path, const std::vector<PredictionRecord>& records);

// Porter (1980) suffix stripping, applied per token when stemming is on.
std::string porter_stem(std::string word);
std::string stem_phrase(const std::string& phrase);

struct EvalOptions {
  std::vector<std::size_t> depths = {1, 3, 5};
  std::size_t f1_depth = 10;
  bool stem = false;
};

struct DocumentMetrics {
  std::string id;
  std::map<std::size_t, double> precision;
  std::map<std::size_t, double> recall;
  double f1 = 0.0;
  // |top-k ∩ gold| for every depth in depths and f1_depth.
  std::map<std::size_t, std::size_t> hits;
};

struct MetricReport {
  std::map<std::size_t, double> precision;
  std::map<std::size_t, double> recall;
  std::size_t f1_depth = 10;
  double f1 = 0.0;
  std::size_t documents = 0;
  std::size_t excluded_empty_gold = 0;
  // Gold documents with no prediction record; scored as empty rankings.
  std::size_t missing_predictions = 0;
  std::size_t unknown_predictions = 0;

  nlohmann::json to_json() const;
  std::string to_table(const std::string& system = "model") const;
};

struct Evaluation {
  MetricReport report;
  std::vector<DocumentMetrics> per_document;
};

// Macro-averaged P@k = |top-k ∩ gold| / k, R@k = |top-k ∩ gold| / |gold|
// and F1 at f1_depth. Documents with an empty gold set are excluded.
Evaluation evaluate(const std::vector<PredictionRecord>& predictions, const std::vector<LabeledDocument>& gold,
                    const EvalOptions& options = {});

enum class AgreementMode { kExact, kUnigram };

AgreementMode agreement_mode_from_string(std::string_view s);

struct AgreementItem {
  std::string id;
  // One ranked phrase list per judge.
  std::vector<std::vector<std::string>> judges;
};

struct AgreementResult {
  // Fraction in [0, 1]; multiply by 100 for a percentage.
  double agreement = 0.0;
  std::size_t items = 0;
  std::size_t pairs = 0;
  // Judge lists shorter than the depth; those lists are used truncated.
  std::size_t short_lists = 0;
  std::vector<std::string> flags;
};

// Mean over all judge pairs of all items. Exact: |top-d(A) ∩ top-d(B)|
// divided by d (by the longer truncated list when a judge gave fewer than
// d). Unigram: the same on unigram sets over min(|U_A|, |U_B|).
AgreementResult judge_agreement(const std::vector<AgreementItem>& items, std::size_t depth, AgreementMode mode);

// JSON-lines {"id": str, "judges": [[str...]...]}.
std::vector<AgreementItem> read_annotations(const std::filesystem::path& path);

struct PermutationResult {
  // False with fewer than 5 paired documents.
  bool defined = false;
  double p_value = 1.0;
  bool significant = false;
  double mean_difference = 0.0;
  std::size_t resamples = 0;
  std::size_t documents = 0;
};

// Two-sided paired sign-flip test; p = (1 + #{|mean*| >= |mean|}) / (1 + R).
PermutationResult permutation_test(std::span<const double> a, std::span<const double> b,
                                   std::size_t resamples = 10000, std::uint64_t seed = 0, double alpha = 0.05);

}  // namespace kpe
