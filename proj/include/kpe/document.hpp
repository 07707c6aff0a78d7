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

#include <array>
#include <cstddef>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace kpe {

inline constexpr std::size_t kVisualDim = 18;
using VisualVector = std::array<double, kVisualDim>;

// Lowercases ASCII letters, splits on whitespace and detaches every ASCII
// punctuation character as its own token. Bytes >= 0x80 are word characters.
std::vector<std::string> tokenize(std::string_view text);

// Canonical phrase form used for matching and evaluation: the tokens of
// tokenize(text) joined by single spaces.
std::string normalize_phrase(std::string_view text);

std::string join_tokens(const std::vector<std::string>& tokens, std::size_t begin, std::size_t count);

bool is_punctuation_token(std::string_view token);

struct Document {
  std::string id;
  std::vector<std::string> tokens;
  // One row per token; all-zero when the source had no visual features.
  std::vector<VisualVector> visual;
  // Token offset of tokens[0] in the source document (non-zero for chunks).
  std::size_t offset = 0;

  std::size_t size() const { return tokens.size(); }
};

// Builds a document from raw text with zero visual rows. Returns nullopt when
// the text has no tokens.
std::optional<Document> make_document(std::string id, std::string_view text);

// Throws AlignmentError when visual rows and tokens disagree in count or the
// document is empty.
void validate_document(const Document& doc);

struct Span {
  std::size_t start = 0;
  std::size_t length = 0;

  std::size_t end() const { return start + length; }
  auto operator<=>(const Span&) const = default;
};

struct LabeledDocument {
  Document document;
  // Gold phrases (or click queries) in normalized form.
  std::vector<std::string> keyphrases;
};

// Uniform distribution over the positive spans, aligned with
// enumerate_spans(doc length, max_ngram).
struct SpanTarget {
  std::vector<Span> positives;
  std::vector<double> target;
};

// All spans with 1 <= k <= min(K, n), ordered by (k, i).
std::vector<Span> enumerate_spans(std::size_t n, std::size_t max_ngram);
std::size_t span_count(std::size_t n, std::size_t max_ngram);
// Position of `span` in enumerate_spans(n, max_ngram).
std::size_t span_index(std::size_t n, std::size_t max_ngram, Span span);

struct PhraseMatch {
  std::vector<Span> spans;
  // Set when the phrase is empty or longer than max_ngram tokens.
  bool unmatchable = false;
};

// Every exact token-sequence occurrence of the normalized phrase.
PhraseMatch match_phrase(const Document& doc, std::string_view phrase, std::size_t max_ngram);

struct LabelStats {
  std::size_t unmatchable_phrases = 0;
  std::size_t unmatched_phrases = 0;
};

// Union of the matches of every phrase, uniform target. nullopt means the
// document has no match inside its (already truncated) tokens and must be
// skipped by the caller.
std::optional<SpanTarget> build_labels(const LabeledDocument& doc, std::size_t max_ngram,
                                       LabelStats* stats = nullptr);

// Keeps the first max_len tokens and their visual rows.
Document truncate(const Document& doc, std::size_t max_len = 256);

// Consecutive non-overlapping slices of at most chunk_len tokens.
std::vector<Document> split_chunks(const Document& doc, std::size_t chunk_len);

}  // namespace kpe
