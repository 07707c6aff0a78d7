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

#include "kpe/document.hpp"

#include <algorithm>
#include <set>

#include "kpe/error.hpp"

namespace kpe {

namespace {

bool is_ascii_punct(unsigned char c) {
  return c < 0x80 && ((c >= '!' && c <= '/') || (c >= ':' && c <= '@') || (c >= '[' && c <= '`') ||
                      (c >= '{' && c <= '~'));
}

bool is_space(unsigned char c) { return c == ' ' || c == '\t' || c == '\n' || c == '\r' || c == '\f' || c == '\v'; }

}  // namespace

std::vector<std::string> tokenize(std::string_view text) {
  std::vector<std::string> tokens;
  std::string current;
  auto flush = [&] {
    if (!current.empty()) tokens.push_back(std::move(current));
    current.clear();
  };
  for (char ch : text) {
    const auto c = static_cast<unsigned char>(ch);
    if (is_space(c)) {
      flush();
    } else if (is_ascii_punct(c)) {
      flush();
      tokens.emplace_back(1, ch);
    } else {
      current.push_back(c >= 'A' && c <= 'Z' ? static_cast<char>(c - 'A' + 'a') : ch);
    }
  }
  flush();
  return tokens;
}

std::string join_tokens(const std::vector<std::string>& tokens, std::size_t begin, std::size_t count) {
  std::string out;
  for (std::size_t i = begin; i < begin + count && i < tokens.size(); ++i) {
    if (i > begin) out.push_back(' ');
    out += tokens[i];
  }
  return out;
}

std::string normalize_phrase(std::string_view text) {
  const auto tokens = tokenize(text);
  return join_tokens(tokens, 0, tokens.size());
}

bool is_punctuation_token(std::string_view token) {
  return !token.empty() &&
         std::all_of(token.begin(), token.end(), [](char c) { return is_ascii_punct(static_cast<unsigned char>(c)); });
}

std::optional<Document> make_document(std::string id, std::string_view text) {
  Document doc;
  doc.id = std::move(id);
  doc.tokens = tokenize(text);
  if (doc.tokens.empty()) return std::nullopt;
  doc.visual.assign(doc.tokens.size(), VisualVector{});
  return doc;
}

void validate_document(const Document& doc) {
  if (doc.tokens.empty()) throw AlignmentError("document '" + doc.id + "' has no tokens");
  if (doc.visual.size() != doc.tokens.size()) {
    throw AlignmentError("document '" + doc.id + "' has " + std::to_string(doc.visual.size()) +
                         " visual rows for " + std::to_string(doc.tokens.size()) + " tokens");
  }
}

std::size_t span_count(std::size_t n, std::size_t max_ngram) {
  std::size_t total = 0;
  for (std::size_t k = 1; k <= std::min(max_ngram, n); ++k) total += n - k + 1;
  return total;
}

std::vector<Span> enumerate_spans(std::size_t n, std::size_t max_ngram) {
  std::vector<Span> spans;
  spans.reserve(span_count(n, max_ngram));
  for (std::size_t k = 1; k <= std::min(max_ngram, n); ++k) {
    for (std::size_t i = 0; i + k <= n; ++i) spans.push_back({i, k});
  }
  return spans;
}

std::size_t span_index(std::size_t n, std::size_t max_ngram, Span span) {
  if (span.length == 0 || span.length > max_ngram || span.end() > n) {
    throw Error("span (" + std::to_string(span.start) + "," + std::to_string(span.length) +
                ") out of range for n=" + std::to_string(n));
  }
  // Rows for lengths 1..k-1 precede length k.
  std::size_t before = 0;
  for (std::size_t k = 1; k < span.length; ++k) before += n - k + 1;
  return before + span.start;
}

PhraseMatch match_phrase(const Document& doc, std::string_view phrase, std::size_t max_ngram) {
  PhraseMatch match;
  const auto needle = tokenize(phrase);
  if (needle.empty() || needle.size() > max_ngram) {
    match.unmatchable = true;
    return match;
  }
  const auto& hay = doc.tokens;
  if (needle.size() > hay.size()) return match;
  for (std::size_t i = 0; i + needle.size() <= hay.size(); ++i) {
    if (std::equal(needle.begin(), needle.end(), hay.begin() + static_cast<std::ptrdiff_t>(i))) {
      match.spans.push_back({i, needle.size()});
    }
  }
  return match;
}

std::optional<SpanTarget> build_labels(const LabeledDocument& doc, std::size_t max_ngram, LabelStats* stats) {
  std::set<Span> positives;
  for (const auto& phrase : doc.keyphrases) {
    PhraseMatch m = match_phrase(doc.document, phrase, max_ngram);
    if (stats && m.unmatchable) ++stats->unmatchable_phrases;
    if (stats && !m.unmatchable && m.spans.empty()) ++stats->unmatched_phrases;
    positives.insert(m.spans.begin(), m.spans.end());
  }
  if (positives.empty()) return std::nullopt;
  SpanTarget t;
  const std::size_t n = doc.document.size();
  t.positives.assign(positives.begin(), positives.end());
  t.target.assign(span_count(n, max_ngram), 0.0);
  const double mass = 1.0 / static_cast<double>(t.positives.size());
  for (const Span& s : t.positives) t.target[span_index(n, max_ngram, s)] = mass;
  return t;
}

Document truncate(const Document& doc, std::size_t max_len) {
  if (doc.size() <= max_len) return doc;
  Document out;
  out.id = doc.id;
  out.offset = doc.offset;
  out.tokens.assign(doc.tokens.begin(), doc.tokens.begin() + static_cast<std::ptrdiff_t>(max_len));
  const std::size_t rows = std::min(max_len, doc.visual.size());
  out.visual.assign(doc.visual.begin(), doc.visual.begin() + static_cast<std::ptrdiff_t>(rows));
  return out;
}

std::vector<Document> split_chunks(const Document& doc, std::size_t chunk_len) {
  if (chunk_len == 0) throw ConfigError("chunk length must be positive");
  std::vector<Document> chunks;
  for (std::size_t begin = 0; begin < doc.size(); begin += chunk_len) {
    const std::size_t end = std::min(doc.size(), begin + chunk_len);
    Document c;
    c.id = doc.id;
    c.offset = doc.offset + begin;
    c.tokens.assign(doc.tokens.begin() + static_cast<std::ptrdiff_t>(begin),
                    doc.tokens.begin() + static_cast<std::ptrdiff_t>(end));
    if (doc.visual.size() >= end) {
      c.visual.assign(doc.visual.begin() + static_cast<std::ptrdiff_t>(begin),
                      doc.visual.begin() + static_cast<std::ptrdiff_t>(end));
    }
    chunks.push_back(std::move(c));
  }
  return chunks;
}

}  // namespace kpe
