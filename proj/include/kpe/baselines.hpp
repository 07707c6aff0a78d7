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
#include <map>
#include <set>
#include <string>
#include <vector>

#include "kpe/document.hpp"
#include "kpe/eval.hpp"

namespace kpe {

using StopwordSet = std::set<std::string, std::less<>>;

// Built-in English list.
const StopwordSet& default_stopwords();
// One token per line; blank lines ignored. Tokens are lowercased.
StopwordSet read_stopwords(const std::filesystem::path& path);

// Drops spans that start or end with a stopword or contain a punctuation
// token.
std::vector<Span> candidate_filter(const std::vector<Span>& spans, const Document& doc,
                                   const StopwordSet& stopwords);

class CorpusStats {
 public:
  static CorpusStats build(const std::vector<const Document*>& corpus);

  std::size_t documents() const { return documents_; }
  std::size_t df(const std::string& token) const;
  // ln((N + 1) / (df + 1)) + 1
  double idf(const std::string& token) const;

 private:
  std::size_t documents_ = 0;
  std::map<std::string, std::size_t, std::less<>> df_;
};

// Mean over the span's tokens of (count in doc / doc length) * idf.
double tfidf_score(Span span, const Document& doc, const CorpusStats& stats);

// Ranks candidate_filter(enumerate_spans(n, K)) by score; ties go to the
// earlier first occurrence, then the shorter span.
Prediction tfidf_predict(const Document& doc, const CorpusStats& stats, const StopwordSet& stopwords,
                         std::size_t k, std::size_t max_ngram = 5);

// Undirected co-occurrence graph over word types. Nodes are kept sorted so
// scores do not depend on insertion order.
struct WordGraph {
  std::vector<std::string> nodes;
  // adjacency[u] maps neighbour -> weight; symmetric, no self loops.
  std::vector<std::map<std::size_t, double>> adjacency;

  std::size_t index(const std::string& word) const;
  void add_edge(const std::string& a, const std::string& b, double weight = 1.0);
};

// Candidate words (non-stopword, non-punctuation) that occur within
// `window` token positions of each other are linked, weight = count.
WordGraph build_word_graph(const Document& doc, const StopwordSet& stopwords, std::size_t window = 2);

struct TextRankResult {
  std::map<std::string, double> scores;
  std::size_t iterations = 0;
  // L1 change of the last iteration.
  double residual = 0.0;
  bool converged = false;
};

// S(v) = (1 - d) + d * sum_u w_uv / W_u * S(u), iterated from S = 1 until
// the L1 change drops below tol.
TextRankResult textrank(const WordGraph& graph, double damping = 0.85, double tol = 1e-8,
                        std::size_t max_iter = 200);

// Span score = sum of its word scores, over the same candidate spans as
// tfidf_predict.
Prediction textrank_predict(const Document& doc, const StopwordSet& stopwords, std::size_t k,
                            std::size_t max_ngram = 5, std::size_t window = 2);

}  // namespace kpe
