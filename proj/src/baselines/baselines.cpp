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

#include "kpe/baselines.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "kpe/error.hpp"
#include "kpe/io.hpp"

namespace kpe {

const StopwordSet& default_stopwords() {
  static const StopwordSet words = {
      "a",       "about",   "above",  "after",   "again",  "against", "all",     "am",     "an",     "and",
      "any",     "are",     "as",     "at",      "be",     "because", "been",    "before", "being",  "below",
      "between", "both",    "but",    "by",      "can",    "could",   "did",     "do",     "does",   "doing",
      "down",    "during",  "each",   "few",     "for",    "from",    "further", "had",    "has",    "have",
      "having",  "he",      "her",    "here",    "hers",   "herself", "him",     "himself", "his",   "how",
      "i",       "if",      "in",     "into",    "is",     "it",      "its",     "itself", "just",   "me",
      "more",    "most",    "my",     "myself",  "no",     "nor",     "not",     "now",    "of",     "off",
      "on",      "once",    "only",   "or",      "other",  "our",     "ours",    "ourselves", "out", "over",
      "own",     "same",    "she",    "should",  "so",     "some",    "such",    "than",   "that",   "the",
      "their",   "theirs",  "them",   "themselves", "then", "there",  "these",   "they",   "this",   "those",
      "through", "to",      "too",    "under",   "until",  "up",      "very",    "was",    "we",     "were",
      "what",    "when",    "where",  "which",   "while",  "who",     "whom",    "why",    "will",   "with",
      "would",   "you",     "your",   "yours",   "yourself", "yourselves", "also", "may",  "might",  "must",
      "s",       "t",       "us"};
  return words;
}

StopwordSet read_stopwords(const std::filesystem::path& path) {
  StopwordSet out;
  std::istringstream in(io::read_file(path));
  std::string line;
  while (std::getline(in, line)) {
    for (std::string& t : tokenize(line)) out.insert(std::move(t));
  }
  return out;
}

namespace {

bool is_candidate_word(const std::string& token, const StopwordSet& stopwords) {
  return !is_punctuation_token(token) && !stopwords.contains(token);
}

struct Candidate {
  Span span;
  double score;
};

Prediction rank_candidates(std::vector<Candidate> cands, const Document& doc, std::size_t k) {
  if (k == 0) throw ConfigError("prediction depth k must be positive");
  std::stable_sort(cands.begin(), cands.end(), [](const Candidate& a, const Candidate& b) {
    if (a.score != b.score) return a.score > b.score;
    return a.span < b.span;
  });
  Prediction out;
  std::set<std::string> seen;
  for (const Candidate& c : cands) {
    std::string phrase = join_tokens(doc.tokens, c.span.start, c.span.length);
    if (!seen.insert(phrase).second) continue;
    out.push_back({std::move(phrase), c.score, {doc.offset + c.span.start, c.span.length}});
    if (out.size() == k) break;
  }
  return out;
}

}  // namespace

std::vector<Span> candidate_filter(const std::vector<Span>& spans, const Document& doc,
                                   const StopwordSet& stopwords) {
  std::vector<Span> out;
  for (const Span& s : spans) {
    if (s.length == 0 || s.end() > doc.size()) throw ShapeError("span outside the document");
    if (stopwords.contains(doc.tokens[s.start]) || stopwords.contains(doc.tokens[s.end() - 1])) continue;
    bool punct = false;
    for (std::size_t i = s.start; i < s.end() && !punct; ++i) punct = is_punctuation_token(doc.tokens[i]);
    if (!punct) out.push_back(s);
  }
  return out;
}

CorpusStats CorpusStats::build(const std::vector<const Document*>& corpus) {
  CorpusStats st;
  st.documents_ = corpus.size();
  for (const Document* doc : corpus) {
    std::set<std::string_view> seen(doc->tokens.begin(), doc->tokens.end());
    for (std::string_view t : seen) {
      auto it = st.df_.find(t);
      if (it == st.df_.end()) {
        st.df_.emplace(std::string(t), 1);
      } else {
        ++it->second;
      }
    }
  }
  return st;
}

std::size_t CorpusStats::df(const std::string& token) const {
  auto it = df_.find(token);
  return it == df_.end() ? 0 : it->second;
}

double CorpusStats::idf(const std::string& token) const {
  return std::log(static_cast<double>(documents_ + 1) / static_cast<double>(df(token) + 1)) + 1.0;
}

double tfidf_score(Span span, const Document& doc, const CorpusStats& stats) {
  if (span.length == 0 || span.end() > doc.size()) throw ShapeError("span outside the document");
  double total = 0.0;
  for (std::size_t i = span.start; i < span.end(); ++i) {
    const std::string& w = doc.tokens[i];
    const double tf = static_cast<double>(std::count(doc.tokens.begin(), doc.tokens.end(), w)) /
                      static_cast<double>(doc.size());
    total += tf * stats.idf(w);
  }
  return total / static_cast<double>(span.length);
}

Prediction tfidf_predict(const Document& doc, const CorpusStats& stats, const StopwordSet& stopwords,
                         std::size_t k, std::size_t max_ngram) {
  std::vector<Candidate> cands;
  for (const Span& s : candidate_filter(enumerate_spans(doc.size(), max_ngram), doc, stopwords)) {
    cands.push_back({s, tfidf_score(s, doc, stats)});
  }
  return rank_candidates(std::move(cands), doc, k);
}

std::size_t WordGraph::index(const std::string& word) const {
  auto it = std::lower_bound(nodes.begin(), nodes.end(), word);
  if (it == nodes.end() || *it != word) throw Error("word '" + word + "' is not in the graph");
  return static_cast<std::size_t>(it - nodes.begin());
}

void WordGraph::add_edge(const std::string& a, const std::string& b, double weight) {
  if (a == b) return;
  for (const std::string* w : {&a, &b}) {
    auto it = std::lower_bound(nodes.begin(), nodes.end(), *w);
    if (it == nodes.end() || *it != *w) {
      const std::size_t pos = static_cast<std::size_t>(it - nodes.begin());
      nodes.insert(it, *w);
      // Shift neighbour indices at or after the insertion point.
      for (auto& adj : adjacency) {
        std::map<std::size_t, double> moved;
        for (const auto& [v, x] : adj) moved.emplace(v >= pos ? v + 1 : v, x);
        adj.swap(moved);
      }
      adjacency.insert(adjacency.begin() + static_cast<std::ptrdiff_t>(pos), std::map<std::size_t, double>{});
    }
  }
  const std::size_t u = index(a);
  const std::size_t v = index(b);
  adjacency[u][v] += weight;
  adjacency[v][u] += weight;
}

WordGraph build_word_graph(const Document& doc, const StopwordSet& stopwords, std::size_t window) {
  if (window < 2) throw ConfigError("co-occurrence window must be at least 2");
  WordGraph g;
  std::set<std::string> words;
  for (const std::string& t : doc.tokens) {
    if (is_candidate_word(t, stopwords)) words.insert(t);
  }
  g.nodes.assign(words.begin(), words.end());
  g.adjacency.resize(g.nodes.size());
  for (std::size_t i = 0; i < doc.size(); ++i) {
    if (!is_candidate_word(doc.tokens[i], stopwords)) continue;
    for (std::size_t j = i + 1; j < std::min(doc.size(), i + window); ++j) {
      if (!is_candidate_word(doc.tokens[j], stopwords) || doc.tokens[i] == doc.tokens[j]) continue;
      const std::size_t u = g.index(doc.tokens[i]);
      const std::size_t v = g.index(doc.tokens[j]);
      g.adjacency[u][v] += 1.0;
      g.adjacency[v][u] += 1.0;
    }
  }
  return g;
}

TextRankResult textrank(const WordGraph& graph, double damping, double tol, std::size_t max_iter) {
  TextRankResult out;
  const std::size_t n = graph.nodes.size();
  if (n == 0) {
    out.converged = true;
    return out;
  }
  std::vector<double> out_weight(n, 0.0);
  for (std::size_t u = 0; u < n; ++u) {
    for (const auto& [v, w] : graph.adjacency[u]) out_weight[u] += w;
  }
  std::vector<double> s(n, 1.0), next(n);
  for (out.iterations = 0; out.iterations < max_iter;) {
    for (std::size_t v = 0; v < n; ++v) {
      double acc = 0.0;
      for (const auto& [u, w] : graph.adjacency[v]) acc += w / out_weight[u] * s[u];
      next[v] = (1.0 - damping) + damping * acc;
    }
    out.residual = 0.0;
    for (std::size_t v = 0; v < n; ++v) out.residual += std::abs(next[v] - s[v]);
    s.swap(next);
    ++out.iterations;
    if (out.residual < tol) {
      out.converged = true;
      break;
    }
  }
  for (std::size_t v = 0; v < n; ++v) out.scores.emplace(graph.nodes[v], s[v]);
  return out;
}

Prediction textrank_predict(const Document& doc, const StopwordSet& stopwords, std::size_t k,
                            std::size_t max_ngram, std::size_t window) {
  const TextRankResult tr = textrank(build_word_graph(doc, stopwords, window));
  std::vector<Candidate> cands;
  for (const Span& s : candidate_filter(enumerate_spans(doc.size(), max_ngram), doc, stopwords)) {
    double score = 0.0;
    // Interior stopwords are not graph nodes and add nothing.
    for (std::size_t i = s.start; i < s.end(); ++i) {
      auto it = tr.scores.find(doc.tokens[i]);
      if (it != tr.scores.end()) score += it->second;
    }
    cands.push_back({s, score});
  }
  return rank_candidates(std::move(cands), doc, k);
}

}  // namespace kpe
