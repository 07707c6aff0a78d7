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

#include "kpe/weak_supervision.hpp"

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <map>
#include <sstream>

#include "kpe/error.hpp"
#include "kpe/io.hpp"

namespace kpe {

std::vector<QueryLogRecord> read_click_log(const std::filesystem::path& path) {
  std::vector<QueryLogRecord> out;
  io::for_each_jsonl(path, [&](std::size_t line, const nlohmann::json& j) {
    const std::string where = path.string() + ":" + std::to_string(line) + ": ";
    if (!j.is_object() || !j.contains("id") || !j["id"].is_string()) {
      throw ParseError(where + "click record needs a string \"id\"");
    }
    if (!j.contains("queries") || !j["queries"].is_array()) {
      throw ParseError(where + "click record needs a \"queries\" array");
    }
    QueryLogRecord rec{j["id"].get<std::string>(), {}};
    for (const auto& q : j["queries"]) {
      if (!q.is_string() || normalize_phrase(q.get<std::string>()).empty()) {
        throw ParseError(where + "queries must be non-empty strings");
      }
      rec.queries.push_back(q.get<std::string>());
    }
    out.push_back(std::move(rec));
  });
  return out;
}

std::set<std::string> read_blocklist(const std::filesystem::path& path) {
  std::set<std::string> out;
  std::istringstream in(io::read_file(path));
  std::string line;
  while (std::getline(in, line)) {
    if (!line.empty() && line[0] == '#') continue;
    std::string q = normalize_phrase(line);
    if (!q.empty()) out.insert(std::move(q));
  }
  return out;
}

QueryMatch filter_queries(const Document& doc, const std::vector<std::string>& queries, std::size_t max_ngram) {
  QueryMatch out;
  std::set<std::string> matched;
  std::set<Span> spans;
  for (const std::string& q : queries) {
    PhraseMatch m = match_phrase(doc, q, max_ngram);
    if (m.unmatchable) {
      ++out.too_long;
    } else if (m.spans.empty()) {
      ++out.unmatched;
    } else {
      matched.insert(normalize_phrase(q));
      spans.insert(m.spans.begin(), m.spans.end());
    }
  }
  out.matched.assign(matched.begin(), matched.end());
  out.spans.assign(spans.begin(), spans.end());
  return out;
}

namespace {

MeanStd mean_std(const std::vector<double>& xs) {
  MeanStd r;
  if (xs.empty()) return r;
  for (double x : xs) r.mean += x;
  r.mean /= static_cast<double>(xs.size());
  for (double x : xs) r.std += (x - r.mean) * (x - r.mean);
  r.std = std::sqrt(r.std / static_cast<double>(xs.size()));
  return r;
}

}  // namespace

nlohmann::json QpStatistics::to_json() const {
  auto ms = [](const MeanStd& m) { return nlohmann::json{{"mean", m.mean}, {"std", m.std}}; };
  return {{"Doc Length", ms(doc_length)},
          {"# of Query per Doc", ms(queries_per_doc)},
          {"Query Length", ms(query_length)},
          {"Doc Vocabulary Size", doc_vocabulary},
          {"Query Vocabulary Size", query_vocabulary},
          {"# of Documents", documents},
          {"# of Unique Queries", unique_queries},
          {"log_records", log_records},
          {"excluded_no_match", excluded_no_match},
          {"missing_documents", missing_documents},
          {"duplicate_queries", duplicate_queries},
          {"blocked_queries", blocked_queries},
          {"unmatched_queries", unmatched_queries},
          {"too_long_queries", too_long_queries}};
}

std::string QpStatistics::to_table() const {
  std::ostringstream s;
  s << std::fixed << std::setprecision(2);
  auto row = [&](const std::string& name, const std::string& mean, const std::string& sd) {
    s << std::left << std::setw(24) << name << std::right << std::setw(12) << mean << std::setw(12) << sd << "\n";
  };
  auto num = [](double v) {
    std::ostringstream t;
    t << std::fixed << std::setprecision(2) << v;
    return t.str();
  };
  row("Statistics", "Mean", "STD");
  row("Doc Length", num(doc_length.mean), num(doc_length.std));
  row("# of Query per Doc", num(queries_per_doc.mean), num(queries_per_doc.std));
  row("Query Length", num(query_length.mean), num(query_length.std));
  row("Doc Vocabulary Size", std::to_string(doc_vocabulary), "n.a.");
  row("Query Vocabulary Size", std::to_string(query_vocabulary), "n.a.");
  row("# of Documents", std::to_string(documents), "n.a.");
  row("# of Unique Queries", std::to_string(unique_queries), "n.a.");
  return s.str();
}

QpDataset build_qp_dataset(const std::vector<QueryLogRecord>& log, const std::vector<LabeledDocument>& docs,
                           std::size_t max_ngram, std::size_t max_length, const std::set<std::string>& blocklist) {
  QpDataset out;
  QpStatistics& st = out.stats;
  st.log_records = log.size();

  std::map<std::string, const Document*> by_id;
  for (const LabeledDocument& d : docs) by_id.emplace(d.document.id, &d.document);

  std::map<std::string, std::set<std::string>> merged;
  for (const QueryLogRecord& rec : log) {
    auto& qs = merged[rec.id];
    for (const std::string& raw : rec.queries) {
      std::string q = normalize_phrase(raw);
      if (blocklist.count(q)) {
        ++st.blocked_queries;
      } else if (!qs.insert(std::move(q)).second) {
        ++st.duplicate_queries;
      }
    }
  }

  std::vector<double> doc_lengths, per_doc, query_lengths;
  std::set<std::string> doc_vocab, query_vocab, unique;
  for (const auto& [id, queries] : merged) {
    auto it = by_id.find(id);
    if (it == by_id.end()) {
      ++st.missing_documents;
      out.warnings.push_back("click log references unknown document '" + id + "'");
      continue;
    }
    Document truncated = truncate(*it->second, max_length);
    QueryMatch m = filter_queries(truncated, {queries.begin(), queries.end()}, max_ngram);
    st.unmatched_queries += m.unmatched;
    st.too_long_queries += m.too_long;
    if (m.matched.empty()) {
      ++st.excluded_no_match;
      continue;
    }
    doc_lengths.push_back(static_cast<double>(it->second->size()));
    per_doc.push_back(static_cast<double>(m.matched.size()));
    doc_vocab.insert(it->second->tokens.begin(), it->second->tokens.end());
    for (const std::string& q : m.matched) {
      const std::vector<std::string> toks = tokenize(q);
      query_lengths.push_back(static_cast<double>(toks.size()));
      query_vocab.insert(toks.begin(), toks.end());
      unique.insert(q);
    }
    out.examples.push_back({*it->second, m.matched});
  }
  st.documents = out.examples.size();
  st.doc_length = mean_std(doc_lengths);
  st.queries_per_doc = mean_std(per_doc);
  st.query_length = mean_std(query_lengths);
  st.doc_vocabulary = doc_vocab.size();
  st.query_vocabulary = query_vocab.size();
  st.unique_queries = unique.size();
  return out;
}

}  // namespace kpe
