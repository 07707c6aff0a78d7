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

#include "kpe/eval.hpp"

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <limits>
#include <numeric>
#include <random>
#include <set>
#include <sstream>

#include "kpe/error.hpp"
#include "kpe/io.hpp"

namespace kpe {

Prediction predict_topk(const SpanDistribution& dist, const Document& doc, std::size_t k) {
  if (k == 0) throw ConfigError("prediction depth k must be positive");
  if (dist.doc_length != doc.size()) throw ShapeError("distribution does not belong to this document");
  std::vector<std::size_t> order;
  for (std::size_t i = 0; i < dist.spans.size(); ++i) {
    if (dist.mask[i]) order.push_back(i);
  }
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    if (dist.probabilities[a] != dist.probabilities[b]) return dist.probabilities[a] > dist.probabilities[b];
    return dist.spans[a] < dist.spans[b];
  });
  Prediction out;
  std::set<std::string> seen;
  for (std::size_t idx : order) {
    const Span s = dist.spans[idx];
    std::string phrase = join_tokens(doc.tokens, s.start, s.length);
    if (!seen.insert(phrase).second) continue;
    out.push_back({std::move(phrase), dist.probabilities[idx], {doc.offset + s.start, s.length}});
    if (out.size() == k) break;
  }
  return out;
}

Prediction merge_chunk_scores(const ChunkScoreTable& table, std::size_t k, double decay,
                              const std::map<std::string, std::size_t>* first_seen) {
  if (k == 0) throw ConfigError("prediction depth k must be positive");
  Prediction merged;
  for (const auto& [phrase, entries] : table) {
    double score = 0.0;
    for (const auto& [chunk, s] : entries) score += s * std::pow(decay, static_cast<double>(chunk));
    merged.push_back({phrase, score, {}});
  }
  auto rank = [&](const std::string& p) {
    if (!first_seen) return std::size_t{0};
    auto it = first_seen->find(p);
    return it == first_seen->end() ? std::numeric_limits<std::size_t>::max() : it->second;
  };
  std::stable_sort(merged.begin(), merged.end(), [&](const ScoredPhrase& a, const ScoredPhrase& b) {
    if (a.score != b.score) return a.score > b.score;
    return rank(a.phrase) < rank(b.phrase);
  });
  if (merged.size() > k) merged.resize(k);
  return merged;
}

Prediction chunk_and_merge(const Document& doc, const ChunkPredictor& predictor, std::size_t k,
                           std::size_t chunk_len, double decay) {
  if (doc.size() == 0) throw Error("cannot predict on an empty document '" + doc.id + "'");
  ChunkScoreTable table;
  std::map<std::string, std::size_t> first_seen;
  std::map<std::string, std::pair<double, Span>> best_span;
  const std::vector<Document> chunks = split_chunks(doc, chunk_len);
  for (std::size_t p = 0; p < chunks.size(); ++p) {
    const double weight = std::pow(decay, static_cast<double>(p));
    for (const ScoredPhrase& sp : predictor(chunks[p])) {
      table[sp.phrase].emplace_back(p, sp.score);
      first_seen.emplace(sp.phrase, first_seen.size());
      auto [it, fresh] = best_span.emplace(sp.phrase, std::make_pair(sp.score * weight, sp.span));
      if (!fresh && sp.score * weight > it->second.first) it->second = {sp.score * weight, sp.span};
    }
  }
  Prediction out = merge_chunk_scores(table, k, decay, &first_seen);
  for (ScoredPhrase& sp : out) sp.span = best_span.at(sp.phrase).second;
  return out;
}

Prediction chunk_and_merge(const Document& doc, const KeyphraseModel& model, std::size_t k, std::size_t chunk_len,
                           double decay) {
  return chunk_and_merge(
      doc,
      [&](const Document& chunk) {
        return predict_topk(model.forward(chunk), chunk, std::numeric_limits<std::size_t>::max());
      },
      k, chunk_len, decay);
}

bool is_token_substring(const std::string& needle, const std::string& haystack) {
  const std::vector<std::string> n = tokenize(needle);
  const std::vector<std::string> h = tokenize(haystack);
  if (n.empty() || n.size() > h.size()) return false;
  return std::search(h.begin(), h.end(), n.begin(), n.end()) != h.end();
}

Prediction dedup_substrings(const Prediction& ranked) {
  const std::size_t top = (ranked.size() + 3) / 4;
  Prediction out(ranked.begin(), ranked.begin() + static_cast<std::ptrdiff_t>(top));
  for (std::size_t i = top; i < ranked.size(); ++i) {
    bool covered = false;
    for (std::size_t j = 0; j < top && !covered; ++j) {
      covered = is_token_substring(ranked[i].phrase, ranked[j].phrase);
    }
    if (!covered) out.push_back(ranked[i]);
  }
  return out;
}

std::vector<PredictionRecord> read_predictions(const std::filesystem::path& path) {
  std::vector<PredictionRecord> out;
  io::for_each_jsonl(path, [&](std::size_t line, const nlohmann::json& j) {
    const std::string where = path.string() + ":" + std::to_string(line) + ": ";
    if (!j.is_object() || !j.contains("id") || !j["id"].is_string() || !j.contains("phrases") ||
        !j["phrases"].is_array()) {
      throw ParseError(where + "prediction record needs \"id\" and \"phrases\"");
    }
    PredictionRecord rec{j["id"].get<std::string>(), {}};
    for (const auto& p : j["phrases"]) {
      if (!p.is_array() || p.size() != 2 || !p[0].is_string() || !p[1].is_number()) {
        throw ParseError(where + "each phrase must be [string, number]");
      }
      rec.phrases.push_back({normalize_phrase(p[0].get<std::string>()), p[1].get<double>(), {}});
    }
    out.push_back(std::move(rec));
  });
  return out;
}

void write_predictions(const std::filesystem::path& path, const std::vector<PredictionRecord>& records) {
  std::vector<nlohmann::json> rows;
  rows.reserve(records.size());
  for (const PredictionRecord& rec : records) {
    nlohmann::json phrases = nlohmann::json::array();
    for (const ScoredPhrase& p : rec.phrases) phrases.push_back({p.phrase, p.score});
    rows.push_back({{"id", rec.id}, {"phrases", std::move(phrases)}});
  }
  io::write_jsonl(path, rows);
}

// ---------------------------------------------------------------------------

nlohmann::json MetricReport::to_json() const {
  nlohmann::json j;
  for (const auto& [k, v] : precision) j["P@" + std::to_string(k)] = v;
  for (const auto& [k, v] : recall) j["R@" + std::to_string(k)] = v;
  j["F1@" + std::to_string(f1_depth)] = f1;
  j["documents"] = documents;
  j["excluded_empty_gold"] = excluded_empty_gold;
  j["missing_predictions"] = missing_predictions;
  j["unknown_predictions"] = unknown_predictions;
  return j;
}

std::string MetricReport::to_table(const std::string& system) const {
  std::ostringstream s;
  s << std::left << std::setw(12) << "Method";
  for (const auto& [k, v] : precision) s << std::right << std::setw(9) << ("P@" + std::to_string(k));
  for (const auto& [k, v] : recall) s << std::right << std::setw(9) << ("R@" + std::to_string(k));
  s << std::right << std::setw(9) << ("F1@" + std::to_string(f1_depth)) << "\n";
  s << std::left << std::setw(12) << system << std::fixed << std::setprecision(4);
  for (const auto& [k, v] : precision) s << std::right << std::setw(9) << v;
  for (const auto& [k, v] : recall) s << std::right << std::setw(9) << v;
  s << std::right << std::setw(9) << f1 << "\n";
  s << "documents: " << documents << " (excluded, empty gold: " << excluded_empty_gold
    << "; missing predictions: " << missing_predictions << ")\n";
  return s.str();
}

Evaluation evaluate(const std::vector<PredictionRecord>& predictions, const std::vector<LabeledDocument>& gold,
                    const EvalOptions& options) {
  for (std::size_t d : options.depths) {
    if (d == 0) throw ConfigError("evaluation depths must be positive");
  }
  if (options.f1_depth == 0) throw ConfigError("F1 depth must be positive");
  auto norm = [&](const std::string& p) {
    std::string n = normalize_phrase(p);
    return options.stem ? stem_phrase(n) : n;
  };

  std::map<std::string, const PredictionRecord*> by_id;
  for (const PredictionRecord& rec : predictions) by_id.emplace(rec.id, &rec);
  std::set<std::string> gold_ids;

  Evaluation out;
  MetricReport& rep = out.report;
  rep.f1_depth = options.f1_depth;
  for (std::size_t d : options.depths) rep.precision[d] = rep.recall[d] = 0.0;

  std::vector<std::size_t> all_depths = options.depths;
  all_depths.push_back(options.f1_depth);

  for (const LabeledDocument& g : gold) {
    gold_ids.insert(g.document.id);
    std::set<std::string> truth;
    for (const std::string& p : g.keyphrases) {
      std::string n = norm(p);
      if (!n.empty()) truth.insert(std::move(n));
    }
    if (truth.empty()) {
      ++rep.excluded_empty_gold;
      continue;
    }
    std::vector<std::string> ranked;
    auto it = by_id.find(g.document.id);
    if (it == by_id.end()) {
      ++rep.missing_predictions;
    } else {
      std::set<std::string> seen;
      for (const ScoredPhrase& sp : it->second->phrases) {
        std::string n = norm(sp.phrase);
        if (seen.insert(n).second) ranked.push_back(std::move(n));
      }
    }

    DocumentMetrics dm;
    dm.id = g.document.id;
    for (std::size_t d : all_depths) {
      std::size_t hits = 0;
      for (std::size_t r = 0; r < std::min(d, ranked.size()); ++r) hits += truth.count(ranked[r]);
      dm.hits[d] = hits;
    }
    for (std::size_t d : options.depths) {
      dm.precision[d] = static_cast<double>(dm.hits[d]) / static_cast<double>(d);
      dm.recall[d] = static_cast<double>(dm.hits[d]) / static_cast<double>(truth.size());
    }
    const double p = static_cast<double>(dm.hits[options.f1_depth]) / static_cast<double>(options.f1_depth);
    const double r = static_cast<double>(dm.hits[options.f1_depth]) / static_cast<double>(truth.size());
    dm.f1 = p + r > 0.0 ? 2.0 * p * r / (p + r) : 0.0;

    for (std::size_t d : options.depths) {
      rep.precision[d] += dm.precision[d];
      rep.recall[d] += dm.recall[d];
    }
    rep.f1 += dm.f1;
    ++rep.documents;
    out.per_document.push_back(std::move(dm));
  }
  for (const PredictionRecord& rec : predictions) {
    if (!gold_ids.count(rec.id)) ++rep.unknown_predictions;
  }
  if (rep.documents > 0) {
    const double n = static_cast<double>(rep.documents);
    for (auto& [k, v] : rep.precision) v /= n;
    for (auto& [k, v] : rep.recall) v /= n;
    rep.f1 /= n;
  }
  return out;
}

// ---------------------------------------------------------------------------

AgreementMode agreement_mode_from_string(std::string_view s) {
  if (s == "exact") return AgreementMode::kExact;
  if (s == "unigram") return AgreementMode::kUnigram;
  throw ConfigError("unknown agreement mode '" + std::string(s) + "' (expected exact or unigram)");
}

AgreementResult judge_agreement(const std::vector<AgreementItem>& items, std::size_t depth, AgreementMode mode) {
  if (depth == 0) throw ConfigError("agreement depth must be positive");
  AgreementResult out;
  double total = 0.0;
  for (const AgreementItem& item : items) {
    if (item.judges.size() < 2) {
      throw ConfigError("item '" + item.id + "' has fewer than two judges");
    }
    std::vector<std::set<std::string>> sets;
    std::vector<std::size_t> listed;
    for (std::size_t j = 0; j < item.judges.size(); ++j) {
      const auto& list = item.judges[j];
      if (list.size() < depth) {
        ++out.short_lists;
        out.flags.push_back("item '" + item.id + "' judge " + std::to_string(j) + " has " +
                            std::to_string(list.size()) + " < " + std::to_string(depth) + " phrases");
      }
      std::set<std::string> s;
      std::size_t used = 0;
      for (std::size_t r = 0; r < std::min(depth, list.size()); ++r) {
        const std::string p = normalize_phrase(list[r]);
        if (mode == AgreementMode::kExact) {
          s.insert(p);
        } else {
          for (std::string& t : tokenize(p)) s.insert(std::move(t));
        }
        ++used;
      }
      sets.push_back(std::move(s));
      listed.push_back(used);
    }
    for (std::size_t a = 0; a < sets.size(); ++a) {
      for (std::size_t b = a + 1; b < sets.size(); ++b) {
        std::size_t common = 0;
        for (const std::string& x : sets[a]) common += sets[b].count(x);
        const std::size_t denom = mode == AgreementMode::kExact ? std::max(listed[a], listed[b])
                                                                : std::min(sets[a].size(), sets[b].size());
        if (denom == 0) {
          out.flags.push_back("item '" + item.id + "' has a judge pair with nothing to compare; pair skipped");
          continue;
        }
        total += static_cast<double>(common) / static_cast<double>(denom);
        ++out.pairs;
      }
    }
    ++out.items;
  }
  out.agreement = out.pairs > 0 ? total / static_cast<double>(out.pairs) : 0.0;
  return out;
}

std::vector<AgreementItem> read_annotations(const std::filesystem::path& path) {
  std::vector<AgreementItem> out;
  io::for_each_jsonl(path, [&](std::size_t line, const nlohmann::json& j) {
    const std::string where = path.string() + ":" + std::to_string(line) + ": ";
    if (!j.is_object() || !j.contains("id") || !j["id"].is_string() || !j.contains("judges") ||
        !j["judges"].is_array()) {
      throw ParseError(where + "annotation record needs \"id\" and \"judges\"");
    }
    AgreementItem item{j["id"].get<std::string>(), {}};
    for (const auto& list : j["judges"]) {
      if (!list.is_array()) throw ParseError(where + "each judge entry must be a list of phrases");
      std::vector<std::string> phrases;
      for (const auto& p : list) {
        if (!p.is_string()) throw ParseError(where + "phrases must be strings");
        phrases.push_back(p.get<std::string>());
      }
      item.judges.push_back(std::move(phrases));
    }
    out.push_back(std::move(item));
  });
  return out;
}

PermutationResult permutation_test(std::span<const double> a, std::span<const double> b, std::size_t resamples,
                                   std::uint64_t seed, double alpha) {
  if (a.size() != b.size()) throw ShapeError("permutation test needs paired score vectors of equal length");
  PermutationResult out;
  out.documents = a.size();
  out.resamples = resamples;
  if (a.size() < 5) return out;
  if (resamples == 0) throw ConfigError("permutation test needs at least one resample");
  out.defined = true;
  std::vector<double> diff(a.size());
  for (std::size_t i = 0; i < a.size(); ++i) diff[i] = a[i] - b[i];
  const double n = static_cast<double>(diff.size());
  const double observed = std::accumulate(diff.begin(), diff.end(), 0.0) / n;
  out.mean_difference = observed;
  // Relative slack so resamples that equal the observed statistic up to
  // summation order count as at least as extreme.
  const double threshold = std::abs(observed) * (1.0 - 1e-12);
  std::mt19937_64 rng(seed);
  std::size_t extreme = 0;
  for (std::size_t r = 0; r < resamples; ++r) {
    double s = 0.0;
    for (double d : diff) s += (rng() & 1U) ? d : -d;
    if (std::abs(s / n) >= threshold) ++extreme;
  }
  out.p_value = static_cast<double>(1 + extreme) / static_cast<double>(1 + resamples);
  out.significant = out.p_value < alpha;
  return out;
}

}  // namespace kpe
