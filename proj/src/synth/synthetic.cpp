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

#include "kpe/synthetic.hpp"

#include <algorithm>
#include <random>

#include "kpe/error.hpp"
#include "kpe/visual.hpp"

namespace kpe::synth {

namespace {

std::size_t uniform(std::mt19937_64& rng, std::size_t lo, std::size_t hi) {
  return std::uniform_int_distribution<std::size_t>(lo, hi)(rng);
}

}  // namespace

std::vector<PlantedDocument> generate(const CorpusOptions& o) {
  if (o.min_length < o.max_phrase + 1 || o.min_length > o.max_length) {
    throw ConfigError("synthetic lengths must satisfy max_phrase < min_length <= max_length");
  }
  if (o.min_phrase < 1 || o.min_phrase > o.max_phrase) throw ConfigError("bad synthetic phrase length range");
  if (o.filler_vocab == 0 || (!o.shared_pool && o.key_vocab == 0)) throw ConfigError("empty synthetic pool");
  std::mt19937_64 rng(o.seed);
  auto filler = [&] { return "f" + std::to_string(uniform(rng, 0, o.filler_vocab - 1)); };
  auto key = [&] {
    return o.shared_pool ? filler() : "k" + std::to_string(uniform(rng, 0, o.key_vocab - 1));
  };

  std::vector<PlantedDocument> out;
  for (std::size_t d = 0; d < o.documents; ++d) {
    PlantedDocument doc;
    doc.id = o.id_prefix + "-" + std::to_string(d);
    const std::size_t n = uniform(rng, o.min_length, o.max_length);
    const std::size_t k = uniform(rng, o.min_phrase, o.max_phrase);
    const std::size_t start = uniform(rng, 0, n - k);
    doc.keyphrase = {start, k};
    for (std::size_t i = 0; i < n; ++i) {
      doc.tokens.push_back(i >= start && i < start + k ? key() : filler());
    }
    out.push_back(std::move(doc));
  }
  return out;
}

std::vector<LabeledDocument> planted_corpus(const CorpusOptions& options) {
  std::vector<LabeledDocument> out;
  for (const PlantedDocument& p : generate(options)) {
    Document doc;
    doc.id = p.id;
    doc.tokens = p.tokens;
    doc.visual.assign(p.tokens.size(), VisualVector{});
    std::string phrase = join_tokens(p.tokens, p.keyphrase.start, p.keyphrase.length);
    out.push_back({std::move(doc), {std::move(phrase)}});
  }
  return out;
}

nlohmann::json layout_json(const PlantedDocument& doc) {
  constexpr double kPageWidth = 800.0;
  constexpr double kCharWidth = 7.0;
  constexpr double kLineHeight = 16.0;
  constexpr double kBodyFont = 12.0;
  constexpr double kKeyFont = 24.0;

  auto box = [](double x, double y, double w, double h) { return nlohmann::json::array({x, y, w, h}); };
  nlohmann::json runs = nlohmann::json::array();
  double x = 20.0;
  double y = 40.0;
  auto add_run = [&](std::size_t begin, std::size_t end, bool key) {
    if (begin >= end) return;
    std::string text = join_tokens(doc.tokens, begin, end - begin);
    const double scale = key ? kKeyFont / kBodyFont : 1.0;
    double w = static_cast<double>(text.size()) * kCharWidth * scale;
    const double h = kLineHeight * scale;
    if (x + w > kPageWidth - 20.0) {
      x = 20.0;
      y += 2.0 * kLineHeight;
    }
    w = std::min(w, kPageWidth - 40.0);
    runs.push_back({{"tag", key ? "b" : "span"},
                    {"box", box(x, y, w, h)},
                    {"font", key ? kKeyFont : kBodyFont},
                    {"bold", key},
                    {"text", std::move(text)}});
    x += w + kCharWidth;
  };
  const Span kp = doc.keyphrase;
  add_run(0, kp.start, false);
  add_run(kp.start, kp.end(), true);
  add_run(kp.end(), doc.tokens.size(), false);

  const double height = y + 3.0 * kLineHeight;
  nlohmann::json para = {{"tag", "p"}, {"box", box(10.0, 30.0, kPageWidth - 20.0, height - 40.0)},
                         {"font", kBodyFont}, {"bold", false}, {"children", std::move(runs)}};
  nlohmann::json root = {{"tag", "div"}, {"box", box(0.0, 0.0, kPageWidth, height)},
                         {"font", kBodyFont}, {"bold", false}, {"children", nlohmann::json::array({para})}};
  return {{"id", doc.id},
          {"page", nlohmann::json::array({kPageWidth, height})},
          {"root", std::move(root)},
          {"keyphrases", nlohmann::json::array({join_tokens(doc.tokens, kp.start, kp.length)})}};
}

std::vector<LabeledDocument> visual_corpus(const CorpusOptions& options) {
  std::vector<LabeledDocument> out;
  for (const PlantedDocument& p : generate(options)) {
    out.push_back(featurize(parse_layout(layout_json(p).dump(), p.id)));
  }
  return out;
}

std::vector<QueryLogRecord> click_log(const std::vector<PlantedDocument>& docs, bool add_noise, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::vector<QueryLogRecord> out;
  for (const PlantedDocument& d : docs) {
    QueryLogRecord rec{d.id, {join_tokens(d.tokens, d.keyphrase.start, d.keyphrase.length)}};
    if (add_noise) {
      // Navigational-style query that never occurs verbatim.
      rec.queries.push_back("www " + d.tokens[uniform(rng, 0, d.tokens.size() - 1)] + " com");
    }
    out.push_back(std::move(rec));
  }
  return out;
}

}  // namespace kpe::synth
