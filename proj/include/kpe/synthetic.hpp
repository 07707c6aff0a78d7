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
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "kpe/document.hpp"
#include "kpe/weak_supervision.hpp"

namespace kpe::synth {

// Documents are runs of filler words with one keyphrase of 1..3 words
// planted at a random position. Filler and keyphrase words come from
// disjoint pools ("f<i>" and "k<i>") unless shared_pool is set, in which
// case both draw from one pool and only the layout can tell them apart.
struct CorpusOptions {
  std::size_t documents = 32;
  std::size_t min_length = 12;
  std::size_t max_length = 20;
  std::size_t min_phrase = 1;
  std::size_t max_phrase = 3;
  std::size_t filler_vocab = 40;
  std::size_t key_vocab = 30;
  bool shared_pool = false;
  std::uint64_t seed = 0;
  std::string id_prefix = "doc";
};

struct PlantedDocument {
  std::vector<std::string> tokens;
  Span keyphrase;
  std::string id;
};

std::vector<PlantedDocument> generate(const CorpusOptions& options);

// Text-only labeled documents (zero visual rows).
std::vector<LabeledDocument> planted_corpus(const CorpusOptions& options);

// Layout JSON for one planted document: a div holding a p of inline spans,
// with the keyphrase in a bold <b> run set in a larger font.
nlohmann::json layout_json(const PlantedDocument& doc);

// planted_corpus routed through layout parsing and featurization.
std::vector<LabeledDocument> visual_corpus(const CorpusOptions& options);

// One click record per document: the planted phrase plus, when
// add_noise is set, a filler bigram absent from the document.
std::vector<QueryLogRecord> click_log(const std::vector<PlantedDocument>& docs, bool add_noise, std::uint64_t seed);

}  // namespace kpe::synth
