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

#include "kpe/embedding.hpp"

#include <algorithm>
#include <cmath>

#include "kpe/error.hpp"
#include "kpe/io.hpp"

namespace kpe {

std::string_view to_string(EmbeddingSourceMode mode) {
  return mode == EmbeddingSourceMode::kFrozenFile ? "frozen_file" : "trainable_lookup";
}

EmbeddingSourceMode embedding_mode_from_string(std::string_view s) {
  if (s == "trainable_lookup") return EmbeddingSourceMode::kTrainableLookup;
  if (s == "frozen_file") return EmbeddingSourceMode::kFrozenFile;
  throw ConfigError("unknown embedding mode '" + std::string(s) + "' (trainable_lookup|frozen_file)");
}

void EmbeddingConfig::validate() const {
  if (token_dim == 0) throw ConfigError("embedding token_dim must be positive");
  if (use_position && (position_dim == 0 || position_dim % 2 != 0)) {
    throw ConfigError("position_dim must be a positive even number, got " + std::to_string(position_dim));
  }
}

std::vector<double> position_encoding(std::size_t position, std::size_t dims) {
  if (dims % 2 != 0) throw ConfigError("position encoding needs an even dimension, got " + std::to_string(dims));
  std::vector<double> out(dims);
  const double i = static_cast<double>(position);
  for (std::size_t p = 0; p < dims / 2; ++p) {
    const double freq = std::pow(10000.0, static_cast<double>(2 * p) / static_cast<double>(dims));
    out[2 * p] = std::sin(i / freq);
    out[2 * p + 1] = std::cos(i / freq);
  }
  return out;
}

// ---------------------------------------------------------------------------

Vocabulary::Vocabulary() : tokens_{"<unk>", "<mask>"}, index_{{"<unk>", kUnknown}, {"<mask>", kMask}} {}

Vocabulary Vocabulary::build(const std::vector<const Document*>& corpus, std::size_t min_frequency) {
  std::unordered_map<std::string, std::size_t> counts;
  for (const Document* d : corpus) {
    for (const auto& t : d->tokens) ++counts[t];
  }
  std::vector<std::pair<std::string, std::size_t>> kept;
  for (auto& [tok, c] : counts) {
    if (c >= std::max<std::size_t>(min_frequency, 1) && tok != "<unk>" && tok != "<mask>") kept.emplace_back(tok, c);
  }
  std::sort(kept.begin(), kept.end(), [](const auto& a, const auto& b) {
    return a.second != b.second ? a.second > b.second : a.first < b.first;
  });
  std::vector<std::string> tokens = {"<unk>", "<mask>"};
  for (auto& [tok, c] : kept) tokens.push_back(tok);
  return from_tokens(std::move(tokens));
}

Vocabulary Vocabulary::from_tokens(std::vector<std::string> tokens) {
  if (tokens.size() < 2 || tokens[kUnknown] != "<unk>" || tokens[kMask] != "<mask>") {
    throw ConfigError("vocabulary must start with the reserved <unk> and <mask> entries");
  }
  Vocabulary v;
  v.tokens_ = std::move(tokens);
  v.index_.clear();
  for (std::size_t i = 0; i < v.tokens_.size(); ++i) {
    if (!v.index_.emplace(v.tokens_[i], i).second) throw ConfigError("duplicate vocabulary entry: " + v.tokens_[i]);
  }
  return v;
}

std::size_t Vocabulary::index(std::string_view token) const {
  auto it = index_.find(std::string(token));
  return it == index_.end() ? kUnknown : it->second;
}

// ---------------------------------------------------------------------------

Var TrainableLookup::embed(Tape& tape, const ParameterRegistry& params, const Document& doc,
                           std::size_t padded_len) const {
  std::vector<std::size_t> ids;
  ids.reserve(std::max(padded_len, doc.size()));
  for (const auto& t : doc.tokens) ids.push_back(vocab_->index(t));
  while (ids.size() < padded_len) ids.push_back(Vocabulary::kMask);
  return ops::embedding_lookup(tape.parameter(params.at(kParameterName)), ids);
}

FrozenVectors FrozenVectors::load(const std::filesystem::path& path, std::size_t dim) {
  FrozenVectors fv(dim);
  io::for_each_jsonl(path, [&](std::size_t line_no, const nlohmann::json& row) {
    if (!row.contains("id") || !row["id"].is_string() || !row.contains("vectors") || !row["vectors"].is_array()) {
      throw ParseError(path.string() + ": sidecar rows need \"id\" and \"vectors\"", line_no, 1);
    }
    const auto& rows = row["vectors"];
    Tensor t = Tensor::matrix(rows.size(), dim);
    for (std::size_t r = 0; r < rows.size(); ++r) {
      if (!rows[r].is_array() || rows[r].size() != dim) {
        throw ParseError(path.string() + ": vector row " + std::to_string(r) + " is not " + std::to_string(dim) +
                             " wide",
                         line_no, 1);
      }
      for (std::size_t c = 0; c < dim; ++c) t.at(r, c) = rows[r][c].get<double>();
    }
    fv.add(row["id"].get<std::string>(), std::move(t));
  });
  return fv;
}

void FrozenVectors::add(const std::string& id, Tensor vectors) {
  if (vectors.cols() != dim_) throw ShapeError("frozen vectors for '" + id + "' have the wrong width");
  require_finite(vectors, "frozen vectors for '" + id + "'");
  vectors_[id] = std::move(vectors);
}

Var FrozenVectors::embed(Tape& tape, const ParameterRegistry&, const Document& doc, std::size_t padded_len) const {
  auto it = vectors_.find(doc.id);
  if (it == vectors_.end()) throw Error("no frozen vectors for document '" + doc.id + "'");
  const Tensor& all = it->second;
  if (doc.offset + doc.size() > all.rows()) {
    throw AlignmentError("frozen vectors for '" + doc.id + "' cover " + std::to_string(all.rows()) +
                         " tokens, document needs " + std::to_string(doc.offset + doc.size()));
  }
  Tensor out = Tensor::matrix(std::max(padded_len, doc.size()), dim_);
  std::copy_n(all.row(doc.offset), doc.size() * dim_, out.data());
  return tape.constant(std::move(out));
}

// ---------------------------------------------------------------------------

Var embed_document(Tape& tape, const ParameterRegistry& params, const Document& doc, const EmbeddingConfig& config,
                   const ContextualEmbeddingSource& source, std::size_t padded_len) {
  validate_document(doc);
  if (source.dim() != config.token_dim) throw ConfigError("contextual source width does not match token_dim");
  const std::size_t rows = std::max(padded_len, doc.size());
  std::vector<Var> parts;
  parts.push_back(source.embed(tape, params, doc, rows));
  if (config.use_position) {
    Tensor pos = Tensor::matrix(rows, config.position_dim);
    for (std::size_t i = 0; i < rows; ++i) {
      const auto enc = position_encoding(i, config.position_dim);
      std::copy(enc.begin(), enc.end(), pos.row(i));
    }
    parts.push_back(tape.constant(std::move(pos)));
  }
  if (config.use_visual) {
    Tensor vis = Tensor::matrix(rows, kVisualDim);
    for (std::size_t i = 0; i < doc.size(); ++i) std::copy(doc.visual[i].begin(), doc.visual[i].end(), vis.row(i));
    parts.push_back(tape.constant(std::move(vis)));
  }
  Var out = parts.size() == 1 ? parts.front() : ops::concat_cols(parts);
  require_finite(out.value(), "hybrid embedding of '" + doc.id + "'");
  return out;
}

}  // namespace kpe
