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
#include <memory>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include <nlohmann/json.hpp>

#include "kpe/autodiff.hpp"
#include "kpe/document.hpp"

namespace kpe {

enum class EmbeddingSourceMode { kTrainableLookup, kFrozenFile };

std::string_view to_string(EmbeddingSourceMode mode);
EmbeddingSourceMode embedding_mode_from_string(std::string_view s);

struct EmbeddingConfig {
  std::size_t token_dim = 64;
  std::size_t position_dim = 32;
  EmbeddingSourceMode mode = EmbeddingSourceMode::kTrainableLookup;
  // Tokens seen fewer times than this map to the unknown row.
  std::size_t min_frequency = 2;
  bool use_position = true;
  bool use_visual = true;

  std::size_t hybrid_width() const {
    return token_dim + (use_position ? position_dim : 0) + (use_visual ? kVisualDim : 0);
  }
  void validate() const;
};

// pos(i)[2p] = sin(i / 10000^(2p/P)), pos(i)[2p+1] = cos(i / 10000^(2p/P)).
// Throws ConfigError for odd P.
std::vector<double> position_encoding(std::size_t position, std::size_t dims);

// Token -> row index. Index 0 is the unknown token, 1 the mask/padding token.
class Vocabulary {
 public:
  static constexpr std::size_t kUnknown = 0;
  static constexpr std::size_t kMask = 1;

  Vocabulary();
  // Tokens with corpus frequency >= min_frequency, ordered by descending
  // frequency then lexicographically.
  static Vocabulary build(const std::vector<const Document*>& corpus, std::size_t min_frequency);
  // Restores a vocabulary from its token list (reserved entries included).
  static Vocabulary from_tokens(std::vector<std::string> tokens);

  std::size_t index(std::string_view token) const;
  const std::string& token(std::size_t index) const { return tokens_.at(index); }
  std::size_t size() const { return tokens_.size(); }
  const std::vector<std::string>& tokens() const { return tokens_; }

 private:
  std::vector<std::string> tokens_;
  std::unordered_map<std::string, std::size_t> index_;
};

// Supplies the contextual part h_i of each token's embedding.
class ContextualEmbeddingSource {
 public:
  virtual ~ContextualEmbeddingSource() = default;
  virtual std::size_t dim() const = 0;
  // Rows beyond doc.size() (up to padded_len) are filled with the padding
  // embedding.
  virtual Var embed(Tape& tape, const ParameterRegistry& params, const Document& doc,
                    std::size_t padded_len) const = 0;
};

// Trainable table "embed.token" of shape vocab x dim.
class TrainableLookup final : public ContextualEmbeddingSource {
 public:
  static constexpr const char* kParameterName = "embed.token";

  TrainableLookup(const Vocabulary& vocab, std::size_t dim) : vocab_(&vocab), dim_(dim) {}
  std::size_t dim() const override { return dim_; }
  Var embed(Tape& tape, const ParameterRegistry& params, const Document& doc,
            std::size_t padded_len) const override;

 private:
  const Vocabulary* vocab_;
  std::size_t dim_;
};

// Precomputed vectors read from a sidecar file; contributes no parameters
// and no gradients. Rows are addressed by document id and token offset so
// chunked documents read the right slice.
class FrozenVectors final : public ContextualEmbeddingSource {
 public:
  explicit FrozenVectors(std::size_t dim) : dim_(dim) {}

  // Sidecar: JSON-lines {"id": str, "vectors": [[dim floats]...]}.
  static FrozenVectors load(const std::filesystem::path& path, std::size_t dim);
  void add(const std::string& id, Tensor vectors);
  bool contains(const std::string& id) const { return vectors_.count(id) != 0; }

  std::size_t dim() const override { return dim_; }
  Var embed(Tape& tape, const ParameterRegistry& params, const Document& doc,
            std::size_t padded_len) const override;

 private:
  std::size_t dim_;
  std::map<std::string, Tensor, std::less<>> vectors_;
};

// Row i = h_i ++ pos_i ++ v_i, with the position and visual slices omitted
// when disabled in the config. Rows past doc.size() are padding.
Var embed_document(Tape& tape, const ParameterRegistry& params, const Document& doc,
                   const EmbeddingConfig& config, const ContextualEmbeddingSource& source,
                   std::size_t padded_len = 0);

}  // namespace kpe
