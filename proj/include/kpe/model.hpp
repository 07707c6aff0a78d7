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
#include <filesystem>
#include <memory>
#include <random>
#include <span>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "kpe/autodiff.hpp"
#include "kpe/document.hpp"
#include "kpe/embedding.hpp"
#include "kpe/nn.hpp"

namespace kpe {

struct ModelConfig {
  // Longest candidate n-gram K.
  std::size_t max_ngram = 5;
  // CNN filters per window; also the transformer and scorer width.
  std::size_t filters = 64;
  std::size_t heads = 2;
  std::size_t layers = 1;
  // Hidden width of the transformer's position-wise feedforward sublayer.
  std::size_t ff_hidden = 128;
  double dropout = 0.2;
  EmbeddingConfig embedding;
  bool no_transformer = false;
  bool no_position = false;
  bool no_visual = false;

  // F=512, 8 heads, P=256, scorer 512-relu-512-relu-1.
  static ModelConfig full_scale();

  // Embedding config with the ablation flags applied.
  EmbeddingConfig effective_embedding() const;
  void validate() const;
  nlohmann::json to_json() const;
  static ModelConfig from_json(const nlohmann::json& j);
};

// Joint distribution over every candidate span (i, k) of a document, in
// (k, i) order. Masked spans (past the real document end when padded)
// carry probability exactly 0.
struct SpanDistribution {
  std::size_t doc_length = 0;
  std::size_t padded_length = 0;
  std::size_t max_ngram = 0;
  std::vector<Span> spans;
  std::vector<double> probabilities;
  std::vector<std::uint8_t> mask;
};

// Scores before the softmax, still attached to the tape.
struct SpanLogits {
  Var logits;
  std::vector<Span> spans;
  std::vector<std::uint8_t> mask;
  std::size_t doc_length = 0;
  std::size_t padded_length = 0;
};

struct ForwardOptions {
  // Zero-pad the document to this many tokens (0 = no padding). Spans that
  // reach into the padding are masked.
  std::size_t pad_to = 0;
};

// Softmax over all unmasked spans at once. Throws when nothing is unmasked.
SpanDistribution score_spans(std::span<const double> scores, std::vector<Span> spans,
                             std::vector<std::uint8_t> mask, std::size_t doc_length, std::size_t padded_length,
                             std::size_t max_ngram);

struct ParameterCensus {
  std::size_t embedding_tables = 0;
  std::size_t cnn_sets = 0;
  std::size_t transformer_sets = 0;
  std::size_t feedforward_sets = 0;
  std::size_t other = 0;
};

// Counts parameter sets by name prefix: "embed.", "cnn.k<N>.",
// "transformer.", "scorer.".
ParameterCensus audit_parameters(const ParameterRegistry& registry);

// Hybrid embedding -> per-length n-gram CNNs -> one transformer shared by
// all lengths -> one feedforward scorer shared by all spans -> joint softmax.
class KeyphraseModel {
 public:
  KeyphraseModel(ModelConfig config, Vocabulary vocab, std::uint64_t seed);

  static KeyphraseModel load(const std::filesystem::path& checkpoint);
  void save(const std::filesystem::path& checkpoint) const;
  // Model config plus vocabulary, embedded in checkpoints.
  std::string config_json() const;

  const ModelConfig& config() const { return config_; }
  const Vocabulary& vocabulary() const { return *vocab_; }
  ParameterRegistry& parameters() { return params_; }
  const ParameterRegistry& parameters() const { return params_; }

  // Replaces the trainable lookup (frozen_file mode).
  void set_contextual_source(std::shared_ptr<const ContextualEmbeddingSource> source);
  const ContextualEmbeddingSource& contextual_source() const { return *source_; }

  Var embed(Tape& tape, const Document& doc, std::size_t padded_len = 0) const;
  // One (rows - k + 1) x F matrix per k = 1..min(K, rows).
  std::vector<Var> compose_ngrams(Tape& tape, Var hybrid) const;
  // Shared transformer (identity under no_transformer). Rows at or past
  // valid_rows are padding and are never attended to.
  Var contextualize(Tape& tape, Var ngrams, std::size_t valid_rows) const;
  // Shared feedforward, one scalar per row.
  Var score(Tape& tape, Var contextual) const;

  SpanLogits forward_logits(Tape& tape, const Document& doc, const ForwardOptions& options = {}) const;
  // Inference: dropout off, no gradients retained.
  SpanDistribution forward(const Document& doc, const ForwardOptions& options = {}) const;

 private:
  struct CnnBank {
    std::string weight;
    std::string bias;
    std::size_t window = 0;
  };

  ModelConfig config_;
  std::shared_ptr<const Vocabulary> vocab_;
  ParameterRegistry params_;
  std::shared_ptr<const ContextualEmbeddingSource> source_;
  std::vector<CnnBank> cnn_;
  std::vector<nn::TransformerBlock> blocks_;
  nn::Linear hidden1_;
  nn::Linear hidden2_;
  nn::Linear output_;
};

}  // namespace kpe
