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

#include "kpe/model.hpp"

#include <algorithm>
#include <set>

#include "kpe/checkpoint.hpp"
#include "kpe/error.hpp"

namespace kpe {

ModelConfig ModelConfig::full_scale() {
  ModelConfig c;
  c.filters = 512;
  c.heads = 8;
  c.ff_hidden = 2048;
  c.embedding.position_dim = 256;
  c.embedding.token_dim = 1024;
  return c;
}

EmbeddingConfig ModelConfig::effective_embedding() const {
  EmbeddingConfig e = embedding;
  e.use_position = embedding.use_position && !no_position;
  e.use_visual = embedding.use_visual && !no_visual;
  return e;
}

void ModelConfig::validate() const {
  if (max_ngram < 1) throw ConfigError("max_ngram must be >= 1");
  if (filters < 1) throw ConfigError("filters must be >= 1");
  if (!no_transformer) {
    if (heads < 1 || filters % heads != 0) {
      throw ConfigError("filters (" + std::to_string(filters) + ") must be divisible by heads (" +
                        std::to_string(heads) + ")");
    }
    if (layers < 1) throw ConfigError("layers must be >= 1");
    if (ff_hidden < 1) throw ConfigError("ff_hidden must be >= 1");
  }
  if (dropout < 0.0 || dropout >= 1.0) throw ConfigError("dropout must be in [0, 1)");
  effective_embedding().validate();
}

nlohmann::json ModelConfig::to_json() const {
  return {{"max_ngram", max_ngram},
          {"filters", filters},
          {"heads", heads},
          {"layers", layers},
          {"ff_hidden", ff_hidden},
          {"dropout", dropout},
          {"token_dim", embedding.token_dim},
          {"position_dim", embedding.position_dim},
          {"embedding_mode", std::string(to_string(embedding.mode))},
          {"min_frequency", embedding.min_frequency},
          {"no_transformer", no_transformer},
          {"no_position", no_position},
          {"no_visual", no_visual}};
}

ModelConfig ModelConfig::from_json(const nlohmann::json& j) {
  ModelConfig c;
  try {
    c.max_ngram = j.value("max_ngram", c.max_ngram);
    c.filters = j.value("filters", c.filters);
    c.heads = j.value("heads", c.heads);
    c.layers = j.value("layers", c.layers);
    c.ff_hidden = j.value("ff_hidden", c.ff_hidden);
    c.dropout = j.value("dropout", c.dropout);
    c.embedding.token_dim = j.value("token_dim", c.embedding.token_dim);
    c.embedding.position_dim = j.value("position_dim", c.embedding.position_dim);
    c.embedding.mode = embedding_mode_from_string(j.value("embedding_mode", std::string("trainable_lookup")));
    c.embedding.min_frequency = j.value("min_frequency", c.embedding.min_frequency);
    c.no_transformer = j.value("no_transformer", false);
    c.no_position = j.value("no_position", false);
    c.no_visual = j.value("no_visual", false);
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(std::string("invalid model config: ") + e.what());
  }
  c.validate();
  return c;
}

// ---------------------------------------------------------------------------

SpanDistribution score_spans(std::span<const double> scores, std::vector<Span> spans, std::vector<std::uint8_t> mask,
                             std::size_t doc_length, std::size_t padded_length, std::size_t max_ngram) {
  if (scores.size() != spans.size() || mask.size() != spans.size()) {
    throw ShapeError("score_spans: scores, spans and mask differ in length");
  }
  if (std::none_of(mask.begin(), mask.end(), [](std::uint8_t m) { return m != 0; })) {
    throw Error("score_spans: no unmasked spans");
  }
  SpanDistribution d;
  d.doc_length = doc_length;
  d.padded_length = padded_length;
  d.max_ngram = max_ngram;
  d.probabilities = masked_softmax(scores, mask);
  d.spans = std::move(spans);
  d.mask = std::move(mask);
  return d;
}

ParameterCensus audit_parameters(const ParameterRegistry& registry) {
  std::set<std::string> embed, cnn, transformer, scorer;
  ParameterCensus c;
  for (const auto& name : registry.names()) {
    const auto dot = name.find('.');
    const std::string head = name.substr(0, dot);
    if (head == "embed") {
      embed.insert(name);
    } else if (head == "cnn") {
      const auto second = name.find('.', dot + 1);
      cnn.insert(name.substr(0, second));
    } else if (head == "transformer") {
      transformer.insert(head);
    } else if (head == "scorer") {
      scorer.insert(head);
    } else {
      ++c.other;
    }
  }
  c.embedding_tables = embed.size();
  c.cnn_sets = cnn.size();
  c.transformer_sets = transformer.size();
  c.feedforward_sets = scorer.size();
  return c;
}

// ---------------------------------------------------------------------------

KeyphraseModel::KeyphraseModel(ModelConfig config, Vocabulary vocab, std::uint64_t seed)
    : config_(std::move(config)), vocab_(std::make_shared<const Vocabulary>(std::move(vocab))) {
  config_.validate();
  std::mt19937_64 rng(seed);
  const EmbeddingConfig emb = config_.effective_embedding();
  const std::size_t width = emb.hybrid_width();
  const std::size_t f = config_.filters;

  if (emb.mode == EmbeddingSourceMode::kTrainableLookup) {
    Tensor table = nn::xavier_uniform({vocab_->size(), emb.token_dim}, vocab_->size(), emb.token_dim, rng);
    std::fill_n(table.row(Vocabulary::kMask), emb.token_dim, 0.0);
    params_.add(TrainableLookup::kParameterName, std::move(table));
    source_ = std::make_shared<TrainableLookup>(*vocab_, emb.token_dim);
  }

  for (std::size_t k = 1; k <= config_.max_ngram; ++k) {
    const std::string prefix = "cnn.k" + std::to_string(k);
    CnnBank bank{prefix + ".weight", prefix + ".bias", k};
    params_.add(bank.weight, nn::xavier_uniform({k * width, f}, k * width, f, rng));
    params_.add(bank.bias, Tensor({f}, 0.0));
    cnn_.push_back(std::move(bank));
  }

  if (!config_.no_transformer) {
    for (std::size_t l = 0; l < config_.layers; ++l) {
      blocks_.push_back(nn::TransformerBlock::create(params_, "transformer.block" + std::to_string(l), f,
                                                     config_.heads, config_.ff_hidden, config_.dropout, rng));
    }
  }

  hidden1_ = nn::Linear::create(params_, "scorer.hidden1", f, f, rng);
  hidden2_ = nn::Linear::create(params_, "scorer.hidden2", f, f, rng);
  output_ = nn::Linear::create(params_, "scorer.output", f, 1, rng);
}

std::string KeyphraseModel::config_json() const {
  nlohmann::json j;
  j["model"] = config_.to_json();
  j["vocabulary"] = vocab_->tokens();
  return j.dump();
}

void KeyphraseModel::save(const std::filesystem::path& checkpoint) const {
  save_checkpoint(checkpoint, params_, config_json());
}

KeyphraseModel KeyphraseModel::load(const std::filesystem::path& checkpoint) {
  Checkpoint ck = load_checkpoint(checkpoint);
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(ck.config_json);
  } catch (const nlohmann::json::exception&) {
    throw ParseError(checkpoint.string() + ": embedded config is not valid JSON");
  }
  if (!j.contains("model") || !j.contains("vocabulary")) {
    throw ParseError(checkpoint.string() + ": embedded config lacks model or vocabulary");
  }
  KeyphraseModel model(ModelConfig::from_json(j["model"]),
                       Vocabulary::from_tokens(j["vocabulary"].get<std::vector<std::string>>()), 0);
  assign_parameters(model.params_, ck.parameters);
  return model;
}

void KeyphraseModel::set_contextual_source(std::shared_ptr<const ContextualEmbeddingSource> source) {
  if (!source) throw ConfigError("contextual source must not be null");
  if (source->dim() != config_.embedding.token_dim) {
    throw ConfigError("contextual source width " + std::to_string(source->dim()) + " does not match token_dim " +
                      std::to_string(config_.embedding.token_dim));
  }
  source_ = std::move(source);
}

Var KeyphraseModel::embed(Tape& tape, const Document& doc, std::size_t padded_len) const {
  if (!source_) throw ConfigError("frozen_file mode needs frozen vectors (set_contextual_source)");
  return embed_document(tape, params_, doc, config_.effective_embedding(), *source_, padded_len);
}

std::vector<Var> KeyphraseModel::compose_ngrams(Tape& tape, Var hybrid) const {
  std::vector<Var> out;
  const std::size_t rows = hybrid.rows();
  for (const CnnBank& bank : cnn_) {
    if (bank.window > rows) break;
    Var g = ops::conv1d(hybrid, tape.parameter(params_.at(bank.weight)), tape.parameter(params_.at(bank.bias)),
                        bank.window);
    out.push_back(ops::dropout(ops::relu(g), config_.dropout));
  }
  return out;
}

Var KeyphraseModel::contextualize(Tape& tape, Var ngrams, std::size_t valid_rows) const {
  if (config_.no_transformer) return ngrams;
  Var x = ngrams;
  for (const auto& block : blocks_) x = block(tape, params_, x, std::max<std::size_t>(valid_rows, 1));
  return x;
}

Var KeyphraseModel::score(Tape& tape, Var contextual) const {
  Var h = ops::dropout(ops::relu(hidden1_(tape, params_, contextual)), config_.dropout);
  h = ops::dropout(ops::relu(hidden2_(tape, params_, h)), config_.dropout);
  return output_(tape, params_, h);
}

SpanLogits KeyphraseModel::forward_logits(Tape& tape, const Document& doc, const ForwardOptions& options) const {
  const std::size_t n = doc.size();
  const std::size_t rows = std::max(n, options.pad_to);
  Var hybrid = embed(tape, doc, rows);

  SpanLogits out;
  out.doc_length = n;
  out.padded_length = rows;
  std::vector<Var> scores;
  const std::vector<Var> grams = compose_ngrams(tape, hybrid);
  for (std::size_t idx = 0; idx < grams.size(); ++idx) {
    const std::size_t k = idx + 1;
    require_finite(grams[idx].value(), "n-gram CNN k=" + std::to_string(k));
    const std::size_t valid = n >= k ? n - k + 1 : 0;
    Var t = contextualize(tape, grams[idx], valid);
    require_finite(t.value(), "transformer k=" + std::to_string(k));
    scores.push_back(score(tape, t));
    for (std::size_t i = 0; i < grams[idx].rows(); ++i) {
      out.spans.push_back({i, k});
      out.mask.push_back(i < valid ? 1 : 0);
    }
  }
  out.logits = ops::concat_rows(scores);
  require_finite(out.logits.value(), "span scores of '" + doc.id + "'");
  return out;
}

SpanDistribution KeyphraseModel::forward(const Document& doc, const ForwardOptions& options) const {
  Tape tape(false);
  SpanLogits logits = forward_logits(tape, doc, options);
  return score_spans(logits.logits.value().values(), std::move(logits.spans), std::move(logits.mask),
                     logits.doc_length, logits.padded_length, config_.max_ngram);
}

}  // namespace kpe
