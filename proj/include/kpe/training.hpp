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
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "kpe/document.hpp"
#include "kpe/model.hpp"

namespace kpe {

enum class TrainingMode { kPretrain, kFinetune };

std::string_view to_string(TrainingMode mode);

struct TrainingConfig {
  // Desk defaults; full_scale() switches to 0.3 -> 0.001.
  double lr_start = 1e-3;
  double lr_end = 1e-4;
  std::size_t batch_size = 16;
  std::size_t max_epochs = 10;
  std::uint64_t seed = 0;
  // Steps over which the learning rate decays. 0 means epochs x batches.
  std::size_t planned_total_steps = 0;
  std::size_t max_length = 256;
  // Fraction of the training file held out for validation by the CLI.
  double validation_fraction = 0.1;
  // Write epoch-NNNN checkpoints in addition to best.
  bool keep_epoch_checkpoints = true;

  static TrainingConfig full_scale();
  void validate() const;
  nlohmann::json to_json() const;
  static TrainingConfig from_json(const nlohmann::json& j);
};

// exp(ln a + (t / T)(ln b - ln a)); b for t >= T and for T == 0.
double lr_schedule(std::size_t step, double lr_start, double lr_end, std::size_t total_steps);
double lr_schedule(std::size_t step, const TrainingConfig& config);

struct TrainingExample {
  Document document;
  SpanTarget target;
};

struct PreparedExamples {
  std::vector<TrainingExample> examples;
  // Documents without a single matched label inside the truncated text.
  std::size_t skipped = 0;
  LabelStats labels;
};

PreparedExamples prepare_examples(const std::vector<LabeledDocument>& docs, std::size_t max_ngram,
                                  std::size_t max_length);

// Scatters a target aligned with enumerate_spans(doc length, K) onto the
// (possibly padded) span list of `logits`. Mass on a masked span throws.
std::vector<double> align_target(const SpanLogits& logits, const SpanTarget& target);

// -sum y log f over the joint span distribution.
Var keyphrase_loss(const SpanLogits& logits, const SpanTarget& target);
// Same function; query targets come from the weak-supervision builder.
Var query_prediction_loss(const SpanLogits& logits, const SpanTarget& target);
// Value-level variant on an already normalized distribution.
double keyphrase_loss(const SpanDistribution& dist, const SpanTarget& target);

struct EpochRecord {
  std::size_t epoch = 0;
  double train_loss = 0.0;
  // NaN when no validation set was given.
  double validation_loss = 0.0;
  std::size_t steps = 0;
  double learning_rate = 0.0;
  double seconds = 0.0;

  nlohmann::json to_json() const;
};

struct TrainRunRecord {
  std::vector<EpochRecord> epochs;
  std::size_t skipped_documents = 0;
  std::size_t total_steps = 0;
  std::size_t best_epoch = 0;
  double best_loss = 0.0;
};

// Called after each epoch; return false to stop early.
using EpochCallback = std::function<bool(const EpochRecord&, const KeyphraseModel&)>;

// Seeded mini-batch Adam training. Batches group documents of similar length
// and are padded to their longest member; padding is masked out. The model
// ends up holding the parameters of the epoch with the lowest validation
// loss (training loss when no validation set is given).
//
// With a run directory: config.json, metrics.jsonl, epoch-NNNN checkpoints
// and a `best` checkpoint.
TrainRunRecord run_training(KeyphraseModel& model, const std::vector<LabeledDocument>& train,
                            const std::vector<LabeledDocument>& validation, const TrainingConfig& config,
                            TrainingMode mode, const std::optional<std::filesystem::path>& run_dir = std::nullopt,
                            const EpochCallback& on_epoch = {});

// Mean loss over examples with dropout off.
double mean_loss(const KeyphraseModel& model, const std::vector<TrainingExample>& examples);

// Deterministic train/validation split by seeded shuffle.
void split_validation(std::vector<LabeledDocument> all, double fraction, std::uint64_t seed,
                      std::vector<LabeledDocument>& train, std::vector<LabeledDocument>& validation);

}  // namespace kpe
