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

#include "kpe/training.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <limits>
#include <map>
#include <numeric>
#include <random>
#include <sstream>

#include "kpe/error.hpp"
#include "kpe/io.hpp"
#include "kpe/optim.hpp"

namespace kpe {

std::string_view to_string(TrainingMode mode) {
  return mode == TrainingMode::kPretrain ? "pretrain" : "finetune";
}

TrainingConfig TrainingConfig::full_scale() {
  TrainingConfig c;
  c.lr_start = 0.3;
  c.lr_end = 0.001;
  return c;
}

void TrainingConfig::validate() const {
  if (!(lr_end > 0.0) || !(lr_start >= lr_end)) {
    throw ConfigError("learning rates must satisfy lr_start >= lr_end > 0");
  }
  if (batch_size < 1) throw ConfigError("batch_size must be >= 1");
  if (max_epochs < 1) throw ConfigError("max_epochs must be >= 1");
  if (max_length < 1) throw ConfigError("max_length must be >= 1");
  if (validation_fraction < 0.0 || validation_fraction >= 1.0) {
    throw ConfigError("validation_fraction must be in [0, 1)");
  }
}

nlohmann::json TrainingConfig::to_json() const {
  return {{"lr_start", lr_start},
          {"lr_end", lr_end},
          {"batch_size", batch_size},
          {"max_epochs", max_epochs},
          {"seed", seed},
          {"planned_total_steps", planned_total_steps},
          {"max_length", max_length},
          {"validation_fraction", validation_fraction},
          {"keep_epoch_checkpoints", keep_epoch_checkpoints}};
}

TrainingConfig TrainingConfig::from_json(const nlohmann::json& j) {
  TrainingConfig c;
  try {
    c.lr_start = j.value("lr_start", c.lr_start);
    c.lr_end = j.value("lr_end", c.lr_end);
    c.batch_size = j.value("batch_size", c.batch_size);
    c.max_epochs = j.value("max_epochs", c.max_epochs);
    c.seed = j.value("seed", c.seed);
    c.planned_total_steps = j.value("planned_total_steps", c.planned_total_steps);
    c.max_length = j.value("max_length", c.max_length);
    c.validation_fraction = j.value("validation_fraction", c.validation_fraction);
    c.keep_epoch_checkpoints = j.value("keep_epoch_checkpoints", c.keep_epoch_checkpoints);
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(std::string("invalid training config: ") + e.what());
  }
  c.validate();
  return c;
}

double lr_schedule(std::size_t step, double lr_start, double lr_end, std::size_t total_steps) {
  if (total_steps == 0 || step >= total_steps) return lr_end;
  if (step == 0) return lr_start;
  const double frac = static_cast<double>(step) / static_cast<double>(total_steps);
  return std::exp(std::log(lr_start) + frac * (std::log(lr_end) - std::log(lr_start)));
}

double lr_schedule(std::size_t step, const TrainingConfig& config) {
  return lr_schedule(step, config.lr_start, config.lr_end, config.planned_total_steps);
}

PreparedExamples prepare_examples(const std::vector<LabeledDocument>& docs, std::size_t max_ngram,
                                  std::size_t max_length) {
  PreparedExamples out;
  for (const LabeledDocument& doc : docs) {
    LabeledDocument truncated{truncate(doc.document, max_length), doc.keyphrases};
    auto target = build_labels(truncated, max_ngram, &out.labels);
    if (!target) {
      ++out.skipped;
      continue;
    }
    out.examples.push_back({std::move(truncated.document), std::move(*target)});
  }
  return out;
}

std::vector<double> align_target(const SpanLogits& logits, const SpanTarget& target) {
  const std::size_t n = logits.doc_length;
  std::size_t max_k = 0;
  for (const Span& s : logits.spans) max_k = std::max(max_k, s.length);
  const std::size_t expected = span_count(n, max_k);
  if (target.target.size() != expected) {
    throw ShapeError("span target has " + std::to_string(target.target.size()) + " entries, document has " +
                     std::to_string(expected) + " spans");
  }
  const std::vector<Span> unpadded = enumerate_spans(n, max_k);
  std::map<Span, double> mass;
  for (std::size_t i = 0; i < unpadded.size(); ++i) {
    if (target.target[i] != 0.0) mass[unpadded[i]] = target.target[i];
  }
  std::vector<double> aligned(logits.spans.size(), 0.0);
  for (std::size_t i = 0; i < logits.spans.size(); ++i) {
    auto it = mass.find(logits.spans[i]);
    if (it == mass.end()) continue;
    if (!logits.mask[i]) throw AlignmentError("target mass on masked span");
    aligned[i] = it->second;
    mass.erase(it);
  }
  if (!mass.empty()) throw AlignmentError("target mass on a span the model does not score");
  return aligned;
}

Var keyphrase_loss(const SpanLogits& logits, const SpanTarget& target) {
  const std::vector<double> aligned = align_target(logits, target);
  return ops::softmax_cross_entropy(logits.logits, aligned, logits.mask);
}

Var query_prediction_loss(const SpanLogits& logits, const SpanTarget& target) {
  return keyphrase_loss(logits, target);
}

double keyphrase_loss(const SpanDistribution& dist, const SpanTarget& target) {
  const std::vector<Span> unpadded = enumerate_spans(dist.doc_length, dist.max_ngram);
  if (target.target.size() != unpadded.size()) throw ShapeError("span target does not match the distribution");
  std::map<Span, std::size_t> where;
  for (std::size_t i = 0; i < dist.spans.size(); ++i) where[dist.spans[i]] = i;
  double loss = 0.0;
  for (std::size_t i = 0; i < unpadded.size(); ++i) {
    const double y = target.target[i];
    if (y == 0.0) continue;
    auto it = where.find(unpadded[i]);
    if (it == where.end() || !dist.mask[it->second]) throw AlignmentError("target mass on masked span");
    loss -= y * std::log(dist.probabilities[it->second]);
  }
  return loss;
}

nlohmann::json EpochRecord::to_json() const {
  nlohmann::json j = {{"epoch", epoch},
                      {"train_loss", train_loss},
                      {"steps", steps},
                      {"learning_rate", learning_rate},
                      {"seconds", seconds}};
  j["validation_loss"] = std::isnan(validation_loss) ? nlohmann::json(nullptr) : nlohmann::json(validation_loss);
  return j;
}

double mean_loss(const KeyphraseModel& model, const std::vector<TrainingExample>& examples) {
  if (examples.empty()) return std::numeric_limits<double>::quiet_NaN();
  double total = 0.0;
  for (const TrainingExample& ex : examples) {
    Tape tape(false);
    total += keyphrase_loss(model.forward_logits(tape, ex.document), ex.target).value().at(0, 0);
  }
  return total / static_cast<double>(examples.size());
}

void split_validation(std::vector<LabeledDocument> all, double fraction, std::uint64_t seed,
                      std::vector<LabeledDocument>& train, std::vector<LabeledDocument>& validation) {
  std::mt19937_64 rng(seed);
  std::shuffle(all.begin(), all.end(), rng);
  std::size_t held = static_cast<std::size_t>(std::floor(fraction * static_cast<double>(all.size())));
  if (fraction > 0.0 && held == 0 && all.size() > 1) held = 1;
  validation.assign(std::make_move_iterator(all.begin()), std::make_move_iterator(all.begin() + held));
  train.assign(std::make_move_iterator(all.begin() + held), std::make_move_iterator(all.end()));
}

namespace {

// Shuffles, then sorts pools of batch*8 examples by length so each batch
// holds documents of similar length, then shuffles the batch order.
std::vector<std::vector<std::size_t>> make_batches(const std::vector<TrainingExample>& examples,
                                                   std::size_t batch_size, std::mt19937_64& rng) {
  std::vector<std::size_t> order(examples.size());
  std::iota(order.begin(), order.end(), 0);
  std::shuffle(order.begin(), order.end(), rng);
  const std::size_t pool = batch_size * 8;
  for (std::size_t b = 0; b < order.size(); b += pool) {
    auto first = order.begin() + static_cast<std::ptrdiff_t>(b);
    auto last = order.begin() + static_cast<std::ptrdiff_t>(std::min(order.size(), b + pool));
    std::stable_sort(first, last, [&](std::size_t x, std::size_t y) {
      return examples[x].document.size() < examples[y].document.size();
    });
  }
  std::vector<std::vector<std::size_t>> batches;
  for (std::size_t b = 0; b < order.size(); b += batch_size) {
    batches.emplace_back(order.begin() + static_cast<std::ptrdiff_t>(b),
                         order.begin() + static_cast<std::ptrdiff_t>(std::min(order.size(), b + batch_size)));
  }
  std::shuffle(batches.begin(), batches.end(), rng);
  return batches;
}

std::string epoch_name(std::size_t epoch) {
  std::ostringstream s;
  s << "epoch-";
  s.width(4);
  s.fill('0');
  s << epoch;
  return s.str();
}

}  // namespace

TrainRunRecord run_training(KeyphraseModel& model, const std::vector<LabeledDocument>& train,
                            const std::vector<LabeledDocument>& validation, const TrainingConfig& config,
                            TrainingMode mode, const std::optional<std::filesystem::path>& run_dir,
                            const EpochCallback& on_epoch) {
  config.validate();
  const std::size_t max_ngram = model.config().max_ngram;
  PreparedExamples train_set = prepare_examples(train, max_ngram, config.max_length);
  PreparedExamples val_set = prepare_examples(validation, max_ngram, config.max_length);
  if (train_set.examples.empty()) throw Error("no training document has a matched label");

  TrainRunRecord record;
  record.skipped_documents = train_set.skipped + val_set.skipped;

  const std::size_t batches_per_epoch = (train_set.examples.size() + config.batch_size - 1) / config.batch_size;
  const std::size_t total_steps =
      config.planned_total_steps > 0 ? config.planned_total_steps : batches_per_epoch * config.max_epochs;

  if (run_dir) {
    std::filesystem::create_directories(*run_dir);
    nlohmann::json snapshot = {{"mode", std::string(to_string(mode))},
                               {"training", config.to_json()},
                               {"model", model.config().to_json()},
                               {"train_documents", train_set.examples.size()},
                               {"validation_documents", val_set.examples.size()},
                               {"skipped_documents", record.skipped_documents}};
    io::atomic_write(*run_dir / "config.json", snapshot.dump(2) + "\n");
  }

  std::mt19937_64 rng(config.seed);
  AdamOptimizer adam;
  ParameterRegistry& params = model.parameters();
  ParameterRegistry best = params;
  double best_loss = std::numeric_limits<double>::infinity();
  std::vector<nlohmann::json> metrics;
  std::size_t step = 0;

  for (std::size_t epoch = 1; epoch <= config.max_epochs; ++epoch) {
    const auto started = std::chrono::steady_clock::now();
    double loss_sum = 0.0;
    double lr = config.lr_start;
    for (const auto& batch : make_batches(train_set.examples, config.batch_size, rng)) {
      std::size_t pad_to = 0;
      for (std::size_t idx : batch) pad_to = std::max(pad_to, train_set.examples[idx].document.size());
      params.zero_grad();
      const double scale = 1.0 / static_cast<double>(batch.size());
      try {
        for (std::size_t idx : batch) {
          const TrainingExample& ex = train_set.examples[idx];
          Tape tape(true, &rng);
          SpanLogits logits = model.forward_logits(tape, ex.document, {pad_to});
          Var loss = keyphrase_loss(logits, ex.target);
          const double value = loss.value().at(0, 0);
          if (!std::isfinite(value)) throw NumericError("loss is " + std::to_string(value));
          loss_sum += value;
          tape.backward(loss);
          tape.accumulate_into(params, scale);
        }
      } catch (const NumericError& e) {
        throw NumericError("training aborted at step " + std::to_string(step) + ": " + e.what());
      }
      lr = lr_schedule(step, config.lr_start, config.lr_end, total_steps);
      adam.step(params, lr);
      ++step;
    }

    EpochRecord rec;
    rec.epoch = epoch;
    rec.train_loss = loss_sum / static_cast<double>(train_set.examples.size());
    rec.validation_loss = mean_loss(model, val_set.examples);
    rec.steps = step;
    rec.learning_rate = lr;
    rec.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - started).count();
    record.epochs.push_back(rec);

    const double selection = val_set.examples.empty() ? rec.train_loss : rec.validation_loss;
    const bool improved = selection < best_loss;
    if (improved) {
      best_loss = selection;
      best = params;
      record.best_epoch = epoch;
    }
    if (run_dir) {
      metrics.push_back(rec.to_json());
      io::write_jsonl(*run_dir / "metrics.jsonl", metrics);
      if (config.keep_epoch_checkpoints) model.save(*run_dir / epoch_name(epoch));
      if (improved) model.save(*run_dir / "best");
    }
    if (on_epoch && !on_epoch(rec, model)) break;
  }

  params = std::move(best);
  record.total_steps = step;
  record.best_loss = best_loss;
  return record;
}

}  // namespace kpe
