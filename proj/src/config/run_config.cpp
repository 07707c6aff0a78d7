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

#include "kpe/run_config.hpp"

#include <functional>
#include <map>

#include "kpe/error.hpp"
#include "kpe/io.hpp"

namespace kpe {

namespace {

using Json = nlohmann::json;

struct Field {
  std::function<Json(const RunConfig&)> get;
  std::function<void(RunConfig&, const Json&)> put;
};

template <typename T, typename Owner>
Field field(Owner RunConfig::*owner, T Owner::*member) {
  return {[=](const RunConfig& c) { return Json((c.*owner).*member); },
          [=](RunConfig& c, const Json& j) { (c.*owner).*member = j.get<T>(); }};
}

template <typename T>
Field top(T RunConfig::*member) {
  return {[=](const RunConfig& c) { return Json(c.*member); },
          [=](RunConfig& c, const Json& j) { c.*member = j.get<T>(); }};
}

template <typename T>
Field embedding(T EmbeddingConfig::*member) {
  return {[=](const RunConfig& c) { return Json(c.model.embedding.*member); },
          [=](RunConfig& c, const Json& j) { c.model.embedding.*member = j.get<T>(); }};
}

const std::map<std::string, Field>& fields() {
  static const std::map<std::string, Field> table = {
      {"model.max_ngram", field(&RunConfig::model, &ModelConfig::max_ngram)},
      {"model.filters", field(&RunConfig::model, &ModelConfig::filters)},
      {"model.heads", field(&RunConfig::model, &ModelConfig::heads)},
      {"model.layers", field(&RunConfig::model, &ModelConfig::layers)},
      {"model.ff_hidden", field(&RunConfig::model, &ModelConfig::ff_hidden)},
      {"model.dropout", field(&RunConfig::model, &ModelConfig::dropout)},
      {"model.no_transformer", field(&RunConfig::model, &ModelConfig::no_transformer)},
      {"model.no_position", field(&RunConfig::model, &ModelConfig::no_position)},
      {"model.no_visual", field(&RunConfig::model, &ModelConfig::no_visual)},
      {"model.token_dim", embedding(&EmbeddingConfig::token_dim)},
      {"model.position_dim", embedding(&EmbeddingConfig::position_dim)},
      {"model.min_frequency", embedding(&EmbeddingConfig::min_frequency)},
      {"model.embedding_mode",
       {[](const RunConfig& c) { return Json(std::string(to_string(c.model.embedding.mode))); },
        [](RunConfig& c, const Json& j) { c.model.embedding.mode = embedding_mode_from_string(j.get<std::string>()); }}},
      {"train.lr_start", field(&RunConfig::training, &TrainingConfig::lr_start)},
      {"train.lr_end", field(&RunConfig::training, &TrainingConfig::lr_end)},
      {"train.batch_size", field(&RunConfig::training, &TrainingConfig::batch_size)},
      {"train.max_epochs", field(&RunConfig::training, &TrainingConfig::max_epochs)},
      {"train.planned_total_steps", field(&RunConfig::training, &TrainingConfig::planned_total_steps)},
      {"train.max_length", field(&RunConfig::training, &TrainingConfig::max_length)},
      {"train.validation_fraction", field(&RunConfig::training, &TrainingConfig::validation_fraction)},
      {"train.keep_epoch_checkpoints", field(&RunConfig::training, &TrainingConfig::keep_epoch_checkpoints)},
      {"data.frozen_vectors", field(&RunConfig::data, &DataConfig::frozen_vectors)},
      {"data.stopwords", field(&RunConfig::data, &DataConfig::stopwords)},
      {"data.blocklist", field(&RunConfig::data, &DataConfig::blocklist)},
      {"data.chunk_len", field(&RunConfig::data, &DataConfig::chunk_len)},
      {"data.predict_k", field(&RunConfig::data, &DataConfig::predict_k)},
      {"seed", top(&RunConfig::seed)},
      {"threads", top(&RunConfig::threads)},
  };
  return table;
}

}  // namespace

RunConfig RunConfig::full_scale() {
  RunConfig c;
  c.model = ModelConfig::full_scale();
  c.training = TrainingConfig::full_scale();
  return c;
}

nlohmann::json RunConfig::to_flat_json() const {
  Json j = Json::object();
  for (const auto& [key, f] : fields()) j[key] = f.get(*this);
  return j;
}

void RunConfig::apply_flat_json(const nlohmann::json& j, const std::string& source) {
  if (!j.is_object()) throw ConfigError(source + ": config must be a JSON object of dotted keys");
  for (const auto& [key, value] : j.items()) {
    auto it = fields().find(key);
    if (it == fields().end()) throw ConfigError(source + ": unknown config key '" + key + "'");
    try {
      it->second.put(*this, value);
    } catch (const nlohmann::json::exception&) {
      throw ConfigError(source + ": key '" + key + "' has the wrong type (got " + value.dump() + ", expected " +
                        std::string(it->second.get(*this).type_name()) + ")");
    }
  }
}

void RunConfig::merge_file(const std::filesystem::path& path) {
  apply_flat_json(io::parse_json(io::read_file(path), path.string()), path.string());
}

void RunConfig::set(const std::string& key, const std::string& value) {
  auto it = fields().find(key);
  if (it == fields().end()) throw ConfigError("unknown config key '" + key + "'");
  Json current = it->second.get(*this);
  Json parsed;
  if (current.is_string()) {
    parsed = value;
  } else {
    try {
      parsed = Json::parse(value);
    } catch (const nlohmann::json::exception&) {
      throw ConfigError("cannot parse value '" + value + "' for key '" + key + "'");
    }
    // Unsigned fields reject negative or fractional input instead of wrapping.
    if (current.is_number_unsigned() && !parsed.is_number_unsigned()) {
      throw ConfigError("key '" + key + "' needs a non-negative integer, got '" + value + "'");
    }
  }
  apply_flat_json(Json{{key, parsed}}, "--set");
}

void RunConfig::apply_ablations(std::string_view list) {
  std::size_t begin = 0;
  while (begin <= list.size()) {
    const std::size_t comma = list.find(',', begin);
    const std::string_view name =
        list.substr(begin, comma == std::string_view::npos ? std::string_view::npos : comma - begin);
    if (name == "no_transformer") {
      model.no_transformer = true;
    } else if (name == "no_position") {
      model.no_position = true;
    } else if (name == "no_visual") {
      model.no_visual = true;
    } else if (!name.empty()) {
      throw ConfigError("unknown ablation '" + std::string(name) +
                        "' (expected no_transformer, no_position or no_visual)");
    }
    if (comma == std::string_view::npos) break;
    begin = comma + 1;
  }
}

std::vector<std::string> RunConfig::keys() {
  std::vector<std::string> out;
  for (const auto& [key, f] : fields()) out.push_back(key);
  return out;
}

void RunConfig::validate() const {
  model.validate();
  training.validate();
  if (threads < 1) throw ConfigError("threads must be >= 1");
  if (data.chunk_len < 1) throw ConfigError("data.chunk_len must be >= 1");
  if (data.predict_k < 1) throw ConfigError("data.predict_k must be >= 1");
  if (model.embedding.mode == EmbeddingSourceMode::kFrozenFile && data.frozen_vectors.empty()) {
    throw ConfigError("embedding_mode frozen_file needs data.frozen_vectors");
  }
}

std::string RunConfig::digest() const { return io::sha256_hex(to_flat_json().dump()); }

}  // namespace kpe
