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

#include "kpe/dataset.hpp"

#include "kpe/error.hpp"
#include "kpe/io.hpp"

namespace kpe {

LabeledDocument document_from_json(const nlohmann::json& j, DatasetReport* report) {
  if (!j.is_object()) throw ParseError("dataset record must be an object");
  if (!j.contains("id") || !j["id"].is_string()) throw ParseError("dataset record needs a string \"id\"");
  if (!j.contains("text") || !j["text"].is_string()) {
    throw ParseError("document '" + j["id"].get<std::string>() + "' needs a string \"text\"");
  }
  LabeledDocument out;
  out.document.id = j["id"].get<std::string>();
  out.document.tokens = tokenize(j["text"].get<std::string>());
  // Empty documents are rejected by the caller; keep them out of the visual counts.
  if (out.document.tokens.empty()) return out;
  const nlohmann::json* visual = j.contains("visual") ? &j["visual"] : nullptr;
  out.document.visual =
      passthrough_features(out.document.id, out.document.tokens.size(), visual, report ? &report->visual : nullptr);
  if (j.contains("keyphrases")) {
    if (!j["keyphrases"].is_array()) throw ParseError("document '" + out.document.id + "': keyphrases must be a list");
    for (const auto& k : j["keyphrases"]) {
      if (!k.is_string()) throw ParseError("document '" + out.document.id + "': keyphrases must be strings");
      std::string norm = normalize_phrase(k.get<std::string>());
      if (norm.empty()) {
        if (report) ++report->dropped_empty_keyphrases;
        continue;
      }
      out.keyphrases.push_back(std::move(norm));
    }
  }
  return out;
}

nlohmann::json document_to_json(const LabeledDocument& doc, const std::string& provenance) {
  nlohmann::json j;
  j["id"] = doc.document.id;
  j["text"] = join_tokens(doc.document.tokens, 0, doc.document.tokens.size());
  bool any_visual = false;
  for (const auto& row : doc.document.visual) {
    for (double v : row) any_visual = any_visual || v != 0.0;
  }
  if (any_visual) {
    nlohmann::json rows = nlohmann::json::array();
    for (const auto& row : doc.document.visual) rows.push_back(row);
    j["visual"] = std::move(rows);
  }
  j["keyphrases"] = doc.keyphrases;
  if (!provenance.empty()) j["provenance"] = provenance;
  return j;
}

Dataset read_dataset(const std::filesystem::path& path) {
  Dataset ds;
  io::for_each_jsonl(path, [&](std::size_t line_no, const nlohmann::json& row) {
    ++ds.report.lines;
    LabeledDocument doc;
    try {
      doc = document_from_json(row, &ds.report);
    } catch (const ParseError& e) {
      throw ParseError(path.string() + ": " + e.what(), line_no, 1);
    } catch (const AlignmentError& e) {
      throw AlignmentError(path.string() + " line " + std::to_string(line_no) + ": " + e.what());
    }
    if (doc.document.tokens.empty()) {
      ++ds.report.rejected_empty;
      return;
    }
    ++ds.report.loaded;
    ds.documents.push_back(std::move(doc));
  });
  return ds;
}

void write_dataset(const std::filesystem::path& path, const std::vector<LabeledDocument>& docs,
                   const std::string& provenance) {
  std::vector<nlohmann::json> rows;
  rows.reserve(docs.size());
  for (const auto& d : docs) rows.push_back(document_to_json(d, provenance));
  io::write_jsonl(path, rows);
}

}  // namespace kpe
