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

#include "kpe/visual.hpp"

#include <algorithm>
#include <array>
#include <cctype>
#include <cmath>
#include <functional>

#include "kpe/error.hpp"
#include "kpe/io.hpp"

namespace kpe {

namespace {

constexpr std::array<std::string_view, 10> kInlineTags = {"a", "span", "b", "i", "em",
                                                          "strong", "u", "small", "sup", "sub"};
constexpr std::array<std::string_view, 18> kBlockTags = {
    "div", "p",  "h1", "h2", "h3", "h4",    "h5",      "h6",     "li",
    "ul",  "ol", "table", "tr", "td", "section", "article", "header", "footer"};

double clamp01(double v) { return std::clamp(v, 0.0, 1.0); }

double number_field(const nlohmann::json& j, const char* key, const std::string& path, double fallback) {
  if (!j.contains(key)) return fallback;
  if (!j[key].is_number()) throw ParseError(path + "." + key + " must be a number");
  return j[key].get<double>();
}

}  // namespace

TagClass classify_tag(std::string_view tag) {
  std::string lower(tag);
  std::transform(lower.begin(), lower.end(), lower.begin(),
                 [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  if (std::find(kInlineTags.begin(), kInlineTags.end(), lower) != kInlineTags.end()) return TagClass::kInline;
  if (std::find(kBlockTags.begin(), kBlockTags.end(), lower) != kBlockTags.end()) return TagClass::kBlock;
  return TagClass::kNeither;
}

DomNode parse_dom_node(const nlohmann::json& j, const std::string& path) {
  if (!j.is_object()) throw ParseError(path + " must be an object");
  DomNode node;
  if (!j.contains("tag") || !j["tag"].is_string()) throw ParseError(path + ".tag must be a string");
  node.tag = j["tag"].get<std::string>();
  if (!j.contains("box") || !j["box"].is_array() || j["box"].size() != 4) {
    throw ParseError(path + ".box must be [x, y, width, height]");
  }
  std::array<double, 4> b{};
  for (std::size_t i = 0; i < 4; ++i) {
    if (!j["box"][i].is_number()) throw ParseError(path + ".box entries must be numbers");
    b[i] = j["box"][i].get<double>();
  }
  node.box = {b[0], b[1], b[2], b[3]};
  if (node.box.width < 0.0 || node.box.height < 0.0) {
    throw ParseError(path + ".box has negative width or height");
  }
  node.font_size = number_field(j, "font", path, 0.0);
  if (node.font_size < 0.0) throw ParseError(path + ".font must be >= 0");
  if (j.contains("bold")) {
    if (!j["bold"].is_boolean()) throw ParseError(path + ".bold must be a boolean");
    node.bold = j["bold"].get<bool>();
  }
  if (j.contains("text") && !j["text"].is_null()) {
    if (!j["text"].is_string()) throw ParseError(path + ".text must be a string");
    node.text = j["text"].get<std::string>();
  }
  if (j.contains("children")) {
    if (!j["children"].is_array()) throw ParseError(path + ".children must be an array");
    for (std::size_t i = 0; i < j["children"].size(); ++i) {
      node.children.push_back(parse_dom_node(j["children"][i], path + ".children[" + std::to_string(i) + "]"));
    }
  }
  return node;
}

ParsedLayout parse_layout(std::string_view json_text, const std::string& source) {
  const nlohmann::json j = io::parse_json(json_text, source);
  if (!j.is_object()) throw ParseError(source + ": layout must be a JSON object");
  ParsedLayout out;
  out.id = j.value("id", std::string());
  if (!j.contains("page") || !j["page"].is_array() || j["page"].size() != 2 || !j["page"][0].is_number() ||
      !j["page"][1].is_number()) {
    throw ParseError(source + ": \"page\" must be [width, height]");
  }
  out.page.width = j["page"][0].get<double>();
  out.page.height = j["page"][1].get<double>();
  if (!(out.page.width > 0.0) || !(out.page.height > 0.0)) {
    throw ParseError(source + ": page dimensions must be positive");
  }
  if (!j.contains("root")) throw ParseError(source + ": missing \"root\" node");
  out.root = parse_dom_node(j["root"], source + ":root");
  if (j.contains("keyphrases")) {
    for (const auto& k : j["keyphrases"]) {
      if (!k.is_string()) throw ParseError(source + ": keyphrases must be strings");
      const std::string norm = normalize_phrase(k.get<std::string>());
      if (!norm.empty()) out.keyphrases.push_back(norm);
    }
  }

  // Preorder flatten while tracking the nearest block ancestor.
  std::function<void(const DomNode&, std::ptrdiff_t)> visit = [&](const DomNode& node,
                                                                 std::ptrdiff_t block_ancestor) {
    const std::size_t idx = out.nodes.size();
    out.nodes.push_back({node.tag, node.box, node.font_size, node.bold, node.is_leaf()});
    out.page.max_font = std::max(out.page.max_font, node.font_size);
    if (node.text) {
      const std::size_t parent = block_ancestor >= 0 ? static_cast<std::size_t>(block_ancestor) : 0;
      for (auto& tok : tokenize(*node.text)) {
        out.tokens.push_back(std::move(tok));
        out.word_node.push_back(idx);
        out.word_block.push_back(parent);
      }
    }
    const std::ptrdiff_t next_block =
        classify_tag(node.tag) == TagClass::kBlock ? static_cast<std::ptrdiff_t>(idx) : block_ancestor;
    for (const auto& child : node.children) visit(child, next_block);
  };
  visit(out.root, -1);

  if (!(out.page.max_font > 0.0)) throw ParseError(source + ": no node declares a positive font size");
  if (j.contains("text")) {
    if (!j["text"].is_string()) throw ParseError(source + ": \"text\" must be a string");
    if (tokenize(j["text"].get<std::string>()) != out.tokens) {
      throw AlignmentError(source + ": layout text does not tokenize to the DOM word sequence");
    }
  }
  return out;
}

std::array<double, kNodeFeatureDim> node_features(const LayoutNode& node, const PageGeometry& page) {
  const TagClass cls = classify_tag(node.tag);
  return {clamp01(node.font_size / page.max_font),
          clamp01(node.box.width / page.width),
          clamp01(node.box.height / page.height),
          clamp01(node.box.x / page.width),
          clamp01(node.box.y / page.height),
          node.bold ? 1.0 : 0.0,
          cls == TagClass::kInline ? 1.0 : 0.0,
          cls == TagClass::kBlock ? 1.0 : 0.0,
          node.leaf ? 1.0 : 0.0};
}

VisualVector compute_word_features(const LayoutNode& word_node, const LayoutNode& parent_block,
                                   const PageGeometry& page) {
  if (!(page.width > 0.0) || !(page.height > 0.0) || !(page.max_font > 0.0)) {
    throw ConfigError("page width, height and max font must be positive");
  }
  VisualVector v{};
  const auto word = node_features(word_node, page);
  const auto block = node_features(parent_block, page);
  std::copy(word.begin(), word.end(), v.begin());
  std::copy(block.begin(), block.end(), v.begin() + kNodeFeatureDim);
  return v;
}

LabeledDocument featurize(const ParsedLayout& layout) {
  LabeledDocument out;
  out.document.id = layout.id;
  out.document.tokens = layout.tokens;
  out.document.visual.reserve(layout.tokens.size());
  for (std::size_t i = 0; i < layout.tokens.size(); ++i) {
    out.document.visual.push_back(
        compute_word_features(layout.nodes[layout.word_node[i]], layout.nodes[layout.word_block[i]], layout.page));
  }
  out.keyphrases = layout.keyphrases;
  return out;
}

std::vector<VisualVector> passthrough_features(const std::string& id, std::size_t token_count,
                                               const nlohmann::json* visual, VisualReport* report) {
  if (report) ++report->documents;
  std::vector<VisualVector> rows(token_count, VisualVector{});
  if (visual == nullptr || visual->is_null()) {
    if (report) ++report->missing_visual;
    return rows;
  }
  if (!visual->is_array()) throw AlignmentError("document '" + id + "': visual must be an array of rows");
  if (visual->size() != token_count) {
    throw AlignmentError("document '" + id + "': " + std::to_string(visual->size()) + " visual rows for " +
                         std::to_string(token_count) + " tokens");
  }
  for (std::size_t r = 0; r < token_count; ++r) {
    const auto& row = (*visual)[r];
    if (!row.is_array() || row.size() != kVisualDim) {
      throw AlignmentError("document '" + id + "': visual row " + std::to_string(r) + " has width " +
                           std::to_string(row.is_array() ? row.size() : 0) + ", expected 18");
    }
    for (std::size_t c = 0; c < kVisualDim; ++c) {
      if (!row[c].is_number()) throw AlignmentError("document '" + id + "': non-numeric visual value");
      const double v = row[c].get<double>();
      if (!std::isfinite(v)) throw AlignmentError("document '" + id + "': non-finite visual value");
      rows[r][c] = clamp01(v);
      if (report && rows[r][c] != v) ++report->clamped_values;
    }
  }
  return rows;
}

}  // namespace kpe
