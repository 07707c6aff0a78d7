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
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

#include "kpe/document.hpp"

namespace kpe {

struct Box {
  double x = 0.0;
  double y = 0.0;
  double width = 0.0;
  double height = 0.0;
};

struct DomNode {
  std::string tag;
  Box box;
  double font_size = 0.0;
  bool bold = false;
  std::optional<std::string> text;
  std::vector<DomNode> children;

  bool is_leaf() const { return children.empty(); }
};

enum class TagClass { kInline, kBlock, kNeither };

// a, span, b, i, em, strong, u, small, sup, sub are inline; div, p, h1-h6,
// li, ul, ol, table, tr, td, section, article, header, footer are block.
TagClass classify_tag(std::string_view tag);

// Per-node slice of the feature vector, in this order:
//   font, block width, block height, x, y, bold, in-inline, in-block, in-leaf
inline constexpr std::size_t kNodeFeatureDim = kVisualDim / 2;

struct PageGeometry {
  double width = 0.0;
  double height = 0.0;
  double max_font = 0.0;
};

// Flattened view of a node, enough to compute its features.
struct LayoutNode {
  std::string tag;
  Box box;
  double font_size = 0.0;
  bool bold = false;
  bool leaf = false;
};

struct ParsedLayout {
  std::string id;
  PageGeometry page;
  DomNode root;
  // Preorder node list; word_node / word_block index into it.
  std::vector<LayoutNode> nodes;
  std::vector<std::string> tokens;
  std::vector<std::size_t> word_node;
  std::vector<std::size_t> word_block;
  std::vector<std::string> keyphrases;
};

// Layout file: {"id": str?, "page": [w, h], "root": node, "keyphrases": [str]?,
// "text": str?} where node = {"tag", "box": [x,y,w,h], "font", "bold",
// "text"?, "children": [...]?}. Tokens are collected depth-first from node
// text; each token maps to the node carrying the text, and its parent block
// is the nearest block-tagged strict ancestor (the root if none, the node
// itself if it is the root). When "text" is present it must tokenize to the
// same sequence (AlignmentError otherwise).
ParsedLayout parse_layout(std::string_view json_text, const std::string& source = "layout");
DomNode parse_dom_node(const nlohmann::json& j, const std::string& path);

// Half of the feature vector for one node.
std::array<double, kNodeFeatureDim> node_features(const LayoutNode& node, const PageGeometry& page);

// Word-level half followed by the parent-block half. Continuous values are
// divided by the page dimensions (or the page max font) and clamped to [0,1].
VisualVector compute_word_features(const LayoutNode& word_node, const LayoutNode& parent_block,
                                   const PageGeometry& page);

// Layout -> labeled document with one visual row per token.
LabeledDocument featurize(const ParsedLayout& layout);

struct VisualReport {
  std::size_t documents = 0;
  std::size_t missing_visual = 0;
  std::size_t clamped_values = 0;
};

// Validates a precomputed visual array (rows x 18, one row per token) and
// clamps values to [0, 1]. A null/absent array yields zero rows and is
// counted in report.missing_visual. Wrong width or row count raises
// AlignmentError naming the document.
std::vector<VisualVector> passthrough_features(const std::string& id, std::size_t token_count,
                                               const nlohmann::json* visual, VisualReport* report = nullptr);

}  // namespace kpe
