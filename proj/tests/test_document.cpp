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

#include <filesystem>
#include <fstream>

#include "doctest.h"
#include "kpe/dataset.hpp"
#include "kpe/document.hpp"
#include "kpe/error.hpp"

using namespace kpe;
namespace fs = std::filesystem;

TEST_CASE("tokenizer lowercases and detaches punctuation") {
  CHECK(tokenize("Hello, World!") == std::vector<std::string>{"hello", ",", "world", "!"});
  CHECK(tokenize("  a\tb\n") == std::vector<std::string>{"a", "b"});
  CHECK(tokenize("e-mail") == std::vector<std::string>{"e", "-", "mail"});
  CHECK(tokenize("").empty());
  CHECK(tokenize("caf\xc3\xa9") == std::vector<std::string>{"caf\xc3\xa9"});
  CHECK(normalize_phrase("  New   YORK ") == "new york");
  CHECK(is_punctuation_token(","));
  CHECK_FALSE(is_punctuation_token("a,"));
}

TEST_CASE("span enumeration orders by length then start") {
  auto spans = enumerate_spans(4, 3);
  REQUIRE(spans.size() == 4 + 3 + 2);
  CHECK(spans[0] == Span{0, 1});
  CHECK(spans[4] == Span{0, 2});
  CHECK(spans[8] == Span{1, 3});
  CHECK(span_count(12, 5) == 50);
  CHECK(span_count(3, 5) == 3 + 2 + 1);
  for (std::size_t i = 0; i < spans.size(); ++i) CHECK(span_index(4, 3, spans[i]) == i);
  CHECK_THROWS(span_index(4, 3, Span{3, 2}));
}

TEST_CASE("phrase matching finds every occurrence") {
  auto doc = *make_document("d", "cheap flights to paris and cheap flights home");
  auto m = match_phrase(doc, "Cheap Flights", 5);
  CHECK(m.spans == std::vector<Span>{{0, 2}, {5, 2}});
  CHECK(match_phrase(doc, "hotels", 5).spans.empty());
  CHECK(match_phrase(doc, "a b c d e f", 5).unmatchable);
  CHECK(match_phrase(doc, "", 5).unmatchable);
}

TEST_CASE("labels are uniform over the union of positive spans") {
  LabeledDocument ld{*make_document("d", "a b c a b d"), {"a b", "d", "zzz"}};
  LabelStats stats;
  auto t = build_labels(ld, 5, &stats);
  REQUIRE(t.has_value());
  CHECK(t->positives.size() == 3);
  double total = 0.0;
  for (double v : t->target) total += v;
  CHECK(total == doctest::Approx(1.0));
  CHECK(t->target[span_index(6, 5, {0, 2})] == doctest::Approx(1.0 / 3));
  CHECK(t->target[span_index(6, 5, {3, 2})] == doctest::Approx(1.0 / 3));
  CHECK(t->target[span_index(6, 5, {5, 1})] == doctest::Approx(1.0 / 3));
  CHECK(stats.unmatched_phrases == 1);

  LabeledDocument none{*make_document("e", "x y z"), {"q"}};
  CHECK_FALSE(build_labels(none, 5).has_value());
}

TEST_CASE("keyphrase past the truncation point is not a label") {
  std::string text;
  for (int i = 0; i < 300; ++i) text += "w" + std::to_string(i) + " ";
  LabeledDocument ld{*make_document("long", text), {"w280"}};
  ld.document = truncate(ld.document, 256);
  CHECK(ld.document.size() == 256);
  CHECK_FALSE(build_labels(ld, 5).has_value());
}

TEST_CASE("chunks are consecutive and keep offsets") {
  std::string text;
  for (int i = 0; i < 10; ++i) text += "t" + std::to_string(i) + " ";
  auto doc = *make_document("d", text);
  auto chunks = split_chunks(doc, 4);
  REQUIRE(chunks.size() == 3);
  CHECK(chunks[0].offset == 0);
  CHECK(chunks[1].offset == 4);
  CHECK(chunks[2].offset == 8);
  CHECK(chunks[2].size() == 2);
  CHECK(chunks[1].tokens[0] == "t4");
  CHECK(chunks[1].visual.size() == 4);
  CHECK(chunks[1].id == "d");
}

TEST_CASE("empty text yields no document") {
  CHECK_FALSE(make_document("e", "   ").has_value());
}

TEST_CASE("dataset files round-trip and report problems with line numbers") {
  const fs::path dir = fs::temp_directory_path() / "kpe_test_document";
  fs::create_directories(dir);
  const fs::path p = dir / "data.jsonl";

  LabeledDocument a{*make_document("a", "alpha beta gamma"), {"beta"}};
  a.document.visual[1][0] = 0.5;
  LabeledDocument b{*make_document("b", "delta"), {}};
  write_dataset(p, {a, b}, "query_prediction");
  Dataset ds = read_dataset(p);
  REQUIRE(ds.documents.size() == 2);
  CHECK(ds.documents[0].document.tokens == a.document.tokens);
  CHECK(ds.documents[0].document.visual[1][0] == 0.5);
  CHECK(ds.documents[0].keyphrases == std::vector<std::string>{"beta"});

  {
    std::ofstream out(p);
    out << "{\"id\": \"x\", \"text\": \"one two\"}\n";
    out << "{\"id\": \"empty\", \"text\": \"  \"}\n";
    out << "{\"id\": \"y\", \"text\": \"three\", \"visual\": [[0,0]]}\n";
  }
  try {
    read_dataset(p);
    FAIL("expected an alignment error");
  } catch (const Error& e) {
    CHECK(std::string(e.what()).find("line 3") != std::string::npos);
  }
  {
    std::ofstream out(p);
    out << "{\"id\": \"x\", \"text\": \"one two\"}\n";
    out << "{\"id\": \"empty\", \"text\": \"  \"}\n";
  }
  ds = read_dataset(p);
  CHECK(ds.documents.size() == 1);
  CHECK(ds.report.rejected_empty == 1);
  CHECK(ds.report.visual.missing_visual == 1);
}
