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


#include <cmath>
#include <filesystem>
#include <fstream>

#include "doctest.h"
#include "kpe/embedding.hpp"
#include "kpe/error.hpp"

using namespace kpe;

namespace {

Document doc_of(const std::string& id, std::vector<std::string> tokens) {
  Document d;
  d.id = id;
  d.tokens = std::move(tokens);
  d.visual.assign(d.tokens.size(), VisualVector{});
  return d;
}

// Written out independently of the library: angle = pos * 10000^(-2p/P).
double reference_position(std::size_t pos, std::size_t dim, std::size_t P) {
  const double pair = static_cast<double>(dim / 2);
  const double angle = static_cast<double>(pos) * std::exp(-std::log(10000.0) * 2.0 * pair / static_cast<double>(P));
  return dim % 2 == 0 ? std::sin(angle) : std::cos(angle);
}

}  // namespace

TEST_CASE("position encoding hand values") {
  const auto enc = position_encoding(1, 4);
  REQUIRE(enc.size() == 4);
  CHECK(enc[0] == doctest::Approx(0.841471).epsilon(1e-6));
  CHECK(enc[1] == doctest::Approx(0.540302).epsilon(1e-6));
  CHECK(enc[2] == doctest::Approx(0.010000).epsilon(1e-6));
  CHECK(enc[3] == doctest::Approx(0.999950).epsilon(1e-6));

  const auto zero = position_encoding(0, 6);
  for (std::size_t p = 0; p < 6; ++p) CHECK(zero[p] == (p % 2 == 0 ? 0.0 : 1.0));
}

TEST_CASE("position encoding matches an independent formula") {
  double worst = 0.0;
  for (std::size_t P = 2; P <= 64; P += 2) {
    for (std::size_t pos = 0; pos <= 256; ++pos) {
      const auto enc = position_encoding(pos, P);
      for (std::size_t d = 0; d < P; ++d) worst = std::max(worst, std::abs(enc[d] - reference_position(pos, d, P)));
    }
  }
  CHECK(worst < 1e-12);
}

TEST_CASE("odd position width is rejected") {
  CHECK_THROWS_AS(position_encoding(3, 5), ConfigError);
  EmbeddingConfig cfg;
  cfg.position_dim = 7;
  CHECK_THROWS_AS(cfg.validate(), ConfigError);
  cfg.use_position = false;
  CHECK_NOTHROW(cfg.validate());
}

TEST_CASE("vocabulary ordering and reserved entries") {
  const Document a = doc_of("a", {"b", "a", "c", "a", "d"});
  const Document b = doc_of("b", {"c", "a", "b", "e"});
  const Vocabulary v = Vocabulary::build({&a, &b}, 2);
  // a:3, b:2, c:2, d:1, e:1
  CHECK(v.tokens() == std::vector<std::string>{"<unk>", "<mask>", "a", "b", "c"});
  CHECK(v.index("a") == 2);
  CHECK(v.index("d") == Vocabulary::kUnknown);
  CHECK(v.index("never") == Vocabulary::kUnknown);
  CHECK(v.token(Vocabulary::kMask) == "<mask>");

  const Vocabulary all = Vocabulary::build({&a, &b}, 1);
  CHECK(all.size() == 7);
  CHECK(Vocabulary::from_tokens(all.tokens()).tokens() == all.tokens());
  CHECK_THROWS_AS(Vocabulary::from_tokens({"a", "b"}), ConfigError);
  CHECK_THROWS_AS(Vocabulary::from_tokens({"<unk>", "<mask>", "x", "x"}), ConfigError);
}

TEST_CASE("hybrid embedding layout and padding") {
  Document d = doc_of("d", {"x", "y", "z"});
  d.visual[1][4] = 0.5;
  const Vocabulary v = Vocabulary::from_tokens({"<unk>", "<mask>", "x", "y"});
  EmbeddingConfig cfg;
  cfg.token_dim = 3;
  cfg.position_dim = 4;
  ParameterRegistry reg;
  Tensor table = Tensor::matrix(v.size(), 3);
  for (std::size_t r = 0; r < v.size(); ++r) {
    for (std::size_t c = 0; c < 3; ++c) table.at(r, c) = static_cast<double>(10 * r + c);
  }
  reg.add(TrainableLookup::kParameterName, table);
  TrainableLookup lookup(v, 3);

  Tape tape;
  const Var e = embed_document(tape, reg, d, cfg, lookup, 5);
  const Tensor& out = e.value();
  REQUIRE(out.rows() == 5);
  REQUIRE(out.cols() == 3 + 4 + 18);
  CHECK(cfg.hybrid_width() == 25);
  CHECK(out.at(0, 0) == 20.0);  // "x"
  CHECK(out.at(1, 2) == 32.0);  // "y"
  CHECK(out.at(2, 1) == 1.0);   // "z" is unknown
  CHECK(out.at(3, 0) == 10.0);  // padding uses the mask row
  const auto pos2 = position_encoding(2, 4);
  for (std::size_t c = 0; c < 4; ++c) CHECK(out.at(2, 3 + c) == pos2[c]);
  CHECK(out.at(1, 7 + 4) == 0.5);
  for (std::size_t c = 7; c < 25; ++c) CHECK(out.at(4, c) == 0.0);

  cfg.use_visual = false;
  cfg.use_position = false;
  Tape t2;
  CHECK(embed_document(t2, reg, d, cfg, lookup).value().cols() == 3);

  EmbeddingConfig wrong;
  wrong.token_dim = 8;
  Tape t3;
  CHECK_THROWS_AS(embed_document(t3, reg, d, wrong, lookup), ConfigError);
}

TEST_CASE("frozen vectors follow chunk offsets") {
  const auto path = std::filesystem::temp_directory_path() / "kpe_frozen_test.jsonl";
  {
    std::ofstream f(path);
    f << R"({"id": "doc", "vectors": [[1, 2], [3, 4], [5, 6], [7, 8]]})" << "\n";
  }
  const FrozenVectors fv = FrozenVectors::load(path, 2);
  CHECK(fv.contains("doc"));
  Document chunk = doc_of("doc", {"c", "d"});
  chunk.offset = 2;
  ParameterRegistry reg;
  Tape tape;
  const Tensor out = fv.embed(tape, reg, chunk, 3).value();
  CHECK(out.at(0, 0) == 5.0);
  CHECK(out.at(1, 1) == 8.0);
  CHECK(out.at(2, 0) == 0.0);

  chunk.offset = 3;
  CHECK_THROWS_AS(fv.embed(tape, reg, chunk, 0), AlignmentError);
  CHECK_THROWS_AS(fv.embed(tape, reg, doc_of("other", {"a"}), 0), Error);
  CHECK_THROWS_AS(FrozenVectors::load(path, 3), ParseError);
  std::filesystem::remove(path);
}

TEST_CASE("embedding mode names") {
  CHECK(embedding_mode_from_string("frozen_file") == EmbeddingSourceMode::kFrozenFile);
  CHECK(to_string(EmbeddingSourceMode::kTrainableLookup) == "trainable_lookup");
  CHECK_THROWS_AS(embedding_mode_from_string("bert"), ConfigError);
}
