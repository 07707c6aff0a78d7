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


#include <algorithm>
#include <cmath>
#include <filesystem>
#include <random>

#include "doctest.h"
#include "kpe/error.hpp"
#include "kpe/gradcheck.hpp"
#include "kpe/model.hpp"
#include "kpe/synthetic.hpp"
#include "kpe/training.hpp"

using namespace kpe;

namespace {

ModelConfig small_config() {
  ModelConfig c;
  c.filters = 8;
  c.heads = 2;
  c.ff_hidden = 12;
  c.dropout = 0.0;
  c.embedding.token_dim = 6;
  c.embedding.position_dim = 4;
  c.embedding.min_frequency = 1;
  return c;
}

LabeledDocument sample_doc(std::size_t n, std::uint64_t seed) {
  synth::CorpusOptions o;
  o.documents = 1;
  o.min_length = o.max_length = n;
  o.seed = seed;
  LabeledDocument d = synth::planted_corpus(o).front();
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (auto& row : d.document.visual) {
    for (double& v : row) v = u(rng);
  }
  return d;
}

KeyphraseModel make_model(const ModelConfig& c, const LabeledDocument& d, std::uint64_t seed = 3) {
  return KeyphraseModel(c, Vocabulary::build({&d.document}, 1), seed);
}

}  // namespace

TEST_CASE("n-gram banks produce one matrix per window") {
  const LabeledDocument d = sample_doc(10, 1);
  ModelConfig c = small_config();
  c.max_ngram = 3;
  c.filters = 16;
  c.heads = 4;
  const KeyphraseModel m = make_model(c, d);
  Tape tape;
  const auto grams = m.compose_ngrams(tape, m.embed(tape, d.document));
  REQUIRE(grams.size() == 3);
  for (std::size_t k = 0; k < 3; ++k) {
    CHECK(grams[k].value().rows() == 10 - k);
    CHECK(grams[k].value().cols() == 16);
    for (double v : grams[k].value().values()) CHECK(v >= 0.0);
  }

  // Windows longer than the document are skipped.
  LabeledDocument tiny;
  tiny.document = *make_document("tiny", "two words");
  const KeyphraseModel m2 = make_model(c, tiny);
  Tape t2;
  CHECK(m2.compose_ngrams(t2, m2.embed(t2, tiny.document)).size() == 2);
  CHECK(m2.forward(tiny.document).spans.size() == 3);
}

TEST_CASE("zero filters give zero n-gram vectors") {
  const LabeledDocument d = sample_doc(9, 4);
  KeyphraseModel m = make_model(small_config(), d);
  for (Parameter* p : m.parameters().all()) {
    if (p->name.rfind("cnn.", 0) == 0) p->value.fill(0.0);
  }
  Tape tape;
  for (const Var& g : m.compose_ngrams(tape, m.embed(tape, d.document))) {
    for (double v : g.value().values()) CHECK(v == 0.0);
  }
}

TEST_CASE("no_transformer makes contextualize the identity") {
  const LabeledDocument d = sample_doc(8, 5);
  ModelConfig c = small_config();
  c.no_transformer = true;
  const KeyphraseModel m = make_model(c, d);
  CHECK_FALSE(m.parameters().contains("transformer.block0.attention.query.weight"));
  Tape tape;
  const auto grams = m.compose_ngrams(tape, m.embed(tape, d.document));
  const Var t = m.contextualize(tape, grams[1], grams[1].value().rows());
  CHECK(std::ranges::equal(t.value().values(), grams[1].value().values()));
}

TEST_CASE("contextualize is equivariant to row permutation") {
  const LabeledDocument d = sample_doc(6, 6);
  const KeyphraseModel m = make_model(small_config(), d);
  std::mt19937_64 rng(8);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  Tensor x = Tensor::matrix(6, 8);
  for (double& v : x.values()) v = u(rng);
  const std::vector<std::size_t> perm = {3, 0, 5, 1, 4, 2};
  Tensor px = Tensor::matrix(6, 8);
  for (std::size_t r = 0; r < 6; ++r) {
    for (std::size_t c = 0; c < 8; ++c) px.at(r, c) = x.at(perm[r], c);
  }
  Tape t1, t2;
  const Tensor y = m.contextualize(t1, t1.constant(x), 6).value();
  const Tensor py = m.contextualize(t2, t2.constant(px), 6).value();
  for (std::size_t r = 0; r < 6; ++r) {
    for (std::size_t c = 0; c < 8; ++c) CHECK(py.at(r, c) == doctest::Approx(y.at(perm[r], c)).epsilon(1e-12));
  }
}

TEST_CASE("parameter census") {
  const LabeledDocument d = sample_doc(12, 7);
  ModelConfig c = small_config();
  const KeyphraseModel m = make_model(c, d);
  const ParameterCensus census = audit_parameters(m.parameters());
  CHECK(census.embedding_tables == 1);
  CHECK(census.cnn_sets == 5);
  CHECK(census.transformer_sets == 1);
  CHECK(census.feedforward_sets == 1);
  CHECK(census.other == 0);

  c.layers = 2;
  const KeyphraseModel deep = make_model(c, d);
  CHECK(audit_parameters(deep.parameters()).transformer_sets == 1);
}

TEST_CASE("forward covers every span with one joint softmax") {
  const LabeledDocument d = sample_doc(12, 9);
  const KeyphraseModel m = make_model(small_config(), d);
  const SpanDistribution dist = m.forward(d.document);
  REQUIRE(dist.spans.size() == 50);
  CHECK(dist.spans == enumerate_spans(12, 5));
  double total = 0.0;
  for (double p : dist.probabilities) {
    CHECK(p > 0.0);
    total += p;
  }
  CHECK(std::abs(total - 1.0) < 1e-6);

  // Purity with dropout disabled.
  const SpanDistribution again = m.forward(d.document);
  CHECK(again.probabilities == dist.probabilities);
}

TEST_CASE("score_spans closed forms") {
  const auto spans = enumerate_spans(4, 2);
  std::vector<std::uint8_t> mask(spans.size(), 1);
  const std::vector<double> flat(spans.size(), 0.7);
  const SpanDistribution u = score_spans(flat, spans, mask, 4, 4, 2);
  for (double p : u.probabilities) CHECK(p == doctest::Approx(1.0 / 7.0));

  const std::vector<double> s = {0.1, -2.0, 3.0, 0.4, 1.5, -0.3, 0.0};
  std::vector<double> shifted = s;
  for (double& v : shifted) v += 123.0;
  const auto a = score_spans(s, spans, mask, 4, 4, 2);
  const auto b = score_spans(shifted, spans, mask, 4, 4, 2);
  for (std::size_t i = 0; i < s.size(); ++i) CHECK(a.probabilities[i] == doctest::Approx(b.probabilities[i]).epsilon(1e-12));

  mask[2] = 0;
  const auto masked = score_spans(s, spans, mask, 4, 4, 2);
  CHECK(masked.probabilities[2] == 0.0);
  double total = 0.0;
  for (double p : masked.probabilities) total += p;
  CHECK(total == doctest::Approx(1.0));

  std::fill(mask.begin(), mask.end(), 0);
  CHECK_THROWS_AS(score_spans(s, spans, mask, 4, 4, 2), Error);
}

TEST_CASE("padding never changes valid span probabilities") {
  const LabeledDocument d = sample_doc(9, 10);
  const KeyphraseModel m = make_model(small_config(), d);
  const SpanDistribution plain = m.forward(d.document);
  ForwardOptions pad;
  pad.pad_to = 14;
  const SpanDistribution padded = m.forward(d.document, pad);
  CHECK(padded.padded_length == 14);
  std::size_t valid = 0;
  for (std::size_t i = 0; i < padded.spans.size(); ++i) {
    const Span s = padded.spans[i];
    if (s.end() > 9) {
      CHECK(padded.mask[i] == 0);
      CHECK(padded.probabilities[i] == 0.0);
      continue;
    }
    ++valid;
    const std::size_t j = span_index(9, 5, s);
    CHECK(padded.probabilities[i] == doctest::Approx(plain.probabilities[j]).epsilon(1e-9));
  }
  CHECK(valid == plain.spans.size());
}

TEST_CASE("no_visual only narrows the n-gram filters") {
  const LabeledDocument d = sample_doc(12, 11);
  ModelConfig c = small_config();
  const KeyphraseModel full = make_model(c, d);
  c.no_visual = true;
  const KeyphraseModel blind = make_model(c, d);
  REQUIRE(full.parameters().names() == blind.parameters().names());
  for (const std::string& name : full.parameters().names()) {
    CAPTURE(name);
    const auto& a = full.parameters().at(name).value.shape();
    const auto& b = blind.parameters().at(name).value.shape();
    const bool cnn_weight = name.rfind("cnn.", 0) == 0 && name.find(".weight") != std::string::npos;
    if (cnn_weight) {
      CHECK(a != b);
    } else {
      CHECK(a == b);
    }
  }
  CHECK(blind.forward(d.document).spans.size() == 50);
}

TEST_CASE("checkpoint reload reproduces the distribution") {
  const LabeledDocument d = sample_doc(12, 12);
  const KeyphraseModel m = make_model(small_config(), d);
  const auto path = std::filesystem::temp_directory_path() / "kpe_model_test.ckpt";
  m.save(path);
  const KeyphraseModel back = KeyphraseModel::load(path);
  CHECK(back.vocabulary().tokens() == m.vocabulary().tokens());
  CHECK(back.config().to_json() == m.config().to_json());
  CHECK(back.forward(d.document).probabilities == m.forward(d.document).probabilities);
  std::filesystem::remove(path);
}

TEST_CASE("config validation") {
  ModelConfig c = small_config();
  c.max_ngram = 0;
  CHECK_THROWS_AS(c.validate(), ConfigError);
  c = small_config();
  c.heads = 3;
  CHECK_THROWS_AS(c.validate(), ConfigError);
  c = small_config();
  c.dropout = 1.0;
  CHECK_THROWS_AS(c.validate(), ConfigError);
  const ModelConfig p = ModelConfig::full_scale();
  CHECK(p.filters == 512);
  CHECK(p.heads == 8);
  CHECK(ModelConfig::from_json(p.to_json()).to_json() == p.to_json());
}

TEST_CASE("full model gradient check through every bank") {
  for (std::uint64_t seed : {1u, 2u}) {
    CAPTURE(seed);
    const LabeledDocument d = sample_doc(12, 20 + seed);
    KeyphraseModel m = make_model(small_config(), d, seed);
    const SpanTarget target = *build_labels(d, 5);
    const GradCheckReport rep = finite_difference_check(
        [&](Tape& tape) { return keyphrase_loss(m.forward_logits(tape, d.document), target); }, m.parameters());
    CHECK(rep.parameters.size() == m.parameters().size());
    CAPTURE(rep.worst_parameter);
    CHECK(rep.max_rel_error < 1e-4);
  }
}
