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


// Acceptance run: prints one PASS/FAIL line per criterion and exits non-zero
// if any criterion fails.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <filesystem>
#include <functional>
#include <iterator>
#include <map>
#include <random>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "kpe/baselines.hpp"
#include "kpe/embedding.hpp"
#include "kpe/eval.hpp"
#include "kpe/gradcheck.hpp"
#include "kpe/model.hpp"
#include "kpe/synthetic.hpp"
#include "kpe/training.hpp"
#include "kpe/weak_supervision.hpp"

using namespace kpe;

namespace {

struct Outcome {
  bool pass = false;
  std::string detail;
};

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t) { return std::chrono::duration<double>(Clock::now() - t).count(); }

std::string fmt(const char* f, auto... args) {
  char buf[512];
  std::snprintf(buf, sizeof buf, f, args...);
  return buf;
}

Vocabulary vocab_of(const std::vector<LabeledDocument>& docs, std::size_t min_freq) {
  std::vector<const Document*> ptrs;
  for (const auto& d : docs) ptrs.push_back(&d.document);
  return Vocabulary::build(ptrs, min_freq);
}

double precision_at_1(const KeyphraseModel& m, const std::vector<LabeledDocument>& docs) {
  double hits = 0.0;
  for (const auto& d : docs) {
    const Prediction p = predict_topk(m.forward(d.document), d.document, 1);
    hits += !p.empty() && std::find(d.keyphrases.begin(), d.keyphrases.end(), p[0].phrase) != d.keyphrases.end();
  }
  return hits / static_cast<double>(docs.size());
}

TrainingConfig experiment_training(std::size_t epochs, std::uint64_t seed) {
  TrainingConfig tc;
  tc.lr_start = 3e-3;
  tc.lr_end = 3e-4;
  tc.max_epochs = epochs;
  tc.seed = seed;
  return tc;
}

// 1 -------------------------------------------------------------------------

Outcome gradient_suite() {
  const auto started = Clock::now();
  synth::CorpusOptions o;
  o.documents = 1;
  o.min_length = o.max_length = 12;
  LabeledDocument doc = synth::planted_corpus(o).front();
  std::mt19937_64 rng(0);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  for (auto& row : doc.document.visual) {
    for (double& v : row) v = unit(rng);
  }
  ModelConfig mc;
  mc.dropout = 0.0;
  mc.embedding.min_frequency = 1;
  KeyphraseModel model(mc, vocab_of({doc}, 1), 0);
  const SpanTarget target = *build_labels(doc, mc.max_ngram);
  GradCheckOptions go;
  go.max_coords_per_param = 256;
  const GradCheckReport rep = finite_difference_check(
      [&](Tape& tape) { return keyphrase_loss(model.forward_logits(tape, doc.document), target); }, model.parameters(),
      go);
  const double secs = seconds_since(started);
  const bool every = rep.parameters.size() == model.parameters().size();
  return {every && rep.max_rel_error < 1e-4 && secs < 60.0,
          fmt("%zu/%zu parameters, max rel err %.2e (%s), %.1fs", rep.parameters.size(), model.parameters().size(),
              rep.max_rel_error, rep.worst_parameter.c_str(), secs)};
}

// 2 -------------------------------------------------------------------------

Outcome span_normalization() {
  std::mt19937_64 rng(2);
  std::uniform_int_distribution<std::size_t> length(1, 64);
  std::uniform_int_distribution<std::size_t> word(0, 40);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  std::vector<LabeledDocument> docs;
  for (int i = 0; i < 100; ++i) {
    LabeledDocument d;
    d.document.id = "r" + std::to_string(i);
    const std::size_t n = length(rng);
    for (std::size_t t = 0; t < n; ++t) d.document.tokens.push_back("w" + std::to_string(word(rng)));
    d.document.visual.resize(n);
    for (auto& row : d.document.visual) {
      for (double& v : row) v = unit(rng);
    }
    docs.push_back(std::move(d));
  }
  const KeyphraseModel model(ModelConfig{}, vocab_of(docs, 1), 2);
  double worst = 0.0;
  std::size_t masked = 0, masked_nonzero = 0;
  for (std::size_t i = 0; i < docs.size(); ++i) {
    const std::size_t n = docs[i].document.size();
    // Every other document is padded so that masked spans occur.
    const ForwardOptions opt{i % 2 == 0 ? 0 : std::min<std::size_t>(64, n + 1 + i % 7)};
    const SpanDistribution dist = model.forward(docs[i].document, opt);
    double total = 0.0;
    for (std::size_t s = 0; s < dist.spans.size(); ++s) {
      total += dist.probabilities[s];
      if (!dist.mask[s]) {
        ++masked;
        masked_nonzero += dist.probabilities[s] != 0.0;
      }
    }
    worst = std::max(worst, std::abs(total - 1.0));
  }
  return {worst <= 1e-6 && masked > 0 && masked_nonzero == 0,
          fmt("max |sum - 1| = %.1e over 100 docs, %zu masked spans, %zu non-zero", worst, masked, masked_nonzero)};
}

// 3 -------------------------------------------------------------------------

Outcome parameter_sharing() {
  synth::CorpusOptions o;
  o.documents = 4;
  const auto docs = synth::planted_corpus(o);
  const KeyphraseModel model(ModelConfig{}, vocab_of(docs, 1), 3);
  const ParameterCensus c = audit_parameters(model.parameters());
  return {model.config().max_ngram == 5 && c.cnn_sets == 5 && c.transformer_sets == 1 && c.feedforward_sets == 1 &&
              c.embedding_tables == 1 && c.other == 0,
          fmt("cnn %zu, transformer %zu, feedforward %zu, embedding %zu, other %zu", c.cnn_sets, c.transformer_sets,
              c.feedforward_sets, c.embedding_tables, c.other)};
}

// 4 -------------------------------------------------------------------------

Outcome overfit() {
  const auto started = Clock::now();
  synth::CorpusOptions o;
  o.documents = 32;
  const auto docs = synth::planted_corpus(o);
  KeyphraseModel model(ModelConfig{}, vocab_of(docs, 2), 1);
  double best = 0.0;
  std::size_t reached = 0;
  run_training(model, docs, {}, experiment_training(500, 1), TrainingMode::kFinetune, std::nullopt,
               [&](const EpochRecord& r, const KeyphraseModel& m) {
                 best = std::max(best, precision_at_1(m, docs));
                 if (best >= 0.95 && reached == 0) reached = r.epoch;
                 return best < 0.95;
               });
  const double secs = seconds_since(started);
  return {best >= 0.95 && secs < 300.0,
          fmt("training P@1 %.3f at epoch %zu, %.1fs", best, reached, secs)};
}

// 5 -------------------------------------------------------------------------

Outcome visual_direction() {
  synth::CorpusOptions o;
  o.documents = 256;
  o.shared_pool = true;
  o.filler_vocab = 20;
  o.seed = 5;
  const auto train = synth::visual_corpus(o);
  o.documents = 64;
  o.seed = 6;
  o.id_prefix = "test";
  const auto test = synth::visual_corpus(o);
  const Vocabulary vocab = vocab_of(train, 2);
  double scores[2] = {0.0, 0.0};
  for (int blind = 0; blind < 2; ++blind) {
    ModelConfig mc;
    mc.no_visual = blind == 1;
    KeyphraseModel model(mc, vocab, 1);
    run_training(model, train, {}, experiment_training(20, 1), TrainingMode::kFinetune);
    scores[blind] = precision_at_1(model, test);
  }
  return {scores[0] >= 0.9 && scores[1] <= 0.5,
          fmt("held-out P@1 full %.3f, no_visual %.3f", scores[0], scores[1])};
}

// 6 -------------------------------------------------------------------------

Outcome pretraining_direction() {
  double with_pretraining = 0.0, without = 0.0;
  std::ostringstream runs;
  for (std::uint64_t s = 0; s < 5; ++s) {
    synth::CorpusOptions o;
    o.key_vocab = 60;
    o.filler_vocab = 200;
    o.seed = 100 + 3 * s;
    o.documents = 200;
    o.id_prefix = "qp";
    const auto raw = synth::generate(o);
    const QpDataset qp = build_qp_dataset(synth::click_log(raw, true, s), synth::planted_corpus(o), 5);
    o.seed += 1;
    o.documents = 8;
    o.id_prefix = "ft";
    const auto finetune = synth::planted_corpus(o);
    o.seed += 1;
    o.documents = 64;
    o.id_prefix = "test";
    const auto test = synth::planted_corpus(o);

    std::vector<LabeledDocument> vocab_docs = qp.examples;
    vocab_docs.insert(vocab_docs.end(), finetune.begin(), finetune.end());
    KeyphraseModel pretrained(ModelConfig{}, vocab_of(vocab_docs, 2), s);
    KeyphraseModel scratch = pretrained;
    run_training(pretrained, qp.examples, {}, experiment_training(10, s), TrainingMode::kPretrain);
    run_training(pretrained, finetune, {}, experiment_training(30, s), TrainingMode::kFinetune);
    run_training(scratch, finetune, {}, experiment_training(30, s), TrainingMode::kFinetune);
    const double a = precision_at_1(pretrained, test);
    const double b = precision_at_1(scratch, test);
    with_pretraining += a / 5.0;
    without += b / 5.0;
    runs << (s ? " " : "") << fmt("%.2f/%.2f", a, b);
  }
  return {with_pretraining - without >= 0.1,
          fmt("mean held-out P@1 pretrain+finetune %.3f vs finetune-only %.3f (per seed %s)", with_pretraining,
              without, runs.str().c_str())};
}

// 7 -------------------------------------------------------------------------

PredictionRecord as_ranking(const std::string& id, const std::vector<std::string>& phrases) {
  PredictionRecord r{id, {}};
  for (std::size_t i = 0; i < phrases.size(); ++i) r.phrases.push_back({phrases[i], 1.0 / (1.0 + i), {}});
  return r;
}

Outcome metric_oracle() {
  std::mt19937_64 rng(7);
  std::vector<std::string> pool;
  for (int i = 0; i < 15; ++i) pool.push_back("p" + std::to_string(i));
  std::size_t mismatches = 0, monotone_violations = 0;
  for (int trial = 0; trial < 1000; ++trial) {
    std::shuffle(pool.begin(), pool.end(), rng);
    const std::size_t np = std::uniform_int_distribution<std::size_t>(0, 14)(rng);
    const std::vector<std::string> preds(pool.begin(), pool.begin() + static_cast<std::ptrdiff_t>(np));
    std::shuffle(pool.begin(), pool.end(), rng);
    const std::size_t ng = std::uniform_int_distribution<std::size_t>(1, 8)(rng);
    const std::vector<std::string> gold(pool.begin(), pool.begin() + static_cast<std::ptrdiff_t>(ng));
    LabeledDocument g;
    g.document.id = "t";
    g.keyphrases = gold;
    const MetricReport r = evaluate({as_ranking("t", preds)}, {g}).report;

    std::set<std::string> gs(gold.begin(), gold.end());
    auto overlap = [&](std::size_t k) {
      std::set<std::string> top(preds.begin(), preds.begin() + static_cast<std::ptrdiff_t>(std::min(k, preds.size())));
      std::vector<std::string> both;
      std::set_intersection(top.begin(), top.end(), gs.begin(), gs.end(), std::back_inserter(both));
      return static_cast<double>(both.size());
    };
    double prev_recall = -1.0;
    for (std::size_t k : {1, 3, 5}) {
      mismatches += r.precision.at(k) != overlap(k) / static_cast<double>(k);
      mismatches += r.recall.at(k) != overlap(k) / static_cast<double>(gs.size());
      monotone_violations += r.recall.at(k) < prev_recall;
      prev_recall = r.recall.at(k);
    }
    const double p = overlap(10) / 10.0, rc = overlap(10) / static_cast<double>(gs.size());
    mismatches += r.f1 != (p + rc > 0.0 ? 2.0 * p * rc / (p + rc) : 0.0);
  }
  return {mismatches == 0 && monotone_violations == 0,
          fmt("1000 cases, %zu mismatches, %zu recall monotonicity violations", mismatches, monotone_violations)};
}

// 8 -------------------------------------------------------------------------

Outcome chunk_merge() {
  std::mt19937_64 rng(8);
  std::uniform_int_distribution<std::size_t> phrases(1, 12), entries(1, 5), chunk(0, 9);
  std::uniform_real_distribution<double> score(0.0, 1.0);
  std::size_t mismatches = 0;
  for (int trial = 0; trial < 200; ++trial) {
    ChunkScoreTable table;
    const std::size_t np = phrases(rng);
    for (std::size_t i = 0; i < np; ++i) {
      auto& list = table["phrase" + std::to_string(i)];
      const std::size_t ne = entries(rng);
      for (std::size_t e = 0; e < ne; ++e) list.emplace_back(chunk(rng), score(rng));
    }
    // Oracle: weights by repeated multiplication, then a plain sort.
    std::vector<std::pair<double, std::string>> expected;
    for (const auto& [phrase, list] : table) {
      double total = 0.0;
      for (const auto& [p, s] : list) {
        double w = 1.0;
        for (std::size_t j = 0; j < p; ++j) w *= 0.9;
        total += s * w;
      }
      expected.emplace_back(total, phrase);
    }
    std::sort(expected.begin(), expected.end(), [](const auto& a, const auto& b) { return a.first > b.first; });
    const Prediction got = merge_chunk_scores(table, np);
    if (got.size() != expected.size()) {
      ++mismatches;
      continue;
    }
    for (std::size_t i = 0; i < got.size(); ++i) {
      mismatches += got[i].phrase != expected[i].second ||
                    std::abs(got[i].score - expected[i].first) > 1e-12 * std::max(1.0, expected[i].first);
    }
  }
  ChunkScoreTable hand;
  hand["x"] = {{0, 0.5}, {2, 0.3}};
  const double v = merge_chunk_scores(hand, 1).at(0).score;
  const bool hand_ok = std::abs(v - 0.743) < 1e-15;
  return {mismatches == 0 && hand_ok, fmt("200 random tables, %zu mismatches; hand case %.17g", mismatches, v)};
}

// 9 -------------------------------------------------------------------------

Outcome position_encoding_check() {
  double worst = 0.0;
  for (std::size_t P = 2; P <= 64; P += 2) {
    for (std::size_t i = 0; i <= 256; ++i) {
      const auto enc = position_encoding(i, P);
      for (std::size_t p = 0; p < P / 2; ++p) {
        const double angle =
            static_cast<double>(i) * std::exp(-std::log(10000.0) * 2.0 * static_cast<double>(p) / static_cast<double>(P));
        worst = std::max(worst, std::abs(enc[2 * p] - std::sin(angle)));
        worst = std::max(worst, std::abs(enc[2 * p + 1] - std::cos(angle)));
      }
    }
  }
  const auto e = position_encoding(1, 4);
  const double want[4] = {0.841471, 0.540302, 0.010000, 0.999950};
  bool hand = true;
  for (int i = 0; i < 4; ++i) hand = hand && std::abs(e[i] - want[i]) < 5e-7;
  return {worst <= 1e-12 && hand, fmt("max deviation %.1e; i=1,P=4 -> [%.6f, %.6f, %.6f, %.6f]", worst, e[0], e[1],
                                      e[2], e[3])};
}

// 10 ------------------------------------------------------------------------

Outcome baselines_check() {
  Document a;
  a.id = "a";
  a.tokens = {"a", "b", "a"};
  a.visual.resize(3);
  Document b;
  b.id = "b";
  b.tokens = {"a", "c"};
  b.visual.resize(2);
  const CorpusStats st = CorpusStats::build({&a, &b});
  const Prediction p = tfidf_predict(a, st, StopwordSet{}, 2, 1);
  const double want_a = 2.0 / 3.0, want_b = (1.0 / 3.0) * (std::log(3.0 / 2.0) + 1.0);
  const bool tfidf_ok = p.size() == 2 && p[0].phrase == "a" && p[1].phrase == "b" &&
                        std::abs(p[0].score - want_a) < 1e-15 && std::abs(p[1].score - want_b) < 1e-15;

  WordGraph g;
  g.add_edge("x", "y");
  g.add_edge("y", "z");
  g.add_edge("z", "x");
  const TextRankResult tr = textrank(g);
  const double spread = std::max({tr.scores.at("x"), tr.scores.at("y"), tr.scores.at("z")}) -
                        std::min({tr.scores.at("x"), tr.scores.at("y"), tr.scores.at("z")});
  const bool tr_ok = tr.converged && tr.residual < 1e-8 && spread < 1e-12;
  return {tfidf_ok && tr_ok, fmt("tfidf a=%.4f b=%.4f; cycle spread %.1e, residual %.1e after %zu iterations",
                                 p.size() > 0 ? p[0].score : 0.0, p.size() > 1 ? p[1].score : 0.0, spread,
                                 tr.residual, tr.iterations)};
}

// 11 ------------------------------------------------------------------------

Outcome agreement_check() {
  const AgreementItem same{"same", {{"x", "y", "z"}, {"x", "y", "z"}}};
  const AgreementItem diff{"diff", {{"x", "y", "z"}, {"x", "w", "z"}}};
  const double id1 = judge_agreement({same}, 1, AgreementMode::kExact).agreement;
  const double id3 = judge_agreement({same}, 3, AgreementMode::kExact).agreement;
  const double idu = judge_agreement({same}, 3, AgreementMode::kUnigram).agreement;
  const double two = judge_agreement({diff}, 3, AgreementMode::kExact).agreement * 100.0;
  return {id1 == 1.0 && id3 == 1.0 && idu == 1.0 && std::abs(two - 66.67) <= 0.01,
          fmt("identity %.0f%%, {x,y,z}/{x,w,z} at depth 3 %.2f%%", id3 * 100.0, two)};
}

// 12 ------------------------------------------------------------------------

Outcome checkpoint_round_trip() {
  synth::CorpusOptions o;
  o.documents = 8;
  o.seed = 12;
  const auto docs = synth::visual_corpus(o);
  KeyphraseModel model(ModelConfig{}, vocab_of(docs, 1), 12);
  run_training(model, docs, {}, experiment_training(2, 12), TrainingMode::kFinetune);
  const auto path = std::filesystem::temp_directory_path() / "kpe_acceptance_roundtrip.ckpt";
  model.save(path);
  const KeyphraseModel back = KeyphraseModel::load(path);
  std::filesystem::remove(path);
  std::size_t differing = 0, compared = 0;
  for (const auto& d : docs) {
    const SpanDistribution x = model.forward(d.document);
    const SpanDistribution y = back.forward(d.document);
    differing += x.spans != y.spans || x.mask != y.mask;
    for (std::size_t i = 0; i < x.probabilities.size() && i < y.probabilities.size(); ++i) {
      ++compared;
      differing += std::memcmp(&x.probabilities[i], &y.probabilities[i], sizeof(double)) != 0;
    }
  }
  return {differing == 0 && compared > 0, fmt("%zu probabilities compared bitwise, %zu differ", compared, differing)};
}

}  // namespace

int main() {
  const std::vector<std::pair<const char*, std::function<Outcome()>>> criteria = {
      {"end-to-end gradient check", gradient_suite},
      {"joint span softmax normalization", span_normalization},
      {"parameter sharing audit", parameter_sharing},
      {"overfit planted corpus", overfit},
      {"visual signal direction", visual_direction},
      {"pretraining direction", pretraining_direction},
      {"metric oracle", metric_oracle},
      {"chunk merge oracle", chunk_merge},
      {"position encoding", position_encoding_check},
      {"baselines", baselines_check},
      {"judge agreement", agreement_check},
      {"checkpoint round trip", checkpoint_round_trip},
  };
  int failures = 0;
  for (std::size_t i = 0; i < criteria.size(); ++i) {
    Outcome r;
    try {
      r = criteria[i].second();
    } catch (const std::exception& e) {
      r = {false, std::string("threw: ") + e.what()};
    }
    failures += !r.pass;
    std::printf("criterion %2zu %s: %s (%s)\n", i + 1, r.pass ? "PASS" : "FAIL", criteria[i].first, r.detail.c_str());
    std::fflush(stdout);
  }
  std::printf("%d of %zu criteria failed\n", failures, criteria.size());
  return failures == 0 ? 0 : 1;
}
