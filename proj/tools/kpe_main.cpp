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

// Command-line front end: synth, featurize, build-qp, pretrain, train,
// predict, evaluate, baseline, agreement, gradcheck.

#include <algorithm>
#include <chrono>
#include <cstdio>
#include <iostream>
#include <limits>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "kpe/baselines.hpp"
#include "kpe/checkpoint.hpp"
#include "kpe/dataset.hpp"
#include "kpe/error.hpp"
#include "kpe/eval.hpp"
#include "kpe/gradcheck.hpp"
#include "kpe/io.hpp"
#include "kpe/model.hpp"
#include "kpe/parallel.hpp"
#include "kpe/run_config.hpp"
#include "kpe/simd.hpp"
#include "kpe/synthetic.hpp"
#include "kpe/training.hpp"
#include "kpe/visual.hpp"
#include "kpe/weak_supervision.hpp"

namespace fs = std::filesystem;
using namespace kpe;

namespace {

struct GlobalOptions {
  std::optional<std::uint64_t> seed;
  std::optional<std::size_t> threads;
  std::string config_path;
  std::vector<std::string> overrides;
  std::string ablate;
  bool full_scale = false;
  bool show_config = false;
};

RunConfig resolve_config(const GlobalOptions& g) {
  RunConfig cfg = g.full_scale ? RunConfig::full_scale() : RunConfig{};
  if (!g.config_path.empty()) cfg.merge_file(g.config_path);
  for (const std::string& kv : g.overrides) {
    const auto eq = kv.find('=');
    if (eq == std::string::npos) throw ConfigError("--set expects key=value, got '" + kv + "'");
    cfg.set(kv.substr(0, eq), kv.substr(eq + 1));
  }
  cfg.apply_ablations(g.ablate);
  if (g.seed) cfg.seed = *g.seed;
  if (g.threads) cfg.threads = *g.threads;
  cfg.training.seed = cfg.seed;
  cfg.validate();
  return cfg;
}

// Provenance sidecar for JSON-lines outputs.
void write_meta(const fs::path& out, const std::string& command, const RunConfig& cfg,
                const nlohmann::json& extra = nlohmann::json::object()) {
  nlohmann::json meta = {{"command", command},
                         {"config_digest", cfg.digest()},
                         {"seed", cfg.seed},
                         {"config", cfg.to_flat_json()}};
  for (const auto& [k, v] : extra.items()) meta[k] = v;
  io::atomic_write(fs::path(out.string() + ".meta.json"), meta.dump(2) + "\n");
}

std::vector<std::size_t> parse_depths(const std::string& text) {
  std::vector<std::size_t> out;
  std::stringstream in(text);
  std::string item;
  while (std::getline(in, item, ',')) {
    try {
      std::size_t used = 0;
      const long v = std::stol(item, &used);
      if (used != item.size() || v <= 0) throw std::invalid_argument(item);
      out.push_back(static_cast<std::size_t>(v));
    } catch (const std::exception&) {
      throw ConfigError("depths must be positive integers separated by commas, got '" + text + "'");
    }
  }
  if (out.empty()) throw ConfigError("at least one depth is required");
  return out;
}

void attach_frozen(KeyphraseModel& model, const RunConfig& cfg) {
  if (model.config().embedding.mode != EmbeddingSourceMode::kFrozenFile) return;
  if (cfg.data.frozen_vectors.empty()) throw ConfigError("model uses frozen vectors; set data.frozen_vectors");
  model.set_contextual_source(std::make_shared<FrozenVectors>(
      FrozenVectors::load(cfg.data.frozen_vectors, model.config().embedding.token_dim)));
}

std::vector<const Document*> document_pointers(const std::vector<LabeledDocument>& docs) {
  std::vector<const Document*> out;
  for (const auto& d : docs) out.push_back(&d.document);
  return out;
}

// --- synth ----------------------------------------------------------------

// Writes planted-keyphrase layouts (one .json per document) and a matching
// click log, so the whole pipeline can be exercised without external data.
int cmd_synth(const RunConfig& cfg, const fs::path& dir, std::size_t documents, const std::string& prefix,
              bool shared_pool) {
  synth::CorpusOptions o;
  o.documents = documents;
  o.seed = cfg.seed;
  o.id_prefix = prefix;
  o.shared_pool = shared_pool;
  if (shared_pool) o.filler_vocab = 20;
  const auto planted = synth::generate(o);
  fs::create_directories(dir / "layouts");
  for (const auto& doc : planted) {
    io::atomic_write(dir / "layouts" / (doc.id + ".json"), synth::layout_json(doc).dump(1) + "\n");
  }
  std::vector<nlohmann::json> rows;
  for (const auto& rec : synth::click_log(planted, true, cfg.seed)) {
    rows.push_back({{"id", rec.id}, {"queries", rec.queries}});
  }
  io::write_jsonl(dir / "clicks.jsonl", rows);
  std::cout << "wrote " << planted.size() << " layouts and a click log under " << dir.string() << "\n";
  return 0;
}

// --- featurize ------------------------------------------------------------

int cmd_featurize(const RunConfig& cfg, const fs::path& dir, const fs::path& out) {
  if (!fs::is_directory(dir)) throw Error("layout directory '" + dir.string() + "' does not exist");
  std::vector<fs::path> files;
  for (const auto& entry : fs::directory_iterator(dir)) {
    if (entry.is_regular_file() && entry.path().extension() == ".json") files.push_back(entry.path());
  }
  std::sort(files.begin(), files.end());
  std::vector<LabeledDocument> docs;
  std::size_t empty = 0;
  for (const fs::path& f : files) {
    LabeledDocument doc = featurize(parse_layout(io::read_file(f), f.string()));
    if (doc.document.id.empty()) doc.document.id = f.stem().string();
    if (doc.document.tokens.empty()) {
      ++empty;
      continue;
    }
    docs.push_back(std::move(doc));
  }
  write_dataset(out, docs);
  write_meta(out, "featurize", cfg, {{"documents", docs.size()}, {"skipped_empty", empty}});
  std::cout << "featurized " << docs.size() << " documents from " << files.size() << " layouts";
  if (empty) std::cout << " (" << empty << " without text skipped)";
  std::cout << " -> " << out.string() << "\n";
  return 0;
}

// --- build-qp ---------------------------------------------------------------

int cmd_build_qp(const RunConfig& cfg, const fs::path& docs_path, const fs::path& clicks, const fs::path& out,
                 const std::string& stats_path) {
  Dataset docs = read_dataset(docs_path);
  std::set<std::string> blocklist;
  if (!cfg.data.blocklist.empty()) blocklist = read_blocklist(cfg.data.blocklist);
  QpDataset qp = build_qp_dataset(read_click_log(clicks), docs.documents, cfg.model.max_ngram,
                                  cfg.training.max_length, blocklist);
  for (const std::string& w : qp.warnings) std::cerr << "warning: " << w << "\n";
  write_dataset(out, qp.examples, kQueryPredictionProvenance);
  nlohmann::json stats = qp.stats.to_json();
  write_meta(out, "build-qp", cfg, {{"statistics", stats}});
  if (!stats_path.empty()) {
    stats["config_digest"] = cfg.digest();
    io::atomic_write(stats_path, stats.dump(2) + "\n");
  }
  std::cout << qp.stats.to_table();
  std::cout << "kept " << qp.examples.size() << " documents; " << qp.stats.excluded_no_match
            << " without a matching query, " << qp.stats.missing_documents << " unknown ids -> " << out.string()
            << "\n";
  return 0;
}

// --- pretrain / train -------------------------------------------------------

int cmd_train(const RunConfig& cfg, TrainingMode mode, const fs::path& data, const fs::path& out,
              const std::string& init) {
  Dataset ds = read_dataset(data);
  if (ds.report.rejected_empty) {
    std::cerr << "note: skipped " << ds.report.rejected_empty << " documents with empty text\n";
  }
  std::vector<LabeledDocument> train, validation;
  split_validation(std::move(ds.documents), cfg.training.validation_fraction, cfg.seed, train, validation);

  std::optional<KeyphraseModel> model;
  if (!init.empty()) {
    Checkpoint ck = load_checkpoint(init);
    const auto embedded = io::parse_json(ck.config_json, init);
    Vocabulary vocab = Vocabulary::from_tokens(embedded.at("vocabulary").get<std::vector<std::string>>());
    model.emplace(cfg.model, std::move(vocab), cfg.seed);
    try {
      assign_parameters(model->parameters(), ck.parameters);
    } catch (const ShapeError& e) {
      throw ShapeError(std::string("cannot warm-start from '") + init + "': " + e.what());
    }
    std::cout << "initialized " << model->parameters().size() << " parameters from " << init << "\n";
  } else {
    model.emplace(cfg.model, Vocabulary::build(document_pointers(train), cfg.model.embedding.min_frequency),
                  cfg.seed);
  }
  attach_frozen(*model, cfg);

  fs::create_directories(out);
  io::atomic_write(out / "run_config.json",
                   nlohmann::json{{"config_digest", cfg.digest()}, {"config", cfg.to_flat_json()}}.dump(2) + "\n");
  std::cout << to_string(mode) << ": " << train.size() << " train / " << validation.size()
            << " validation documents, " << model->parameters().scalar_count() << " parameters, "
            << simd::isa_name(simd::active_isa()) << " kernels\n";
  TrainRunRecord rec =
      run_training(*model, train, validation, cfg.training, mode, out, [](const EpochRecord& e, const KeyphraseModel&) {
        std::printf("epoch %4zu  train %.5f  valid %s  lr %.3g  %.1fs\n", e.epoch, e.train_loss,
                    std::isnan(e.validation_loss) ? "n/a" : std::to_string(e.validation_loss).c_str(),
                    e.learning_rate, e.seconds);
        std::fflush(stdout);
        return true;
      });
  std::cout << "best epoch " << rec.best_epoch << " (loss " << rec.best_loss << "), " << rec.total_steps
            << " steps, " << rec.skipped_documents << " documents without matched labels skipped\n"
            << "checkpoint: " << (out / "best").string() << "\n";
  return 0;
}

// --- predict ----------------------------------------------------------------

int cmd_predict(const RunConfig& cfg, const fs::path& model_path, const fs::path& data, const fs::path& out,
                bool chunked, bool no_dedup) {
  KeyphraseModel model = KeyphraseModel::load(model_path);
  attach_frozen(model, cfg);
  Dataset ds = read_dataset(data);
  const std::size_t k = cfg.data.predict_k;
  std::vector<PredictionRecord> records(ds.documents.size());
  parallel_for(ds.documents.size(), cfg.threads, [&](std::size_t i) {
    const Document& doc = ds.documents[i].document;
    Prediction p;
    if (chunked) {
      p = chunk_and_merge(doc, model, std::numeric_limits<std::size_t>::max(), cfg.data.chunk_len);
      if (!no_dedup) p = dedup_substrings(p);
      if (p.size() > k) p.resize(k);
    } else {
      const Document t = truncate(doc, cfg.training.max_length);
      p = predict_topk(model.forward(t), t, k);
    }
    records[i] = {doc.id, std::move(p)};
  });
  write_predictions(out, records);
  write_meta(out, "predict", cfg,
             {{"model", model_path.string()}, {"chunked", chunked}, {"dedup", chunked && !no_dedup}});
  std::cout << "wrote predictions for " << records.size() << " documents -> " << out.string() << "\n";
  return 0;
}

// --- evaluate ---------------------------------------------------------------

int cmd_evaluate(const RunConfig& cfg, const fs::path& preds, const fs::path& gold, const std::string& depths,
                 std::size_t f1_depth, bool stem, const std::string& report_path, const std::string& compare) {
  EvalOptions opts;
  opts.depths = parse_depths(depths);
  opts.f1_depth = f1_depth;
  opts.stem = stem;
  Dataset g = read_dataset(gold);
  Evaluation ev = evaluate(read_predictions(preds), g.documents, opts);
  std::cout << ev.report.to_table(preds.stem().string());
  nlohmann::json report = ev.report.to_json();
  report["config_digest"] = cfg.digest();
  report["predictions"] = preds.string();

  if (!compare.empty()) {
    Evaluation other = evaluate(read_predictions(compare), g.documents, opts);
    std::cout << other.report.to_table(fs::path(compare).stem().string());
    std::vector<double> a, b;
    for (const auto& d : ev.per_document) a.push_back(d.f1);
    for (const auto& d : other.per_document) b.push_back(d.f1);
    PermutationResult pt = permutation_test(a, b, 10000, cfg.seed);
    if (!pt.defined) {
      std::cout << "permutation test: undefined (" << pt.documents << " documents, need at least 5)\n";
    } else {
      std::printf("permutation test on F1@%zu: mean difference %+.4f, p = %.4f (%s at 0.05)\n", f1_depth,
                  pt.mean_difference, pt.p_value, pt.significant ? "significant" : "not significant");
    }
    report["comparison"] = {{"predictions", compare},
                            {"metrics", other.report.to_json()},
                            {"defined", pt.defined},
                            {"p_value", pt.p_value},
                            {"significant", pt.significant},
                            {"mean_difference", pt.mean_difference}};
  }
  if (!report_path.empty()) io::atomic_write(report_path, report.dump(2) + "\n");
  return 0;
}

// --- baseline ---------------------------------------------------------------

int cmd_baseline(const RunConfig& cfg, const std::string& method, const fs::path& data, const fs::path& out) {
  if (method != "tfidf" && method != "textrank") {
    throw ConfigError("unknown baseline method '" + method + "' (expected tfidf or textrank)");
  }
  Dataset ds = read_dataset(data);
  const StopwordSet stopwords = cfg.data.stopwords.empty() ? default_stopwords() : read_stopwords(cfg.data.stopwords);
  std::vector<Document> docs;
  for (const auto& d : ds.documents) docs.push_back(truncate(d.document, cfg.training.max_length));
  std::vector<const Document*> ptrs;
  for (const auto& d : docs) ptrs.push_back(&d);
  const CorpusStats stats = CorpusStats::build(ptrs);
  std::vector<PredictionRecord> records(docs.size());
  parallel_for(docs.size(), cfg.threads, [&](std::size_t i) {
    Prediction p = method == "tfidf"
                       ? tfidf_predict(docs[i], stats, stopwords, cfg.data.predict_k, cfg.model.max_ngram)
                       : textrank_predict(docs[i], stopwords, cfg.data.predict_k, cfg.model.max_ngram);
    records[i] = {docs[i].id, std::move(p)};
  });
  write_predictions(out, records);
  write_meta(out, "baseline", cfg, {{"method", method}});
  std::cout << method << ": wrote predictions for " << records.size() << " documents -> " << out.string() << "\n";
  return 0;
}

// --- agreement --------------------------------------------------------------

int cmd_agreement(const fs::path& annotations, std::size_t depth, const std::string& mode) {
  AgreementResult r = judge_agreement(read_annotations(annotations), depth, agreement_mode_from_string(mode));
  for (const std::string& f : r.flags) std::cerr << "flag: " << f << "\n";
  std::printf("%s agreement @%zu: %.2f%% over %zu items (%zu judge pairs)\n", mode.c_str(), depth,
              100.0 * r.agreement, r.items, r.pairs);
  return 0;
}

// --- gradcheck --------------------------------------------------------------

int cmd_gradcheck(const RunConfig& cfg, std::size_t tokens, std::size_t coords, double tolerance,
                  double epsilon) {
  if (cfg.model.embedding.mode == EmbeddingSourceMode::kFrozenFile) {
    throw ConfigError("gradcheck builds its own document and needs embedding_mode trainable_lookup");
  }
  synth::CorpusOptions opts;
  opts.documents = 1;
  opts.min_length = opts.max_length = tokens;
  opts.seed = cfg.seed;
  const auto corpus = synth::planted_corpus(opts);
  LabeledDocument doc = corpus.front();
  // Visual rows in [0, 1] so that slice of the input is exercised too.
  std::mt19937_64 rng(cfg.seed);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  for (auto& row : doc.document.visual) {
    for (double& v : row) v = unit(rng);
  }
  ModelConfig mc = cfg.model;
  // Finite differences need a deterministic loss.
  mc.dropout = 0.0;
  KeyphraseModel model(mc, Vocabulary::build({&doc.document}, 1), cfg.seed);
  const SpanTarget target = *build_labels(doc, mc.max_ngram);

  GradCheckOptions go;
  go.max_coords_per_param = coords;
  go.epsilon = epsilon;
  go.seed = cfg.seed;
  const auto started = std::chrono::steady_clock::now();
  GradCheckReport rep = finite_difference_check(
      [&](Tape& tape) { return keyphrase_loss(model.forward_logits(tape, doc.document), target); },
      model.parameters(), go);
  const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - started).count();
  std::size_t checked = 0;
  for (const auto& p : rep.parameters) {
    checked += p.coords_checked;
    std::printf("  %-42s %6zu coords  max rel err %.3e  (analytic %+.6e, numeric %+.6e)\n", p.name.c_str(),
                p.coords_checked, p.max_rel_error, p.analytic, p.numeric);
  }
  const bool ok = rep.max_rel_error < tolerance;
  std::printf("%zu-token document, %zu parameters, %zu coordinates, %.1fs\n", tokens, rep.parameters.size(),
              checked, secs);
  std::printf("max rel err %.3e %s %.0e (worst: %s)\n", rep.max_rel_error, ok ? "<" : ">=", tolerance,
              rep.worst_parameter.c_str());
  return ok ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Keyphrase extraction over visually laid-out web documents"};
  app.require_subcommand(0, 1);
  GlobalOptions g;
  app.add_option("--seed", g.seed, "Random seed (overrides the config)");
  app.add_option("--threads", g.threads, "Worker threads for per-document inference")->check(CLI::PositiveNumber);
  app.add_option("--config", g.config_path, "Flat JSON config of dotted keys")->check(CLI::ExistingFile);
  app.add_option("--set", g.overrides, "Override one config key: key=value (repeatable)");
  app.add_option("--ablate", g.ablate, "Comma list of no_transformer,no_position,no_visual");
  app.add_flag("--full-scale", g.full_scale, "Start from the large configuration instead of desk defaults");
  app.add_flag("--show-config", g.show_config, "Print the resolved configuration and its digest");

  fs::path layout_dir, out, docs, clicks, data, model_path, preds, gold, annotations;
  std::string stats_path, init, depths = "1,3,5", report_path, compare, method, mode = "exact";
  std::size_t f1_depth = 10, depth = 3, tokens = 12, coords = 256;
  double tolerance = 1e-4, epsilon = 1e-5;
  bool chunked = false, no_dedup = false, stem = false;

  std::size_t synth_docs = 32;
  std::string synth_prefix = "doc";
  bool shared_pool = false;
  auto* synth_cmd = app.add_subcommand("synth", "Generate planted-keyphrase layouts and a click log");
  synth_cmd->add_option("--out-dir", out, "Output directory")->required();
  synth_cmd->add_option("--documents", synth_docs, "Number of documents")->check(CLI::PositiveNumber);
  synth_cmd->add_option("--prefix", synth_prefix, "Document id prefix");
  synth_cmd->add_flag("--shared-pool", shared_pool,
                      "Draw keyphrase and filler words from one small pool so only layout marks the keyphrase");

  auto* featurize_cmd = app.add_subcommand("featurize", "Layout JSON files -> dataset with visual features");
  featurize_cmd->add_option("--layout-dir", layout_dir, "Directory of layout .json files")->required();
  featurize_cmd->add_option("--out", out, "Output dataset (JSON lines)")->required();

  auto* qp_cmd = app.add_subcommand("build-qp", "Click log + documents -> query prediction dataset");
  qp_cmd->add_option("--docs", docs, "Document dataset")->required()->check(CLI::ExistingFile);
  qp_cmd->add_option("--clicks", clicks, "Click log (JSON lines)")->required()->check(CLI::ExistingFile);
  qp_cmd->add_option("--out", out, "Output dataset")->required();
  qp_cmd->add_option("--stats", stats_path, "Also write the statistics report as JSON");

  auto* pretrain_cmd = app.add_subcommand("pretrain", "Train on a query prediction dataset");
  pretrain_cmd->add_option("--data", data, "Training dataset")->required()->check(CLI::ExistingFile);
  pretrain_cmd->add_option("--out", out, "Run directory")->required();

  auto* train_cmd = app.add_subcommand("train", "Train (or fine-tune) on keyphrase labels");
  train_cmd->add_option("--data", data, "Training dataset")->required()->check(CLI::ExistingFile);
  train_cmd->add_option("--init", init, "Warm-start checkpoint")->check(CLI::ExistingFile);
  train_cmd->add_option("--out", out, "Run directory")->required();

  auto* predict_cmd = app.add_subcommand("predict", "Rank keyphrases with a trained model");
  predict_cmd->add_option("--model", model_path, "Checkpoint")->required()->check(CLI::ExistingFile);
  predict_cmd->add_option("--data", data, "Dataset to label")->required()->check(CLI::ExistingFile);
  predict_cmd->add_option("--out", out, "Predictions (JSON lines)")->required();
  predict_cmd->add_flag("--chunked", chunked, "Score every chunk of data.chunk_len tokens and merge");
  predict_cmd->add_flag("--no-dedup", no_dedup, "With --chunked, keep sub-phrases of top-ranked phrases");

  auto* eval_cmd = app.add_subcommand("evaluate", "Precision/recall/F1 of predictions against gold labels");
  eval_cmd->add_option("--preds", preds, "Predictions")->required()->check(CLI::ExistingFile);
  eval_cmd->add_option("--gold", gold, "Gold dataset")->required()->check(CLI::ExistingFile);
  eval_cmd->add_option("--depths", depths, "Comma-separated P/R depths");
  eval_cmd->add_option("--f1", f1_depth, "F1 depth")->check(CLI::PositiveNumber);
  eval_cmd->add_flag("--stem", stem, "Porter-stem phrases before matching");
  eval_cmd->add_option("--report", report_path, "Write the metrics as JSON");
  eval_cmd->add_option("--compare", compare, "Second predictions file for a paired permutation test")
      ->check(CLI::ExistingFile);

  auto* baseline_cmd = app.add_subcommand("baseline", "Unsupervised TFIDF or TextRank predictions");
  baseline_cmd->add_option("--method", method, "tfidf or textrank")
      ->required()
      ->check(CLI::IsMember({"tfidf", "textrank"}));
  baseline_cmd->add_option("--data", data, "Dataset")->required()->check(CLI::ExistingFile);
  baseline_cmd->add_option("--out", out, "Predictions")->required();

  auto* agree_cmd = app.add_subcommand("agreement", "Pairwise judge agreement");
  agree_cmd->add_option("--annotations", annotations, "Annotations (JSON lines)")->required()->check(CLI::ExistingFile);
  agree_cmd->add_option("--depth", depth, "Depth")->check(CLI::PositiveNumber);
  agree_cmd->add_option("--mode", mode, "exact or unigram")->check(CLI::IsMember({"exact", "unigram"}));

  auto* grad_cmd = app.add_subcommand("gradcheck", "Finite-difference check of every model parameter");
  grad_cmd->add_option("--tokens", tokens, "Document length")->check(CLI::PositiveNumber);
  grad_cmd->add_option("--coords", coords, "Coordinates per parameter (0 = all)");
  grad_cmd->add_option("--tolerance", tolerance, "Maximum relative error");
  grad_cmd->add_option("--epsilon", epsilon, "Central-difference step")->check(CLI::PositiveNumber);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  try {
    const RunConfig cfg = resolve_config(g);
    if (g.show_config) {
      nlohmann::json shown = {{"config", cfg.to_flat_json()}, {"config_digest", cfg.digest()}};
      std::cout << shown.dump(2) << "\n";
    }
    if (*synth_cmd) return cmd_synth(cfg, out, synth_docs, synth_prefix, shared_pool);
    if (*featurize_cmd) return cmd_featurize(cfg, layout_dir, out);
    if (*qp_cmd) return cmd_build_qp(cfg, docs, clicks, out, stats_path);
    if (*pretrain_cmd) return cmd_train(cfg, TrainingMode::kPretrain, data, out, "");
    if (*train_cmd) return cmd_train(cfg, TrainingMode::kFinetune, data, out, init);
    if (*predict_cmd) return cmd_predict(cfg, model_path, data, out, chunked, no_dedup);
    if (*eval_cmd) return cmd_evaluate(cfg, preds, gold, depths, f1_depth, stem, report_path, compare);
    if (*baseline_cmd) return cmd_baseline(cfg, method, data, out);
    if (*agree_cmd) return cmd_agreement(annotations, depth, mode);
    if (*grad_cmd) return cmd_gradcheck(cfg, tokens, coords, tolerance, epsilon);
    if (!g.show_config) {
      std::cerr << app.help();
      return 2;
    }
    return 0;
  } catch (const kpe::Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
}
