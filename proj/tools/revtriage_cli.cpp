/*
 * Copyright 2026 The revtriage Authors.
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     https://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

// Command-line front end: ingest, synth, train, evaluate, explain,
// compare-variants, global and serve.

#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "revtriage/artifact.hpp"
#include "revtriage/config.hpp"
#include "revtriage/corpus.hpp"
#include "revtriage/encoder.hpp"
#include "revtriage/explain.hpp"
#include "revtriage/features.hpp"
#include "revtriage/fusion.hpp"
#include "revtriage/json_io.hpp"
#include "revtriage/respond.hpp"
#include "revtriage/service.hpp"
#include "revtriage/synthetic.hpp"

#include <CLI11.hpp>

namespace rt = revtriage;
namespace fs = std::filesystem;
using rt::json;

namespace {

enum ExitCode { kOk = 0, kFailure = 1, kUsage = 2, kBadInput = 3, kNotFound = 4 };

class CliError : public std::runtime_error {
 public:
  CliError(int code, const std::string& msg) : std::runtime_error(msg), code_(code) {}
  int code() const { return code_; }

 private:
  int code_;
};

// Accuracy, precision, recall, F1 of the full-scale transformer models on the
// original (non-public) corpus, printed next to local results for orientation.
struct ReferenceRow {
  rt::Variant variant;
  double accuracy, precision, recall, f1;
};
constexpr ReferenceRow kPublishedReference[] = {
    {rt::Variant::kReviewer, 0.872, 0.665, 0.627, 0.641},
    {rt::Variant::kReview, 0.873, 0.678, 0.629, 0.652},
    {rt::Variant::kAll, 0.878, 0.682, 0.635, 0.657},
};

struct Common {
  std::uint64_t seed = 0;
  std::string sentiment_lexicon;
  std::string competitor_lexicon;
  std::string embedding_table;
};

void print_seed(const std::string& command, std::uint64_t seed) {
  std::cout << "# " << command << " seed=" << seed << "\n";
}

rt::Lexicons lexicons(const Common& c) {
  rt::Lexicons lex = rt::sample_lexicons();
  if (!c.sentiment_lexicon.empty()) lex.sentiment = rt::SentimentLexicon::load(c.sentiment_lexicon);
  if (!c.competitor_lexicon.empty()) {
    lex.competitors = rt::CompetitorLexicon::load(c.competitor_lexicon);
  }
  return lex;
}

std::shared_ptr<const rt::EmbeddingTable> embedding_table(const Common& c) {
  if (c.embedding_table.empty()) return nullptr;
  auto table = std::make_shared<const rt::EmbeddingTable>(rt::load_embedding_table(c.embedding_table));
  for (const auto& w : table->warnings) std::cerr << "warning: " << w << "\n";
  return table;
}

std::vector<rt::Review> read_reviews(const std::string& path, bool allow_issues = false) {
  auto parsed = rt::read_corpus_file(path);
  for (const auto& issue : parsed.issues) {
    std::cerr << json{{"warning", "skipped record"}, {"file", path}, {"line", issue.line},
                      {"message", issue.message}}
                     .dump()
              << "\n";
  }
  if (!parsed.issues.empty() && !allow_issues) {
    throw CliError(kBadInput, path + ": " + std::to_string(parsed.issues.size()) +
                                  " malformed records (run ingest to clean the corpus)");
  }
  return std::move(parsed.reviews);
}

json read_json_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw CliError(kNotFound, "cannot open " + path);
  return json::parse(in);
}

void write_text(const fs::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw CliError(kFailure, "cannot write " + path.string());
  out << text;
}

std::string fixed(double v, int digits = 4) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.*f", digits, v);
  return buf;
}

void print_metrics_header() {
  std::printf("%-34s %9s %9s %9s %9s\n", "model", "accuracy", "precision", "recall", "f1");
}

void print_metrics_row(const std::string& name, double acc, double p, double r, double f1) {
  std::printf("%-34s %9s %9s %9s %9s\n", name.c_str(), fixed(acc).c_str(), fixed(p).c_str(),
              fixed(r).c_str(), fixed(f1).c_str());
}

const ReferenceRow& reference_for(rt::Variant v) {
  for (const auto& row : kPublishedReference) {
    if (row.variant == v) return row;
  }
  return kPublishedReference[2];
}

std::vector<rt::LabeledReview> select_split(const std::vector<rt::Review>& reviews,
                                            const std::string& which, std::uint64_t split_seed,
                                            int threshold) {
  auto labeled = rt::label_corpus(reviews, threshold);
  if (which == "all") return labeled;
  const auto split = rt::split_corpus(labeled, {}, split_seed);
  if (which == "train") return split.train;
  if (which == "validation") return split.validation;
  if (which == "test") return split.test;
  throw CliError(kUsage, "split must be all, train, validation or test");
}

rt::Review find_review(const std::vector<rt::Review>& reviews, const std::string& id) {
  for (const auto& r : reviews) {
    if (r.id == id) return r;
  }
  throw CliError(kNotFound, "no review with id '" + id + "'");
}

// ---------------------------------------------------------------------------

int run_ingest(const Common& c, const std::string& input, const std::string& output,
               int threshold) {
  print_seed("ingest", c.seed);
  auto parsed = rt::read_corpus_file(input);
  json issues = json::array();
  for (const auto& i : parsed.issues) issues.push_back({{"line", i.line}, {"message", i.message}});
  std::size_t influential = 0;
  for (const auto& r : parsed.reviews) influential += rt::label_influential(r, threshold);
  if (!output.empty()) {
    std::ofstream out(output, std::ios::trunc);
    if (!out) throw CliError(kFailure, "cannot write " + output);
    rt::write_corpus(out, parsed.reviews);
  }
  const json summary = {{"input", input},
                        {"output", output},
                        {"records", parsed.reviews.size()},
                        {"influential", influential},
                        {"threshold", threshold},
                        {"rejected", parsed.issues.size()},
                        {"issues", issues}};
  std::cout << summary.dump(2) << "\n";
  return parsed.issues.empty() ? kOk : kBadInput;
}

int run_synth(const Common& c, bool seed_given, const std::string& spec_path,
              const std::string& output, const std::string& truth_path) {
  auto spec = rt::synthetic_spec_from_json(read_json_file(spec_path));
  if (seed_given) spec.seed = c.seed;
  print_seed("synth", spec.seed);
  const auto corpus = rt::generate_synthetic_corpus(spec);
  {
    std::ofstream out(output, std::ios::trunc);
    if (!out) throw CliError(kFailure, "cannot write " + output);
    std::vector<rt::Review> reviews;
    for (const auto& r : corpus.reviews) reviews.push_back(r.review);
    rt::write_corpus(out, reviews);
  }
  if (!truth_path.empty()) write_text(truth_path, rt::synthetic_ground_truth(corpus).dump(2) + "\n");
  std::size_t positives = 0;
  for (const auto& r : corpus.reviews) positives += r.influential;
  std::cout << json{{"reviews", corpus.reviews.size()},
                    {"influential", positives},
                    {"output", output},
                    {"ground_truth", truth_path}}
                   .dump(2)
            << "\n";
  return kOk;
}

struct TrainOptions {
  std::string corpus;
  std::string output;
  std::string config_path;
  std::string report;
  std::string variant;
  std::optional<int> epochs;
  std::optional<double> learning_rate;
  std::optional<std::uint64_t> split_seed;
  int threshold = rt::kDefaultInfluenceThreshold;
};

rt::TrainConfig train_config(const Common& c, const TrainOptions& o) {
  rt::TrainConfig config;
  if (!o.config_path.empty()) config = rt::train_config_from_json(read_json_file(o.config_path), config);
  config.seed = c.seed;
  if (!o.variant.empty()) {
    const auto v = rt::variant_from_name(o.variant);
    if (!v) throw CliError(kUsage, "variant must be reviewer, review or all");
    config.variant = *v;
  }
  if (o.epochs) config.epochs = *o.epochs;
  if (o.learning_rate) config.learning_rate = *o.learning_rate;
  config.validate();
  return config;
}

rt::TextEmbeddingProvider provider_for(const Common& c) {
  const auto table = embedding_table(c);
  return table ? rt::TextEmbeddingProvider::external(table) : rt::TextEmbeddingProvider::hashed({});
}

int run_train(const Common& c, const TrainOptions& o) {
  print_seed("train", c.seed);
  const auto config = train_config(c, o);
  const auto reviews = read_reviews(o.corpus);
  const auto split = rt::split_corpus(rt::label_corpus(reviews, o.threshold), {},
                                      o.split_seed.value_or(c.seed));
  const auto lex = lexicons(c);
  auto result = rt::train(split, lex, provider_for(c), config);
  for (const auto& e : result.history.epochs) {
    std::cout << "epoch " << e.epoch << " loss " << fixed(e.train_loss, 5) << " val_f1 "
              << fixed(e.validation.f1) << "\n";
  }
  const auto validation = rt::evaluate(result.model, lex, split.validation);
  const auto test = rt::evaluate(result.model, lex, split.test);
  print_metrics_header();
  print_metrics_row("validation", validation.accuracy, validation.precision, validation.recall,
                    validation.f1);
  print_metrics_row("test", test.accuracy, test.precision, test.recall, test.f1);
  const json report = {{"seed", c.seed},
                       {"split_seed", o.split_seed.value_or(c.seed)},
                       {"config", rt::to_json(config)},
                       {"history", rt::to_json(result.history)},
                       {"validation", rt::to_json(validation)},
                       {"test", rt::to_json(test)},
                       {"artifact", o.output}};
  rt::ModelArtifact artifact{std::move(result.model), std::move(result.history)};
  rt::save_model(artifact, o.output);
  if (!o.report.empty()) write_text(o.report, report.dump(2) + "\n");
  std::cout << "model written to " << o.output << " (checksum "
            << rt::hex64(rt::model_checksum(artifact.model)) << ")\n";
  return kOk;
}

int run_evaluate(const Common& c, const std::string& model_path, const std::string& corpus,
                 const std::string& split_name, std::optional<std::uint64_t> split_seed,
                 const std::string& baseline_path, const std::string& report, int threshold) {
  print_seed("evaluate", c.seed);
  const auto artifact = rt::load_model(model_path, embedding_table(c));
  const auto data = select_split(read_reviews(corpus), split_name, split_seed.value_or(c.seed),
                                 threshold);
  const auto lex = lexicons(c);
  const auto metrics = rt::evaluate(artifact.model, lex, data);
  json out = {{"split", split_name}, {"n", data.size()}, {"metrics", rt::to_json(metrics)}};
  print_metrics_header();
  print_metrics_row("this model (" + std::string(rt::variant_name(artifact.model.variant)) + ")",
                    metrics.accuracy, metrics.precision, metrics.recall, metrics.f1);
  if (!baseline_path.empty()) {
    // One record per line: {"id": ..., "label": bool} or {"id": ..., "probability": p}.
    std::map<std::string, bool> predicted;
    std::ifstream in(baseline_path);
    if (!in) throw CliError(kNotFound, "cannot open " + baseline_path);
    std::string line;
    while (std::getline(in, line)) {
      if (rt::trim(line).empty()) continue;
      const json j = json::parse(line);
      predicted[j.at("id").get<std::string>()] =
          j.contains("label") ? j.at("label").get<bool>() : j.at("probability").get<double>() >= 0.5;
    }
    std::vector<char> truth, pred;
    for (const auto& r : data) {
      const auto it = predicted.find(r.review.id);
      if (it == predicted.end()) {
        throw CliError(kBadInput, "baseline has no prediction for id '" + r.review.id + "'");
      }
      truth.push_back(r.influential);
      pred.push_back(it->second);
    }
    const auto b = rt::compute_metrics(
        std::span<const bool>(reinterpret_cast<const bool*>(truth.data()), truth.size()),
        std::span<const bool>(reinterpret_cast<const bool*>(pred.data()), pred.size()));
    print_metrics_row("baseline (" + fs::path(baseline_path).filename().string() + ")",
                      b.accuracy, b.precision, b.recall, b.f1);
    out["baseline"] = rt::to_json(b);
  }
  const auto& ref = reference_for(artifact.model.variant);
  print_metrics_row("published reference (full scale)", ref.accuracy, ref.precision, ref.recall,
                    ref.f1);
  if (!report.empty()) write_text(report, out.dump(2) + "\n");
  return kOk;
}

int run_explain(const Common& c, const std::string& model_path, const std::string& review_path,
                const std::string& corpus, const std::string& id, const std::string& out_dir,
                const std::string& method, std::size_t shap_samples, std::size_t lime_samples) {
  print_seed("explain", c.seed);
  const auto artifact = rt::load_model(model_path, embedding_table(c));
  rt::Review review;
  if (!review_path.empty()) {
    review = rt::review_from_json(read_json_file(review_path), false);
  } else if (!corpus.empty() && !id.empty()) {
    review = find_review(read_reviews(corpus, true), id);
  } else {
    throw CliError(kUsage, "give --review FILE or --corpus FILE --id ID");
  }
  const auto lex = lexicons(c);
  rt::ShapConfig shap;
  shap.method = method == "kernel" ? rt::ShapMethod::kKernel : rt::ShapMethod::kExact;
  shap.n_samples = shap_samples;
  shap.seed = c.seed;
  rt::LimeConfig lime;
  lime.n_samples = lime_samples;
  lime.seed = c.seed;

  fs::create_directories(out_dir);
  json features = rt::to_json(rt::explain_features(artifact.model, lex, review, shap));
  features["id"] = review.id;
  write_text(fs::path(out_dir) / "features.json", features.dump(2) + "\n");
  std::vector<std::string> written = {(fs::path(out_dir) / "features.json").string()};
  if (artifact.model.text.is_hashed()) {
    const auto words = rt::explain_words(artifact.model, lex, review, lime);
    json w = rt::to_json(words);
    w["id"] = review.id;
    write_text(fs::path(out_dir) / "words.json", w.dump(2) + "\n");
    write_text(fs::path(out_dir) / "highlights.html", rt::render_highlights(words));
    written.push_back((fs::path(out_dir) / "words.json").string());
    written.push_back((fs::path(out_dir) / "highlights.html").string());
  } else {
    std::cerr << "warning: word explanations need the hashed encoder; skipped\n";
  }
  std::cout << json{{"id", review.id}, {"files", written}}.dump(2) << "\n";
  return kOk;
}

int run_compare(const Common& c, const TrainOptions& o) {
  print_seed("compare-variants", c.seed);
  const auto config = train_config(c, o);
  const auto reviews = read_reviews(o.corpus);
  const auto split = rt::split_corpus(rt::label_corpus(reviews, o.threshold), {},
                                      o.split_seed.value_or(c.seed));
  const auto rows = rt::compare_variants(split, lexicons(c), provider_for(c), config);
  json report = json::array();
  std::printf("test split (%zu reviews)\n", split.test.size());
  print_metrics_header();
  for (const auto& row : rows) {
    print_metrics_row(std::string(rt::variant_name(row.variant)), row.test.accuracy,
                      row.test.precision, row.test.recall, row.test.f1);
    report.push_back({{"variant", rt::variant_name(row.variant)},
                      {"validation", rt::to_json(row.validation)},
                      {"test", rt::to_json(row.test)},
                      {"best_epoch", row.history.best_epoch}});
  }
  std::printf("published reference (full scale)\n");
  for (const auto& ref : kPublishedReference) {
    print_metrics_row(std::string(rt::variant_name(ref.variant)), ref.accuracy, ref.precision,
                      ref.recall, ref.f1);
  }
  if (!o.report.empty()) write_text(o.report, report.dump(2) + "\n");
  return kOk;
}

int run_global(const Common& c, const std::string& model_path, const std::string& corpus,
               const std::string& output, std::size_t limit) {
  print_seed("global", c.seed);
  const auto artifact = rt::load_model(model_path, embedding_table(c));
  auto reviews = read_reviews(corpus, true);
  if (reviews.size() > limit) reviews.resize(limit);
  rt::ShapConfig shap;
  shap.seed = c.seed;
  const auto g = rt::global_importance(artifact.model, lexicons(c), reviews, shap);
  write_text(output, rt::to_json(g).dump(2) + "\n");
  for (auto i : rt::importance_ranking(g)) {
    std::printf("%-14s %.6f\n", std::string(rt::kFeatureNames[i]).c_str(), g.mean_abs_phi[i]);
  }
  return kOk;
}

int run_serve(const std::string& config_path, const rt::ConfigMap& flags) {
  rt::ServiceConfig config;
  if (!config_path.empty()) rt::apply_config(config, rt::read_config_file(config_path));
  rt::apply_config(config, rt::environment_overrides());
  rt::apply_config(config, flags);
  print_seed("serve", config.shap.seed);
  rt::Service service(config);
  std::cout << "listening on " << config.host << ":" << config.port << std::endl;
  if (!service.listen()) {
    throw CliError(kFailure, "cannot listen on " + config.host + ":" + std::to_string(config.port));
  }
  return kOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Influential negative review triage"};
  app.require_subcommand(1);
  app.set_version_flag("--version", std::string(rt::kVersion));
  Common common;
  std::string active = "revtriage";

  auto add_common = [&](CLI::App* cmd) {
    cmd->add_option("--seed", common.seed, "Random seed (printed on start)");
    cmd->add_option("--sentiment-lexicon", common.sentiment_lexicon, "term<TAB>polarity file")
        ->check(CLI::ExistingFile);
    cmd->add_option("--competitor-lexicon", common.competitor_lexicon, "one name per line")
        ->check(CLI::ExistingFile);
    cmd->add_option("--embedding-table", common.embedding_table,
                    "precomputed embeddings: id<TAB>v1 v2 ...")
        ->check(CLI::ExistingFile);
  };
  int threshold = rt::kDefaultInfluenceThreshold;

  auto* ingest = app.add_subcommand("ingest", "Validate a JSONL review corpus");
  std::string ingest_in, ingest_out;
  ingest->add_option("--input", ingest_in)->required()->check(CLI::ExistingFile);
  ingest->add_option("--output", ingest_out, "write the valid records here");
  ingest->add_option("--threshold", threshold, "helpful votes above this are influential");
  add_common(ingest);

  auto* synth = app.add_subcommand("synth", "Generate a planted synthetic corpus");
  std::string spec_path, synth_out, truth_out;
  synth->add_option("--spec", spec_path)->required()->check(CLI::ExistingFile);
  synth->add_option("--output", synth_out)->required();
  synth->add_option("--truth", truth_out, "ground-truth sidecar JSON");
  add_common(synth);

  TrainOptions train_opts;
  auto add_train_options = [&](CLI::App* cmd, bool needs_output) {
    cmd->add_option("--corpus", train_opts.corpus)->required()->check(CLI::ExistingFile);
    if (needs_output) cmd->add_option("--output", train_opts.output, "model artifact")->required();
    cmd->add_option("--config", train_opts.config_path, "training config JSON")
        ->check(CLI::ExistingFile);
    cmd->add_option("--report", train_opts.report, "metrics report JSON");
    cmd->add_option("--epochs", train_opts.epochs);
    cmd->add_option("--learning-rate", train_opts.learning_rate);
    cmd->add_option("--split-seed", train_opts.split_seed, "defaults to --seed");
    cmd->add_option("--threshold", train_opts.threshold);
    add_common(cmd);
  };
  auto* train_cmd = app.add_subcommand("train", "Train a fusion model");
  add_train_options(train_cmd, true);
  train_cmd->add_option("--variant", train_opts.variant, "reviewer | review | all");

  auto* compare = app.add_subcommand("compare-variants", "Train and compare the three variants");
  add_train_options(compare, false);

  auto* eval = app.add_subcommand("evaluate", "Score a model on a corpus split");
  std::string model_path, eval_corpus, split_name = "test", baseline_path, eval_report;
  std::optional<std::uint64_t> eval_split_seed;
  eval->add_option("--model", model_path)->required()->check(CLI::ExistingFile);
  eval->add_option("--corpus", eval_corpus)->required()->check(CLI::ExistingFile);
  eval->add_option("--split", split_name, "all | train | validation | test");
  eval->add_option("--split-seed", eval_split_seed, "defaults to --seed");
  eval->add_option("--baseline", baseline_path, "JSONL of baseline predictions by id")
      ->check(CLI::ExistingFile);
  eval->add_option("--report", eval_report);
  eval->add_option("--threshold", threshold);
  add_common(eval);

  auto* explain = app.add_subcommand("explain", "Explain one review");
  std::string review_path, explain_corpus, review_id, out_dir = ".", method = "exact";
  std::size_t shap_samples = 2048, lime_samples = 1000;
  explain->add_option("--model", model_path)->required()->check(CLI::ExistingFile);
  explain->add_option("--review", review_path, "single review record (JSON)")
      ->check(CLI::ExistingFile);
  explain->add_option("--corpus", explain_corpus)->check(CLI::ExistingFile);
  explain->add_option("--id", review_id);
  explain->add_option("--out-dir", out_dir);
  explain->add_option("--method", method)->check(CLI::IsMember({"exact", "kernel"}));
  explain->add_option("--shap-samples", shap_samples);
  explain->add_option("--lime-samples", lime_samples);
  add_common(explain);

  auto* global = app.add_subcommand("global", "Recompute the global importance export");
  std::string global_out;
  std::size_t global_limit = 1000;
  global->add_option("--model", model_path)->required()->check(CLI::ExistingFile);
  global->add_option("--corpus", explain_corpus)->required()->check(CLI::ExistingFile);
  global->add_option("--output", global_out)->required();
  global->add_option("--limit", global_limit, "maximum number of reviews");
  add_common(global);

  auto* serve = app.add_subcommand("serve", "Run the HTTP service");
  std::string config_path;
  serve->add_option("--config", config_path, "key = value config file")->check(CLI::ExistingFile);
  std::map<std::string, std::string> serve_flags;
  for (auto key : rt::config_key_names()) {
    std::string flag = "--" + std::string(key);
    for (auto& ch : flag) {
      if (ch == '_') ch = '-';
    }
    serve->add_option(flag, serve_flags[std::string(key)], "config key " + std::string(key));
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    if (e.get_exit_code() == 0) return app.exit(e);
    std::cerr << json{{"error", e.what()}, {"kind", "usage"}}.dump() << "\n";
    return kUsage;
  }

  try {
    for (auto* sub : app.get_subcommands()) active = sub->get_name();
    if (*ingest) return run_ingest(common, ingest_in, ingest_out, threshold);
    if (*synth) return run_synth(common, synth->count("--seed") > 0, spec_path, synth_out, truth_out);
    if (*train_cmd) return run_train(common, train_opts);
    if (*compare) return run_compare(common, train_opts);
    if (*eval) {
      return run_evaluate(common, model_path, eval_corpus, split_name, eval_split_seed,
                          baseline_path, eval_report, threshold);
    }
    if (*explain) {
      return run_explain(common, model_path, review_path, explain_corpus, review_id, out_dir,
                         method, shap_samples, lime_samples);
    }
    if (*global) return run_global(common, model_path, explain_corpus, global_out, global_limit);
    if (*serve) {
      rt::ConfigMap flags;
      for (const auto& [k, v] : serve_flags) {
        if (!v.empty()) flags[k] = v;
      }
      return run_serve(config_path, flags);
    }
  } catch (const CliError& e) {
    std::cerr << json{{"error", e.what()}, {"command", active}}.dump() << "\n";
    return e.code();
  } catch (const rt::RecordError& e) {
    json fields = json::array();
    for (const auto& i : e.issues()) fields.push_back({{"field", i.field}, {"message", i.message}});
    std::cerr << json{{"error", e.what()}, {"command", active}, {"fields", fields}}.dump() << "\n";
    return kBadInput;
  } catch (const rt::ParseError& e) {
    std::cerr << json{{"error", e.what()}, {"command", active}, {"kind", "parse"}}.dump() << "\n";
    return kBadInput;
  } catch (const json::exception& e) {
    std::cerr << json{{"error", e.what()}, {"command", active}, {"kind", "parse"}}.dump() << "\n";
    return kBadInput;
  } catch (const rt::InvalidArgument& e) {
    std::cerr << json{{"error", e.what()}, {"command", active}, {"kind", "invalid"}}.dump() << "\n";
    return kUsage;
  } catch (const std::exception& e) {
    std::cerr << json{{"error", e.what()}, {"command", active}}.dump() << "\n";
    return kFailure;
  }
  return kUsage;
}
