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

#ifndef REVTRIAGE_SERVICE_HPP_
#define REVTRIAGE_SERVICE_HPP_

#include <atomic>
#include <cstdio>
#include <filesystem>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <string_view>
#include <thread>
#include <vector>

#include <nlohmann/json.hpp>

#include "revtriage/artifact.hpp"
#include "revtriage/config.hpp"
#include "revtriage/corpus.hpp"
#include "revtriage/explain.hpp"
#include "revtriage/features.hpp"
#include "revtriage/fusion.hpp"
#include "revtriage/json_io.hpp"
#include "revtriage/respond.hpp"

// After Eigen: <resolv.h>, pulled in here, defines a _res macro.
#include <httplib.h>

namespace revtriage {

inline std::string hex64(std::uint64_t v) {
  char buf[17];
  std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(v));
  return buf;
}

// Everything a request handler reads. Published whole and never modified.
struct ServiceState {
  std::shared_ptr<const ModelArtifact> artifact;  // null: no model loaded
  std::uint64_t checksum = 0;
  std::string model_path;
  std::optional<json> global;           // cached global importance export
  std::optional<json> holdout_metrics;
};

struct Reply {
  int status = 200;
  std::string body;
  std::string content_type = "application/json";
};

class HttpError : public Error {
 public:
  HttpError(int status, json body)
      : Error(body.value("error", std::string("error"))), status_(status), body_(std::move(body)) {}
  int status() const { return status_; }
  const json& body() const { return body_; }

 private:
  int status_;
  json body_;
};

class Service {
 public:
  explicit Service(ServiceConfig config) : config_(std::move(config)) {
    validate_config(config_);
    lexicons_ = sample_lexicons();
    if (!config_.sentiment_lexicon.empty()) {
      lexicons_.sentiment = SentimentLexicon::load(config_.sentiment_lexicon);
    }
    if (!config_.competitor_lexicon.empty()) {
      lexicons_.competitors = CompetitorLexicon::load(config_.competitor_lexicon);
    }
    if (!config_.embedding_table.empty()) {
      table_ = std::make_shared<const EmbeddingTable>(load_embedding_table(config_.embedding_table));
    }
    if (!config_.response_template.empty()) {
      config_.generation.response_template = load_response_template(config_.response_template);
    }
    generator_ = std::make_unique<ResponseGenerator>(config_.generation);
    if (!config_.reference_dataset.empty()) {
      reference_ = load_corpus_strict(config_.reference_dataset);
      if (reference_.size() > config_.reference_limit) reference_.resize(config_.reference_limit);
    }
    if (!config_.holdout_dataset.empty()) {
      holdout_ = label_corpus(load_corpus_strict(config_.holdout_dataset));
    }
    if (!config_.model_path.empty()) reload(config_.model_path);
    state_ = state_ ? state_ : std::make_shared<const ServiceState>();
  }

  ~Service() {
    stop();
    std::lock_guard lock(jobs_mutex_);
    for (auto& t : job_threads_) {
      if (t.joinable()) t.join();
    }
  }

  Service(const Service&) = delete;
  Service& operator=(const Service&) = delete;

  const ServiceConfig& config() const { return config_; }
  const Lexicons& lexicons() const { return lexicons_; }

  std::shared_ptr<const ServiceState> state() const {
    std::lock_guard lock(state_mutex_);
    return state_;
  }

  // Loads an artifact, precomputes the cached exports, then swaps it in.
  void reload(const std::string& path) { install(load_model(path, table_), path); }

  void install(ModelArtifact artifact, const std::string& path = {}) {
    auto next = std::make_shared<ServiceState>();
    next->artifact = std::make_shared<const ModelArtifact>(std::move(artifact));
    next->checksum = model_checksum(next->artifact->model);
    next->model_path = path;
    next->global = compute_global(next->artifact->model);
    next->holdout_metrics = compute_holdout(next->artifact->model);
    std::lock_guard lock(state_mutex_);
    state_ = std::move(next);
  }

  void refresh_global() {
    auto current = state();
    if (!current->artifact) throw HttpError(503, error_json("no model loaded"));
    auto next = std::make_shared<ServiceState>(*current);
    next->global = compute_global(current->artifact->model);
    std::lock_guard lock(state_mutex_);
    if (state_ == current) state_ = std::move(next);
  }

  Reply handle(std::string_view method, std::string_view path, std::string_view body) {
    try {
      return dispatch(method, path, body);
    } catch (const HttpError& e) {
      return {e.status(), e.body().dump()};
    } catch (const RecordError& e) {
      return {400, error_json("invalid request", e.issues()).dump()};
    } catch (const json::exception& e) {
      return {400, error_json(std::string("malformed request body: ") + e.what()).dump()};
    } catch (const GenerationError& e) {
      json err = error_json(e.what());
      err["endpoint_status"] = e.status();
      return {502, err.dump()};
    } catch (const InvalidArgument& e) {
      return {422, error_json(e.what()).dump()};
    } catch (const std::exception& e) {
      return {500, error_json(e.what()).dump()};
    }
  }

  // Binds and serves until stop(); returns false if the address is unavailable.
  bool listen() {
    install_routes();
    return server_.listen(config_.host, config_.port);
  }

  // Binds to an ephemeral port for tests; serve with listen_after_bind().
  int bind_ephemeral() {
    install_routes();
    return server_.bind_to_any_port(config_.host);
  }
  bool listen_after_bind() { return server_.listen_after_bind(); }
  void wait_until_ready() const { server_.wait_until_ready(); }
  void stop() { server_.stop(); }

 private:
  static std::vector<Review> load_corpus_strict(const std::string& path) {
    auto parsed = read_corpus_file(path);
    if (!parsed.issues.empty()) {
      const auto& first = parsed.issues.front();
      throw ParseError(path + ":" + std::to_string(first.line) + ": " + first.message + " (" +
                       std::to_string(parsed.issues.size()) + " bad lines)");
    }
    return std::move(parsed.reviews);
  }

  std::optional<json> compute_global(const FusionModel& model) const {
    if (reference_.empty()) return std::nullopt;
    ShapConfig shap = config_.shap;
    return to_json(global_importance(model, lexicons_, reference_, shap));
  }

  std::optional<json> compute_holdout(const FusionModel& model) const {
    if (holdout_.empty()) return std::nullopt;
    json out = to_json(evaluate(model, lexicons_, holdout_));
    out["n"] = holdout_.size();
    out["threshold"] = 0.5;
    return out;
  }

  static std::shared_ptr<const ModelArtifact> require_model(const ServiceState& s) {
    if (!s.artifact) throw HttpError(503, error_json("no model loaded"));
    return s.artifact;
  }

  static json parse_body(std::string_view body) {
    if (body.empty()) return json::object();
    return json::parse(body);
  }

  static Review review_field(const json& body, bool whole_body_allowed = false) {
    if (body.contains("review")) {
      try {
        return review_from_json(body.at("review"), false);
      } catch (const RecordError& e) {
        auto issues = e.issues();
        for (auto& i : issues) i.field = "review." + i.field;
        throw RecordError(std::move(issues));
      }
    }
    if (whole_body_allowed) return review_from_json(body, false);
    throw RecordError(std::vector<FieldIssue>{{"review", "missing"}});
  }

  static void check_keys(const json& body, std::initializer_list<std::string_view> allowed) {
    if (!body.is_object()) throw RecordError(std::vector<FieldIssue>{{"$", "must be an object"}});
    std::vector<FieldIssue> issues;
    for (const auto& [key, value] : body.items()) {
      bool ok = false;
      for (auto a : allowed) ok = ok || a == key;
      if (!ok) issues.push_back({key, "unknown field"});
    }
    if (!issues.empty()) throw RecordError(std::move(issues));
  }

  Reply dispatch(std::string_view method, std::string_view path, std::string_view body) {
    const auto s = state();
    if (method == "GET" && path == "/health") return health(*s);
    if (method == "GET" && path == "/metrics") {
      require_model(*s);
      if (!s->holdout_metrics) {
        throw HttpError(404, error_json("no holdout dataset configured"));
      }
      return {200, s->holdout_metrics->dump()};
    }
    if (method == "GET" && path == "/explain/global") {
      require_model(*s);
      if (!s->global) throw HttpError(404, error_json("no reference dataset configured"));
      return {200, s->global->dump()};
    }
    if (method == "POST" && path == "/explain/global/refresh") {
      refresh_global();
      const auto now = state();
      return {200, now->global ? now->global->dump() : json::object().dump()};
    }
    if (method == "POST" && path == "/predict") return predict(*s, parse_body(body));
    if (method == "POST" && path == "/explain/features") {
      return explain_feature_request(*s, parse_body(body));
    }
    if (method == "POST" && path == "/explain/words") {
      return explain_word_request(*s, parse_body(body));
    }
    if (method == "POST" && path == "/respond") return respond(*s, parse_body(body));
    if (method == "POST" && path == "/admin/reload") {
      const json j = parse_body(body);
      check_keys(j, {"model_path"});
      const std::string p = j.value("model_path", s->model_path);
      if (p.empty()) throw HttpError(400, error_json("no model_path given or configured"));
      reload(p);
      return health(*state());
    }
    if (method == "POST" && path == "/train") return start_training(parse_body(body));
    if (method == "GET" && path.starts_with("/train/")) {
      return training_status(std::string(path.substr(7)));
    }
    throw HttpError(404, error_json("no route for " + std::string(method) + " " +
                                    std::string(path)));
  }

  Reply health(const ServiceState& s) const {
    json out = {{"status", "ok"},
                {"version", kVersion},
                {"artifact_format", kArtifactVersion},
                {"model_loaded", s.artifact != nullptr}};
    if (s.artifact) {
      out["model_checksum"] = hex64(s.checksum);
      out["variant"] = variant_name(s.artifact->model.variant);
      out["model_path"] = s.model_path;
      out["best_validation_f1"] = s.artifact->history.best_validation_f1;
    }
    return {200, out.dump()};
  }

  Reply predict(const ServiceState& s, const json& body) const {
    const auto artifact = require_model(s);
    const Review review = review_field(body, true);
    const auto& model = artifact->model;
    const auto p = model.predict(model.text.prepare(review), extract_features(review, lexicons_));
    return {200, to_json(p).dump()};
  }

  Reply explain_feature_request(const ServiceState& s, const json& body) const {
    const auto artifact = require_model(s);
    check_keys(body, {"review", "shap"});
    const Review review = review_field(body);
    const ShapConfig shap =
        shap_config_from_json(body.value("shap", json::object()), config_.shap);
    json out = to_json(explain_features(artifact->model, lexicons_, review, shap));
    out["id"] = review.id;
    out["method"] = shap.method == ShapMethod::kExact ? "exact" : "kernel";
    return {200, out.dump()};
  }

  Reply explain_word_request(const ServiceState& s, const json& body) const {
    const auto artifact = require_model(s);
    check_keys(body, {"review", "lime", "highlights"});
    const Review review = review_field(body);
    const LimeConfig lime =
        lime_config_from_json(body.value("lime", json::object()), config_.lime);
    if (!artifact->model.text.is_hashed()) {
      throw InvalidArgument("word explanations need the hashed text encoder");
    }
    if (count_tokens(review.text) == 0) {
      throw RecordError(std::vector<FieldIssue>{{"review.text", "has no tokens to explain"}});
    }
    const auto e = explain_words(artifact->model, lexicons_, review, lime);
    json out = to_json(e);
    out["id"] = review.id;
    if (body.value("highlights", false)) out["highlights_html"] = render_highlights(e);
    return {200, out.dump()};
  }

  Reply respond(const ServiceState& s, const json& body) const {
    check_keys(body, {"review", "tier", "keyword_count"});
    const Review review = review_field(body);
    const std::string tier_text = body.value("tier", std::string("bare"));
    const auto tier = tier_from_name(tier_text);
    if (!tier) {
      throw RecordError(std::vector<FieldIssue>{
          {"tier", "must be bare, with_prediction or with_explanation"}});
    }
    std::optional<Prediction> prediction;
    std::optional<std::vector<std::string>> keywords;
    json out;
    if (*tier != PromptTier::kBare) {
      const auto artifact = require_model(s);
      const auto& model = artifact->model;
      prediction = model.predict(model.text.prepare(review), extract_features(review, lexicons_));
      out["prediction"] = to_json(*prediction);
    }
    if (*tier == PromptTier::kWithExplanation) {
      const auto artifact = require_model(s);
      const auto e = explain_words(artifact->model, lexicons_, review, config_.lime);
      keywords = select_keywords(e, body.value("keyword_count", config_.keyword_count));
    }
    const std::string prompt = build_prompt(review.text, *tier, prediction, keywords,
                                            config_.generation.max_sentences);
    const std::vector<std::string> kw = keywords.value_or(std::vector<std::string>{});
    const ResponseDraft draft = generator_->generate(prompt, kw);
    json d = to_json(draft);
    for (auto& [k, v] : out.items()) d[k] = v;
    d["tier"] = tier_name(*tier);
    d["keywords"] = kw;
    return {200, d.dump()};
  }

  // ---- training jobs -------------------------------------------------------

  struct Job {
    std::string status = "queued";  // queued | running | succeeded | failed
    std::string error;
    json result;
  };

  Reply start_training(const json& body) {
    if (!config_.allow_train) {
      throw HttpError(403, error_json("training over HTTP is disabled (allow_train = false)"));
    }
    check_keys(body, {"corpus_path", "reviews", "config", "split_seed", "output", "load"});
    std::vector<Review> reviews;
    if (body.contains("reviews")) {
      std::vector<FieldIssue> issues;
      const auto& list = body.at("reviews");
      if (!list.is_array()) throw RecordError(std::vector<FieldIssue>{{"reviews", "must be an array"}});
      for (std::size_t i = 0; i < list.size(); ++i) {
        try {
          reviews.push_back(review_from_json(list[i]));
        } catch (const RecordError& e) {
          for (auto issue : e.issues()) {
            issue.field = "reviews[" + std::to_string(i) + "]." + issue.field;
            issues.push_back(std::move(issue));
          }
        }
      }
      if (!issues.empty()) throw RecordError(std::move(issues));
    } else if (body.contains("corpus_path")) {
      reviews = load_corpus_strict(body.at("corpus_path").get<std::string>());
    } else {
      throw RecordError(std::vector<FieldIssue>{{"reviews", "give reviews or corpus_path"}});
    }
    const TrainConfig train_config =
        train_config_from_json(body.value("config", json::object()), TrainConfig{});
    const std::uint64_t split_seed = body.value("split_seed", train_config.seed);
    const std::string output = body.value("output", std::string());
    if (output.find('/') != std::string::npos || output.find("..") != std::string::npos) {
      throw RecordError(std::vector<FieldIssue>{{"output", "must be a plain file name"}});
    }
    const bool load = body.value("load", false);
    const CorpusSplit split = split_corpus(label_corpus(reviews), {}, split_seed);

    std::lock_guard lock(jobs_mutex_);
    const std::string id = "job-" + std::to_string(++job_counter_);
    jobs_[id] = Job{};
    job_threads_.emplace_back([this, id, split, train_config, output, load] {
      run_job(id, split, train_config, output, load);
    });
    return {202, json{{"id", id}, {"status", "queued"}}.dump()};
  }

  void run_job(const std::string& id, const CorpusSplit& split, const TrainConfig& config,
               const std::string& output, bool load) {
    set_job(id, [](Job& j) { j.status = "running"; });
    try {
      const auto provider = table_ ? TextEmbeddingProvider::external(table_)
                                   : TextEmbeddingProvider::hashed({});
      auto result = train(split, lexicons_, provider, config);
      json summary = {{"history", to_json(result.history)},
                      {"validation", to_json(evaluate(result.model, lexicons_, split.validation))},
                      {"test", to_json(evaluate(result.model, lexicons_, split.test))},
                      {"config", to_json(config)}};
      ModelArtifact artifact{std::move(result.model), std::move(result.history)};
      std::string path;
      if (!output.empty()) {
        path = (std::filesystem::path(config_.train_output_dir) / output).string();
        save_model(artifact, path);
        summary["artifact_path"] = path;
      }
      if (load) install(std::move(artifact), path);
      set_job(id, [&](Job& j) {
        j.status = "succeeded";
        j.result = std::move(summary);
      });
    } catch (const std::exception& e) {
      set_job(id, [&](Job& j) {
        j.status = "failed";
        j.error = e.what();
      });
    }
  }

  template <typename F>
  void set_job(const std::string& id, F&& update) {
    std::lock_guard lock(jobs_mutex_);
    update(jobs_.at(id));
  }

  Reply training_status(const std::string& id) {
    std::lock_guard lock(jobs_mutex_);
    const auto it = jobs_.find(id);
    if (it == jobs_.end()) throw HttpError(404, error_json("unknown training job " + id));
    json out = {{"id", id}, {"status", it->second.status}};
    if (!it->second.error.empty()) out["error"] = it->second.error;
    for (auto& [k, v] : it->second.result.items()) out[k] = v;
    return {200, out.dump()};
  }

  // ---- HTTP wiring ---------------------------------------------------------

  void install_routes() {
    if (routes_installed_) return;
    routes_installed_ = true;
    const std::size_t threads = config_.max_concurrent_requests;
    server_.new_task_queue = [threads] { return new httplib::ThreadPool(threads); };
    auto forward = [this](const httplib::Request& req, httplib::Response& res) {
      const Reply r = handle(req.method, req.path, req.body);
      res.status = r.status;
      res.set_content(r.body, r.content_type);
    };
    for (const char* p : {"/health", "/metrics", "/explain/global", R"(/train/[A-Za-z0-9-]+)"}) {
      server_.Get(p, forward);
    }
    for (const char* p : {"/predict", "/explain/features", "/explain/words", "/respond",
                          "/train", "/admin/reload", "/explain/global/refresh"}) {
      server_.Post(p, forward);
    }
    if (!config_.static_dir.empty()) server_.set_mount_point("/", config_.static_dir);
    server_.set_error_handler([](const httplib::Request& req, httplib::Response& res) {
      if (res.body.empty()) {
        res.set_content(error_json("no route for " + req.method + " " + req.path).dump(),
                        "application/json");
      }
    });
  }

  ServiceConfig config_;
  Lexicons lexicons_;
  std::shared_ptr<const EmbeddingTable> table_;
  std::unique_ptr<ResponseGenerator> generator_;
  std::vector<Review> reference_;
  std::vector<LabeledReview> holdout_;

  mutable std::mutex state_mutex_;
  std::shared_ptr<const ServiceState> state_;

  std::mutex jobs_mutex_;
  std::map<std::string, Job> jobs_;
  std::vector<std::thread> job_threads_;
  std::size_t job_counter_ = 0;

  httplib::Server server_;
  bool routes_installed_ = false;
};

}  // namespace revtriage

#endif  // REVTRIAGE_SERVICE_HPP_
