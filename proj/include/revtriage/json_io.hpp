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

#ifndef REVTRIAGE_JSON_IO_HPP_
#define REVTRIAGE_JSON_IO_HPP_

#include <cmath>
#include <cstdint>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

#include "revtriage/corpus.hpp"
#include "revtriage/explain.hpp"
#include "revtriage/features.hpp"
#include "revtriage/fusion.hpp"
#include "revtriage/respond.hpp"

// Record shapes shared by the HTTP service, the CLI and exported files.

namespace revtriage {

inline json feature_names_json() {
  json names = json::array();
  for (auto n : kFeatureNames) names.push_back(n);
  return names;
}

template <typename Array>
json feature_array_json(const Array& values) {
  json out = json::array();
  for (std::size_t i = 0; i < kFeatureCount; ++i) out.push_back(values[i]);
  return out;
}

inline json to_json(const FeatureVector& x) {
  json out = json::object();
  for (std::size_t i = 0; i < kFeatureCount; ++i) out[std::string(kFeatureNames[i])] = x[i];
  return out;
}

inline json to_json(const Prediction& p) {
  return {{"probability", p.probability},
          {"label", p.label},
          {"attention_weights", feature_array_json(p.attention_weights)},
          {"feature_names", feature_names_json()}};
}

inline json to_json(const Attribution& a) {
  double sum = 0.0;
  for (double v : a.phi) sum += v;
  return {{"base_value", a.base_value},
          {"phi", feature_array_json(a.phi)},
          {"output", a.output},
          {"feature_names", feature_names_json()},
          {"efficiency_gap", a.base_value + sum - a.output}};
}

inline json to_json(const WordExplanation& e) {
  return {{"tokens", e.tokens},
          {"weights", e.weights},
          {"intercept", e.intercept},
          {"fidelity_r2", e.fidelity_r2},
          {"top_k", e.top_k},
          {"constant_output", e.constant_output},
          {"kernel_width", e.kernel_width},
          {"n_samples", e.n_samples}};
}

inline json to_json(const GlobalImportance& g) {
  json scatter = json::array();
  for (const auto& p : g.scatter) {
    scatter.push_back({{"id", p.id},
                       {"feature", kFeatureNames[p.feature]},
                       {"value", p.value},
                       {"phi", p.phi}});
  }
  json ranking = json::array();
  for (auto i : importance_ranking(g)) ranking.push_back(kFeatureNames[i]);
  return {{"feature_names", feature_names_json()},
          {"mean_abs_phi", feature_array_json(g.mean_abs_phi)},
          {"ranking", ranking},
          {"instances", g.instances},
          {"scatter", scatter}};
}

inline json to_json(const Metrics& m) {
  return {{"accuracy", m.accuracy}, {"precision", m.precision}, {"recall", m.recall},
          {"f1", m.f1},             {"tp", m.tp},               {"fp", m.fp},
          {"tn", m.tn},             {"fn", m.fn}};
}

inline json to_json(const TrainingHistory& h) {
  json epochs = json::array();
  for (const auto& e : h.epochs) {
    epochs.push_back(
        {{"epoch", e.epoch}, {"train_loss", e.train_loss}, {"validation", to_json(e.validation)}});
  }
  return {{"epochs", epochs},
          {"best_epoch", h.best_epoch},
          {"best_validation_f1", h.best_validation_f1},
          {"positive_class_weight", h.positive_class_weight}};
}

inline json to_json(const ResponseDraft& d) {
  json out = {{"prompt", d.prompt},
              {"response", d.response},
              {"source", source_name(d.source)},
              {"sentence_count", d.sentence_count},
              {"truncated", d.truncated}};
  if (d.endpoint_status) out["endpoint_status"] = *d.endpoint_status;
  if (!d.endpoint_error.empty()) out["endpoint_error"] = d.endpoint_error;
  return out;
}

inline json to_json(const TrainConfig& c) {
  json out = {{"learning_rate", c.learning_rate},
              {"embedding_lr_scale", c.embedding_lr_scale},
              {"epochs", c.epochs},
              {"batch_size", c.batch_size},
              {"seed", c.seed},
              {"early_stop_patience", c.early_stop_patience},
              {"variant", variant_name(c.variant)},
              {"token_dim", c.attention.token_dim},
              {"key_dim", c.attention.key_dim},
              {"value_dim", c.attention.value_dim}};
  if (c.positive_class_weight) out["positive_class_weight"] = *c.positive_class_weight;
  return out;
}

// Reads typed fields from an object, collecting every problem before failing.
class FieldReader {
 public:
  FieldReader(const json& j, std::string prefix) : j_(j), prefix_(std::move(prefix)) {
    if (!j_.is_object()) issues_.push_back({prefix_.empty() ? "$" : prefix_, "must be an object"});
  }

  template <typename T>
  void number(std::string_view key, T& out, double lo, double hi) {
    const json* v = find(key);
    if (!v) return;
    if (!v->is_number() || (std::is_integral_v<T> && !v->is_number_integer() &&
                            !v->is_number_unsigned())) {
      issue(key, std::is_integral_v<T> ? "must be an integer" : "must be a number");
      return;
    }
    const double d = v->get<double>();
    if (!std::isfinite(d) || d < lo || d > hi) {
      issue(key, "must be in [" + fmt(lo) + ", " + fmt(hi) + "]");
      return;
    }
    if constexpr (std::is_same_v<T, std::uint64_t>) {
      out = v->get<std::uint64_t>();
    } else {
      out = static_cast<T>(v->get<T>());
    }
  }

  void seed(std::string_view key, std::uint64_t& out) {
    const json* v = find(key);
    if (!v) return;
    if (!v->is_number_unsigned() && !(v->is_number_integer() && v->get<std::int64_t>() >= 0)) {
      issue(key, "must be a non-negative integer");
      return;
    }
    out = v->get<std::uint64_t>();
  }

  void boolean(std::string_view key, bool& out) {
    const json* v = find(key);
    if (!v) return;
    if (!v->is_boolean()) return issue(key, "must be a boolean");
    out = v->get<bool>();
  }

  void string(std::string_view key, std::string& out) {
    const json* v = find(key);
    if (!v) return;
    if (!v->is_string()) return issue(key, "must be a string");
    out = v->get<std::string>();
  }

  const json* find(std::string_view key) {
    known_.insert(std::string(key));
    if (!j_.is_object()) return nullptr;
    const auto it = j_.find(key);
    return it == j_.end() || it->is_null() ? nullptr : &*it;
  }

  void issue(std::string_view key, std::string message) {
    issues_.push_back({path(key), std::move(message)});
  }

  void add(FieldIssue issue) { issues_.push_back(std::move(issue)); }

  // Reports keys that no accessor asked about, then throws if anything failed.
  void finish() {
    if (j_.is_object()) {
      for (const auto& [key, value] : j_.items()) {
        if (!known_.count(key)) issues_.push_back({path(key), "unknown field"});
      }
    }
    if (!issues_.empty()) throw RecordError(std::move(issues_));
  }

  std::string path(std::string_view key) const {
    return prefix_.empty() ? std::string(key) : prefix_ + "." + std::string(key);
  }

 private:
  static std::string fmt(double v) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%g", v);
    return buf;
  }

  const json& j_;
  std::string prefix_;
  std::set<std::string> known_;
  std::vector<FieldIssue> issues_;
};

inline FeatureVector feature_vector_from_json(const json& j, const std::string& prefix) {
  FeatureVector x;
  std::vector<FieldIssue> issues;
  if (j.is_array()) {
    if (j.size() != kFeatureCount) {
      issues.push_back({prefix, "must list " + std::to_string(kFeatureCount) + " values"});
    } else {
      for (std::size_t i = 0; i < kFeatureCount; ++i) {
        if (!j[i].is_number()) {
          issues.push_back({prefix + "[" + std::to_string(i) + "]", "must be a number"});
        } else {
          x[i] = j[i].get<double>();
        }
      }
    }
  } else if (j.is_object()) {
    std::vector<bool> seen(kFeatureCount, false);
    for (const auto& [name, value] : j.items()) {
      const auto f = feature_from_name(name);
      if (!f) {
        issues.push_back({prefix + "." + name, "unknown feature"});
      } else if (!value.is_number()) {
        issues.push_back({prefix + "." + name, "must be a number"});
      } else {
        x[*f] = value.get<double>();
        seen[static_cast<std::size_t>(*f)] = true;
      }
    }
    for (std::size_t i = 0; i < kFeatureCount; ++i) {
      if (!seen[i]) issues.push_back({prefix + "." + std::string(kFeatureNames[i]), "missing"});
    }
  } else {
    issues.push_back({prefix, "must be an array or an object keyed by feature name"});
  }
  if (!issues.empty()) throw RecordError(std::move(issues));
  return x;
}

inline ShapConfig shap_config_from_json(const json& j, ShapConfig config,
                                        const std::string& prefix = "shap") {
  FieldReader r(j, prefix);
  std::string method(config.method == ShapMethod::kExact ? "exact" : "kernel");
  r.string("method", method);
  if (method == "exact") {
    config.method = ShapMethod::kExact;
  } else if (method == "kernel") {
    config.method = ShapMethod::kKernel;
  } else {
    r.issue("method", "must be \"exact\" or \"kernel\"");
  }
  r.number("n_samples", config.n_samples, 1, 1e7);
  r.seed("seed", config.seed);
  if (const json* b = r.find("baseline")) {
    try {
      config.baseline = feature_vector_from_json(*b, r.path("baseline"));
    } catch (const RecordError& e) {
      for (const auto& issue : e.issues()) r.add(issue);
    }
  }
  r.finish();
  return config;
}

inline LimeConfig lime_config_from_json(const json& j, LimeConfig config,
                                        const std::string& prefix = "lime") {
  FieldReader r(j, prefix);
  r.number("n_samples", config.n_samples, 10, 1e6);
  if (const json* w = r.find("kernel_width")) {
    if (!w->is_number() || !(w->get<double>() > 0.0)) {
      r.issue("kernel_width", "must be a positive number");
    } else {
      config.kernel_width = w->get<double>();
    }
  }
  r.number("ridge", config.ridge, 0.0, 1e12);
  r.number("top_k", config.top_k, 1, 1e6);
  r.seed("seed", config.seed);
  r.boolean("enumerate_small", config.enumerate_small);
  r.finish();
  return config;
}

inline TrainConfig train_config_from_json(const json& j, TrainConfig config,
                                          const std::string& prefix = "train") {
  FieldReader r(j, prefix);
  r.number("learning_rate", config.learning_rate, 0.0, 1e6);
  r.number("embedding_lr_scale", config.embedding_lr_scale, 0.0, 1e6);
  r.number("epochs", config.epochs, 1, 1e6);
  r.number("batch_size", config.batch_size, 1, 1e9);
  if (const json* w = r.find("positive_class_weight")) {
    if (!w->is_number() || !(w->get<double>() >= 1.0)) {
      r.issue("positive_class_weight", "must be a number >= 1");
    } else {
      config.positive_class_weight = w->get<double>();
    }
  }
  r.seed("seed", config.seed);
  r.number("early_stop_patience", config.early_stop_patience, 0, 1e6);
  std::string variant(variant_name(config.variant));
  r.string("variant", variant);
  if (const auto v = variant_from_name(variant)) {
    config.variant = *v;
  } else {
    r.issue("variant", "must be reviewer, review or all");
  }
  r.number("token_dim", config.attention.token_dim, 1, 4096);
  r.number("key_dim", config.attention.key_dim, 1, 4096);
  r.number("value_dim", config.attention.value_dim, 1, 4096);
  r.finish();
  return config;
}

// {"error": message, "fields": [{"field", "message"}...]}
inline json error_json(std::string_view message, const std::vector<FieldIssue>& fields = {}) {
  json out = {{"error", message}};
  if (!fields.empty()) {
    json list = json::array();
    for (const auto& f : fields) list.push_back({{"field", f.field}, {"message", f.message}});
    out["fields"] = list;
  }
  return out;
}

}  // namespace revtriage

#endif  // REVTRIAGE_JSON_IO_HPP_
