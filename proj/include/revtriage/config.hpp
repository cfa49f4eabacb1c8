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

#ifndef REVTRIAGE_CONFIG_HPP_
#define REVTRIAGE_CONFIG_HPP_

#include <cctype>
#include <charconv>
#include <chrono>
#include <cstdint>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <istream>
#include <map>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include "revtriage/common.hpp"
#include "revtriage/corpus.hpp"
#include "revtriage/explain.hpp"
#include "revtriage/respond.hpp"

// Service configuration: a `key = value` file ('#' starts a comment line),
// then environment variables REVTRIAGE_<KEY> (key upper-cased), then any
// explicit overrides such as CLI flags. Later sources win.

namespace revtriage {

struct ServiceConfig {
  std::string host = "127.0.0.1";
  int port = 8080;
  std::string model_path;           // empty: start without a model (503)
  std::string sentiment_lexicon;    // empty: built-in sample lexicon
  std::string competitor_lexicon;   // empty: built-in sample lexicon
  std::string embedding_table;      // needed only for external-embedding models
  std::string reference_dataset;    // corpus for /explain/global
  std::size_t reference_limit = 1000;
  std::string holdout_dataset;      // corpus for /metrics
  std::string static_dir;           // dashboard bundle, optional
  bool allow_train = false;
  std::string train_output_dir = ".";
  std::size_t max_concurrent_requests = 8;
  ShapConfig shap;
  LimeConfig lime;
  std::size_t keyword_count = 3;
  GenerationConfig generation;
  std::string response_template;    // file; empty: built-in template
};

using ConfigMap = std::map<std::string, std::string, std::less<>>;

inline std::string_view trim(std::string_view s) {
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front()))) s.remove_prefix(1);
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) s.remove_suffix(1);
  return s;
}

inline ConfigMap parse_config_map(std::istream& in, const std::string& source = "config") {
  ConfigMap out;
  std::string line;
  std::size_t n = 0;
  while (std::getline(in, line)) {
    ++n;
    const auto t = trim(line);
    if (t.empty() || t.front() == '#') continue;
    const auto eq = t.find('=');
    if (eq == std::string_view::npos) {
      throw ParseError(source + ":" + std::to_string(n) + ": expected key = value");
    }
    const auto key = trim(t.substr(0, eq));
    if (key.empty()) throw ParseError(source + ":" + std::to_string(n) + ": empty key");
    out[std::string(key)] = std::string(trim(t.substr(eq + 1)));
  }
  return out;
}

inline ConfigMap read_config_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open config file " + path);
  return parse_config_map(in, path);
}

namespace detail {

template <typename T>
T parse_config_number(std::string_view key, std::string_view value) {
  T out{};
  const auto* end = value.data() + value.size();
  const auto [ptr, ec] = std::from_chars(value.data(), end, out);
  if (ec != std::errc() || ptr != end) {
    throw InvalidArgument("config key '" + std::string(key) + "': '" + std::string(value) +
                          "' is not a valid number");
  }
  return out;
}

inline bool parse_config_bool(std::string_view key, std::string_view value) {
  if (value == "true" || value == "1" || value == "yes" || value == "on") return true;
  if (value == "false" || value == "0" || value == "no" || value == "off") return false;
  throw InvalidArgument("config key '" + std::string(key) + "': '" + std::string(value) +
                        "' is not a boolean");
}

struct ConfigKey {
  std::string_view name;
  std::function<void(ServiceConfig&, std::string_view)> apply;
};

inline const std::vector<ConfigKey>& config_keys() {
  using C = ServiceConfig;
  auto str = [](std::string C::*m) {
    return [m](C& c, std::string_view v) { c.*m = std::string(v); };
  };
  auto size = [](std::string_view key, auto setter) {
    return [key, setter](C& c, std::string_view v) {
      setter(c, parse_config_number<std::size_t>(key, v));
    };
  };
  auto real = [](std::string_view key, auto setter) {
    return [key, setter](C& c, std::string_view v) {
      setter(c, parse_config_number<double>(key, v));
    };
  };
  auto flag = [](std::string_view key, auto setter) {
    return [key, setter](C& c, std::string_view v) { setter(c, parse_config_bool(key, v)); };
  };
  static const std::vector<ConfigKey> keys = {
      {"host", str(&C::host)},
      {"port", [](C& c, std::string_view v) { c.port = parse_config_number<int>("port", v); }},
      {"model_path", str(&C::model_path)},
      {"sentiment_lexicon", str(&C::sentiment_lexicon)},
      {"competitor_lexicon", str(&C::competitor_lexicon)},
      {"embedding_table", str(&C::embedding_table)},
      {"reference_dataset", str(&C::reference_dataset)},
      {"reference_limit",
       size("reference_limit", [](C& c, std::size_t v) { c.reference_limit = v; })},
      {"holdout_dataset", str(&C::holdout_dataset)},
      {"static_dir", str(&C::static_dir)},
      {"allow_train", flag("allow_train", [](C& c, bool v) { c.allow_train = v; })},
      {"train_output_dir", str(&C::train_output_dir)},
      {"max_concurrent_requests",
       size("max_concurrent_requests",
            [](C& c, std::size_t v) { c.max_concurrent_requests = v; })},
      {"shap_method",
       [](C& c, std::string_view v) {
         if (v == "exact") {
           c.shap.method = ShapMethod::kExact;
         } else if (v == "kernel") {
           c.shap.method = ShapMethod::kKernel;
         } else {
           throw InvalidArgument("config key 'shap_method' must be exact or kernel");
         }
       }},
      {"shap_samples", size("shap_samples", [](C& c, std::size_t v) { c.shap.n_samples = v; })},
      {"seed",
       [](C& c, std::string_view v) {
         c.shap.seed = c.lime.seed = parse_config_number<std::uint64_t>("seed", v);
       }},
      {"lime_samples", size("lime_samples", [](C& c, std::size_t v) { c.lime.n_samples = v; })},
      {"lime_kernel_width",
       real("lime_kernel_width", [](C& c, double v) { c.lime.kernel_width = v; })},
      {"lime_ridge", real("lime_ridge", [](C& c, double v) { c.lime.ridge = v; })},
      {"lime_top_k", size("lime_top_k", [](C& c, std::size_t v) { c.lime.top_k = v; })},
      {"keyword_count", size("keyword_count", [](C& c, std::size_t v) { c.keyword_count = v; })},
      {"generation_endpoint", [](C& c, std::string_view v) { c.generation.endpoint_url = v; }},
      {"generation_token", [](C& c, std::string_view v) { c.generation.auth_token = v; }},
      {"generation_timeout_ms",
       size("generation_timeout_ms",
            [](C& c, std::size_t v) { c.generation.timeout = std::chrono::milliseconds(v); })},
      {"generation_fallback",
       flag("generation_fallback", [](C& c, bool v) { c.generation.fallback_enabled = v; })},
      {"enforce_sentence_limit",
       flag("enforce_sentence_limit",
            [](C& c, bool v) { c.generation.enforce_sentence_limit = v; })},
      {"max_sentences",
       size("max_sentences", [](C& c, std::size_t v) { c.generation.max_sentences = v; })},
      {"response_template", str(&C::response_template)},
  };
  return keys;
}

}  // namespace detail

inline std::vector<std::string_view> config_key_names() {
  std::vector<std::string_view> out;
  for (const auto& k : detail::config_keys()) out.push_back(k.name);
  return out;
}

inline std::string config_env_name(std::string_view key) {
  std::string out = "REVTRIAGE_";
  for (char c : key) out.push_back(static_cast<char>(std::toupper(static_cast<unsigned char>(c))));
  return out;
}

inline void apply_config(ServiceConfig& config, const ConfigMap& values) {
  for (const auto& [key, value] : values) {
    bool found = false;
    for (const auto& k : detail::config_keys()) {
      if (k.name == key) {
        k.apply(config, value);
        found = true;
        break;
      }
    }
    if (!found) throw InvalidArgument("unknown config key '" + key + "'");
  }
}

// Environment overrides, looked up through `getenv` so tests can inject one.
inline ConfigMap environment_overrides(
    const std::function<const char*(const char*)>& getenv = [](const char* name) {
      return std::getenv(name);
    }) {
  ConfigMap out;
  for (const auto& k : detail::config_keys()) {
    if (const char* v = getenv(config_env_name(k.name).c_str())) out[std::string(k.name)] = v;
  }
  return out;
}

// Fails fast on anything that would otherwise surface only at request time.
inline void validate_config(const ServiceConfig& c) {
  require(c.port >= 0 && c.port <= 65535, "port must be in [0, 65535]");
  require(c.max_concurrent_requests >= 1, "max_concurrent_requests must be positive");
  require(c.keyword_count >= 1, "keyword_count must be positive");
  require(c.generation.max_sentences >= 1, "max_sentences must be positive");
  require(c.shap.n_samples >= 1, "shap_samples must be positive");
  c.lime.validate();
  for (const auto* path : {&c.model_path, &c.sentiment_lexicon, &c.competitor_lexicon,
                           &c.embedding_table, &c.reference_dataset, &c.holdout_dataset,
                           &c.response_template}) {
    if (!path->empty() && !std::filesystem::is_regular_file(*path)) {
      throw InvalidArgument("configured file does not exist: " + *path);
    }
  }
  if (!c.static_dir.empty() && !std::filesystem::is_directory(c.static_dir)) {
    throw InvalidArgument("static_dir is not a directory: " + c.static_dir);
  }
  if (c.allow_train && !std::filesystem::is_directory(c.train_output_dir)) {
    throw InvalidArgument("train_output_dir is not a directory: " + c.train_output_dir);
  }
  if (!c.generation.endpoint_url.empty()) split_endpoint_url(c.generation.endpoint_url);
}

}  // namespace revtriage

#endif  // REVTRIAGE_CONFIG_HPP_
