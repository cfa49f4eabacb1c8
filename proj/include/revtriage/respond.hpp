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

#ifndef REVTRIAGE_RESPOND_HPP_
#define REVTRIAGE_RESPOND_HPP_

#include <algorithm>
#include <cctype>
#include <chrono>
#include <cstddef>
#include <fstream>
#include <optional>
#include <semaphore>
#include <span>
#include <sstream>
#include <string>
#include <string_view>
#include <unordered_set>
#include <vector>

#include <nlohmann/json.hpp>

#include "revtriage/common.hpp"
#include "revtriage/explain.hpp"
#include "revtriage/fusion.hpp"
#include "revtriage/unicode.hpp"

// After Eigen: <resolv.h>, pulled in here, defines a _res macro.
#include <httplib.h>

namespace revtriage {

enum class PromptTier { kBare, kWithPrediction, kWithExplanation };

inline constexpr std::string_view tier_name(PromptTier tier) {
  switch (tier) {
    case PromptTier::kBare: return "bare";
    case PromptTier::kWithPrediction: return "with_prediction";
    case PromptTier::kWithExplanation: return "with_explanation";
  }
  return "bare";
}

inline std::optional<PromptTier> tier_from_name(std::string_view name) {
  for (auto t : {PromptTier::kBare, PromptTier::kWithPrediction,
                 PromptTier::kWithExplanation}) {
    if (tier_name(t) == name) return t;
  }
  return std::nullopt;
}

// Top-k distinct tokens among those with a positive weight, strongest first;
// equal weights keep their order of appearance.
inline std::vector<std::string> select_keywords(const WordExplanation& e, std::size_t k) {
  std::vector<std::size_t> order;
  for (std::size_t i = 0; i < e.weights.size() && i < e.tokens.size(); ++i) {
    if (e.weights[i] > 0.0) order.push_back(i);
  }
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return e.weights[a] > e.weights[b];
  });
  std::vector<std::string> out;
  std::unordered_set<std::string> seen;
  for (std::size_t i : order) {
    if (out.size() >= k) break;
    if (seen.insert(e.tokens[i]).second) out.push_back(e.tokens[i]);
  }
  return out;
}

inline constexpr std::string_view kInstruction =
    "Generate a short management response to this review";
inline constexpr std::string_view kInfluentialPrefix = "This is an influential negative review, ";
inline constexpr std::string_view kNegativePrefix = "This is a negative review, ";

inline std::string sentence_limit_clause(std::size_t max_sentences) {
  static constexpr std::string_view kWords[] = {"zero", "one", "two", "three",
                                                "four", "five"};
  const std::string n = max_sentences < std::size(kWords)
                            ? std::string(kWords[max_sentences])
                            : std::to_string(max_sentences);
  return "Limit the response to a maximum of " + n +
         (max_sentences == 1 ? " sentence." : " sentences.");
}

inline std::string build_prompt(std::string_view review_text, PromptTier tier,
                                const std::optional<Prediction>& prediction = std::nullopt,
                                const std::optional<std::vector<std::string>>& keywords =
                                    std::nullopt,
                                std::size_t max_sentences = 2) {
  std::string prompt;
  if (tier == PromptTier::kBare) {
    prompt = kInstruction;
  } else {
    if (!prediction) throw InvalidArgument("this prompt tier requires a prediction");
    prompt = prediction->label ? kInfluentialPrefix : kNegativePrefix;
    if (tier == PromptTier::kWithExplanation) {
      if (!keywords || keywords->empty()) {
        throw InvalidArgument("the with_explanation tier requires at least one keyword");
      }
      prompt += "and the words ";
      for (std::size_t i = 0; i < keywords->size(); ++i) {
        if (i > 0) prompt += ", ";
        prompt += (*keywords)[i];
      }
      prompt += " are the keywords, ";
    }
    prompt += "g";
    prompt += kInstruction.substr(1);
  }
  prompt += ". ";
  prompt += sentence_limit_clause(max_sentences);
  prompt += "\n\nReview: ";
  prompt += review_text;
  return prompt;
}

// A sentence ends at a run of . ! ? followed by whitespace or the end of the
// text, or at any of the full-width terminals 。！？ (which are not spaced).
inline std::vector<std::string> split_sentences(std::string_view text) {
  const auto cps = unicode::decode(text);
  auto is_ascii_terminal = [](char32_t c) { return c == '.' || c == '!' || c == '?'; };
  auto is_wide_terminal = [](char32_t c) {
    return c == U'。' || c == U'！' || c == U'？';
  };
  auto is_space = [](char32_t c) {
    return c == ' ' || c == '\t' || c == '\n' || c == '\r' || c == U'　';
  };
  std::vector<std::string> out;
  std::string current;
  auto flush = [&] {
    std::size_t b = 0;
    while (b < current.size() && std::isspace(static_cast<unsigned char>(current[b]))) ++b;
    std::size_t e = current.size();
    while (e > b && std::isspace(static_cast<unsigned char>(current[e - 1]))) --e;
    if (e > b) out.push_back(current.substr(b, e - b));
    current.clear();
  };
  for (std::size_t i = 0; i < cps.size(); ++i) {
    unicode::append_utf8(current, cps[i]);
    if (is_wide_terminal(cps[i])) {
      while (i + 1 < cps.size() && is_wide_terminal(cps[i + 1])) {
        unicode::append_utf8(current, cps[++i]);
      }
      flush();
    } else if (is_ascii_terminal(cps[i])) {
      while (i + 1 < cps.size() && is_ascii_terminal(cps[i + 1])) {
        unicode::append_utf8(current, cps[++i]);
      }
      if (i + 1 == cps.size() || is_space(cps[i + 1])) flush();
    }
  }
  flush();
  return out;
}

struct SentenceLimit {
  std::string text;
  std::size_t sentence_count = 0;  // after truncation
  bool truncated = false;
};

inline SentenceLimit limit_sentences(std::string_view text, std::size_t max_sentences) {
  const auto sentences = split_sentences(text);
  SentenceLimit out;
  out.truncated = sentences.size() > max_sentences;
  out.sentence_count = std::min(sentences.size(), max_sentences);
  for (std::size_t i = 0; i < out.sentence_count; ++i) {
    if (i > 0 && !out.text.empty()) {
      // Keep CJK sentences unspaced.
      const auto first = unicode::decode(sentences[i]);
      if (first.empty() || !unicode::is_cjk(first.front())) out.text.push_back(' ');
    }
    out.text += sentences[i];
  }
  return out;
}

inline constexpr std::string_view kDefaultResponseTemplate =
    "Thank you for your feedback, and we sincerely apologize for the problems with "
    "{keywords} during your visit. We are addressing this with our team so that your "
    "next experience is a better one.";

inline std::string keyword_phrase(std::span<const std::string> keywords) {
  if (keywords.empty()) return "your experience";
  std::string out;
  for (std::size_t i = 0; i < keywords.size(); ++i) {
    if (i > 0) out += i + 1 == keywords.size() ? " and " : ", ";
    out += keywords[i];
  }
  return out;
}

inline std::string fill_template(std::string_view tmpl, std::span<const std::string> keywords) {
  static constexpr std::string_view kPlaceholder = "{keywords}";
  const std::string phrase = keyword_phrase(keywords);
  std::string out;
  std::size_t pos = 0;
  while (true) {
    const std::size_t hit = tmpl.find(kPlaceholder, pos);
    out += tmpl.substr(pos, hit == std::string_view::npos ? std::string_view::npos : hit - pos);
    if (hit == std::string_view::npos) break;
    out += phrase;
    pos = hit + kPlaceholder.size();
  }
  return out;
}

inline std::string load_response_template(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot open response template " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  std::string text = ss.str();
  while (!text.empty() && (text.back() == '\n' || text.back() == '\r')) text.pop_back();
  if (text.empty()) throw ParseError("response template " + path + " is empty");
  return text;
}

enum class ResponseSource { kExternal, kTemplate };

inline constexpr std::string_view source_name(ResponseSource s) {
  return s == ResponseSource::kExternal ? "external" : "template";
}

struct ResponseDraft {
  std::string prompt;
  std::string response;
  ResponseSource source = ResponseSource::kTemplate;
  std::size_t sentence_count = 0;
  bool truncated = false;
  std::optional<int> endpoint_status;  // HTTP status of a failed endpoint call
  std::string endpoint_error;
};

struct GenerationConfig {
  std::string endpoint_url;  // e.g. http://localhost:9000/generate; empty = none
  std::string auth_token;
  std::chrono::milliseconds timeout{10000};
  bool fallback_enabled = true;
  bool enforce_sentence_limit = true;
  std::size_t max_sentences = 2;
  std::string response_template{kDefaultResponseTemplate};
  std::size_t max_concurrent = 4;
};

class GenerationError : public Error {
 public:
  GenerationError(const std::string& msg, int status) : Error(msg), status_(status) {}
  // 0 when no HTTP response was received.
  int status() const { return status_; }

 private:
  int status_;
};

struct EndpointUrl {
  std::string origin;  // scheme://host[:port]
  std::string path;
};

inline EndpointUrl split_endpoint_url(std::string_view url) {
  const auto scheme = url.find("://");
  if (scheme == std::string_view::npos || scheme == 0) {
    throw InvalidArgument("endpoint URL needs a scheme: " + std::string(url));
  }
  const auto slash = url.find('/', scheme + 3);
  EndpointUrl out;
  out.origin = std::string(url.substr(0, slash));
  out.path = slash == std::string_view::npos ? "/" : std::string(url.substr(slash));
  return out;
}

// Calls the configured generation endpoint, at most max_concurrent at a time.
class ResponseGenerator {
 public:
  explicit ResponseGenerator(GenerationConfig config)
      : config_(std::move(config)),
        slots_(static_cast<std::ptrdiff_t>(std::max<std::size_t>(1, config_.max_concurrent))) {
    require(config_.max_sentences >= 1, "max_sentences must be positive");
    if (!config_.endpoint_url.empty()) split_endpoint_url(config_.endpoint_url);
  }

  const GenerationConfig& config() const { return config_; }

  ResponseDraft generate(const std::string& prompt,
                         std::span<const std::string> keywords) const {
    ResponseDraft draft;
    draft.prompt = prompt;
    std::string text;
    if (!config_.endpoint_url.empty()) {
      int status = 0;
      std::string error;
      if (call_endpoint(prompt, text, status, error)) {
        draft.source = ResponseSource::kExternal;
      } else {
        if (!config_.fallback_enabled) {
          throw GenerationError("generation endpoint failed: " + error, status);
        }
        if (status != 0) draft.endpoint_status = status;
        draft.endpoint_error = error;
      }
    } else if (!config_.fallback_enabled) {
      throw GenerationError("no generation endpoint configured and fallback is disabled", 0);
    }
    if (draft.source == ResponseSource::kTemplate) {
      text = fill_template(config_.response_template, keywords);
    }
    if (config_.enforce_sentence_limit) {
      auto limited = limit_sentences(text, config_.max_sentences);
      draft.response = std::move(limited.text);
      draft.sentence_count = limited.sentence_count;
      draft.truncated = limited.truncated;
    } else {
      draft.response = std::move(text);
      draft.sentence_count = split_sentences(draft.response).size();
      draft.truncated = false;
    }
    return draft;
  }

 private:
  bool call_endpoint(const std::string& prompt, std::string& text, int& status,
                     std::string& error) const {
    const auto url = split_endpoint_url(config_.endpoint_url);
    slots_.acquire();
    struct Release {
      std::counting_semaphore<>& s;
      ~Release() { s.release(); }
    } release{slots_};
    httplib::Client client(url.origin);
    const auto secs = std::chrono::duration_cast<std::chrono::seconds>(config_.timeout);
    const auto usecs =
        std::chrono::duration_cast<std::chrono::microseconds>(config_.timeout - secs);
    client.set_connection_timeout(secs.count(), usecs.count());
    client.set_read_timeout(secs.count(), usecs.count());
    client.set_write_timeout(secs.count(), usecs.count());
    httplib::Headers headers;
    if (!config_.auth_token.empty()) {
      headers.emplace("Authorization", "Bearer " + config_.auth_token);
    }
    const nlohmann::json body = {{"prompt", prompt},
                                 {"max_sentences", config_.max_sentences}};
    auto res = client.Post(url.path, headers, body.dump(), "application/json");
    if (!res) {
      error = httplib::to_string(res.error());
      return false;
    }
    status = res->status;
    if (res->status < 200 || res->status >= 300) {
      error = "HTTP " + std::to_string(res->status);
      return false;
    }
    text = res->body;
    return true;
  }

  GenerationConfig config_;
  mutable std::counting_semaphore<> slots_;
};

inline ResponseDraft generate_response(const std::string& prompt,
                                       std::span<const std::string> keywords,
                                       const GenerationConfig& config) {
  return ResponseGenerator(config).generate(prompt, keywords);
}

}  // namespace revtriage

#endif  // REVTRIAGE_RESPOND_HPP_
