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

#ifndef REVTRIAGE_CORPUS_HPP_
#define REVTRIAGE_CORPUS_HPP_

#include <algorithm>
#include <array>
#include <charconv>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <fstream>
#include <istream>
#include <ostream>
#include <set>
#include <string>
#include <string_view>
#include <unordered_set>
#include <vector>

#include <nlohmann/json.hpp>

#include "revtriage/common.hpp"
#include "revtriage/rng.hpp"

namespace revtriage {

using json = nlohmann::json;

struct Review {
  std::string id;
  std::string restaurant_id;
  int rating = 1;
  std::string text;
  int image_count = 0;
  int helpful_votes = 0;
  int reply_count = 0;
  std::chrono::year_month_day review_date{std::chrono::year{1970},
                                          std::chrono::month{1},
                                          std::chrono::day{1}};
  bool identity_disclosed = false;
  bool member = false;
  bool consumption_verified = false;

  friend bool operator==(const Review&, const Review&) = default;
};

struct LabeledReview {
  Review review;
  bool influential = false;

  friend bool operator==(const LabeledReview&, const LabeledReview&) = default;
};

inline constexpr int kDefaultInfluenceThreshold = 3;

// A review is influential when it has strictly more helpful votes than the
// threshold.
inline bool label_influential(const Review& review,
                              int threshold = kDefaultInfluenceThreshold) {
  require(threshold >= 0, "influence threshold must be non-negative");
  return review.helpful_votes > threshold;
}

inline std::vector<LabeledReview> label_corpus(
    const std::vector<Review>& reviews,
    int threshold = kDefaultInfluenceThreshold) {
  std::vector<LabeledReview> out;
  out.reserve(reviews.size());
  for (const auto& r : reviews) out.push_back({r, label_influential(r, threshold)});
  return out;
}

// ---------------------------------------------------------------------------
// Record format

struct FieldIssue {
  std::string field;
  std::string message;
};

// A record that could not be converted into a Review. Carries one entry per
// offending field.
class RecordError : public ParseError {
 public:
  explicit RecordError(std::vector<FieldIssue> issues)
      : ParseError(summarize(issues)), issues_(std::move(issues)) {}

  const std::vector<FieldIssue>& issues() const { return issues_; }

 private:
  static std::string summarize(const std::vector<FieldIssue>& issues) {
    std::string s;
    for (const auto& issue : issues) {
      if (!s.empty()) s += "; ";
      s += issue.field + ": " + issue.message;
    }
    return s;
  }

  std::vector<FieldIssue> issues_;
};

inline std::string format_date(std::chrono::year_month_day date) {
  char buf[16];
  std::snprintf(buf, sizeof(buf), "%04d-%02u-%02u", static_cast<int>(date.year()),
                static_cast<unsigned>(date.month()),
                static_cast<unsigned>(date.day()));
  return buf;
}

// Parses an ISO-8601 calendar date (YYYY-MM-DD). Returns false when the
// string is not a valid date.
inline bool parse_date(std::string_view s, std::chrono::year_month_day& out) {
  if (s.size() != 10 || s[4] != '-' || s[7] != '-') return false;
  int y = 0;
  unsigned m = 0, d = 0;
  const auto parse = [](std::string_view part, auto& value) {
    const auto [ptr, ec] =
        std::from_chars(part.data(), part.data() + part.size(), value);
    return ec == std::errc{} && ptr == part.data() + part.size();
  };
  if (!parse(s.substr(0, 4), y) || !parse(s.substr(5, 2), m) ||
      !parse(s.substr(8, 2), d)) {
    return false;
  }
  const std::chrono::year_month_day date{std::chrono::year{y},
                                         std::chrono::month{m},
                                         std::chrono::day{d}};
  if (!date.ok()) return false;
  out = date;
  return true;
}

inline constexpr std::array<std::string_view, 11> kReviewFields = {
    "id",           "restaurant_id", "rating",        "text",
    "image_count",  "helpful_votes", "reply_count",   "review_date",
    "identity_disclosed", "member",  "consumption_verified"};

// Converts one record into a Review. In strict mode every field is required
// (corpus files); otherwise id, restaurant_id, helpful_votes and review_date
// may be omitted (service requests).
inline Review review_from_json(const json& record, bool strict = true) {
  std::vector<FieldIssue> issues;
  Review r;
  if (!record.is_object()) {
    throw RecordError(std::vector<FieldIssue>{{"<record>", "expected an object"}});
  }
  const auto lookup = [&](std::string_view field, bool required) -> const json* {
    const auto it = record.find(std::string(field));
    if (it == record.end()) {
      if (required) issues.push_back({std::string(field), "missing"});
      return nullptr;
    }
    return &*it;
  };
  const auto get_string = [&](std::string_view field, bool required,
                              std::string& out) {
    if (const json* v = lookup(field, required)) {
      if (v->is_string()) {
        out = v->get<std::string>();
      } else {
        issues.push_back({std::string(field), "expected a string"});
      }
    }
  };
  const auto get_int = [&](std::string_view field, bool required, int lo,
                           int hi, int& out) {
    if (const json* v = lookup(field, required)) {
      if (!v->is_number_integer()) {
        issues.push_back({std::string(field), "expected an integer"});
        return;
      }
      const auto value = v->get<std::int64_t>();
      if (value < lo || value > hi) {
        issues.push_back({std::string(field), "value " + std::to_string(value) +
                                                  " outside [" +
                                                  std::to_string(lo) + ", " +
                                                  std::to_string(hi) + "]"});
        return;
      }
      out = static_cast<int>(value);
    }
  };
  const auto get_bool = [&](std::string_view field, bool& out) {
    if (const json* v = lookup(field, true)) {
      if (v->is_boolean()) {
        out = v->get<bool>();
      } else {
        issues.push_back({std::string(field), "expected a boolean"});
      }
    }
  };
  constexpr int kMaxCount = 1'000'000'000;
  get_string("id", strict, r.id);
  get_string("restaurant_id", strict, r.restaurant_id);
  get_int("rating", true, 1, 5, r.rating);
  get_string("text", true, r.text);
  get_int("image_count", true, 0, kMaxCount, r.image_count);
  get_int("helpful_votes", strict, 0, kMaxCount, r.helpful_votes);
  get_int("reply_count", true, 0, kMaxCount, r.reply_count);
  std::string date;
  get_string("review_date", strict, date);
  if (!date.empty() && !parse_date(date, r.review_date)) {
    issues.push_back({"review_date", "expected an ISO-8601 date, got '" + date + "'"});
  } else if (strict && date.empty() && record.contains("review_date")) {
    issues.push_back({"review_date", "empty date"});
  }
  get_bool("identity_disclosed", r.identity_disclosed);
  get_bool("member", r.member);
  get_bool("consumption_verified", r.consumption_verified);
  if (!issues.empty()) throw RecordError(std::move(issues));
  return r;
}

inline json review_to_json(const Review& r) {
  return json{{"id", r.id},
              {"restaurant_id", r.restaurant_id},
              {"rating", r.rating},
              {"text", r.text},
              {"image_count", r.image_count},
              {"helpful_votes", r.helpful_votes},
              {"reply_count", r.reply_count},
              {"review_date", format_date(r.review_date)},
              {"identity_disclosed", r.identity_disclosed},
              {"member", r.member},
              {"consumption_verified", r.consumption_verified}};
}

struct LineIssue {
  std::size_t line = 0;  // 1-based
  std::string message;
};

struct CorpusParseResult {
  std::vector<Review> reviews;
  std::vector<LineIssue> issues;
};

// Reads a line-delimited record stream. Malformed lines are reported and
// skipped; blank lines are ignored.
inline CorpusParseResult parse_corpus(std::istream& in) {
  CorpusParseResult result;
  std::unordered_set<std::string> seen_ids;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.find_first_not_of(" \t") == std::string::npos) continue;
    json record;
    try {
      record = json::parse(line);
    } catch (const json::parse_error& e) {
      result.issues.push_back({line_no, std::string("invalid record: ") + e.what()});
      continue;
    }
    try {
      Review review = review_from_json(record, /*strict=*/true);
      if (!seen_ids.insert(review.id).second) {
        result.issues.push_back({line_no, "id: duplicate id '" + review.id + "'"});
        continue;
      }
      result.reviews.push_back(std::move(review));
    } catch (const RecordError& e) {
      result.issues.push_back({line_no, e.what()});
    }
  }
  if (in.bad()) throw Error("I/O failure while reading corpus");
  return result;
}

inline CorpusParseResult read_corpus_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open corpus file '" + path + "'");
  return parse_corpus(in);
}

inline void write_corpus(std::ostream& out, const std::vector<Review>& reviews) {
  for (const auto& r : reviews) out << review_to_json(r).dump() << '\n';
}

inline void write_corpus(std::ostream& out,
                         const std::vector<LabeledReview>& reviews) {
  for (const auto& r : reviews) out << review_to_json(r.review).dump() << '\n';
}

// ---------------------------------------------------------------------------
// Splitting

struct SplitRatios {
  double train = 0.8;
  double validation = 0.1;
  double test = 0.1;
};

struct CorpusSplit {
  std::vector<LabeledReview> train;
  std::vector<LabeledReview> validation;
  std::vector<LabeledReview> test;
  std::uint64_t seed = 0;
};

namespace detail {

// Largest-remainder apportionment of n items over the three ratios.
inline std::array<std::size_t, 3> apportion(std::size_t n,
                                            const SplitRatios& ratios) {
  const std::array<double, 3> r = {ratios.train, ratios.validation, ratios.test};
  std::array<std::size_t, 3> counts{};
  std::array<double, 3> remainders{};
  std::size_t assigned = 0;
  for (int k = 0; k < 3; ++k) {
    const double exact = static_cast<double>(n) * r[k];
    counts[k] = static_cast<std::size_t>(std::floor(exact + 1e-9));
    remainders[k] = exact - static_cast<double>(counts[k]);
    assigned += counts[k];
  }
  while (assigned < n) {
    int best = 0;
    for (int k = 1; k < 3; ++k) {
      if (remainders[k] > remainders[best] + 1e-12) best = k;
    }
    ++counts[best];
    remainders[best] = -1.0;
    ++assigned;
  }
  return counts;
}

}  // namespace detail

// Stratified split by label. Each class is shuffled with the seed and
// apportioned by largest remainder; within a split, reviews keep their
// corpus order.
inline CorpusSplit split_corpus(const std::vector<LabeledReview>& corpus,
                                const SplitRatios& ratios, std::uint64_t seed) {
  require(ratios.train > 0 && ratios.validation > 0 && ratios.test > 0,
          "split ratios must be positive");
  require(std::abs(ratios.train + ratios.validation + ratios.test - 1.0) <= 1e-9,
          "split ratios must sum to 1");
  std::vector<std::size_t> positives, negatives;
  for (std::size_t i = 0; i < corpus.size(); ++i) {
    (corpus[i].influential ? positives : negatives).push_back(i);
  }
  if (positives.empty() || negatives.empty()) {
    throw InvalidArgument(
        "cannot stratify a single-class corpus: need at least one influential "
        "and one non-influential review");
  }
  Rng rng(splitmix64(seed));
  std::vector<int> assignment(corpus.size(), 0);
  for (auto* group : {&positives, &negatives}) {
    rng.shuffle(std::span<std::size_t>(*group));
    const auto counts = detail::apportion(group->size(), ratios);
    std::size_t k = 0;
    for (int part = 0; part < 3; ++part) {
      for (std::size_t c = 0; c < counts[part]; ++c) assignment[(*group)[k++]] = part;
    }
  }
  CorpusSplit split;
  split.seed = seed;
  for (std::size_t i = 0; i < corpus.size(); ++i) {
    auto& dest = assignment[i] == 0   ? split.train
                 : assignment[i] == 1 ? split.validation
                                      : split.test;
    dest.push_back(corpus[i]);
  }
  return split;
}

}  // namespace revtriage

#endif  // REVTRIAGE_CORPUS_HPP_
