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

#ifndef REVTRIAGE_FEATURES_HPP_
#define REVTRIAGE_FEATURES_HPP_

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <fstream>
#include <istream>
#include <map>
#include <optional>
#include <set>
#include <span>
#include <sstream>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "revtriage/common.hpp"
#include "revtriage/corpus.hpp"
#include "revtriage/text.hpp"
#include "revtriage/unicode.hpp"

namespace revtriage {

// The interpretable reviewer and review features, in canonical order.
enum class Feature : std::size_t {
  kIdentity = 0,
  kMembership,
  kConsumption,
  kRating,
  kLength,
  kCompetitor,
  kNegValence,
  kPosValence,
  kImage,
  kEmoji,
  kEngagement,
};

inline constexpr std::size_t kFeatureCount = 11;

inline constexpr std::array<std::string_view, kFeatureCount> kFeatureNames = {
    "identity",    "membership",  "consumption", "rating",
    "length",      "competitor",  "neg_valence", "pos_valence",
    "image",       "emoji",       "engagement"};

inline constexpr bool is_binary_feature(std::size_t i) { return i < 3; }

inline std::optional<Feature> feature_from_name(std::string_view name) {
  for (std::size_t i = 0; i < kFeatureCount; ++i) {
    if (kFeatureNames[i] == name) return static_cast<Feature>(i);
  }
  return std::nullopt;
}

struct FeatureVector {
  std::array<double, kFeatureCount> values{};

  double& operator[](Feature f) { return values[static_cast<std::size_t>(f)]; }
  double operator[](Feature f) const {
    return values[static_cast<std::size_t>(f)];
  }
  double& operator[](std::size_t i) { return values[i]; }
  double operator[](std::size_t i) const { return values[i]; }

  friend bool operator==(const FeatureVector&, const FeatureVector&) = default;
};

// ---------------------------------------------------------------------------
// Lexicons

class SentimentLexicon {
 public:
  SentimentLexicon() = default;

  // Terms are case/width normalized and matched as token sequences, so
  // multi-character CJK terms and multi-word phrases both work.
  void add(std::string_view term, double polarity) {
    require(polarity != 0.0 && std::isfinite(polarity),
            "sentiment polarity must be finite and nonzero: '" +
                std::string(term) + "'");
    const auto tokens = tokenize(unicode::normalize(term));
    require(!tokens.empty(), "sentiment term has no word characters: '" +
                                 std::string(term) + "'");
    entries_[join(tokens)] = polarity;
    max_tokens_ = std::max(max_tokens_, tokens.size());
  }

  static SentimentLexicon parse(std::istream& in) {
    SentimentLexicon lexicon;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
      ++line_no;
      if (!line.empty() && line.back() == '\r') line.pop_back();
      if (line.empty() || line[0] == '#') continue;
      const auto tab = line.find('\t');
      const auto fail = [&](const std::string& why) {
        throw ParseError("sentiment lexicon line " + std::to_string(line_no) +
                         ": " + why);
      };
      if (tab == std::string::npos) fail("expected term<TAB>polarity");
      double polarity = 0.0;
      try {
        std::size_t used = 0;
        polarity = std::stod(line.substr(tab + 1), &used);
        if (used != line.size() - tab - 1) fail("trailing characters after polarity");
      } catch (const std::logic_error&) {
        fail("polarity is not a number");
      }
      try {
        lexicon.add(line.substr(0, tab), polarity);
      } catch (const InvalidArgument& e) {
        fail(e.what());
      }
    }
    return lexicon;
  }

  static SentimentLexicon load(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw Error("cannot open sentiment lexicon '" + path + "'");
    return parse(in);
  }

  std::size_t size() const { return entries_.size(); }
  bool empty() const { return entries_.empty(); }
  std::size_t max_term_tokens() const { return max_tokens_; }

  std::optional<double> polarity(std::span<const std::string> tokens) const {
    const auto it = entries_.find(join(tokens));
    if (it == entries_.end()) return std::nullopt;
    return it->second;
  }

  // All entries keyed by their normalized token sequence (joined with U+001F).
  const std::map<std::string, double>& entries() const { return entries_; }

 private:
  static std::string join(std::span<const std::string> tokens) {
    std::string key;
    for (std::size_t i = 0; i < tokens.size(); ++i) {
      if (i > 0) key.push_back('\x1f');
      key += tokens[i];
    }
    return key;
  }

  std::map<std::string, double> entries_;
  std::size_t max_tokens_ = 0;
};

class CompetitorLexicon {
 public:
  CompetitorLexicon() = default;

  void add(std::string_view name) {
    std::string normalized = unicode::normalize(name);
    require(!normalized.empty(), "competitor name must be nonempty");
    names_.insert(std::move(normalized));
  }

  // One name per line; blank lines are skipped.
  static CompetitorLexicon parse(std::istream& in) {
    CompetitorLexicon lexicon;
    std::string line;
    while (std::getline(in, line)) {
      if (!line.empty() && line.back() == '\r') line.pop_back();
      if (line.find_first_not_of(" \t") == std::string::npos) continue;
      lexicon.add(line);
    }
    return lexicon;
  }

  static CompetitorLexicon load(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw Error("cannot open competitor lexicon '" + path + "'");
    return parse(in);
  }

  std::size_t size() const { return names_.size(); }
  bool empty() const { return names_.empty(); }
  const std::set<std::string>& names() const { return names_; }

 private:
  std::set<std::string> names_;
};

struct Lexicons {
  SentimentLexicon sentiment;
  CompetitorLexicon competitors;
};

// The sample lexicons shipped under data/lexicons, compiled in so that the
// synthetic generator does not depend on the working directory.
inline constexpr std::string_view kSampleSentimentLexicon =
    "terrible\t-2\nawful\t-2\ndisgusting\t-3\nrude\t-2\nbad\t-1\nslow\t-1\n"
    "dirty\t-2\ncold\t-1\noverpriced\t-1.5\nbland\t-1\ndisappointing\t-1.5\n"
    "worst\t-3\npoor\t-1\nnoisy\t-1\nundercooked\t-1.5\n"
    "\xe5\xbe\x88\xe5\xb7\xae\t-2\n"           // 很差
    "\xe9\x9a\xbe\xe5\x90\x83\t-2\n"           // 难吃
    "\xe5\xa4\xb1\xe6\x9c\x9b\t-1.5\n"         // 失望
    "good\t1\ngreat\t1.5\ndelicious\t2\nfriendly\t1\nexcellent\t2\n"
    "tasty\t1\nnice\t1\nclean\t1\n"
    "\xe5\xa5\xbd\xe5\x90\x83\t1.5\n"          // 好吃
    "\xe4\xb8\x8d\xe9\x94\x99\t1\n";           // 不错

inline constexpr std::string_view kSampleCompetitorLexicon =
    "KFC\nMcDonalds\nHaidilao\nStarbucks\nPizza Hut\n"
    "\xe6\xb5\xb7\xe5\xba\x95\xe6\x8d\x9e\n";  // 海底捞

inline Lexicons sample_lexicons() {
  std::istringstream sentiment{std::string(kSampleSentimentLexicon)};
  std::istringstream competitors{std::string(kSampleCompetitorLexicon)};
  return {SentimentLexicon::parse(sentiment), CompetitorLexicon::parse(competitors)};
}

// ---------------------------------------------------------------------------
// Text measurements

// Emoji are counted per code point with the Emoji property; ASCII emoticons
// such as ":)" are not emoji.
inline std::size_t count_emoji(std::string_view text) {
  std::size_t count = 0;
  for (std::size_t pos = 0; pos < text.size();) {
    if (unicode::is_emoji(unicode::decode_next(text, pos))) ++count;
  }
  return count;
}

// Total occurrences of any competitor name after normalization. The scan is
// greedy left to right with the longest name winning, so overlapping matches
// are counted once.
inline std::size_t count_competitor_mentions(std::string_view text,
                                             const CompetitorLexicon& lexicon) {
  if (lexicon.empty() || text.empty()) return 0;
  std::vector<std::string_view> names(lexicon.names().begin(),
                                      lexicon.names().end());
  std::stable_sort(names.begin(), names.end(), [](auto a, auto b) {
    return a.size() > b.size();
  });
  const std::string haystack = unicode::normalize(text);
  std::size_t count = 0;
  for (std::size_t pos = 0; pos < haystack.size();) {
    const std::string_view rest(haystack.data() + pos, haystack.size() - pos);
    const auto hit = std::find_if(names.begin(), names.end(), [&](auto name) {
      return rest.starts_with(name);
    });
    if (hit != names.end()) {
      ++count;
      pos += hit->size();
    } else {
      unicode::decode_next(haystack, pos);
    }
  }
  return count;
}

struct SentimentIntensity {
  double positive = 0.0;
  double negative = 0.0;  // sum of magnitudes, never negative
};

// Occurrence-weighted lexicon sums, positive and negative kept separate.
// Matching is greedy longest-first over the normalized token sequence.
// No negation handling.
inline SentimentIntensity sentiment_intensity(std::string_view text,
                                              const SentimentLexicon& lexicon) {
  SentimentIntensity out;
  if (lexicon.empty()) return out;
  const auto tokens = tokenize(unicode::normalize(text));
  const std::span<const std::string> all(tokens);
  for (std::size_t i = 0; i < tokens.size();) {
    std::size_t matched = 0;
    const std::size_t longest =
        std::min(lexicon.max_term_tokens(), tokens.size() - i);
    for (std::size_t len = longest; len >= 1; --len) {
      if (const auto polarity = lexicon.polarity(all.subspan(i, len))) {
        if (*polarity > 0) {
          out.positive += *polarity;
        } else {
          out.negative -= *polarity;
        }
        matched = len;
        break;
      }
    }
    i += matched > 0 ? matched : 1;
  }
  return out;
}

inline FeatureVector extract_features(const Review& review,
                                      const Lexicons& lexicons) {
  FeatureVector x;
  x[Feature::kIdentity] = review.identity_disclosed ? 1.0 : 0.0;
  x[Feature::kMembership] = review.member ? 1.0 : 0.0;
  x[Feature::kConsumption] = review.consumption_verified ? 1.0 : 0.0;
  x[Feature::kRating] = review.rating;
  x[Feature::kLength] = static_cast<double>(count_tokens(review.text));
  x[Feature::kCompetitor] = static_cast<double>(
      count_competitor_mentions(review.text, lexicons.competitors));
  const auto sentiment = sentiment_intensity(review.text, lexicons.sentiment);
  x[Feature::kNegValence] = sentiment.negative;
  x[Feature::kPosValence] = sentiment.positive;
  x[Feature::kImage] = review.image_count;
  x[Feature::kEmoji] = static_cast<double>(count_emoji(review.text));
  x[Feature::kEngagement] = review.reply_count;
  return x;
}

// ---------------------------------------------------------------------------
// Standardization

// Z-scoring with population statistics. A feature with zero spread maps to 0.
struct Standardizer {
  std::array<double, kFeatureCount> mean{};
  std::array<double, kFeatureCount> stddev{};
  std::string fitted_on;

  FeatureVector apply(const FeatureVector& x) const {
    FeatureVector z;
    for (std::size_t i = 0; i < kFeatureCount; ++i) {
      z[i] = stddev[i] > 0.0 ? (x[i] - mean[i]) / stddev[i] : 0.0;
    }
    return z;
  }

  friend bool operator==(const Standardizer&, const Standardizer&) = default;
};

inline Standardizer fit_standardizer(std::span<const FeatureVector> vectors,
                                     std::string fitted_on = "train") {
  if (vectors.empty()) throw InvalidArgument("cannot fit a standardizer on an empty set");
  require(vectors.size() >= 2, "fitting a standardizer needs at least 2 vectors");
  Standardizer s;
  s.fitted_on = std::move(fitted_on);
  const double n = static_cast<double>(vectors.size());
  for (std::size_t i = 0; i < kFeatureCount; ++i) {
    double sum = 0.0;
    for (const auto& v : vectors) sum += v[i];
    const double mean = sum / n;
    double ss = 0.0;
    for (const auto& v : vectors) ss += (v[i] - mean) * (v[i] - mean);
    double stddev = std::sqrt(ss / n);
    // Treat round-off spread of a constant column as constant.
    if (stddev <= 1e-12 * std::max(1.0, std::abs(mean))) stddev = 0.0;
    s.mean[i] = mean;
    s.stddev[i] = stddev;
  }
  return s;
}

// Reference point for attributions: the training mean for continuous
// features and the mode for binary ones (ties go to 1).
inline FeatureVector reference_baseline(std::span<const FeatureVector> vectors) {
  require(!vectors.empty(), "baseline needs at least one vector");
  FeatureVector b;
  const double n = static_cast<double>(vectors.size());
  for (std::size_t i = 0; i < kFeatureCount; ++i) {
    double sum = 0.0;
    for (const auto& v : vectors) sum += v[i];
    if (is_binary_feature(i)) {
      b[i] = sum * 2.0 >= n ? 1.0 : 0.0;
    } else {
      b[i] = sum / n;
    }
  }
  return b;
}

}  // namespace revtriage

#endif  // REVTRIAGE_FEATURES_HPP_
