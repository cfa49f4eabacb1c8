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

#ifndef REVTRIAGE_SYNTHETIC_HPP_
#define REVTRIAGE_SYNTHETIC_HPP_

#include <algorithm>
#include <array>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

#include "revtriage/common.hpp"
#include "revtriage/corpus.hpp"
#include "revtriage/features.hpp"
#include "revtriage/fusion.hpp"
#include "revtriage/rng.hpp"

namespace revtriage {

struct TriggerKeyword {
  std::string word;
  double weight = 0.0;

  friend bool operator==(const TriggerKeyword&, const TriggerKeyword&) = default;
};

// Ground truth for a generated corpus. Feature weights are logit
// coefficients on corpus-standardized feature values; each trigger keyword
// present in a review adds its weight to the logit once.
struct SyntheticSpec {
  std::size_t n_reviews = 1000;
  std::array<double, kFeatureCount> feature_weights{};
  std::vector<TriggerKeyword> trigger_keywords;
  double intercept = 0.0;
  double label_noise_rate = 0.0;
  std::uint64_t seed = 0;

  void validate() const {
    require(label_noise_rate >= 0.0 && label_noise_rate < 0.5,
            "label noise rate must be in [0, 0.5)");
    bool any = false;
    for (double w : feature_weights) {
      require(std::isfinite(w), "feature weights must be finite");
      any = any || w != 0.0;
    }
    for (const auto& t : trigger_keywords) {
      require(tokenize(t.word).size() == 1,
              "trigger keyword must be a single token: '" + t.word + "'");
      require(std::isfinite(t.weight), "trigger weights must be finite");
      any = any || t.weight != 0.0;
    }
    require(any, "synthetic spec needs at least one nonzero weight");
    require(std::isfinite(intercept), "intercept must be finite");
  }

  friend bool operator==(const SyntheticSpec&, const SyntheticSpec&) = default;
};

inline json synthetic_spec_to_json(const SyntheticSpec& spec) {
  json weights = json::object();
  for (std::size_t i = 0; i < kFeatureCount; ++i) {
    weights[std::string(kFeatureNames[i])] = spec.feature_weights[i];
  }
  json triggers = json::array();
  for (const auto& t : spec.trigger_keywords) {
    triggers.push_back({{"word", t.word}, {"weight", t.weight}});
  }
  return {{"n_reviews", spec.n_reviews},      {"feature_weights", weights},
          {"trigger_keywords", triggers},     {"intercept", spec.intercept},
          {"label_noise_rate", spec.label_noise_rate}, {"seed", spec.seed}};
}

// Missing feature weights default to 0; unknown feature names are rejected.
inline SyntheticSpec synthetic_spec_from_json(const json& j) {
  SyntheticSpec spec;
  try {
    spec.n_reviews = j.at("n_reviews").get<std::size_t>();
    if (j.contains("feature_weights")) {
      for (const auto& [name, value] : j.at("feature_weights").items()) {
        const auto f = feature_from_name(name);
        if (!f) throw ParseError("unknown feature '" + name + "' in feature_weights");
        spec.feature_weights[static_cast<std::size_t>(*f)] = value.get<double>();
      }
    }
    if (j.contains("trigger_keywords")) {
      for (const auto& t : j.at("trigger_keywords")) {
        spec.trigger_keywords.push_back(
            {t.at("word").get<std::string>(), t.at("weight").get<double>()});
      }
    }
    spec.intercept = j.value("intercept", 0.0);
    spec.label_noise_rate = j.value("label_noise_rate", 0.0);
    spec.seed = j.value("seed", std::uint64_t{0});
  } catch (const json::exception& e) {
    throw ParseError(std::string("invalid synthetic spec: ") + e.what());
  }
  spec.validate();
  return spec;
}

struct SyntheticCorpus {
  std::vector<LabeledReview> reviews;
  SyntheticSpec spec;
  std::vector<double> planted_logits;  // one per review, before noise
  std::array<double, kFeatureCount> feature_mean{};
  std::array<double, kFeatureCount> feature_stddev{};
};

namespace synthetic {

// Neutral filler; none of these match a sample lexicon term or competitor.
inline constexpr std::array<std::string_view, 64> kFiller = {
    "we",       "ordered",  "three",    "dishes",   "for",      "two",
    "people",   "it",       "cost",     "us",       "the",      "taste",
    "was",      "honestly", "average",  "spaghetti", "quite",   "why",
    "is",       "ranked",   "first",    "arrived",  "around",   "there",
    "no",       "one",      "at",       "reception", "desk",    "entrance",
    "had",      "to",       "chase",    "someone",  "about",    "seating",
    "purchased", "in",      "advance",  "when",     "informed", "package",
    "could",    "not",      "be",       "applied",  "store",    "summarize",
    "sentence", "price",    "quality",  "visit",    "again",    "environment",
    "fries",    "sweet",    "potato",   "table",    "menu",     "waiter",
    "service",  "evening",  "friends",  "dinner"};

inline constexpr std::array<std::string_view, 15> kNegativeTerms = {
    "terrible", "awful", "disgusting", "rude",  "bad",
    "slow",     "dirty", "cold",       "overpriced", "bland",
    "disappointing", "worst", "poor",  "noisy", "undercooked"};

inline constexpr std::array<std::string_view, 8> kPositiveTerms = {
    "good", "great", "delicious", "friendly", "excellent", "tasty", "nice", "clean"};

inline constexpr std::array<std::string_view, 4> kCompetitors = {
    "KFC", "McDonalds", "Haidilao", "Starbucks"};

inline constexpr std::array<std::string_view, 6> kEmoji = {
    "\xf0\x9f\x91\x8e",  // thumbs down
    "\xf0\x9f\x98\xa1",  // pouting face
    "\xf0\x9f\x98\x9e",  // disappointed face
    "\xf0\x9f\x92\x94",  // broken heart
    "\xf0\x9f\x99\x84",  // face with rolling eyes
    "\xf0\x9f\x91\x8d",  // thumbs up
};

// Probability that a trigger keyword is inserted into a review.
inline double trigger_rate(double weight) {
  return std::clamp(0.1 * std::abs(weight), 0.05, 0.5);
}

}  // namespace synthetic

// Generates a labeled corpus with known ground truth.
//
// Per review: identity, membership and consumption ~ Bernoulli(0.5); rating
// uniform on 1..5; image count ~ TruncGeom(0.35, 9); replies ~
// TruncGeom(0.4, 10). The text mixes 3 + TruncGeom(0.06, 60) filler words
// with TruncGeom(0.35, 8) negative and TruncGeom(0.6, 4) positive lexicon
// terms, TruncGeom(0.7, 3) competitor names, TruncGeom(0.6, 5) emoji and each
// trigger keyword with probability trigger_rate(weight). TruncGeom(p, m)
// counts failures before the first success, resampled until <= m.
//
// Features are then extracted with the sample lexicons and standardized with
// the corpus moments; label = Bernoulli(sigmoid(w . z + triggers + intercept)),
// flipped with the noise rate; helpful votes are uniform on 4..20 for
// positives and 0..3 for negatives.
inline SyntheticCorpus generate_synthetic_corpus(const SyntheticSpec& spec) {
  spec.validate();
  namespace syn = synthetic;
  const Lexicons lexicons = sample_lexicons();
  Rng rng(splitmix64(spec.seed));

  SyntheticCorpus out;
  out.spec = spec;
  out.reviews.reserve(spec.n_reviews);
  std::vector<FeatureVector> raw;
  raw.reserve(spec.n_reviews);
  std::vector<double> trigger_logit(spec.n_reviews, 0.0);
  const std::chrono::sys_days first_day =
      std::chrono::year_month_day{std::chrono::year{2023}, std::chrono::month{1},
                                  std::chrono::day{1}};

  for (std::size_t n = 0; n < spec.n_reviews; ++n) {
    Review r;
    char id[32];
    std::snprintf(id, sizeof(id), "syn-%06zu", n + 1);
    r.id = id;
    r.restaurant_id = "r" + std::to_string(1 + rng.below(43));
    r.identity_disclosed = rng.bernoulli(0.5);
    r.member = rng.bernoulli(0.5);
    r.consumption_verified = rng.bernoulli(0.5);
    r.rating = rng.uniform_int(1, 5);
    r.image_count = rng.truncated_geometric(0.35, 9);
    r.reply_count = rng.truncated_geometric(0.4, 10);
    r.review_date = std::chrono::year_month_day{
        first_day + std::chrono::days{static_cast<int>(rng.below(365))}};

    std::vector<std::string> words;
    const int filler = 3 + rng.truncated_geometric(0.06, 60);
    for (int k = 0; k < filler; ++k) {
      words.emplace_back(syn::kFiller[rng.below(syn::kFiller.size())]);
    }
    const int negatives = rng.truncated_geometric(0.35, 8);
    for (int k = 0; k < negatives; ++k) {
      words.emplace_back(syn::kNegativeTerms[rng.below(syn::kNegativeTerms.size())]);
    }
    const int positives = rng.truncated_geometric(0.6, 4);
    for (int k = 0; k < positives; ++k) {
      words.emplace_back(syn::kPositiveTerms[rng.below(syn::kPositiveTerms.size())]);
    }
    const int competitors = rng.truncated_geometric(0.7, 3);
    for (int k = 0; k < competitors; ++k) {
      words.emplace_back(syn::kCompetitors[rng.below(syn::kCompetitors.size())]);
    }
    for (const auto& t : spec.trigger_keywords) {
      if (rng.bernoulli(syn::trigger_rate(t.weight))) {
        words.push_back(t.word);
        trigger_logit[n] += t.weight;
      }
    }
    rng.shuffle(std::span<std::string>(words));
    const int emoji = rng.truncated_geometric(0.6, 5);
    for (int k = 0; k < emoji; ++k) {
      const auto at = static_cast<std::ptrdiff_t>(rng.below(words.size() + 1));
      words.insert(words.begin() + at,
                   std::string(syn::kEmoji[rng.below(syn::kEmoji.size())]));
    }
    for (std::size_t k = 0; k < words.size(); ++k) {
      if (k > 0) r.text.push_back(' ');
      r.text += words[k];
    }
    r.text.push_back('.');
    raw.push_back(extract_features(r, lexicons));
    out.reviews.push_back({std::move(r), false});
  }

  if (spec.n_reviews == 0) return out;
  const Standardizer moments =
      spec.n_reviews >= 2 ? fit_standardizer(raw, "synthetic") : Standardizer{};
  out.feature_mean = moments.mean;
  out.feature_stddev = moments.stddev;

  Rng label_rng(splitmix64(spec.seed ^ 0x6c6162656cULL));
  out.planted_logits.reserve(spec.n_reviews);
  for (std::size_t n = 0; n < spec.n_reviews; ++n) {
    const FeatureVector z = moments.apply(raw[n]);
    double logit = spec.intercept + trigger_logit[n];
    for (std::size_t i = 0; i < kFeatureCount; ++i) {
      logit += spec.feature_weights[i] * z[i];
    }
    out.planted_logits.push_back(logit);
    bool label = label_rng.bernoulli(sigmoid(logit));
    if (label_rng.bernoulli(spec.label_noise_rate)) label = !label;
    auto& lr = out.reviews[n];
    lr.influential = label;
    lr.review.helpful_votes = label ? label_rng.uniform_int(4, 20)
                                    : label_rng.uniform_int(0, 3);
  }
  return out;
}

// Sidecar file contents: the spec verbatim, the standardization moments and
// the planted logit of every review.
inline json synthetic_ground_truth(const SyntheticCorpus& corpus) {
  json logits = json::array();
  for (std::size_t n = 0; n < corpus.reviews.size(); ++n) {
    logits.push_back({{"id", corpus.reviews[n].review.id},
                      {"logit", corpus.planted_logits[n]}});
  }
  return {{"spec", synthetic_spec_to_json(corpus.spec)},
          {"feature_mean", corpus.feature_mean},
          {"feature_stddev", corpus.feature_stddev},
          {"planted_logits", logits}};
}

}  // namespace revtriage

#endif  // REVTRIAGE_SYNTHETIC_HPP_
