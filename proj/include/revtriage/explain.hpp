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

#ifndef REVTRIAGE_EXPLAIN_HPP_
#define REVTRIAGE_EXPLAIN_HPP_

#include <algorithm>
#include <array>
#include <bit>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <limits>
#include <numeric>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "revtriage/common.hpp"
#include "revtriage/features.hpp"
#include "revtriage/fusion.hpp"
#include "revtriage/rng.hpp"
#include "revtriage/text.hpp"

namespace revtriage {

// ---------------------------------------------------------------------------
// Shapley attributions over the interpretable features.
//
// The game: v(S) is the model output with features in S at the instance's
// values and every other feature at a single fixed reference vector
// (interventional with one reference). Features outside the model variant
// never enter a coalition and receive phi = 0.

struct Attribution {
  double base_value = 0.0;
  std::array<double, kFeatureCount> phi{};
  double output = 0.0;
};

enum class ShapMethod { kExact, kKernel };

struct ShapConfig {
  ShapMethod method = ShapMethod::kExact;
  std::optional<FeatureVector> baseline;  // default: the model's reference
  std::size_t n_samples = 2048;           // kernel only
  std::uint64_t seed = 0;
};

inline constexpr std::size_t kMaxExactFeatures = 20;

// Bit i of a coalition stands for feature i in canonical order.
using Coalition = std::uint32_t;

template <typename Model>
double value_function(const Model& model, const FeatureVector& instance,
                      Coalition coalition, const FeatureVector& baseline) {
  FeatureVector x = baseline;
  for (std::size_t i = 0; i < kFeatureCount; ++i) {
    if (coalition & (Coalition{1} << i)) x[i] = instance[i];
  }
  return static_cast<double>(model(x));
}

namespace detail {

inline Coalition to_coalition(std::uint64_t local_mask,
                              std::span<const std::size_t> included) {
  Coalition c = 0;
  for (std::size_t k = 0; k < included.size(); ++k) {
    if (local_mask & (std::uint64_t{1} << k)) c |= Coalition{1} << included[k];
  }
  return c;
}

inline double binomial(std::size_t n, std::size_t k) {
  if (k > n) return 0.0;
  k = std::min(k, n - k);
  double r = 1.0;
  for (std::size_t i = 1; i <= k; ++i) {
    r = r * static_cast<double>(n - k + i) / static_cast<double>(i);
  }
  return r;
}

inline void check_included(std::span<const std::size_t> included) {
  for (std::size_t k = 0; k < included.size(); ++k) {
    require(included[k] < kFeatureCount, "feature index out of range");
    for (std::size_t j = 0; j < k; ++j) {
      require(included[j] != included[k], "duplicate feature in coalition set");
    }
  }
}

}  // namespace detail

// phi_i = sum over S not containing i of |S|!(d-|S|-1)!/d! [v(S+i) - v(S)],
// by full enumeration of the 2^d coalitions with every v(S) evaluated once.
template <typename Model>
Attribution shap_exact(const Model& model, const FeatureVector& instance,
                       std::span<const std::size_t> included,
                       const FeatureVector& baseline) {
  detail::check_included(included);
  const std::size_t d = included.size();
  if (d > kMaxExactFeatures) {
    throw InvalidArgument("exact Shapley enumeration supports at most " +
                          std::to_string(kMaxExactFeatures) + " features (got " +
                          std::to_string(d) + "); use the kernel method");
  }
  const std::uint64_t n_masks = std::uint64_t{1} << d;
  std::vector<double> v(n_masks);
  for (std::uint64_t m = 0; m < n_masks; ++m) {
    v[m] = value_function(model, instance, detail::to_coalition(m, included), baseline);
  }
  Attribution a;
  a.base_value = v.front();
  a.output = v.back();
  if (d == 0) return a;
  // weight[s] = s!(d-s-1)!/d! = 1 / (d * C(d-1, s))
  std::vector<double> weight(d);
  for (std::size_t s = 0; s < d; ++s) {
    weight[s] = 1.0 / (static_cast<double>(d) * detail::binomial(d - 1, s));
  }
  for (std::size_t k = 0; k < d; ++k) {
    const std::uint64_t bit = std::uint64_t{1} << k;
    double phi = 0.0;
    for (std::uint64_t m = 0; m < n_masks; ++m) {
      if (m & bit) continue;
      phi += weight[static_cast<std::size_t>(std::popcount(m))] * (v[m | bit] - v[m]);
    }
    a.phi[included[k]] = phi;
  }
  return a;
}

// Shapley kernel weight of a coalition of size s among d players:
// (d-1) / (C(d,s) s (d-s)). Infinite for the empty and full coalitions,
// which are imposed as constraints instead.
inline double shap_kernel_weight(std::size_t d, std::size_t s) {
  if (s == 0 || s >= d) return std::numeric_limits<double>::infinity();
  return static_cast<double>(d - 1) /
         (detail::binomial(d, s) * static_cast<double>(s) * static_cast<double>(d - s));
}

// Kernel SHAP: weighted least squares of v(z) - v(empty) on the coalition
// indicators z, subject to sum(phi) = v(full) - v(empty). The constraint is
// eliminated by substituting the last feature. When n_samples covers all
// 2^d - 2 proper coalitions they are enumerated with their exact kernel
// weights (the result is then the exact Shapley value); otherwise coalition
// sizes are drawn in proportion to their total kernel weight and members
// uniformly, each draw with unit weight.
template <typename Model>
Attribution shap_kernel(const Model& model, const FeatureVector& instance,
                        std::span<const std::size_t> included,
                        const FeatureVector& baseline, std::size_t n_samples,
                        std::uint64_t seed) {
  detail::check_included(included);
  const std::size_t d = included.size();
  require(d >= 2, "kernel SHAP needs at least two features");
  require(d <= 62, "too many features for kernel SHAP");
  require(n_samples >= 1, "kernel SHAP needs at least one sample");

  Attribution a;
  a.base_value = value_function(model, instance, 0, baseline);
  a.output = value_function(model, instance,
                            detail::to_coalition((std::uint64_t{1} << d) - 1, included),
                            baseline);
  const double total = a.output - a.base_value;

  std::vector<std::uint64_t> masks;
  std::vector<double> weights;
  const double proper = std::ldexp(1.0, static_cast<int>(d)) - 2.0;
  if (static_cast<double>(n_samples) >= proper) {
    const std::uint64_t full = (std::uint64_t{1} << d) - 1;
    for (std::uint64_t m = 1; m < full; ++m) {
      masks.push_back(m);
      weights.push_back(shap_kernel_weight(d, static_cast<std::size_t>(std::popcount(m))));
    }
  } else {
    Rng rng(splitmix64(seed));
    std::vector<double> cumulative(d - 1);
    double acc = 0.0;
    for (std::size_t s = 1; s < d; ++s) {
      acc += static_cast<double>(d - 1) / static_cast<double>(s * (d - s));
      cumulative[s - 1] = acc;
    }
    std::vector<std::size_t> pool(d);
    for (std::size_t n = 0; n < n_samples; ++n) {
      const double u = rng.uniform() * acc;
      const std::size_t s =
          1 + static_cast<std::size_t>(
                  std::upper_bound(cumulative.begin(), cumulative.end(), u) -
                  cumulative.begin());
      std::iota(pool.begin(), pool.end(), std::size_t{0});
      std::uint64_t m = 0;
      for (std::size_t k = 0; k < std::min(s, d - 1); ++k) {
        const std::size_t j = k + static_cast<std::size_t>(rng.below(d - k));
        std::swap(pool[k], pool[j]);
        m |= std::uint64_t{1} << pool[k];
      }
      masks.push_back(m);
      weights.push_back(1.0);
    }
  }

  // Unknowns phi_0..phi_{d-2}; phi_{d-1} = total - sum of the others.
  const auto p = static_cast<Eigen::Index>(d - 1);
  Matrix normal = Matrix::Zero(p, p);
  Vector rhs = Vector::Zero(p);
  Vector row(p);
  const std::uint64_t last = std::uint64_t{1} << (d - 1);
  for (std::size_t n = 0; n < masks.size(); ++n) {
    const std::uint64_t m = masks[n];
    const double z_last = (m & last) ? 1.0 : 0.0;
    for (Eigen::Index k = 0; k < p; ++k) {
      row[k] = ((m >> k) & 1u ? 1.0 : 0.0) - z_last;
    }
    const double y = value_function(model, instance, detail::to_coalition(m, included),
                                    baseline) -
                     a.base_value - z_last * total;
    normal.noalias() += weights[n] * row * row.transpose();
    rhs.noalias() += weights[n] * y * row;
  }
  const Eigen::LDLT<Matrix> ldlt(normal);
  if (ldlt.info() != Eigen::Success || !ldlt.isPositive() || ldlt.rcond() < 1e-12) {
    throw Error("kernel SHAP system is singular; increase n_samples (currently " +
                std::to_string(n_samples) + ")");
  }
  const Vector solution = ldlt.solve(rhs);
  double rest = total;
  for (Eigen::Index k = 0; k < p; ++k) {
    a.phi[included[static_cast<std::size_t>(k)]] = solution[k];
    rest -= solution[k];
  }
  a.phi[included[d - 1]] = rest;
  return a;
}

// ---------------------------------------------------------------------------
// LIME word attributions

struct LimeConfig {
  std::size_t n_samples = 1000;
  std::optional<double> kernel_width;  // default 0.75 * sqrt(token count)
  double ridge = 1e-3;
  std::size_t top_k = 6;
  std::uint64_t seed = 0;
  bool enumerate_small = true;  // all 2^tokens masks once when n_samples allows

  void validate() const {
    require(n_samples >= 10, "LIME needs at least 10 samples");
    require(!kernel_width || *kernel_width > 0.0, "kernel width must be positive");
    require(ridge >= 0.0, "ridge penalty must be non-negative");
  }
};

struct WordExplanation {
  std::vector<std::string> tokens;
  std::vector<double> weights;
  double intercept = 0.0;
  double fidelity_r2 = 0.0;
  std::vector<std::size_t> top_k;  // token positions
  bool constant_output = false;    // the model gave the same output everywhere
  double kernel_width = 0.0;
  std::size_t n_samples = 0;
};

// Proximity of a perturbed sample that keeps `kept` of `total` tokens:
// exp(-D^2 / width^2) with D = 1 - kept/total.
inline double lime_proximity(std::size_t kept, std::size_t total, double width) {
  const double distance = 1.0 - static_cast<double>(kept) / static_cast<double>(total);
  return std::exp(-(distance * distance) / (width * width));
}

// Ridge-regularized weighted linear fit of f on binary masks; the intercept
// is not penalized. Returns per-column weights, intercept and weighted R^2.
struct WeightedFit {
  Vector weights;
  double intercept = 0.0;
  double r2 = 0.0;
  bool constant = false;
};

inline WeightedFit weighted_ridge(const Matrix& x, const Vector& y,
                                  const Vector& sample_weight, double ridge) {
  const double wsum = sample_weight.sum();
  require(wsum > 0.0, "sample weights sum to zero");
  const Vector x_mean = (x.transpose() * sample_weight) / wsum;
  const double y_mean = sample_weight.dot(y) / wsum;
  const Vector yc = y.array() - y_mean;
  const double ss_tot = sample_weight.dot(yc.cwiseProduct(yc));
  WeightedFit fit;
  fit.weights = Vector::Zero(x.cols());
  fit.intercept = y_mean;
  const double scale = std::max(1.0, y.cwiseAbs().maxCoeff());
  if (ss_tot <= 1e-24 * scale * scale * wsum) {
    fit.constant = true;
    return fit;
  }
  const Matrix xc = x.rowwise() - x_mean.transpose();
  const Matrix weighted = xc.array().colwise() * sample_weight.array();
  Matrix gram = xc.transpose() * weighted;
  gram.diagonal().array() += ridge;
  const Vector rhs = weighted.transpose() * yc;
  const Eigen::LDLT<Matrix> ldlt(gram);
  if (ridge > 0.0 && ldlt.info() == Eigen::Success && ldlt.isPositive()) {
    fit.weights = ldlt.solve(rhs);
  } else {
    fit.weights = gram.completeOrthogonalDecomposition().solve(rhs);
  }
  fit.intercept = y_mean - x_mean.dot(fit.weights);
  const Vector residual = y - ((x * fit.weights).array() + fit.intercept).matrix();
  fit.r2 = 1.0 - sample_weight.dot(residual.cwiseProduct(residual)) / ss_tot;
  return fit;
}

// Positions ordered by |weight| descending, earliest position first on ties;
// zero weights are never selected.
inline std::vector<std::size_t> top_positions(std::span<const double> weights,
                                              std::size_t k) {
  std::vector<std::size_t> order;
  for (std::size_t i = 0; i < weights.size(); ++i) {
    if (weights[i] != 0.0) order.push_back(i);
  }
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return std::abs(weights[a]) > std::abs(weights[b]);
  });
  if (order.size() > k) order.resize(k);
  return order;
}

// Explains f(text) at the given text. Masks keep each token independently
// with probability 1/2, with the unperturbed mask always first; when
// n_samples >= 2^tokens every mask is enumerated once instead. A masked text
// is the kept tokens joined by detokenize().
template <typename TextModel>
WordExplanation lime_explain(const TextModel& model, std::string_view text,
                             const LimeConfig& config) {
  config.validate();
  WordExplanation out;
  out.tokens = tokenize(text);
  const std::size_t d = out.tokens.size();
  require(d >= 1, "LIME needs a text with at least one token");
  out.kernel_width = config.kernel_width.value_or(0.75 * std::sqrt(static_cast<double>(d)));

  std::vector<std::vector<bool>> masks;
  if (config.enumerate_small && d <= 20 && config.n_samples >= (std::size_t{1} << d)) {
    const std::uint64_t full = (std::uint64_t{1} << d) - 1;
    for (std::uint64_t m = full + 1; m-- > 0;) {
      std::vector<bool> mask(d);
      for (std::size_t k = 0; k < d; ++k) mask[k] = (m >> k) & 1u;
      masks.push_back(std::move(mask));
    }
  } else {
    Rng rng(splitmix64(config.seed));
    masks.emplace_back(d, true);
    while (masks.size() < config.n_samples) {
      std::vector<bool> mask(d);
      for (std::size_t k = 0; k < d; ++k) mask[k] = rng.bernoulli(0.5);
      masks.push_back(std::move(mask));
    }
  }
  out.n_samples = masks.size();

  const auto n = static_cast<Eigen::Index>(masks.size());
  Matrix x(n, static_cast<Eigen::Index>(d));
  Vector y(n), pi(n);
  std::unordered_map<std::vector<bool>, double> cache;
  std::vector<std::string> kept_tokens;
  for (Eigen::Index r = 0; r < n; ++r) {
    const auto& mask = masks[static_cast<std::size_t>(r)];
    kept_tokens.clear();
    for (std::size_t k = 0; k < d; ++k) {
      x(r, static_cast<Eigen::Index>(k)) = mask[k] ? 1.0 : 0.0;
      if (mask[k]) kept_tokens.push_back(out.tokens[k]);
    }
    auto it = cache.find(mask);
    if (it == cache.end()) {
      it = cache.emplace(mask, static_cast<double>(model(detokenize(kept_tokens)))).first;
    }
    y[r] = it->second;
    pi[r] = lime_proximity(kept_tokens.size(), d, out.kernel_width);
  }

  const WeightedFit fit = weighted_ridge(x, y, pi, config.ridge);
  out.weights.assign(fit.weights.data(), fit.weights.data() + fit.weights.size());
  out.intercept = fit.intercept;
  out.fidelity_r2 = fit.r2;
  out.constant_output = fit.constant;
  out.top_k = top_positions(out.weights, config.top_k);
  return out;
}

// ---------------------------------------------------------------------------
// Global importance

struct ScatterPoint {
  std::string id;
  std::size_t feature = 0;
  double value = 0.0;
  double phi = 0.0;
};

struct GlobalImportance {
  std::array<double, kFeatureCount> mean_abs_phi{};
  std::vector<ScatterPoint> scatter;
  std::size_t instances = 0;
};

// Mean |phi| per feature plus (value, phi) pairs of every instance for a
// beeswarm-style plot. Only features with a nonzero attribution somewhere
// or inside `included` contribute scatter points.
inline GlobalImportance aggregate_importance(std::span<const Attribution> attributions,
                                             std::span<const FeatureVector> values,
                                             std::span<const std::string> ids,
                                             std::span<const std::size_t> included) {
  require(!attributions.empty(), "global importance needs at least one instance");
  require(attributions.size() == values.size() && values.size() == ids.size(),
          "attribution, value and id counts differ");
  GlobalImportance g;
  g.instances = attributions.size();
  for (std::size_t n = 0; n < attributions.size(); ++n) {
    for (std::size_t i = 0; i < kFeatureCount; ++i) {
      g.mean_abs_phi[i] += std::abs(attributions[n].phi[i]);
    }
    for (std::size_t i : included) {
      g.scatter.push_back({ids[n], i, values[n][i], attributions[n].phi[i]});
    }
  }
  for (double& m : g.mean_abs_phi) m /= static_cast<double>(attributions.size());
  return g;
}

// Features ordered by mean |phi|, largest first.
inline std::vector<std::size_t> importance_ranking(const GlobalImportance& g) {
  std::vector<std::size_t> order(kFeatureCount);
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return g.mean_abs_phi[a] > g.mean_abs_phi[b];
  });
  return order;
}

// ---------------------------------------------------------------------------
// Highlight rendering

inline constexpr const char* kPositiveClass = "hl-pos";  // orange family
inline constexpr const char* kNegativeClass = "hl-neg";  // teal family
inline constexpr const char* kPositiveRgb = "255, 127, 14";
inline constexpr const char* kNegativeRgb = "0, 128, 128";

inline std::string html_escape(std::string_view s) {
  std::string out;
  out.reserve(s.size());
  for (char c : s) {
    switch (c) {
      case '&': out += "&amp;"; break;
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      case '"': out += "&quot;"; break;
      case '\'': out += "&#39;"; break;
      default: out.push_back(c);
    }
  }
  return out;
}

// Self-contained HTML page. Each token with a nonzero weight is wrapped in a
// span whose class encodes the sign and whose background opacity is
// |weight| / max |weight|, printed with three decimals.
inline std::string render_highlights(const WordExplanation& e) {
  double max_abs = 0.0;
  for (double w : e.weights) max_abs = std::max(max_abs, std::abs(w));
  std::string body;
  for (std::size_t i = 0; i < e.tokens.size(); ++i) {
    if (i > 0 && !(detail::is_cjk_token(e.tokens[i - 1]) &&
                   detail::is_cjk_token(e.tokens[i]))) {
      body.push_back(' ');
    }
    const double w = i < e.weights.size() ? e.weights[i] : 0.0;
    const std::string token = html_escape(e.tokens[i]);
    if (w == 0.0 || max_abs == 0.0) {
      body += token;
      continue;
    }
    char style[96];
    std::snprintf(style, sizeof(style), "background-color: rgba(%s, %.3f)",
                  w > 0 ? kPositiveRgb : kNegativeRgb, std::abs(w) / max_abs);
    body += std::string("<span class=\"") + (w > 0 ? kPositiveClass : kNegativeClass) +
            "\" style=\"" + style + "\">" + token + "</span>";
  }
  std::string doc =
      "<!DOCTYPE html>\n<html>\n<head>\n<meta charset=\"utf-8\">\n"
      "<title>Word-level explanation</title>\n<style>\n"
      "body { font-family: sans-serif; line-height: 1.8; }\n"
      "." + std::string(kPositiveClass) + " { border-bottom: 2px solid rgb(" +
      kPositiveRgb + "); }\n"
      "." + std::string(kNegativeClass) + " { border-bottom: 2px solid rgb(" +
      kNegativeRgb + "); }\n"
      "</style>\n</head>\n<body>\n<p class=\"review\">";
  doc += body;
  doc += "</p>\n</body>\n</html>\n";
  return doc;
}

// ---------------------------------------------------------------------------
// Explaining the fusion model

// Feature-space view of the model for one review: the text embedding is held
// at the instance's and only the raw feature vector varies.
struct FeatureGame {
  const FusionModel* model;
  Vector text;

  double operator()(const FeatureVector& raw) const {
    return model->probability(text, raw);
  }
};

inline Attribution explain_features(const FusionModel& model, const TextInput& text,
                                    const FeatureVector& raw, std::string_view id,
                                    const ShapConfig& config) {
  const FeatureGame game{&model, model.embed_text(text)};
  const auto included = variant_features(model.variant);
  const FeatureVector& baseline = config.baseline ? *config.baseline : model.baseline;
  if (config.method == ShapMethod::kExact) {
    return shap_exact(game, raw, included, baseline);
  }
  return shap_kernel(game, raw, included, baseline, config.n_samples,
                     derive_seed(config.seed, id));
}

inline Attribution explain_features(const FusionModel& model, const Lexicons& lexicons,
                                    const Review& review, const ShapConfig& config) {
  return explain_features(model, model.text.prepare(review),
                          extract_features(review, lexicons), review.id, config);
}

// Word-level view: interpretable features stay frozen except the token count,
// which follows the perturbed text.
struct TextGame {
  const FusionModel* model;
  FeatureVector raw;

  double operator()(const std::string& text) const {
    FeatureVector x = raw;
    x[Feature::kLength] = static_cast<double>(count_tokens(text));
    return model->probability(model->embed_text(model->text.prepare_text(text)), x);
  }
};

inline WordExplanation explain_words(const FusionModel& model, const Lexicons& lexicons,
                                     const Review& review, LimeConfig config) {
  config.seed = derive_seed(config.seed, review.id);
  return lime_explain(TextGame{&model, extract_features(review, lexicons)}, review.text,
                      config);
}

inline GlobalImportance global_importance(const FusionModel& model,
                                          const Lexicons& lexicons,
                                          std::span<const Review> dataset,
                                          const ShapConfig& config) {
  require(!dataset.empty(), "global importance needs a nonempty dataset");
  std::vector<Attribution> attributions;
  std::vector<FeatureVector> values;
  std::vector<std::string> ids;
  for (const auto& review : dataset) {
    const TextInput text = model.text.prepare(review);
    values.push_back(extract_features(review, lexicons));
    ids.push_back(review.id);
    attributions.push_back(explain_features(model, text, values.back(), review.id, config));
  }
  const auto included = variant_features(model.variant);
  return aggregate_importance(attributions, values, ids, included);
}

}  // namespace revtriage

#endif  // REVTRIAGE_EXPLAIN_HPP_
