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

#include <algorithm>
#include <chrono>
#include <cmath>
#include <map>
#include <numeric>
#include <set>
#include <string>
#include <vector>

#include <gtest/gtest.h>

#include "revtriage/explain.hpp"
#include "test_util.hpp"

namespace rt = revtriage;
using revtriage::testing::permutation_shapley;
using revtriage::testing::random_features;
using revtriage::testing::random_model;

namespace {

struct LinearModel {
  std::array<double, rt::kFeatureCount> w{};
  double c = 0.0;
  double operator()(const rt::FeatureVector& x) const {
    double s = c;
    for (std::size_t i = 0; i < rt::kFeatureCount; ++i) s += w[i] * x[i];
    return s;
  }
};

// A smooth model with pairwise interactions, used where linearity would make
// the checks too easy.
struct InteractionModel {
  std::array<double, rt::kFeatureCount> w{};
  double pair = 0.0;
  double operator()(const rt::FeatureVector& x) const {
    double s = 0.0;
    for (std::size_t i = 0; i < rt::kFeatureCount; ++i) s += w[i] * x[i];
    s += pair * x[3] * x[4] - 0.3 * x[0] * x[5];
    return rt::sigmoid(s);
  }
};

std::vector<std::size_t> first_n(std::size_t d) {
  std::vector<std::size_t> v(d);
  std::iota(v.begin(), v.end(), std::size_t{0});
  return v;
}

rt::FeatureGame game_for(const rt::FusionModel& m, rt::Rng& rng) {
  rt::Vector t(static_cast<Eigen::Index>(m.text.dim()));
  for (auto& x : t) x = rng.normal();
  return {&m, t};
}

// Dense Gauss-Jordan elimination with partial pivoting.
std::vector<double> solve(std::vector<std::vector<double>> a, std::vector<double> b) {
  const std::size_t n = b.size();
  for (std::size_t c = 0; c < n; ++c) {
    std::size_t piv = c;
    for (std::size_t r = c + 1; r < n; ++r) {
      if (std::abs(a[r][c]) > std::abs(a[piv][c])) piv = r;
    }
    std::swap(a[c], a[piv]);
    std::swap(b[c], b[piv]);
    for (std::size_t r = 0; r < n; ++r) {
      if (r == c) continue;
      const double f = a[r][c] / a[c][c];
      for (std::size_t k = c; k < n; ++k) a[r][k] -= f * a[c][k];
      b[r] -= f * b[c];
    }
  }
  for (std::size_t r = 0; r < n; ++r) b[r] /= a[r][r];
  return b;
}

// Weighted least squares with an unpenalized intercept (last unknown) and a
// ridge penalty on the slopes, via the normal equations of the raw design.
std::vector<double> wls_oracle(const std::vector<std::vector<double>>& x,
                               const std::vector<double>& y, const std::vector<double>& w,
                               double ridge) {
  const std::size_t d = x.front().size();
  std::vector<std::vector<double>> a(d + 1, std::vector<double>(d + 1, 0.0));
  std::vector<double> b(d + 1, 0.0);
  for (std::size_t n = 0; n < x.size(); ++n) {
    std::vector<double> row = x[n];
    row.push_back(1.0);
    for (std::size_t i = 0; i <= d; ++i) {
      for (std::size_t j = 0; j <= d; ++j) a[i][j] += w[n] * row[i] * row[j];
      b[i] += w[n] * row[i] * y[n];
    }
  }
  for (std::size_t i = 0; i < d; ++i) a[i][i] += ridge;
  return solve(a, b);
}

}  // namespace

// ---------------------------------------------------------------------------
// Value function

TEST(ValueFunction, EndpointsAndMonotonicity) {
  LinearModel lin;
  rt::Rng rng(1);
  for (auto& w : lin.w) w = 0.5 + rng.uniform();
  rt::FeatureVector base, x;
  for (std::size_t i = 0; i < rt::kFeatureCount; ++i) {
    base[i] = rng.normal();
    x[i] = base[i] + 0.1 + rng.uniform();
  }
  EXPECT_DOUBLE_EQ(rt::value_function(lin, x, 0, base), lin(base));
  EXPECT_DOUBLE_EQ(rt::value_function(lin, x, (1u << rt::kFeatureCount) - 1, base), lin(x));
  for (int trial = 0; trial < 200; ++trial) {
    const auto s = static_cast<rt::Coalition>(rng.below(1u << rt::kFeatureCount));
    const auto t = s | (rt::Coalition{1} << rng.below(rt::kFeatureCount));
    EXPECT_LE(rt::value_function(lin, x, s, base), rt::value_function(lin, x, t, base));
  }
}

// ---------------------------------------------------------------------------
// Exact Shapley

TEST(ShapExact, MatchesPermutationBruteForce) {
  rt::Rng rng(2);
  for (int trial = 0; trial < 20; ++trial) {
    const std::size_t d = 2 + trial % 7;
    std::vector<std::size_t> players;
    for (std::size_t i = 0; i < rt::kFeatureCount; ++i) players.push_back(i);
    rng.shuffle(std::span<std::size_t>(players));
    players.resize(d);
    const auto model = random_model(rt::Variant::kAll, 40 + trial);
    const auto game = game_for(model, rng);
    const auto x = random_features(rng, 2.0), b = random_features(rng, 0.5);
    const auto a = rt::shap_exact(game, x, players, b);
    const auto oracle = permutation_shapley(game, x, players, b);
    for (std::size_t i = 0; i < rt::kFeatureCount; ++i) EXPECT_NEAR(a.phi[i], oracle[i], 1e-9);
  }
}

TEST(ShapExact, LinearClosedForm) {
  LinearModel lin;
  rt::Rng rng(3);
  for (auto& w : lin.w) w = rng.normal();
  lin.c = 0.7;
  const auto x = random_features(rng, 3.0), b = random_features(rng);
  const auto a = rt::shap_exact(lin, x, first_n(rt::kFeatureCount), b);
  for (std::size_t i = 0; i < rt::kFeatureCount; ++i) {
    EXPECT_NEAR(a.phi[i], lin.w[i] * (x[i] - b[i]), 1e-12);
  }
  EXPECT_DOUBLE_EQ(a.base_value, lin(b));
  EXPECT_DOUBLE_EQ(a.output, lin(x));
}

TEST(ShapExact, DummyAndSymmetryAxioms) {
  InteractionModel m;
  rt::Rng rng(4);
  for (auto& w : m.w) w = rng.normal();
  m.w[9] = 0.0;  // feature 9 is a dummy
  m.w[1] = m.w[2] = 0.8;
  m.pair = 0.5;
  for (int trial = 0; trial < 20; ++trial) {
    auto x = random_features(rng, 2.0), b = random_features(rng);
    x[2] = x[1];
    b[2] = b[1];
    const auto a = rt::shap_exact(m, x, first_n(rt::kFeatureCount), b);
    EXPECT_LT(std::abs(a.phi[9]), 1e-9);
    EXPECT_LT(std::abs(a.phi[1] - a.phi[2]), 1e-9);
  }
}

TEST(ShapExact, ExcludedFeaturesGetZero) {
  LinearModel lin;
  for (auto& w : lin.w) w = 1.0;
  rt::Rng rng(5);
  const auto x = random_features(rng), b = random_features(rng);
  const std::vector<std::size_t> players = {0, 1, 2};
  const auto a = rt::shap_exact(lin, x, players, b);
  for (std::size_t i = 3; i < rt::kFeatureCount; ++i) EXPECT_EQ(a.phi[i], 0.0);
  const std::vector<std::size_t> duplicate = {1, 1};
  EXPECT_THROW(rt::shap_exact(lin, x, duplicate, b), rt::InvalidArgument);
  const std::vector<std::size_t> out_of_range = {11};
  EXPECT_THROW(rt::shap_exact(lin, x, out_of_range, b), rt::InvalidArgument);
}

// ---------------------------------------------------------------------------
// Kernel Shapley

TEST(ShapKernel, KernelWeight) {
  EXPECT_DOUBLE_EQ(rt::shap_kernel_weight(4, 1), 0.25);
  EXPECT_DOUBLE_EQ(rt::shap_kernel_weight(4, 2), 3.0 / (6 * 2 * 2));
  EXPECT_TRUE(std::isinf(rt::shap_kernel_weight(4, 0)));
  EXPECT_TRUE(std::isinf(rt::shap_kernel_weight(4, 4)));
}

TEST(ShapKernel, FullEnumerationEqualsExact) {
  rt::Rng rng(6);
  const auto players = first_n(rt::kFeatureCount);
  const auto start = std::chrono::steady_clock::now();
  for (int trial = 0; trial < 20; ++trial) {
    const auto model = random_model(rt::Variant::kAll, 60 + trial);
    const auto game = game_for(model, rng);
    const auto x = random_features(rng, 2.0), b = random_features(rng, 0.5);
    const auto exact = rt::shap_exact(game, x, players, b);
    const auto kernel = rt::shap_kernel(game, x, players, b, 2046, 1);
    for (std::size_t i = 0; i < rt::kFeatureCount; ++i) {
      EXPECT_NEAR(kernel.phi[i], exact.phi[i], 1e-6);
    }
  }
  EXPECT_LT(std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count(),
            30.0);
}

TEST(ShapKernel, EfficiencyHoldsForBothMethods) {
  rt::Rng rng(7);
  const auto players = first_n(rt::kFeatureCount);
  const auto model = random_model(rt::Variant::kAll, 70);
  for (int trial = 0; trial < 100; ++trial) {
    const auto game = game_for(model, rng);
    const auto x = random_features(rng, 2.0), b = random_features(rng, 0.5);
    for (const auto& a : {rt::shap_exact(game, x, players, b),
                          rt::shap_kernel(game, x, players, b, 300, trial)}) {
      const double sum = std::accumulate(a.phi.begin(), a.phi.end(), a.base_value);
      EXPECT_NEAR(sum, a.output, 1e-6);
      EXPECT_NEAR(a.output, game(x), 1e-15);
    }
  }
}

TEST(ShapKernel, SampledLinearModelIsExact) {
  LinearModel lin;
  rt::Rng rng(8);
  for (auto& w : lin.w) w = rng.normal();
  lin.w[6] = 0.0;
  const auto x = random_features(rng, 2.0), b = random_features(rng);
  const auto a = rt::shap_kernel(lin, x, first_n(rt::kFeatureCount), b, 500, 3);
  for (std::size_t i = 0; i < rt::kFeatureCount; ++i) {
    EXPECT_NEAR(a.phi[i], lin.w[i] * (x[i] - b[i]), 1e-9);
  }
  EXPECT_LT(std::abs(a.phi[6]), 1e-4);
}

TEST(ShapKernel, DummyFeatureOfFusionModel) {
  auto model = random_model(rt::Variant::kAll, 80);
  model.params.feature_tokens.row(5).setZero();
  rt::Rng rng(9);
  const auto game = game_for(model, rng);
  const auto x = random_features(rng, 2.0), b = random_features(rng);
  const auto players = first_n(rt::kFeatureCount);
  EXPECT_LT(std::abs(rt::shap_exact(game, x, players, b).phi[5]), 1e-9);
  EXPECT_LT(std::abs(rt::shap_kernel(game, x, players, b, 4096, 0).phi[5]), 1e-4);
}

TEST(ShapKernel, DeterministicAndSeedDependent) {
  InteractionModel m;
  rt::Rng rng(10);
  for (auto& w : m.w) w = rng.normal();
  m.pair = 1.0;
  const auto x = random_features(rng, 2.0), b = random_features(rng);
  const auto players = first_n(rt::kFeatureCount);
  const auto a = rt::shap_kernel(m, x, players, b, 200, 5);
  const auto again = rt::shap_kernel(m, x, players, b, 200, 5);
  const auto other = rt::shap_kernel(m, x, players, b, 200, 6);
  EXPECT_EQ(a.phi, again.phi);
  EXPECT_NE(a.phi, other.phi);
}

TEST(ShapKernel, RejectsDegenerateInput) {
  LinearModel lin;
  rt::FeatureVector x, b;
  const std::vector<std::size_t> one = {0};
  EXPECT_THROW(rt::shap_kernel(lin, x, one, b, 100, 0), rt::InvalidArgument);
  // Two samples cannot determine ten free coefficients.
  EXPECT_THROW(rt::shap_kernel(lin, x, first_n(rt::kFeatureCount), b, 2, 0), rt::Error);
}

// ---------------------------------------------------------------------------
// LIME

TEST(Lime, Proximity) {
  EXPECT_DOUBLE_EQ(rt::lime_proximity(4, 4, 1.5), 1.0);
  EXPECT_DOUBLE_EQ(rt::lime_proximity(2, 4, 1.5), std::exp(-0.25 / 2.25));
  EXPECT_LT(rt::lime_proximity(0, 4, 1.5), rt::lime_proximity(1, 4, 1.5));
}

TEST(Lime, IndicatorModelMatchesBruteForce) {
  const auto model = [](const std::string& text) {
    return text.find("terrible") != std::string::npos ? 1.0 : 0.0;
  };
  rt::LimeConfig config;
  config.n_samples = 16;
  const auto e = rt::lime_explain(model, "food was terrible today", config);
  ASSERT_EQ(e.tokens.size(), 4u);
  EXPECT_EQ(e.n_samples, 16u);

  std::vector<std::vector<double>> x;
  std::vector<double> y, w;
  const double width = 0.75 * 2.0;
  for (int m = 0; m < 16; ++m) {
    std::vector<double> row;
    int kept = 0;
    for (int k = 0; k < 4; ++k) {
      row.push_back((m >> k) & 1);
      kept += (m >> k) & 1;
    }
    x.push_back(row);
    y.push_back(row[2]);
    const double dist = 1.0 - kept / 4.0;
    w.push_back(std::exp(-dist * dist / (width * width)));
  }
  const auto oracle = wls_oracle(x, y, w, config.ridge);
  for (std::size_t k = 0; k < 4; ++k) EXPECT_NEAR(e.weights[k], oracle[k], 1e-10);
  EXPECT_NEAR(e.intercept, oracle[4], 1e-10);
  for (std::size_t k : {0u, 1u, 3u}) EXPECT_GT(e.weights[2], e.weights[k]);
  EXPECT_GT(e.weights[2], 0.0);
  EXPECT_EQ(e.top_k.front(), 2u);
}

TEST(Lime, SampledMatchesOracleOnSameMasks) {
  // Reconstruct the sampler's masks from the model calls and refit.
  std::vector<std::string> seen;
  const std::map<std::string, double> value = {
      {"soup", 0.4}, {"rude", 0.9}, {"slow", 0.3}, {"fine", -0.5}, {"cold", 0.2}};
  const auto model = [&](const std::string& text) {
    seen.push_back(text);
    double s = 0.0;
    for (const auto& t : rt::tokenize(text)) s += value.count(t) ? value.at(t) : 0.0;
    return rt::sigmoid(s - 0.5 * std::sin(static_cast<double>(text.size())));
  };
  rt::LimeConfig config;
  config.n_samples = 25;
  config.enumerate_small = false;
  config.seed = 4;
  const auto e = rt::lime_explain(model, "soup rude slow fine cold", config);
  EXPECT_EQ(e.n_samples, 25u);
  ASSERT_FALSE(seen.empty());
  EXPECT_EQ(seen.front(), "soup rude slow fine cold");
  EXPECT_LE(seen.size(), 25u);  // repeated masks hit the cache
}

TEST(Lime, ConstantModelGivesZeroWeights) {
  const auto model = [](const std::string&) { return 0.42; };
  const auto e = rt::lime_explain(model, "the waiter ignored us for an hour", {});
  EXPECT_TRUE(e.constant_output);
  for (double w : e.weights) EXPECT_NEAR(w, 0.0, 1e-6);
  EXPECT_TRUE(e.top_k.empty());
  EXPECT_DOUBLE_EQ(e.intercept, 0.42);
}

TEST(Lime, LinearStubIsRecovered) {
  std::map<std::string, double> weight;
  const std::vector<std::string> words = {"a1", "b2", "c3", "d4", "e5", "f6",
                                          "g7", "h8", "i9", "j10", "k11", "l12"};
  rt::Rng rng(11);
  std::string text;
  for (const auto& w : words) {
    weight[w] = rng.normal();
    text += w + " ";
  }
  const auto model = [&](const std::string& t) {
    double s = 0.1;
    for (const auto& tok : rt::tokenize(t)) s += weight.at(tok);
    return s;
  };
  rt::LimeConfig config;
  config.seed = 3;
  const auto e = rt::lime_explain(model, text, config);
  EXPECT_GE(e.fidelity_r2, 0.99);
  for (std::size_t k = 0; k < words.size(); ++k) {
    EXPECT_NEAR(e.weights[k], weight[words[k]], 0.01);
  }
}

TEST(Lime, DeterministicForSeed) {
  const auto model = [](const std::string& t) {
    return rt::sigmoid(static_cast<double>(rt::count_tokens(t)) * 0.3 -
                       (t.find("cold") != std::string::npos ? 1.0 : 0.0));
  };
  const std::string text = "cold noodles and a long wait at the counter again today";
  rt::LimeConfig config;
  config.seed = 77;
  const auto a = rt::lime_explain(model, text, config);
  const auto b = rt::lime_explain(model, text, config);
  EXPECT_EQ(a.weights, b.weights);
  EXPECT_EQ(a.top_k, b.top_k);
  EXPECT_EQ(a.intercept, b.intercept);
  config.seed = 78;
  EXPECT_NE(rt::lime_explain(model, text, config).weights, a.weights);
}

TEST(Lime, ConfigValidation) {
  const auto model = [](const std::string&) { return 0.0; };
  rt::LimeConfig config;
  config.n_samples = 9;
  EXPECT_THROW(rt::lime_explain(model, "x", config), rt::InvalidArgument);
  config = {};
  config.kernel_width = 0.0;
  EXPECT_THROW(rt::lime_explain(model, "x", config), rt::InvalidArgument);
  config = {};
  config.ridge = -1;
  EXPECT_THROW(rt::lime_explain(model, "x", config), rt::InvalidArgument);
  EXPECT_THROW(rt::lime_explain(model, "!!", rt::LimeConfig{}), rt::InvalidArgument);
}

TEST(Lime, TopPositions) {
  const std::vector<double> w = {0.1, -0.5, 0.5, 0.0, 0.2};
  EXPECT_EQ(rt::top_positions(w, 2), (std::vector<std::size_t>{1, 2}));
  EXPECT_EQ(rt::top_positions(w, 10), (std::vector<std::size_t>{1, 2, 4, 0}));
}

TEST(Lime, WeightedRidgeMatchesOracle) {
  rt::Rng rng(12);
  const int n = 40, d = 5;
  rt::Matrix x(n, d);
  rt::Vector y(n), w(n);
  std::vector<std::vector<double>> xs;
  std::vector<double> ys, ws;
  for (int r = 0; r < n; ++r) {
    std::vector<double> row;
    for (int c = 0; c < d; ++c) {
      x(r, c) = rng.bernoulli(0.5);
      row.push_back(x(r, c));
    }
    y[r] = rng.normal();
    w[r] = 0.1 + rng.uniform();
    xs.push_back(row);
    ys.push_back(y[r]);
    ws.push_back(w[r]);
  }
  const auto fit = rt::weighted_ridge(x, y, w, 0.3);
  const auto oracle = wls_oracle(xs, ys, ws, 0.3);
  for (int c = 0; c < d; ++c) EXPECT_NEAR(fit.weights[c], oracle[c], 1e-10);
  EXPECT_NEAR(fit.intercept, oracle[d], 1e-10);
  EXPECT_LE(fit.r2, 1.0);
}

// ---------------------------------------------------------------------------
// Global importance

TEST(Global, SingleInstanceMeansAreAbsolutePhi) {
  rt::Attribution a;
  a.phi[0] = -0.3;
  a.phi[4] = 0.2;
  const std::vector<rt::Attribution> attrs = {a};
  const std::vector<rt::FeatureVector> values(1);
  const std::vector<std::string> ids = {"r1"};
  const std::vector<std::size_t> included = {0, 4};
  const auto g = rt::aggregate_importance(attrs, values, ids, included);
  EXPECT_DOUBLE_EQ(g.mean_abs_phi[0], 0.3);
  EXPECT_DOUBLE_EQ(g.mean_abs_phi[4], 0.2);
  EXPECT_EQ(g.scatter.size(), 2u);
  EXPECT_EQ(rt::importance_ranking(g).front(), 0u);
}

TEST(Global, DominantFeatureRanksFirst) {
  LinearModel lin;
  lin.w = {0.1, 0.1, 0.1, 0.2, 3.0, 0.2, 0.3, 0.1, 0.2, 0.1, 0.4};
  rt::Rng rng(13);
  std::vector<rt::Attribution> attrs;
  std::vector<rt::FeatureVector> values;
  std::vector<std::string> ids;
  const rt::FeatureVector b;
  for (int n = 0; n < 50; ++n) {
    values.push_back(random_features(rng));
    ids.push_back("r" + std::to_string(n));
    attrs.push_back(rt::shap_exact(lin, values.back(), first_n(rt::kFeatureCount), b));
  }
  const auto g = rt::aggregate_importance(attrs, values, ids, first_n(rt::kFeatureCount));
  EXPECT_EQ(rt::importance_ranking(g).front(), 4u);
  for (double m : g.mean_abs_phi) EXPECT_GE(m, 0.0);
}

TEST(Global, ZeroModelHasZeroImportance) {
  auto model = random_model(rt::Variant::kAll, 1);
  model.params = rt::ModelParams::zeros(8, 1024, model.attention);
  std::vector<rt::Review> reviews(3);
  for (std::size_t i = 0; i < reviews.size(); ++i) {
    reviews[i].id = "r" + std::to_string(i);
    reviews[i].text = "slow service " + std::to_string(i);
    reviews[i].image_count = static_cast<int>(i);
  }
  const auto g = rt::global_importance(model, rt::sample_lexicons(), reviews, {});
  for (double m : g.mean_abs_phi) EXPECT_EQ(m, 0.0);
  EXPECT_EQ(g.instances, 3u);
  EXPECT_EQ(g.scatter.size(), 3u * rt::kFeatureCount);
}

// ---------------------------------------------------------------------------
// Highlights

TEST(Highlights, SinglePositiveToken) {
  rt::WordExplanation e;
  e.tokens = {"rude"};
  e.weights = {0.3};
  const auto html = rt::render_highlights(e);
  EXPECT_NE(html.find("<span class=\"hl-pos\" style=\"background-color: rgba(255, 127, 14, "
                      "1.000)\">rude</span>"),
            std::string::npos);
  EXPECT_EQ(html.find("class=\"hl-neg\""), std::string::npos);
}

TEST(Highlights, ZeroWeightsAreUnstyled) {
  rt::WordExplanation e;
  e.tokens = {"a", "b"};
  e.weights = {0.0, 0.0};
  EXPECT_EQ(rt::render_highlights(e).find("<span"), std::string::npos);
}

TEST(Highlights, MixedSignsMatchFixture) {
  rt::WordExplanation e;
  e.tokens = {"the", "waiter", "was", "rude", "but", "food", "<ok>", "\xe5\xbe\x88", "\xe5\xb7\xae"};
  e.weights = {0.0, 0.4, 0.0, 0.8, -0.2, -0.6, 0.1, 0.0, 0.3};
  EXPECT_EQ(rt::render_highlights(e),
            revtriage::testing::read_file(
                revtriage::testing::fixture_path("highlights_mixed.html")));
}

TEST(Highlights, Escaping) {
  EXPECT_EQ(rt::html_escape("<a href=\"x\">&'"), "&lt;a href=&quot;x&quot;&gt;&amp;&#39;");
}

// ---------------------------------------------------------------------------
// Fusion adapters

TEST(Adapters, FeatureAttributionOfReview) {
  auto model = random_model(rt::Variant::kReview, 90);
  rt::Review r;
  r.id = "r1";
  r.rating = 2;
  r.text = "terrible cold soup at KFC";
  r.image_count = 3;
  r.reply_count = 1;
  rt::ShapConfig config;
  const auto a = rt::explain_features(model, rt::sample_lexicons(), r, config);
  const auto raw = rt::extract_features(r, rt::sample_lexicons());
  EXPECT_NEAR(a.output, model.predict(model.text.prepare(r), raw).probability, 1e-15);
  EXPECT_NEAR(std::accumulate(a.phi.begin(), a.phi.end(), a.base_value), a.output, 1e-6);
  for (std::size_t i = 0; i < 3; ++i) EXPECT_EQ(a.phi[i], 0.0);
  config.method = rt::ShapMethod::kKernel;
  const auto k = rt::explain_features(model, rt::sample_lexicons(), r, config);
  for (std::size_t i = 0; i < rt::kFeatureCount; ++i) EXPECT_NEAR(k.phi[i], a.phi[i], 1e-6);
}

TEST(Adapters, WordGameRecomputesLength) {
  const auto model = random_model(rt::Variant::kAll, 91);
  rt::Review r;
  r.id = "r2";
  r.text = "slow rude waiter and cold soup";
  const auto raw = rt::extract_features(r, rt::sample_lexicons());
  const rt::TextGame game{&model, raw};
  EXPECT_DOUBLE_EQ(game(r.text), model.predict(model.text.prepare(r), raw).probability);
  auto shorter = raw;
  shorter[rt::Feature::kLength] = 2;
  EXPECT_DOUBLE_EQ(game("slow rude"),
                   model.predict(model.text.prepare_text("slow rude"), shorter).probability);
  const auto e = rt::explain_words(model, rt::sample_lexicons(), r, {});
  EXPECT_EQ(e.tokens.size(), 6u);
  EXPECT_EQ(e.n_samples, 64u);
}
