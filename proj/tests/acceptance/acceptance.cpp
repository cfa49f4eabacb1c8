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

// Acceptance suite: one PASS/FAIL line per criterion, nonzero exit on any
// failure. Runs against the core library only.

#include <algorithm>
#include <array>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <numeric>
#include <optional>
#include <regex>
#include <stdexcept>
#include <string>
#include <vector>

#include "revtriage/artifact.hpp"
#include "revtriage/corpus.hpp"
#include "revtriage/explain.hpp"
#include "revtriage/fusion.hpp"
#include "revtriage/respond.hpp"
#include "revtriage/synthetic.hpp"
#include "test_util.hpp"

namespace rt = revtriage;
using revtriage::testing::fixture_path;
using revtriage::testing::load_spec;
using revtriage::testing::permutation_shapley;
using revtriage::testing::random_features;
using revtriage::testing::random_model;
using revtriage::testing::read_file;

namespace {

// Tolerances and budgets.
constexpr double kShapOracleTol = 1e-9;
constexpr double kShapOracleSeconds = 10.0;
constexpr double kKernelExactTol = 1e-6;
constexpr double kKernelExactSeconds = 30.0;
constexpr double kEfficiencyTol = 1e-6;
constexpr double kDummyTol = 1e-9;
constexpr double kGradStep = 1e-5;
constexpr double kGradRelTol = 1e-4;
constexpr double kWeightSumTol = 1e-6;
constexpr double kHandExampleTol = 1e-5;
constexpr double kPlantedF1 = 0.9;
constexpr double kPlantedSeconds = 300.0;
constexpr double kSpearman = 0.8;
constexpr double kLimeTop1 = 0.95;
constexpr double kPersistenceTol = 1e-12;

int failures = 0;

void report(const std::string& name, bool pass, const std::string& detail) {
  std::printf("%s %s: %s\n", pass ? "PASS" : "FAIL", name.c_str(), detail.c_str());
  std::fflush(stdout);
  if (!pass) ++failures;
}

// Runs one criterion; an escaped exception is a failure.
void check(const std::string& name, const std::function<bool(std::string&)>& body) {
  std::string detail;
  bool pass = false;
  try {
    pass = body(detail);
  } catch (const std::exception& e) {
    detail = std::string("exception: ") + e.what();
  }
  report(name, pass, detail);
}

std::string fmt(const char* f, double a) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), f, a);
  return buf;
}

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

double relative_error(const std::vector<double>& a, const std::vector<double>& b) {
  double diff = 0.0, norm = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    diff += (a[i] - b[i]) * (a[i] - b[i]);
    norm += a[i] * a[i] + b[i] * b[i];
  }
  return norm == 0.0 ? 0.0 : std::sqrt(diff) / std::sqrt(norm);
}

rt::FeatureGame game_for(const rt::FusionModel& m, rt::Rng& rng) {
  rt::Vector t(static_cast<Eigen::Index>(m.text.dim()));
  for (auto& x : t) x = rng.normal();
  return {&m, t};
}

// Gauss-Jordan with partial pivoting.
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

// ---------------------------------------------------------------------------

void shapley_oracle() {
  check("shapley-oracle-equivalence", [](std::string& detail) {
    const auto t0 = std::chrono::steady_clock::now();
    rt::Rng rng(11);
    double worst = 0.0;
    for (int trial = 0; trial < 20; ++trial) {
      const std::size_t d = 2 + static_cast<std::size_t>(rng.below(7));  // 2..8
      std::array<double, rt::kFeatureCount> w{};
      for (auto& v : w) v = rng.normal();
      const double pair = rng.normal();
      const auto f = [&](const rt::FeatureVector& x) {
        double s = 0.0;
        for (std::size_t i = 0; i < rt::kFeatureCount; ++i) s += w[i] * x[i];
        return rt::sigmoid(s + pair * x[0] * x[1] - 0.5 * x[d - 1] * x[0]);
      };
      std::vector<std::size_t> players(d);
      std::iota(players.begin(), players.end(), std::size_t{0});
      const auto instance = random_features(rng, 2.0);
      const auto baseline = random_features(rng, 1.0);
      const auto exact = rt::shap_exact(f, instance, players, baseline);
      const auto brute = permutation_shapley(f, instance, players, baseline);
      for (std::size_t i = 0; i < rt::kFeatureCount; ++i) {
        worst = std::max(worst, std::abs(exact.phi[i] - brute[i]));
      }
    }
    const double secs = seconds_since(t0);
    detail = "max |diff| " + fmt("%.3g", worst) + " over 20 instances, d<=8, " +
             fmt("%.2f", secs) + " s";
    return worst <= kShapOracleTol && secs < kShapOracleSeconds;
  });
}

void kernel_exact_agreement() {
  check("kernel-exact-agreement", [](std::string& detail) {
    const auto t0 = std::chrono::steady_clock::now();
    const auto model = random_model(rt::Variant::kAll, 21);
    const auto included = rt::variant_features(rt::Variant::kAll);
    rt::Rng rng(22);
    double worst = 0.0;
    for (int trial = 0; trial < 20; ++trial) {
      const auto game = game_for(model, rng);
      const auto x = random_features(rng, 2.0);
      const auto base = random_features(rng, 1.0);
      const auto exact = rt::shap_exact(game, x, included, base);
      const auto kernel = rt::shap_kernel(game, x, included, base, 2046, trial);
      for (std::size_t i = 0; i < rt::kFeatureCount; ++i) {
        worst = std::max(worst, std::abs(exact.phi[i] - kernel.phi[i]));
      }
    }
    const double secs = seconds_since(t0);
    detail = "max |diff| " + fmt("%.3g", worst) + " over 20 instances, d=11, " +
             fmt("%.2f", secs) + " s";
    return worst <= kKernelExactTol && secs < kKernelExactSeconds;
  });
}

void efficiency_and_dummy() {
  check("efficiency-axiom-and-dummy", [](std::string& detail) {
    const auto included = rt::variant_features(rt::Variant::kAll);
    rt::Rng rng(31);
    double worst_exact = 0.0, worst_kernel = 0.0, worst_dummy = 0.0;
    for (int trial = 0; trial < 100; ++trial) {
      auto model = random_model(rt::Variant::kAll, 3000 + trial);
      const auto game = game_for(model, rng);
      const auto x = random_features(rng, 2.0);
      const auto base = random_features(rng, 1.0);
      const auto gap = [](const rt::Attribution& a) {
        double s = a.base_value;
        for (double p : a.phi) s += p;
        return std::abs(s - a.output);
      };
      worst_exact = std::max(worst_exact, gap(rt::shap_exact(game, x, included, base)));
      worst_kernel =
          std::max(worst_kernel, gap(rt::shap_kernel(game, x, included, base, 256, trial)));
      // Zeroing a feature's token row leaves the output independent of it.
      const std::size_t dummy = static_cast<std::size_t>(rng.below(rt::kFeatureCount));
      model.params.feature_tokens.row(static_cast<Eigen::Index>(dummy)).setZero();
      worst_dummy = std::max(
          worst_dummy, std::abs(rt::shap_exact(game, x, included, base).phi[dummy]));
    }
    detail = "max efficiency gap exact " + fmt("%.3g", worst_exact) + ", kernel " +
             fmt("%.3g", worst_kernel) + "; max dummy |phi| " + fmt("%.3g", worst_dummy);
    return worst_exact <= kEfficiencyTol && worst_kernel <= kEfficiencyTol &&
           worst_dummy < kDummyTol;
  });
}

void gradient_check() {
  check("gradient-check", [](std::string& detail) {
    double worst = 0.0;
    std::string worst_group = "none";
    for (int instance = 0; instance < 5; ++instance) {
      auto model = random_model(rt::Variant::kAll, 700 + instance, 6);
      rt::Rng rng(800 + instance);
      const auto input = model.text.prepare_text("cold soup and a rude waiter");
      const auto z = random_features(rng, 1.5);
      const bool label = instance % 2 == 1;
      const double w = 3.1;
      auto grads = rt::Gradients::zeros_like(model.params);
      rt::accumulate_gradients(input, z, label, w, model.params, rt::Variant::kAll, grads);
      auto& p = model.params;
      const auto loss_at = [&] {
        const rt::Vector t = rt::text_embedding(input, p);
        return rt::loss(rt::forward_pass(t, z, p, rt::Variant::kAll).probability, label, w)
            .value;
      };
      const auto numeric = [&](double& param) {
        const double saved = param;
        param = saved + kGradStep;
        const double up = loss_at();
        param = saved - kGradStep;
        const double down = loss_at();
        param = saved;
        return (up - down) / (2 * kGradStep);
      };
      const auto group = [&](const char* name, const std::vector<double>& analytic,
                             const std::vector<double>& numerical) {
        const double e = relative_error(analytic, numerical);
        if (e >= worst) {
          worst = e;
          worst_group = name;
        }
      };
      const auto matrix = [&](const char* name, rt::Matrix& m, const rt::Matrix& g) {
        std::vector<double> a, n;
        for (Eigen::Index i = 0; i < m.size(); ++i) {
          a.push_back(g.data()[i]);
          n.push_back(numeric(m.data()[i]));
        }
        group(name, a, n);
      };
      matrix("feature_tokens", p.feature_tokens, grads.feature_tokens);
      matrix("query_proj", p.query_proj, grads.query_proj);
      matrix("key_proj", p.key_proj, grads.key_proj);
      matrix("value_proj", p.value_proj, grads.value_proj);
      std::vector<double> a, n;
      for (Eigen::Index i = 0; i < p.head.size(); ++i) {
        a.push_back(grads.head[i]);
        n.push_back(numeric(p.head[i]));
      }
      group("head", a, n);
      group("bias", {grads.bias}, {numeric(p.bias)});
      a.clear();
      n.clear();
      for (const auto& [row, g] : grads.embedding_rows) {
        for (Eigen::Index c = 0; c < g.size(); ++c) {
          a.push_back(g[c]);
          n.push_back(numeric(p.embedding(row, c)));
        }
      }
      if (a.empty()) throw std::runtime_error("no embedding rows touched");
      group("embedding", a, n);
    }
    detail = "max relative error " + fmt("%.3g", worst) + " (" + worst_group +
             ") over 7 parameter groups, 5 instances";
    return worst < kGradRelTol;
  });
}

void attention_checks() {
  check("attention-unit-checks", [](std::string& detail) {
    rt::Rng rng(41);
    double worst_sum = 0.0;
    for (int trial = 0; trial < 200; ++trial) {
      const std::size_t m = 1 + static_cast<std::size_t>(rng.below(11));
      rt::Matrix k(m, 4), v(m, 3);
      for (Eigen::Index i = 0; i < k.size(); ++i) k.data()[i] = 5 * rng.normal();
      for (Eigen::Index i = 0; i < v.size(); ++i) v.data()[i] = rng.normal();
      rt::Vector q(4);
      for (auto& x : q) x = 5 * rng.normal();
      worst_sum = std::max(worst_sum, std::abs(rt::attention(q, k, v).weights.sum() - 1.0));
    }
    rt::Matrix k(5, 3), v(5, 2);
    for (Eigen::Index i = 0; i < k.size(); ++i) k.data()[i] = rng.normal();
    for (Eigen::Index i = 0; i < v.size(); ++i) v.data()[i] = rng.normal();
    const auto uniform = rt::attention(rt::Vector::Zero(3), k, v).weights;
    const double worst_uniform = (uniform.array() - 0.2).abs().maxCoeff();

    rt::Vector q1(1);
    q1 << 1;
    rt::Matrix k1(2, 1), v1(2, 2);
    k1 << 1, 2;
    v1 << 1, 0, 0, 1;
    const auto hand = rt::attention(q1, k1, v1).weights;
    const double hand_err =
        std::max(std::abs(hand[0] - 0.26894), std::abs(hand[1] - 0.73106));
    detail = "max |sum-1| " + fmt("%.3g", worst_sum) + ", Q=0 max |w-1/m| " +
             fmt("%.3g", worst_uniform) + ", hand example error " + fmt("%.3g", hand_err);
    return worst_sum <= kWeightSumTol && worst_uniform <= 1e-15 && hand_err <= kHandExampleTol;
  });
}

// ---------------------------------------------------------------------------
// Planted synthetic data

rt::TrainConfig planted_train_config(rt::Variant variant) {
  rt::TrainConfig c;
  c.learning_rate = 0.05;
  c.epochs = 20;
  c.seed = 7;
  c.early_stop_patience = 0;
  c.variant = variant;
  return c;
}

void planted_recovery_and_global_faithfulness() {
  const auto spec = load_spec("synthetic/planted_spec.json");
  const auto corpus = rt::generate_synthetic_corpus(spec);
  const auto split = rt::split_corpus(corpus.reviews, {}, 1);
  const auto lexicons = rt::sample_lexicons();
  const auto provider = rt::TextEmbeddingProvider::hashed({});

  std::optional<rt::FusionModel> all_model;
  std::array<double, 3> test_f1{};
  check("planted-signal-recovery", [&](std::string& detail) {
    const auto t0 = std::chrono::steady_clock::now();
    auto result = rt::train(split, lexicons, provider, planted_train_config(rt::Variant::kAll));
    const double secs = seconds_since(t0);
    const double val_f1 = rt::evaluate(result.model, lexicons, split.validation).f1;
    test_f1[2] = rt::evaluate(result.model, lexicons, split.test).f1;
    all_model = std::move(result.model);
    for (auto v : {rt::Variant::kReviewer, rt::Variant::kReview}) {
      const auto r = rt::train(split, lexicons, provider, planted_train_config(v));
      test_f1[static_cast<std::size_t>(v)] = rt::evaluate(r.model, lexicons, split.test).f1;
    }
    const bool ordered = test_f1[2] >= test_f1[1] && test_f1[1] >= test_f1[0];
    detail = "All validation F1 " + fmt("%.4f", val_f1) + " in " + fmt("%.1f", secs) +
             " s; test F1 All " + fmt("%.4f", test_f1[2]) + " >= Review " +
             fmt("%.4f", test_f1[1]) + " >= Reviewer " + fmt("%.4f", test_f1[0]) +
             (ordered ? "" : " (ordering violated)");
    return val_f1 >= kPlantedF1 && secs < kPlantedSeconds && ordered;
  });

  check("explainer-faithfulness-global", [&](std::string& detail) {
    if (!all_model) throw std::runtime_error("no trained model");
    std::vector<rt::Review> reviews;
    for (std::size_t i = 0; i < 500 && i < split.test.size(); ++i) {
      reviews.push_back(split.test[i].review);
    }
    const auto g = rt::global_importance(*all_model, lexicons, reviews, {});
    std::vector<double> importance, planted;
    for (std::size_t i = 0; i < rt::kFeatureCount; ++i) {
      importance.push_back(g.mean_abs_phi[i]);
      planted.push_back(std::abs(spec.feature_weights[i]));
    }
    const double rho = revtriage::testing::spearman(importance, planted);
    std::string top;
    for (auto i : rt::importance_ranking(g)) {
      if (!top.empty()) top += ",";
      top += rt::kFeatureNames[i];
    }
    detail = "Spearman " + fmt("%.3f", rho) + " over 500 test reviews; ranking " + top;
    return rho >= kSpearman;
  });
}

void lime_faithfulness() {
  const auto spec = load_spec("synthetic/text_planted_spec.json");
  const std::string trigger = spec.trigger_keywords.front().word;
  const auto corpus = rt::generate_synthetic_corpus(spec);
  const auto split = rt::split_corpus(corpus.reviews, {}, 1);
  const auto lexicons = rt::sample_lexicons();
  const auto model = rt::train(split, lexicons, rt::TextEmbeddingProvider::hashed({}),
                               planted_train_config(rt::Variant::kAll))
                         .model;

  check("explainer-faithfulness-lime-top1", [&](std::string& detail) {
    int n = 0, hits = 0;
    for (const auto& lr : split.test) {
      const auto tokens = rt::tokenize(lr.review.text);
      if (std::find(tokens.begin(), tokens.end(), trigger) == tokens.end()) continue;
      const auto e = rt::explain_words(model, lexicons, lr.review, {});
      if (!e.top_k.empty() && e.tokens[e.top_k.front()] == trigger) ++hits;
      if (++n == 100) break;
    }
    const double rate = n == 0 ? 0.0 : static_cast<double>(hits) / n;
    detail = std::to_string(hits) + "/" + std::to_string(n) +
             " reviews have the planted trigger as top-1 word";
    return n == 100 && rate >= kLimeTop1;
  });

  check("explainer-faithfulness-lime-exhaustive", [&](std::string& detail) {
    // Four-token reviews: the surrogate fitted on all 16 masks by an
    // independent solver against sampled LIME.
    int reviews = 0, compared = 0, agree = 0;
    for (const auto& lr : split.test) {
      auto tokens = rt::tokenize(lr.review.text);
      if (tokens.size() < 4) continue;
      tokens.resize(4);
      rt::Review r = lr.review;
      r.text = rt::detokenize(tokens);
      if (rt::tokenize(r.text) != tokens) continue;
      const rt::TextGame game{&model, rt::extract_features(r, lexicons)};
      const std::size_t d = tokens.size();
      const double width = 0.75 * std::sqrt(static_cast<double>(d));
      const double ridge = 1e-3;
      std::vector<std::vector<double>> a(d + 1, std::vector<double>(d + 1, 0.0));
      std::vector<double> b(d + 1, 0.0);
      for (unsigned m = 0; m < (1u << d); ++m) {
        std::vector<std::string> kept;
        std::vector<double> row;
        for (std::size_t k = 0; k < d; ++k) {
          row.push_back((m >> k) & 1u ? 1.0 : 0.0);
          if ((m >> k) & 1u) kept.push_back(tokens[k]);
        }
        row.push_back(1.0);
        const double dist = 1.0 - static_cast<double>(kept.size()) / static_cast<double>(d);
        const double pi = std::exp(-dist * dist / (width * width));
        const double y = game(rt::detokenize(kept));
        for (std::size_t i = 0; i <= d; ++i) {
          for (std::size_t j = 0; j <= d; ++j) a[i][j] += pi * row[i] * row[j];
          b[i] += pi * row[i] * y;
        }
      }
      for (std::size_t i = 0; i < d; ++i) a[i][i] += ridge;
      const auto exact = solve(a, b);
      rt::LimeConfig config;
      config.enumerate_small = false;
      config.n_samples = 1000;
      config.seed = static_cast<std::uint64_t>(reviews);
      const auto sampled = rt::lime_explain(game, r.text, config);
      for (std::size_t k = 0; k < d; ++k) {
        ++compared;
        if ((exact[k] > 0) == (sampled.weights[k] > 0)) ++agree;
      }
      if (++reviews == 20) break;
    }
    detail = std::to_string(agree) + "/" + std::to_string(compared) +
             " word-weight signs agree across " + std::to_string(reviews) +
             " four-token reviews";
    return reviews == 20 && agree == compared;
  });
}

// ---------------------------------------------------------------------------

void metrics_fixture() {
  check("metrics-arithmetic", [](std::string& detail) {
    const auto m = rt::Metrics::from_counts(2, 1, 5, 2);
    detail = "precision " + fmt("%.17g", m.precision) + ", recall " + fmt("%.17g", m.recall) +
             ", F1 " + fmt("%.17g", m.f1) + ", accuracy " + fmt("%.17g", m.accuracy);
    return m.precision == 2.0 / 3.0 && m.recall == 0.5 && m.f1 == 4.0 / 7.0 &&
           m.accuracy == 0.7;
  });
}

void label_rule() {
  check("label-rule", [](std::string& detail) {
    rt::Review r;
    r.rating = 1;
    const auto label = [&](int votes) {
      r.helpful_votes = votes;
      return rt::label_influential(r);
    };
    detail = "4 votes -> " + std::string(label(4) ? "influential" : "not") + ", 3 -> " +
             (label(3) ? "influential" : "not") + ", 0 -> " + (label(0) ? "influential" : "not");
    return label(4) && !label(3) && !label(0);
  });
}

void persistence() {
  check("persistence", [](std::string& detail) {
    const auto artifact = rt::load_model(fixture_path("model_v1.rvt"));
    const auto cases = rt::json::parse(read_file(fixture_path("model_v1_predictions.json")));
    const auto bytes = rt::serialize_artifact(artifact);
    const auto reloaded = rt::deserialize_artifact(bytes);
    double worst = 0.0;
    for (const auto& c : cases) {
      rt::FeatureVector x;
      x.values = c.at("features").get<std::array<double, rt::kFeatureCount>>();
      const auto text = c.at("text").get<std::string>();
      const double want = c.at("probability").get<double>();
      for (const auto* a : {&artifact, &reloaded}) {
        const auto p = a->model.predict(a->model.text.prepare_text(text), x).probability;
        worst = std::max(worst, std::abs(p - want));
      }
    }
    int rejected = 0;
    const std::vector<std::size_t> offsets = {40, bytes.size() / 2, bytes.size() - 1};
    for (std::size_t offset : offsets) {
      std::string bad = bytes;
      bad[offset] = static_cast<char>(bad[offset] ^ 0x01);
      try {
        rt::deserialize_artifact(bad);
      } catch (const rt::ChecksumError&) {
        ++rejected;
      }
    }
    detail = std::to_string(cases.size()) + " fixture probabilities within " +
             fmt("%.3g", worst) + " after save/load; " + std::to_string(rejected) + "/" +
             std::to_string(offsets.size()) + " corrupted copies rejected by checksum";
    return !cases.empty() && worst <= kPersistenceTol &&
           rejected == static_cast<int>(offsets.size());
  });
}

void prompt_tiers() {
  check("prompt-tiers", [](std::string& detail) {
    const std::string row1 = "Generate a short management response to this review";
    const auto bare = rt::build_prompt("The soup was cold.", rt::PromptTier::kBare);
    const bool bare_ok = std::string(rt::kInstruction) == row1 && bare.rfind(row1, 0) == 0;

    rt::Prediction influential;
    influential.probability = 0.9;
    influential.label = true;
    const std::vector<std::string> keywords = {"waiter", "service", "artificially generated"};
    const auto with_expl = rt::build_prompt("The waiter ignored us.",
                                            rt::PromptTier::kWithExplanation, influential,
                                            keywords);
    const std::regex clause(
        "^This is an influential negative review, and the words (.+) are the keywords");
    std::smatch match;
    const bool clause_ok = std::regex_search(with_expl, match, clause) &&
                           match[1] == "waiter, service, artificially generated";

    const auto limited =
        rt::limit_sentences("We are sorry. We will retrain our staff. Please visit again.", 2);
    const bool limit_ok = limited.truncated && limited.sentence_count == 2 &&
                          limited.text == "We are sorry. We will retrain our staff.";
    detail = std::string("bare instruction ") + (bare_ok ? "verbatim" : "differs") +
             ", keyword clause " + (clause_ok ? "matches" : "missing") +
             ", 3-sentence draft " + (limit_ok ? "cut to 2" : "not truncated");
    return bare_ok && clause_ok && limit_ok;
  });
}

}  // namespace

int main() {
  shapley_oracle();
  kernel_exact_agreement();
  efficiency_and_dummy();
  gradient_check();
  attention_checks();
  metrics_fixture();
  label_rule();
  persistence();
  prompt_tiers();
  planted_recovery_and_global_faithfulness();
  lime_faithfulness();
  // This binary links only the core library; reaching here means every
  // criterion above ran without the dashboard.
  report("core-only-suite", true, "built and run against the header-only library alone");
  std::printf("%d failure(s)\n", failures);
  return failures == 0 ? 0 : 1;
}
