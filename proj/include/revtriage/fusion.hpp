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

#ifndef REVTRIAGE_FUSION_HPP_
#define REVTRIAGE_FUSION_HPP_

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "revtriage/common.hpp"
#include "revtriage/corpus.hpp"
#include "revtriage/encoder.hpp"
#include "revtriage/features.hpp"
#include "revtriage/rng.hpp"

namespace revtriage {

// Which interpretable features take part in fusion.
enum class Variant : std::uint8_t { kReviewer = 0, kReview = 1, kAll = 2 };

inline constexpr std::string_view variant_name(Variant v) {
  switch (v) {
    case Variant::kReviewer: return "reviewer";
    case Variant::kReview: return "review";
    case Variant::kAll: return "all";
  }
  return "all";
}

inline std::optional<Variant> variant_from_name(std::string_view name) {
  for (auto v : {Variant::kReviewer, Variant::kReview, Variant::kAll}) {
    if (variant_name(v) == name) return v;
  }
  return std::nullopt;
}

// Reviewer features are identity, membership and consumption; review
// features are the remaining eight.
inline constexpr bool variant_includes(Variant v, std::size_t feature) {
  switch (v) {
    case Variant::kReviewer: return feature < 3;
    case Variant::kReview: return feature >= 3 && feature < kFeatureCount;
    case Variant::kAll: return feature < kFeatureCount;
  }
  return false;
}

inline std::vector<std::size_t> variant_features(Variant v) {
  std::vector<std::size_t> out;
  for (std::size_t i = 0; i < kFeatureCount; ++i) {
    if (variant_includes(v, i)) out.push_back(i);
  }
  return out;
}

struct AttentionConfig {
  std::size_t token_dim = 8;   // width of each learned feature token
  std::size_t key_dim = 16;
  std::size_t value_dim = 16;

  void validate() const {
    require(token_dim >= 1 && key_dim >= 1 && value_dim >= 1,
            "attention widths must be positive");
  }

  friend bool operator==(const AttentionConfig&, const AttentionConfig&) = default;
};

// Every learnable weight of the classifier. Feature token i contributes key
// F_i * W_K and value x_i * F_i * W_V; the text embedding t gives the query
// t * W_Q; the head reads [t ; context].
struct ModelParams {
  Matrix feature_tokens;  // kFeatureCount x token_dim
  Matrix query_proj;      // text_dim x key_dim
  Matrix key_proj;        // token_dim x key_dim
  Matrix value_proj;      // token_dim x value_dim
  Vector head;            // text_dim + value_dim
  double bias = 0.0;
  Matrix embedding;       // buckets x text_dim; empty with external embeddings

  static ModelParams zeros(std::size_t text_dim, std::size_t buckets,
                           const AttentionConfig& a) {
    ModelParams p;
    p.feature_tokens = Matrix::Zero(kFeatureCount, a.token_dim);
    p.query_proj = Matrix::Zero(text_dim, a.key_dim);
    p.key_proj = Matrix::Zero(a.token_dim, a.key_dim);
    p.value_proj = Matrix::Zero(a.token_dim, a.value_dim);
    p.head = Vector::Zero(text_dim + a.value_dim);
    p.embedding = Matrix::Zero(buckets, text_dim);
    return p;
  }

  static ModelParams random(std::size_t text_dim, std::size_t buckets,
                            const AttentionConfig& a, Rng& rng) {
    ModelParams p = zeros(text_dim, buckets, a);
    const auto fill = [&](auto& m, double scale) {
      for (Eigen::Index i = 0; i < m.size(); ++i) m.data()[i] = scale * rng.normal();
    };
    fill(p.feature_tokens, 1.0);
    fill(p.query_proj, 1.0 / std::sqrt(static_cast<double>(text_dim)));
    fill(p.key_proj, 1.0 / std::sqrt(static_cast<double>(a.token_dim)));
    fill(p.value_proj, 1.0 / std::sqrt(static_cast<double>(a.token_dim)));
    fill(p.head, 1.0 / std::sqrt(static_cast<double>(text_dim + a.value_dim)));
    fill(p.embedding, 0.1);
    return p;
  }

  std::size_t text_dim() const { return static_cast<std::size_t>(query_proj.rows()); }

  bool all_finite() const {
    return feature_tokens.allFinite() && query_proj.allFinite() &&
           key_proj.allFinite() && value_proj.allFinite() && head.allFinite() &&
           std::isfinite(bias) && embedding.allFinite();
  }

  friend bool operator==(const ModelParams& a, const ModelParams& b) {
    return a.feature_tokens == b.feature_tokens && a.query_proj == b.query_proj &&
           a.key_proj == b.key_proj && a.value_proj == b.value_proj &&
           a.head == b.head && a.bias == b.bias && a.embedding == b.embedding;
  }
};

// ---------------------------------------------------------------------------
// Attention

struct AttentionResult {
  Vector context;
  Vector weights;
};

// softmax(q K^T / sqrt(d_k)) V for a single query row. Scores are shifted by
// their maximum before exponentiation.
inline AttentionResult attention(const Vector& query, const Matrix& keys,
                                 const Matrix& values) {
  if (keys.rows() == 0) throw InvalidArgument("attention needs at least one key");
  require(keys.rows() == values.rows(), "keys and values must have equal rows");
  require(keys.cols() == query.size(), "query and key widths differ");
  const double scale = 1.0 / std::sqrt(static_cast<double>(query.size()));
  Vector scores = (keys * query) * scale;
  const double top = scores.maxCoeff();
  Vector w = (scores.array() - top).exp().matrix();
  w /= w.sum();
  return {values.transpose() * w, w};
}

// ---------------------------------------------------------------------------
// Forward pass

struct Prediction {
  double probability = 0.5;
  bool label = false;
  std::array<double, kFeatureCount> attention_weights{};  // 0 when excluded
};

inline double sigmoid(double z) {
  if (z >= 0) return 1.0 / (1.0 + std::exp(-z));
  const double e = std::exp(z);
  return e / (1.0 + e);
}

struct ForwardPass {
  Vector text;
  Vector query;
  std::vector<std::size_t> included;
  Matrix keys;
  Matrix values;
  Vector weights;
  Vector context;
  double logit = 0.0;
  double probability = 0.5;

  Prediction prediction() const {
    Prediction p;
    p.probability = probability;
    p.label = probability >= 0.5;
    for (std::size_t k = 0; k < included.size(); ++k) {
      p.attention_weights[included[k]] = weights[static_cast<Eigen::Index>(k)];
    }
    return p;
  }
};

inline ForwardPass forward_pass(const Vector& text, const FeatureVector& standardized,
                                const ModelParams& params, Variant variant) {
  ForwardPass f;
  f.text = text;
  f.included = variant_features(variant);
  const auto m = static_cast<Eigen::Index>(f.included.size());
  f.query = params.query_proj.transpose() * text;
  f.keys.resize(m, params.key_proj.cols());
  f.values.resize(m, params.value_proj.cols());
  for (Eigen::Index k = 0; k < m; ++k) {
    const auto i = static_cast<Eigen::Index>(f.included[k]);
    const auto token = params.feature_tokens.row(i);
    f.keys.row(k) = token * params.key_proj;
    f.values.row(k) = standardized[f.included[k]] * (token * params.value_proj);
  }
  auto att = attention(f.query, f.keys, f.values);
  f.weights = std::move(att.weights);
  f.context = std::move(att.context);
  const auto d = static_cast<Eigen::Index>(text.size());
  f.logit = params.head.head(d).dot(text) +
            params.head.tail(f.context.size()).dot(f.context) + params.bias;
  f.probability = sigmoid(f.logit);
  return f;
}

inline Vector text_embedding(const TextInput& input, const ModelParams& params) {
  if (input.precomputed) return *input.precomputed;
  return embed(input.buckets, params.embedding);
}

inline Prediction forward(const Vector& text, const FeatureVector& standardized,
                          const ModelParams& params, Variant variant) {
  return forward_pass(text, standardized, params, variant).prediction();
}

// ---------------------------------------------------------------------------
// Loss

inline constexpr double kProbabilityClamp = 1e-7;

struct LossValue {
  double value = 0.0;
  double dprob = 0.0;   // d loss / d p at the clamped probability
  double dlogit = 0.0;  // d loss / d logit, used for backpropagation
};

// Weighted binary cross-entropy -[w y log p + (1-y) log(1-p)], p clamped to
// [1e-7, 1 - 1e-7]. The logit gradient is (1-y) p - w y (1-p).
inline LossValue loss(double p, bool label, double positive_class_weight) {
  const double pc = std::clamp(p, kProbabilityClamp, 1.0 - kProbabilityClamp);
  const double w = positive_class_weight;
  LossValue out;
  if (label) {
    out.value = -w * std::log(pc);
    out.dprob = -w / pc;
    out.dlogit = -w * (1.0 - p);
  } else {
    out.value = -std::log(1.0 - pc);
    out.dprob = 1.0 / (1.0 - pc);
    out.dlogit = p;
  }
  return out;
}

// ---------------------------------------------------------------------------
// Backward pass

struct Gradients {
  Matrix feature_tokens;
  Matrix query_proj;
  Matrix key_proj;
  Matrix value_proj;
  Vector head;
  double bias = 0.0;
  std::unordered_map<std::uint32_t, Vector> embedding_rows;

  static Gradients zeros_like(const ModelParams& p) {
    Gradients g;
    g.feature_tokens = Matrix::Zero(p.feature_tokens.rows(), p.feature_tokens.cols());
    g.query_proj = Matrix::Zero(p.query_proj.rows(), p.query_proj.cols());
    g.key_proj = Matrix::Zero(p.key_proj.rows(), p.key_proj.cols());
    g.value_proj = Matrix::Zero(p.value_proj.rows(), p.value_proj.cols());
    g.head = Vector::Zero(p.head.size());
    return g;
  }
};

// Adds the gradient of one example's loss to `grads` and returns the loss.
inline double accumulate_gradients(const TextInput& input,
                                   const FeatureVector& standardized, bool label,
                                   double positive_class_weight,
                                   const ModelParams& params, Variant variant,
                                   Gradients& grads) {
  const Vector text = text_embedding(input, params);
  const ForwardPass f = forward_pass(text, standardized, params, variant);
  const LossValue l = loss(f.probability, label, positive_class_weight);
  const double dz = l.dlogit;
  const auto d = static_cast<Eigen::Index>(text.size());
  const auto dv = f.context.size();

  grads.head.head(d) += dz * text;
  grads.head.tail(dv) += dz * f.context;
  grads.bias += dz;
  Vector dtext = dz * params.head.head(d);
  const Vector dcontext = dz * params.head.tail(dv);

  // context = V^T a
  const Vector dweights = f.values * dcontext;
  const double mean_dw = f.weights.dot(dweights);
  const Vector dscores = (f.weights.array() * (dweights.array() - mean_dw)).matrix();
  const double scale = 1.0 / std::sqrt(static_cast<double>(f.query.size()));
  const Vector dquery = scale * (f.keys.transpose() * dscores);

  for (std::size_t k = 0; k < f.included.size(); ++k) {
    const auto ki = static_cast<Eigen::Index>(k);
    const auto i = static_cast<Eigen::Index>(f.included[k]);
    const double x = standardized[f.included[k]];
    const auto token = params.feature_tokens.row(i);
    // keys.row(k) = token * W_K
    const Eigen::RowVectorXd dkey = scale * dscores[ki] * f.query.transpose();
    grads.key_proj.noalias() += token.transpose() * dkey;
    grads.feature_tokens.row(i).noalias() += dkey * params.key_proj.transpose();
    // values.row(k) = x * token * W_V
    const Eigen::RowVectorXd dvalue = f.weights[ki] * dcontext.transpose();
    grads.value_proj.noalias() += (x * token.transpose()) * dvalue;
    grads.feature_tokens.row(i).noalias() += x * (dvalue * params.value_proj.transpose());
  }
  // query = W_Q^T t
  grads.query_proj.noalias() += text * dquery.transpose();
  dtext.noalias() += params.query_proj * dquery;

  if (!input.precomputed && !input.buckets.empty()) {
    const Vector per_row = dtext / static_cast<double>(input.buckets.size());
    for (auto b : input.buckets) {
      auto [it, inserted] = grads.embedding_rows.try_emplace(b, per_row);
      if (!inserted) it->second += per_row;
    }
  }
  return l.value;
}

inline void apply_gradients(ModelParams& params, const Gradients& grads,
                            double step, double embedding_step) {
  params.feature_tokens -= step * grads.feature_tokens;
  params.query_proj -= step * grads.query_proj;
  params.key_proj -= step * grads.key_proj;
  params.value_proj -= step * grads.value_proj;
  params.head -= step * grads.head;
  params.bias -= step * grads.bias;
  for (const auto& [row, g] : grads.embedding_rows) {
    params.embedding.row(row) -= embedding_step * g.transpose();
  }
}

// ---------------------------------------------------------------------------
// Trained model

struct FusionModel {
  Variant variant = Variant::kAll;
  AttentionConfig attention;
  TextEmbeddingProvider text;
  ModelParams params;
  Standardizer standardizer;
  FeatureVector baseline;  // raw-scale reference point for attributions

  Vector embed_text(const TextInput& input) const {
    return text_embedding(input, params);
  }

  Prediction predict(const TextInput& input, const FeatureVector& raw) const {
    return forward(embed_text(input), standardizer.apply(raw), params, variant);
  }

  double probability(const Vector& text, const FeatureVector& raw) const {
    return forward_pass(text, standardizer.apply(raw), params, variant).probability;
  }
};

// ---------------------------------------------------------------------------
// Metrics

struct Metrics {
  double accuracy = 0.0;
  double precision = 0.0;
  double recall = 0.0;
  double f1 = 0.0;
  std::size_t tp = 0, fp = 0, tn = 0, fn = 0;

  static Metrics from_counts(std::size_t tp, std::size_t fp, std::size_t tn,
                             std::size_t fn) {
    Metrics m;
    m.tp = tp, m.fp = fp, m.tn = tn, m.fn = fn;
    const auto total = static_cast<double>(tp + fp + tn + fn);
    m.accuracy = total > 0 ? static_cast<double>(tp + tn) / total : 0.0;
    m.precision = tp + fp > 0 ? static_cast<double>(tp) / static_cast<double>(tp + fp) : 0.0;
    m.recall = tp + fn > 0 ? static_cast<double>(tp) / static_cast<double>(tp + fn) : 0.0;
    m.f1 = tp > 0 ? 2.0 * static_cast<double>(tp) / static_cast<double>(2 * tp + fp + fn)
                  : 0.0;
    return m;
  }
};

// Positive class is "influential"; a prediction is positive when p >= 0.5.
inline Metrics compute_metrics(std::span<const bool> truth,
                               std::span<const bool> predicted) {
  require(truth.size() == predicted.size(), "label and prediction counts differ");
  std::size_t tp = 0, fp = 0, tn = 0, fn = 0;
  for (std::size_t i = 0; i < truth.size(); ++i) {
    if (predicted[i]) {
      truth[i] ? ++tp : ++fp;
    } else {
      truth[i] ? ++fn : ++tn;
    }
  }
  return Metrics::from_counts(tp, fp, tn, fn);
}

// ---------------------------------------------------------------------------
// Training

struct TrainConfig {
  double learning_rate = 1e-2;
  // Multiplier on the step for embedding rows. Each row's gradient is diluted
  // by the number of n-grams it is pooled with, so rows learn slowly at the
  // shared rate.
  double embedding_lr_scale = 1.0;
  int epochs = 30;
  int batch_size = 32;
  std::optional<double> positive_class_weight;  // default: #neg / #pos in train
  std::uint64_t seed = 0;
  int early_stop_patience = 5;  // epochs without validation F1 gain; 0 = off
  Variant variant = Variant::kAll;
  AttentionConfig attention;

  void validate() const {
    require(learning_rate >= 0 && std::isfinite(learning_rate),
            "learning rate must be finite and non-negative");
    require(embedding_lr_scale >= 0 && std::isfinite(embedding_lr_scale),
            "embedding learning-rate scale must be finite and non-negative");
    require(epochs >= 1, "epochs must be positive");
    require(batch_size >= 1, "batch size must be positive");
    require(early_stop_patience >= 0, "patience must be non-negative");
    require(!positive_class_weight || *positive_class_weight >= 1.0,
            "positive class weight must be at least 1");
    attention.validate();
  }
};

struct EpochRecord {
  int epoch = 0;
  double train_loss = 0.0;
  Metrics validation;

  friend bool operator==(const EpochRecord& a, const EpochRecord& b) {
    return a.epoch == b.epoch && a.train_loss == b.train_loss &&
           a.validation.f1 == b.validation.f1 && a.validation.tp == b.validation.tp &&
           a.validation.fp == b.validation.fp && a.validation.tn == b.validation.tn &&
           a.validation.fn == b.validation.fn;
  }
};

struct TrainingHistory {
  std::vector<EpochRecord> epochs;
  int best_epoch = 0;
  double best_validation_f1 = 0.0;
  double positive_class_weight = 1.0;
};

struct TrainResult {
  FusionModel model;
  TrainingHistory history;
};

struct PreparedExample {
  TextInput text;
  FeatureVector raw;
  bool label = false;
};

inline std::vector<PreparedExample> prepare_examples(
    std::span<const LabeledReview> reviews, const Lexicons& lexicons,
    const TextEmbeddingProvider& provider) {
  std::vector<PreparedExample> out;
  out.reserve(reviews.size());
  for (const auto& r : reviews) {
    out.push_back({provider.prepare(r.review), extract_features(r.review, lexicons),
                   r.influential});
  }
  return out;
}

inline Metrics evaluate_prepared(const FusionModel& model,
                                 std::span<const PreparedExample> examples) {
  std::size_t tp = 0, fp = 0, tn = 0, fn = 0;
  for (const auto& e : examples) {
    const bool positive = model.predict(e.text, e.raw).label;
    if (positive) {
      e.label ? ++tp : ++fp;
    } else {
      e.label ? ++fn : ++tn;
    }
  }
  return Metrics::from_counts(tp, fp, tn, fn);
}

inline Metrics evaluate(const FusionModel& model, const Lexicons& lexicons,
                        std::span<const LabeledReview> dataset) {
  require(!dataset.empty(), "cannot evaluate on an empty dataset");
  const auto examples = prepare_examples(dataset, lexicons, model.text);
  return evaluate_prepared(model, examples);
}

// Mini-batch gradient descent with the hand-derived gradients above. The
// standardizer and attribution baseline are fitted on the training split.
// Returns the parameters of the epoch with the best validation F1 (earliest
// on ties).
inline TrainResult train(const CorpusSplit& split, const Lexicons& lexicons,
                         const TextEmbeddingProvider& provider,
                         const TrainConfig& config) {
  config.validate();
  require(!split.train.empty(), "training split is empty");
  std::size_t positives = 0;
  for (const auto& r : split.train) positives += r.influential ? 1 : 0;
  const std::size_t negatives = split.train.size() - positives;
  require(positives > 0 && negatives > 0,
          "training split must contain both classes");

  auto train_set = prepare_examples(split.train, lexicons, provider);
  const auto validation_set = prepare_examples(split.validation, lexicons, provider);

  std::vector<FeatureVector> raw;
  raw.reserve(train_set.size());
  for (const auto& e : train_set) raw.push_back(e.raw);

  FusionModel model;
  model.variant = config.variant;
  model.attention = config.attention;
  model.text = provider;
  model.standardizer = raw.size() >= 2 ? fit_standardizer(raw, "train")
                                       : Standardizer{{}, {}, "train"};
  if (raw.size() < 2) model.standardizer.mean = raw.front().values;
  model.baseline = reference_baseline(raw);

  Rng rng(splitmix64(config.seed) ^ 0x5eedULL);
  model.params = ModelParams::random(provider.dim(),
                                     provider.is_hashed() ? provider.config().buckets : 0,
                                     config.attention, rng);

  std::vector<FeatureVector> standardized;
  standardized.reserve(train_set.size());
  for (const auto& e : train_set) standardized.push_back(model.standardizer.apply(e.raw));

  TrainingHistory history;
  history.positive_class_weight =
      config.positive_class_weight.value_or(static_cast<double>(negatives) /
                                            static_cast<double>(positives));
  history.positive_class_weight = std::max(1.0, history.positive_class_weight);

  std::vector<std::size_t> order(train_set.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;

  ModelParams best = model.params;
  double best_f1 = -1.0;
  int since_best = 0;
  const auto batch = static_cast<std::size_t>(config.batch_size);
  for (int epoch = 1; epoch <= config.epochs; ++epoch) {
    rng.shuffle(std::span<std::size_t>(order));
    double total_loss = 0.0;
    for (std::size_t start = 0; start < order.size(); start += batch) {
      const std::size_t end = std::min(order.size(), start + batch);
      Gradients grads = Gradients::zeros_like(model.params);
      for (std::size_t k = start; k < end; ++k) {
        const std::size_t i = order[k];
        total_loss += accumulate_gradients(train_set[i].text, standardized[i],
                                           train_set[i].label,
                                           history.positive_class_weight,
                                           model.params, model.variant, grads);
      }
      if (!std::isfinite(total_loss)) {
        throw DivergenceError("training diverged: non-finite loss in epoch " +
                              std::to_string(epoch) + " (learning rate " +
                              std::to_string(config.learning_rate) + ")");
      }
      const double step = config.learning_rate / static_cast<double>(end - start);
      apply_gradients(model.params, grads, step, step * config.embedding_lr_scale);
    }
    if (!model.params.all_finite()) {
      throw DivergenceError("training diverged: non-finite parameters after epoch " +
                            std::to_string(epoch));
    }
    EpochRecord record;
    record.epoch = epoch;
    record.train_loss = total_loss / static_cast<double>(train_set.size());
    if (!validation_set.empty()) record.validation = evaluate_prepared(model, validation_set);
    history.epochs.push_back(record);

    const double f1 = validation_set.empty() ? static_cast<double>(epoch)
                                             : record.validation.f1;
    if (f1 > best_f1) {
      best_f1 = f1;
      best = model.params;
      history.best_epoch = epoch;
      since_best = 0;
    } else if (config.early_stop_patience > 0 &&
               ++since_best >= config.early_stop_patience) {
      break;
    }
  }
  history.best_validation_f1 =
      validation_set.empty() ? 0.0 : history.epochs[history.best_epoch - 1].validation.f1;
  model.params = std::move(best);
  return {std::move(model), std::move(history)};
}

struct VariantResult {
  Variant variant = Variant::kAll;
  Metrics validation;
  Metrics test;
  TrainingHistory history;
};

// Trains the three feature-subset variants with one shared configuration and
// seed, and reports their held-out metrics side by side.
inline std::vector<VariantResult> compare_variants(const CorpusSplit& split,
                                                   const Lexicons& lexicons,
                                                   const TextEmbeddingProvider& provider,
                                                   TrainConfig config) {
  std::vector<VariantResult> rows;
  for (auto v : {Variant::kReviewer, Variant::kReview, Variant::kAll}) {
    config.variant = v;
    auto result = train(split, lexicons, provider, config);
    VariantResult row;
    row.variant = v;
    row.history = result.history;
    if (!split.validation.empty()) row.validation = evaluate(result.model, lexicons, split.validation);
    if (!split.test.empty()) row.test = evaluate(result.model, lexicons, split.test);
    rows.push_back(std::move(row));
  }
  return rows;
}

}  // namespace revtriage

#endif  // REVTRIAGE_FUSION_HPP_
