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

#ifndef REVTRIAGE_ARTIFACT_HPP_
#define REVTRIAGE_ARTIFACT_HPP_

#include <bit>
#include <cstdint>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <memory>
#include <sstream>
#include <string>
#include <string_view>

#include "revtriage/common.hpp"
#include "revtriage/encoder.hpp"
#include "revtriage/fusion.hpp"
#include "revtriage/rng.hpp"

// Model files: an 8-byte magic, a u32 format version, a u64 payload length,
// the u64 FNV-1a hash of the payload, then the payload. All integers and
// doubles are little-endian; doubles are stored bit-exact.

namespace revtriage {

inline constexpr std::string_view kArtifactMagic = "RVTRIAGE";
inline constexpr std::uint32_t kArtifactVersion = 1;

class ChecksumError : public ParseError {
 public:
  using ParseError::ParseError;
};

class VersionError : public ParseError {
 public:
  VersionError(std::uint32_t found, std::uint32_t supported)
      : ParseError("model artifact format version " + std::to_string(found) +
                   " is not supported by this build (supports version " +
                   std::to_string(supported) + ")"),
        found_(found),
        supported_(supported) {}
  std::uint32_t found() const { return found_; }
  std::uint32_t supported() const { return supported_; }

 private:
  std::uint32_t found_;
  std::uint32_t supported_;
};

struct ModelArtifact {
  FusionModel model;
  TrainingHistory history;
};

namespace detail {

class ByteWriter {
 public:
  void u8(std::uint8_t v) { out_.push_back(static_cast<char>(v)); }
  void u32(std::uint32_t v) {
    for (int i = 0; i < 4; ++i) u8(static_cast<std::uint8_t>(v >> (8 * i)));
  }
  void u64(std::uint64_t v) {
    for (int i = 0; i < 8; ++i) u8(static_cast<std::uint8_t>(v >> (8 * i)));
  }
  void i64(std::int64_t v) { u64(static_cast<std::uint64_t>(v)); }
  void f64(double v) { u64(std::bit_cast<std::uint64_t>(v)); }
  void str(std::string_view s) {
    u64(s.size());
    out_.append(s);
  }
  void matrix(const Matrix& m) {
    u64(static_cast<std::uint64_t>(m.rows()));
    u64(static_cast<std::uint64_t>(m.cols()));
    for (Eigen::Index i = 0; i < m.size(); ++i) f64(m.data()[i]);
  }
  void vector(const Vector& v) {
    u64(static_cast<std::uint64_t>(v.size()));
    for (Eigen::Index i = 0; i < v.size(); ++i) f64(v[i]);
  }
  const std::string& bytes() const { return out_; }

 private:
  std::string out_;
};

class ByteReader {
 public:
  explicit ByteReader(std::string_view in) : in_(in) {}

  std::uint8_t u8() {
    need(1);
    return static_cast<std::uint8_t>(in_[pos_++]);
  }
  std::uint32_t u32() {
    std::uint32_t v = 0;
    for (int i = 0; i < 4; ++i) v |= std::uint32_t{u8()} << (8 * i);
    return v;
  }
  std::uint64_t u64() {
    std::uint64_t v = 0;
    for (int i = 0; i < 8; ++i) v |= std::uint64_t{u8()} << (8 * i);
    return v;
  }
  std::int64_t i64() { return static_cast<std::int64_t>(u64()); }
  double f64() { return std::bit_cast<double>(u64()); }
  std::string str() {
    const auto n = count(1);
    std::string s(in_.substr(pos_, n));
    pos_ += n;
    return s;
  }
  Matrix matrix() {
    const auto rows = u64();
    const auto cols = u64();
    if (cols != 0 && rows > (in_.size() - pos_) / 8 / cols) {
      throw ParseError("model artifact matrix exceeds the payload");
    }
    Matrix m(static_cast<Eigen::Index>(rows), static_cast<Eigen::Index>(cols));
    for (Eigen::Index i = 0; i < m.size(); ++i) m.data()[i] = f64();
    return m;
  }
  Vector vector() {
    const auto n = count(8);
    Vector v(static_cast<Eigen::Index>(n));
    for (Eigen::Index i = 0; i < v.size(); ++i) v[i] = f64();
    return v;
  }
  bool done() const { return pos_ == in_.size(); }

 private:
  void need(std::size_t n) const {
    if (in_.size() - pos_ < n) throw ParseError("model artifact payload is truncated");
  }
  // Reads an element count and checks the elements can fit.
  std::size_t count(std::size_t element_size) {
    const auto n = u64();
    if (n > (in_.size() - pos_) / element_size) {
      throw ParseError("model artifact length field exceeds the payload");
    }
    return static_cast<std::size_t>(n);
  }

  std::string_view in_;
  std::size_t pos_ = 0;
};

inline void write_metrics(ByteWriter& w, const Metrics& m) {
  w.f64(m.accuracy);
  w.f64(m.precision);
  w.f64(m.recall);
  w.f64(m.f1);
  w.u64(m.tp);
  w.u64(m.fp);
  w.u64(m.tn);
  w.u64(m.fn);
}

inline Metrics read_metrics(ByteReader& r) {
  Metrics m;
  m.accuracy = r.f64();
  m.precision = r.f64();
  m.recall = r.f64();
  m.f1 = r.f64();
  m.tp = r.u64();
  m.fp = r.u64();
  m.tn = r.u64();
  m.fn = r.u64();
  return m;
}

inline void write_model(ByteWriter& w, const FusionModel& m) {
  w.u8(static_cast<std::uint8_t>(m.variant));
  w.u64(m.attention.token_dim);
  w.u64(m.attention.key_dim);
  w.u64(m.attention.value_dim);
  w.u8(m.text.is_hashed() ? 0 : 1);
  const auto& enc = m.text.config();
  w.u64(enc.dim);
  w.u64(enc.buckets);
  w.u64(enc.ngram_orders.size());
  for (int n : enc.ngram_orders) w.i64(n);
  w.u64(enc.hash_seed);
  for (double v : m.standardizer.mean) w.f64(v);
  for (double v : m.standardizer.stddev) w.f64(v);
  w.str(m.standardizer.fitted_on);
  for (std::size_t i = 0; i < kFeatureCount; ++i) w.f64(m.baseline[i]);
  w.matrix(m.params.feature_tokens);
  w.matrix(m.params.query_proj);
  w.matrix(m.params.key_proj);
  w.matrix(m.params.value_proj);
  w.vector(m.params.head);
  w.f64(m.params.bias);
  w.matrix(m.params.embedding);
}

}  // namespace detail

// Hash of the serialized model, independent of the training history.
inline std::uint64_t model_checksum(const FusionModel& model) {
  detail::ByteWriter w;
  detail::write_model(w, model);
  return fnv1a64(w.bytes());
}

inline std::string serialize_artifact(const ModelArtifact& artifact) {
  detail::ByteWriter w;
  detail::write_model(w, artifact.model);
  const auto& h = artifact.history;
  w.u64(h.epochs.size());
  for (const auto& e : h.epochs) {
    w.i64(e.epoch);
    w.f64(e.train_loss);
    detail::write_metrics(w, e.validation);
  }
  w.i64(h.best_epoch);
  w.f64(h.best_validation_f1);
  w.f64(h.positive_class_weight);

  const std::string& payload = w.bytes();
  detail::ByteWriter header;
  for (char c : kArtifactMagic) header.u8(static_cast<std::uint8_t>(c));
  header.u32(kArtifactVersion);
  header.u64(payload.size());
  header.u64(fnv1a64(payload));
  return header.bytes() + payload;
}

// `table` supplies the embeddings for models trained on an external table;
// it is ignored for hashed-encoder models.
inline ModelArtifact deserialize_artifact(std::string_view bytes,
                                          std::shared_ptr<const EmbeddingTable> table = nullptr) {
  constexpr std::size_t kHeader = 8 + 4 + 8 + 8;
  if (bytes.size() < kHeader || bytes.substr(0, 8) != kArtifactMagic) {
    throw ParseError("not a model artifact (bad magic)");
  }
  detail::ByteReader header(bytes.substr(8, kHeader - 8));
  const auto version = header.u32();
  if (version != kArtifactVersion) throw VersionError(version, kArtifactVersion);
  const auto size = header.u64();
  const auto checksum = header.u64();
  if (bytes.size() - kHeader != size) {
    throw ParseError("model artifact payload is " + std::to_string(bytes.size() - kHeader) +
                     " bytes but the header declares " + std::to_string(size));
  }
  const std::string_view payload = bytes.substr(kHeader);
  if (fnv1a64(payload) != checksum) {
    throw ChecksumError("model artifact checksum mismatch; the file is corrupted");
  }

  detail::ByteReader r(payload);
  ModelArtifact a;
  FusionModel& m = a.model;
  const auto variant = r.u8();
  if (variant > static_cast<std::uint8_t>(Variant::kAll)) {
    throw ParseError("model artifact has an unknown variant");
  }
  m.variant = static_cast<Variant>(variant);
  m.attention.token_dim = r.u64();
  m.attention.key_dim = r.u64();
  m.attention.value_dim = r.u64();
  const auto kind = r.u8();
  EncoderConfig enc;
  enc.dim = r.u64();
  enc.buckets = r.u64();
  const auto n_orders = r.u64();
  if (n_orders > 64) throw ParseError("model artifact has too many n-gram orders");
  enc.ngram_orders.clear();
  for (std::uint64_t i = 0; i < n_orders; ++i) {
    enc.ngram_orders.push_back(static_cast<int>(r.i64()));
  }
  enc.hash_seed = r.u64();
  for (double& v : m.standardizer.mean) v = r.f64();
  for (double& v : m.standardizer.stddev) v = r.f64();
  m.standardizer.fitted_on = r.str();
  for (std::size_t i = 0; i < kFeatureCount; ++i) m.baseline[i] = r.f64();
  m.params.feature_tokens = r.matrix();
  m.params.query_proj = r.matrix();
  m.params.key_proj = r.matrix();
  m.params.value_proj = r.matrix();
  m.params.head = r.vector();
  m.params.bias = r.f64();
  m.params.embedding = r.matrix();

  auto& h = a.history;
  const auto n_epochs = r.u64();
  if (n_epochs > 1000000) throw ParseError("model artifact has an implausible epoch count");
  for (std::uint64_t i = 0; i < n_epochs; ++i) {
    EpochRecord e;
    e.epoch = static_cast<int>(r.i64());
    e.train_loss = r.f64();
    e.validation = detail::read_metrics(r);
    h.epochs.push_back(e);
  }
  h.best_epoch = static_cast<int>(r.i64());
  h.best_validation_f1 = r.f64();
  h.positive_class_weight = r.f64();
  if (!r.done()) throw ParseError("model artifact has trailing bytes");

  if (kind == 0) {
    m.text = TextEmbeddingProvider::hashed(enc);
  } else if (kind == 1) {
    if (!table) {
      throw InvalidArgument("model was trained on external embeddings (dim " +
                            std::to_string(enc.dim) + "); supply the embedding table");
    }
    if (table->dim != enc.dim) {
      throw InvalidArgument("embedding table has dim " + std::to_string(table->dim) +
                            " but the model expects " + std::to_string(enc.dim));
    }
    m.text = TextEmbeddingProvider::external(std::move(table));
  } else {
    throw ParseError("model artifact has an unknown text provider");
  }
  m.attention.validate();
  const auto text_dim = static_cast<Eigen::Index>(enc.dim);
  const auto& p = m.params;
  const bool shapes_ok =
      p.feature_tokens.rows() == static_cast<Eigen::Index>(kFeatureCount) &&
      p.feature_tokens.cols() == static_cast<Eigen::Index>(m.attention.token_dim) &&
      p.query_proj.rows() == text_dim &&
      p.query_proj.cols() == static_cast<Eigen::Index>(m.attention.key_dim) &&
      p.key_proj.rows() == static_cast<Eigen::Index>(m.attention.token_dim) &&
      p.key_proj.cols() == static_cast<Eigen::Index>(m.attention.key_dim) &&
      p.value_proj.rows() == static_cast<Eigen::Index>(m.attention.token_dim) &&
      p.value_proj.cols() == static_cast<Eigen::Index>(m.attention.value_dim) &&
      p.head.size() == text_dim + static_cast<Eigen::Index>(m.attention.value_dim) &&
      (kind == 1 || (p.embedding.rows() == static_cast<Eigen::Index>(enc.buckets) &&
                     p.embedding.cols() == text_dim));
  if (!shapes_ok) throw ParseError("model artifact weight shapes are inconsistent");
  return a;
}

inline void save_model(const ModelArtifact& artifact, const std::filesystem::path& path) {
  const std::string bytes = serialize_artifact(artifact);
  const auto tmp = std::filesystem::path(path.string() + ".tmp");
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw Error("cannot write model artifact " + tmp.string());
    out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
    if (!out) throw Error("failed writing model artifact " + tmp.string());
  }
  std::filesystem::rename(tmp, path);
}

inline ModelArtifact load_model(const std::filesystem::path& path,
                                std::shared_ptr<const EmbeddingTable> table = nullptr) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot open model artifact " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return deserialize_artifact(ss.str(), std::move(table));
}

}  // namespace revtriage

#endif  // REVTRIAGE_ARTIFACT_HPP_
