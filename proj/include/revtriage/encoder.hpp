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

#ifndef REVTRIAGE_ENCODER_HPP_
#define REVTRIAGE_ENCODER_HPP_

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <istream>
#include <memory>
#include <optional>
#include <sstream>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "revtriage/common.hpp"
#include "revtriage/corpus.hpp"
#include "revtriage/rng.hpp"
#include "revtriage/text.hpp"

namespace revtriage {

struct EncoderConfig {
  std::size_t dim = 64;
  std::size_t buckets = 1u << 15;
  std::vector<int> ngram_orders = {1, 2};
  std::uint64_t hash_seed = 0;

  void validate() const {
    require(dim >= 2, "embedding dimension must be at least 2");
    require(buckets >= 1024, "hash bucket count must be at least 1024");
    require(buckets <= (1u << 31), "hash bucket count must fit in 31 bits");
    require(!ngram_orders.empty(), "at least one n-gram order is required");
    for (int n : ngram_orders) require(n >= 1, "n-gram orders must be positive");
  }

  friend bool operator==(const EncoderConfig&, const EncoderConfig&) = default;
};

// Stable 64-bit n-gram hash: FNV-1a over the UTF-8 token bytes with U+001F
// between tokens, starting from the FNV offset basis xor splitmix64(seed),
// finished with one splitmix64 round.
inline std::uint64_t ngram_hash(std::span<const std::string> ngram,
                                std::uint64_t seed) {
  std::uint64_t state = kFnvOffset ^ splitmix64(seed);
  for (std::size_t i = 0; i < ngram.size(); ++i) {
    if (i > 0) state = fnv1a64("\x1f", state);
    state = fnv1a64(ngram[i], state);
  }
  return splitmix64(state);
}

// Bucket indices of every contiguous n-gram, grouped by order in ascending
// order of n and by position within each order.
inline std::vector<std::uint32_t> hash_ngrams(std::span<const std::string> tokens,
                                              const EncoderConfig& config) {
  std::vector<int> orders = config.ngram_orders;
  std::sort(orders.begin(), orders.end());
  orders.erase(std::unique(orders.begin(), orders.end()), orders.end());
  std::vector<std::uint32_t> out;
  for (int n : orders) {
    const auto un = static_cast<std::size_t>(n);
    if (tokens.size() < un) continue;
    for (std::size_t i = 0; i + un <= tokens.size(); ++i) {
      out.push_back(static_cast<std::uint32_t>(
          ngram_hash(tokens.subspan(i, un), config.hash_seed) % config.buckets));
    }
  }
  return out;
}

// Mean of the embedding rows at the given buckets; zero vector when empty.
inline Vector embed(std::span<const std::uint32_t> buckets, const Matrix& table) {
  Vector out = Vector::Zero(table.cols());
  if (buckets.empty()) return out;
  for (auto b : buckets) out += table.row(b).transpose();
  out /= static_cast<double>(buckets.size());
  return out;
}

// ---------------------------------------------------------------------------
// Externally computed embeddings

struct EmbeddingTable {
  std::size_t dim = 0;
  std::unordered_map<std::string, Vector> vectors;
  std::vector<std::string> warnings;

  std::size_t size() const { return vectors.size(); }
};

// Lines are `id<TAB>v1 v2 ... vD`. A repeated id replaces the earlier vector
// and leaves a warning; inconsistent dimensions are an error.
inline EmbeddingTable parse_embedding_table(std::istream& in) {
  EmbeddingTable table;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    const auto tab = line.find('\t');
    if (tab == std::string::npos || tab == 0) {
      throw ParseError("embedding table line " + std::to_string(line_no) +
                       ": expected id<TAB>values");
    }
    const std::string id = line.substr(0, tab);
    std::istringstream values(line.substr(tab + 1));
    std::vector<double> v;
    std::string item;
    while (values >> item) {
      double value = 0.0;
      try {
        std::size_t used = 0;
        value = std::stod(item, &used);
        if (used != item.size()) throw std::invalid_argument(item);
      } catch (const std::logic_error&) {
        throw ParseError("embedding for id '" + id + "': '" + item +
                         "' is not a number");
      }
      if (!std::isfinite(value)) {
        throw ParseError("embedding for id '" + id + "' has a non-finite value");
      }
      v.push_back(value);
    }
    if (v.empty()) throw ParseError("embedding for id '" + id + "' is empty");
    if (table.dim == 0) {
      table.dim = v.size();
    } else if (v.size() != table.dim) {
      throw ParseError("embedding for id '" + id + "' has dimension " +
                       std::to_string(v.size()) + ", expected " +
                       std::to_string(table.dim));
    }
    if (table.vectors.contains(id)) {
      table.warnings.push_back("duplicate embedding id '" + id +
                               "' on line " + std::to_string(line_no) +
                               "; keeping the last one");
    }
    table.vectors[id] = Eigen::Map<const Vector>(v.data(), v.size());
  }
  return table;
}

inline EmbeddingTable load_embedding_table(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open embedding table '" + path + "'");
  return parse_embedding_table(in);
}

// ---------------------------------------------------------------------------
// Provider

// Text side of one example: either hashed buckets into the trainable table,
// or a fixed vector from an external encoder.
struct TextInput {
  std::vector<std::uint32_t> buckets;
  std::optional<Vector> precomputed;
};

class TextEmbeddingProvider {
 public:
  // Hashed encoder with the default configuration.
  TextEmbeddingProvider() = default;

  static TextEmbeddingProvider hashed(EncoderConfig config) {
    config.validate();
    TextEmbeddingProvider p;
    p.config_ = std::move(config);
    return p;
  }

  static TextEmbeddingProvider external(std::shared_ptr<const EmbeddingTable> table) {
    require(table != nullptr && table->dim >= 1, "embedding table is empty");
    TextEmbeddingProvider p;
    p.config_.dim = table->dim;
    p.table_ = std::move(table);
    return p;
  }

  bool is_hashed() const { return table_ == nullptr; }
  std::size_t dim() const { return config_.dim; }
  const EncoderConfig& config() const { return config_; }
  const EmbeddingTable* table() const { return table_.get(); }

  TextInput prepare_text(std::string_view text) const {
    require(is_hashed(), "raw text cannot be encoded with external embeddings");
    const auto tokens = tokenize(text);
    return {hash_ngrams(tokens, config_), std::nullopt};
  }

  TextInput prepare(const Review& review) const {
    if (is_hashed()) return prepare_text(review.text);
    const auto it = table_->vectors.find(review.id);
    if (it == table_->vectors.end()) {
      throw InvalidArgument("no external embedding for review id '" + review.id + "'");
    }
    return {{}, it->second};
  }

 private:
  EncoderConfig config_;
  std::shared_ptr<const EmbeddingTable> table_;
};

}  // namespace revtriage

#endif  // REVTRIAGE_ENCODER_HPP_
