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
#include <cstdint>
#include <memory>
#include <sstream>
#include <string>
#include <vector>

#include <gtest/gtest.h>

#include "revtriage/encoder.hpp"
#include "revtriage/rng.hpp"

namespace rt = revtriage;

namespace {

// Straight-line FNV-1a over the joined bytes, then one splitmix64 round.
std::uint64_t reference_hash(const std::vector<std::string>& ngram, std::uint64_t seed) {
  std::string joined;
  for (std::size_t i = 0; i < ngram.size(); ++i) {
    if (i > 0) joined.push_back('\x1f');
    joined += ngram[i];
  }
  std::uint64_t z = seed + 0x9e3779b97f4a7c15ULL;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  std::uint64_t h = 0xcbf29ce484222325ULL ^ (z ^ (z >> 31));
  for (unsigned char c : joined) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  z = h + 0x9e3779b97f4a7c15ULL;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

}  // namespace

TEST(Encoder, HashMatchesReferenceImplementation) {
  const std::vector<std::vector<std::string>> cases = {
      {"a"}, {"a", "b"}, {"waiter", "rude"}, {"\xe5\xbe\x88", "\xe5\xb7\xae"}, {""}};
  for (std::uint64_t seed : {0ULL, 1ULL, 0xdeadbeefULL}) {
    for (const auto& ngram : cases) {
      EXPECT_EQ(rt::ngram_hash(ngram, seed), reference_hash(ngram, seed));
    }
  }
}

TEST(Encoder, HashSeparatesTokenBoundaries) {
  const std::vector<std::string> ab = {"ab"}, a_b = {"a", "b"};
  EXPECT_NE(rt::ngram_hash(ab, 0), rt::ngram_hash(a_b, 0));
  EXPECT_NE(rt::ngram_hash(ab, 0), rt::ngram_hash(ab, 1));
}

TEST(Encoder, UnigramsAndBigrams) {
  rt::EncoderConfig config;
  config.buckets = 4096;
  const std::vector<std::string> tokens = {"a", "b"};
  const auto idx = rt::hash_ngrams(tokens, config);
  ASSERT_EQ(idx.size(), 3u);
  EXPECT_EQ(idx[0], reference_hash({"a"}, 0) % 4096);
  EXPECT_EQ(idx[1], reference_hash({"b"}, 0) % 4096);
  EXPECT_EQ(idx[2], reference_hash({"a", "b"}, 0) % 4096);
  EXPECT_TRUE(rt::hash_ngrams(std::vector<std::string>{}, config).empty());
  EXPECT_EQ(rt::hash_ngrams(std::vector<std::string>{"x"}, config).size(), 1u);
}

TEST(Encoder, CountsFollowOrders) {
  rt::EncoderConfig config;
  config.ngram_orders = {1, 2, 3};
  for (std::size_t n = 0; n < 7; ++n) {
    std::vector<std::string> tokens(n, "t");
    const std::size_t expected = n + (n >= 2 ? n - 1 : 0) + (n >= 3 ? n - 2 : 0);
    EXPECT_EQ(rt::hash_ngrams(tokens, config).size(), expected);
  }
}

TEST(Encoder, EmbedIsRowMean) {
  rt::Matrix table(4, 2);
  table << 1, 2, 3, 4, 5, 6, 7, 8;
  const std::vector<std::uint32_t> buckets = {0, 2, 2};
  const rt::Vector v = rt::embed(buckets, table);
  EXPECT_DOUBLE_EQ(v[0], (1 + 5 + 5) / 3.0);
  EXPECT_DOUBLE_EQ(v[1], (2 + 6 + 6) / 3.0);
  EXPECT_TRUE(rt::embed(std::vector<std::uint32_t>{}, table).isZero());
}

TEST(Encoder, UnigramEmbeddingIsOrderInvariant) {
  rt::EncoderConfig config;
  config.ngram_orders = {1};
  config.buckets = 1024;
  config.dim = 5;
  rt::Rng rng(3);
  rt::Matrix table(1024, 5);
  for (Eigen::Index i = 0; i < table.size(); ++i) table.data()[i] = rng.normal();
  std::vector<std::string> tokens = {"cold", "soup", "rude", "waiter", "cold", "\xe5\xb7\xae"};
  const rt::Vector base = rt::embed(rt::hash_ngrams(tokens, config), table);
  for (int k = 0; k < 20; ++k) {
    rng.shuffle(std::span<std::string>(tokens));
    const rt::Vector v = rt::embed(rt::hash_ngrams(tokens, config), table);
    EXPECT_LT((v - base).cwiseAbs().maxCoeff(), 1e-12);
  }
}

TEST(Encoder, ConfigValidation) {
  rt::EncoderConfig c;
  EXPECT_NO_THROW(c.validate());
  c.dim = 1;
  EXPECT_THROW(c.validate(), rt::InvalidArgument);
  c = {};
  c.buckets = 100;
  EXPECT_THROW(c.validate(), rt::InvalidArgument);
  c = {};
  c.ngram_orders = {};
  EXPECT_THROW(c.validate(), rt::InvalidArgument);
  c.ngram_orders = {0};
  EXPECT_THROW(c.validate(), rt::InvalidArgument);
}

TEST(Encoder, EmbeddingTableParse) {
  std::istringstream in("r1\t0.5 1.5\nr2\t-1 2\n\nr1\t3 4\n");
  const auto table = rt::parse_embedding_table(in);
  EXPECT_EQ(table.size(), 2u);
  EXPECT_EQ(table.dim, 2u);
  EXPECT_DOUBLE_EQ(table.vectors.at("r1")[0], 3.0);
  EXPECT_EQ(table.warnings.size(), 1u);

  std::istringstream ragged("r1\t1 2\nr2\t1 2 3\n");
  EXPECT_THROW(rt::parse_embedding_table(ragged), rt::ParseError);
  std::istringstream empty("r1\t\n");
  EXPECT_THROW(rt::parse_embedding_table(empty), rt::ParseError);
  std::istringstream nan("r1\t1 nan\n");
  EXPECT_THROW(rt::parse_embedding_table(nan), rt::ParseError);
  std::istringstream junk("r1\t1 2x\n");
  EXPECT_THROW(rt::parse_embedding_table(junk), rt::ParseError);
}

TEST(Encoder, ProviderModes) {
  const auto hashed = rt::TextEmbeddingProvider::hashed({});
  rt::Review r;
  r.id = "r1";
  r.text = "waiter rude";
  const auto in = hashed.prepare(r);
  EXPECT_EQ(in.buckets.size(), 3u);
  EXPECT_FALSE(in.precomputed.has_value());

  auto table = std::make_shared<rt::EmbeddingTable>();
  table->dim = 2;
  table->vectors["r1"] = rt::Vector::Ones(2);
  const auto external = rt::TextEmbeddingProvider::external(table);
  EXPECT_EQ(external.dim(), 2u);
  ASSERT_TRUE(external.prepare(r).precomputed.has_value());
  r.id = "r2";
  EXPECT_THROW(external.prepare(r), rt::InvalidArgument);
  EXPECT_THROW(external.prepare_text("x"), rt::InvalidArgument);
}
