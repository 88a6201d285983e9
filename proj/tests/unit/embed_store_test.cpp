/* Copyright 2026 The MSnet Authors.

Licensed under the Apache License, Version 2.0 (the "License");
you may not use this file except in compliance with the License.
You may obtain a copy of the License at

    http://www.apache.org/licenses/LICENSE-2.0

Unless required by applicable law or agreed to in writing, software
distributed under the License is distributed on an "AS IS" BASIS,
WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
See the License for the specific language governing permissions and
limitations under the License.
==============================================================================*/

#include <gtest/gtest.h>

#include <cmath>
#include <cstring>
#include <filesystem>
#include <limits>
#include <sstream>
#include <string>
#include <vector>

#include "msnet/embed_store.hpp"
#include "msnet/error.hpp"
#include "msnet/numkit/rng.hpp"
#include "msnet/tokenizer.hpp"

namespace msnet::embed {
namespace {

EmbeddingSet random_set(const std::string& id, std::uint16_t l, std::uint32_t n,
                        std::uint32_t h, numkit::Rng& rng) {
  EmbeddingSet s{id, l, n, h, {}};
  s.values.resize(std::size_t{l} * n * h);
  for (auto& v : s.values) v = static_cast<float>(rng.uniform(-3.0, 3.0));
  return s;
}

std::string serialize(const std::vector<EmbeddingSet>& sets) {
  std::ostringstream out;
  write(out, sets);
  return out.str();
}

std::vector<EmbeddingSet> deserialize(const std::string& bytes) {
  std::istringstream in(bytes);
  return read(in);
}

TEST(EmbedStoreTest, RoundTripIsBitExact) {
  numkit::Rng rng(5);
  std::vector<EmbeddingSet> sets = {random_set("doc-1", 3, 7, 5, rng),
                                    random_set("d\xC3\xA9-2", 1, 1, 1, rng)};
  sets[0].values[4] = -0.0f;
  sets[0].values[5] = std::numeric_limits<float>::denorm_min();
  const auto back = deserialize(serialize(sets));
  ASSERT_EQ(back.size(), 2u);
  EXPECT_EQ(back, sets);
  EXPECT_TRUE(std::signbit(back[0].values[4]));
  EXPECT_EQ(serialize(back), serialize(sets));
}

TEST(EmbedStoreTest, ExactByteLayout) {
  numkit::Rng rng(6);
  const std::vector<EmbeddingSet> sets = {random_set("ab", 2, 3, 4, rng),
                                          random_set("xyz", 2, 3, 4, rng)};
  const std::string bytes = serialize(sets);
  EXPECT_EQ(block_bytes(sets[0]), 2u + 2 + 2 + 4 + 4 + 96);
  EXPECT_EQ(bytes.size(), kHeaderBytes + block_bytes(sets[0]) + block_bytes(sets[1]));
  EXPECT_EQ(bytes.substr(0, 4), "MSEB");
  EXPECT_EQ(static_cast<unsigned char>(bytes[4]), 1);
  EXPECT_EQ(static_cast<unsigned char>(bytes[5]), 0);
  EXPECT_EQ(static_cast<unsigned char>(bytes[6]), 2);  // id length, LE
  EXPECT_EQ(bytes.substr(8, 2), "ab");
  float first;
  std::memcpy(&first, bytes.data() + 6 + 2 + 2 + 2 + 4 + 4, 4);
  EXPECT_EQ(first, sets[0].values[0]);
}

TEST(EmbedStoreTest, EmptyFileHasOnlyHeader) {
  EXPECT_EQ(serialize({}).size(), kHeaderBytes);
  EXPECT_TRUE(deserialize(serialize({})).empty());
}

TEST(EmbedStoreTest, RejectsCorruptInput) {
  numkit::Rng rng(7);
  const std::string good = serialize({random_set("a", 2, 3, 4, rng)});

  std::string bad = good;
  bad[0] = 'X';
  EXPECT_THROW(deserialize(bad), FormatError);

  bad = good;
  bad[4] = 2;
  EXPECT_THROW(deserialize(bad), FormatError);

  for (std::size_t cut : {std::size_t{3}, std::size_t{7}, std::size_t{12}, good.size() - 1}) {
    try {
      deserialize(good.substr(0, cut));
      ADD_FAILURE() << "truncation at " << cut << " accepted";
    } catch (const FormatError& e) {
      EXPECT_LE(e.offset(), cut);
    }
  }

  bad = good;
  const float nan = std::numeric_limits<float>::quiet_NaN();
  std::memcpy(bad.data() + good.size() - 8, &nan, 4);
  try {
    deserialize(bad);
    ADD_FAILURE() << "NaN accepted";
  } catch (const FormatError& e) {
    EXPECT_EQ(e.offset(), good.size() - 8);
  }

  bad = good;
  bad[9] = 0;  // L = 0
  bad[10] = 0;
  EXPECT_THROW(deserialize(bad), FormatError);
}

TEST(EmbedStoreTest, WriterValidates) {
  EmbeddingSet s{"a", 1, 2, 2, {1, 2, 3}};
  std::ostringstream out;
  EXPECT_THROW(write(out, std::vector<EmbeddingSet>{s}), ValidationError);
  s.values.push_back(std::numeric_limits<float>::infinity());
  EXPECT_THROW(write(out, std::vector<EmbeddingSet>{s}), ValidationError);
}

TEST(EmbedStoreTest, FileRoundTripAndStore) {
  numkit::Rng rng(8);
  const auto path = std::filesystem::temp_directory_path() / "msnet_embed_store_test.mseb";
  const std::vector<EmbeddingSet> sets = {random_set("a", 1, 2, 3, rng),
                                          random_set("b", 1, 4, 3, rng)};
  write_file(path, sets);
  EXPECT_EQ(std::filesystem::file_size(path), serialize(sets).size());
  EmbeddingStore store;
  store.load(path);
  std::filesystem::remove(path);
  EXPECT_EQ(store.size(), 2u);
  EXPECT_TRUE(store.contains("b"));
  EXPECT_EQ(store.get("b"), sets[1]);
  EXPECT_THROW(store.get("c"), ValidationError);
  EXPECT_THROW(store.add(sets[0]), ValidationError);
  EXPECT_THROW(read_file(path), IoError);
}

tok::TokenizedDoc doc_with_ids(std::vector<int> ids) {
  tok::TokenizedDoc d;
  d.id = "toy";
  for (int id : ids) d.tokens.push_back({id, "t", 0, 0});
  return d;
}

TEST(ToyEmbedTest, DeterministicAndKeyedByTokenId) {
  const auto doc = doc_with_ids({2, 17, 5, 17, 3});
  const EmbeddingSet a = toy_embed(doc, 3, 16, 42);
  const EmbeddingSet b = toy_embed(doc, 3, 16, 42);
  EXPECT_EQ(a, b);
  EXPECT_EQ(a.doc_id, "toy");
  EXPECT_EQ(a.tokens, 5u);
  for (std::size_t l = 0; l < 3; ++l) {
    const auto v1 = a.vec(l, 1), v3 = a.vec(l, 3);
    EXPECT_TRUE(std::equal(v1.begin(), v1.end(), v3.begin()));
  }
  const auto l0 = a.vec(0, 1), l1 = a.vec(1, 1);
  EXPECT_FALSE(std::equal(l0.begin(), l0.end(), l1.begin()));
  EXPECT_NE(toy_embed(doc, 3, 16, 43), a);
}

TEST(ToyEmbedTest, UniformInUnitInterval) {
  std::vector<int> ids(100);
  for (int i = 0; i < 100; ++i) ids[i] = i;
  const EmbeddingSet s = toy_embed(doc_with_ids(ids), 1, 1000, 9);
  ASSERT_EQ(s.values.size(), 100000u);
  double sum = 0.0;
  for (float v : s.values) {
    ASSERT_GE(v, -1.0f);
    ASSERT_LE(v, 1.0f);
    sum += v;
  }
  EXPECT_NEAR(sum / s.values.size(), 0.0, 0.01);
}

}  // namespace
}  // namespace msnet::embed
