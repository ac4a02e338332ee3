// Copyright 2026 The Veil Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "veil/core.hpp"

#include <random>

#include <gtest/gtest.h>

#include "veil/error.hpp"

namespace veil {
namespace {

using Terms = std::vector<std::string>;

TEST(Normalize, SplitsAndLowercases) {
  EXPECT_EQ(normalize("Heart Attack symptoms"), (Terms{"attack", "heart", "symptoms"}));
}

TEST(Normalize, EmptyInput) { EXPECT_TRUE(normalize("").empty()); }

TEST(Normalize, DedupAndPunctuation) {
  EXPECT_EQ(normalize("heart-attack, HEART!"), (Terms{"attack", "heart"}));
}

TEST(Normalize, KeepsDigitsAndUtf8Bytes) {
  EXPECT_EQ(normalize("iPhone 15 café"), (Terms{"15", "café", "iphone"}));
  EXPECT_TRUE(normalize(" \t--!! ").empty());
}

TEST(Normalize, IdempotentOnRandomText) {
  std::mt19937 rng(11);
  const std::string alphabet = "abcXYZ019 -_,.!?\t\xc3\xa9";
  for (int i = 0; i < 2000; ++i) {
    std::string s;
    for (int n = rng() % 40; n > 0; --n) s.push_back(alphabet[rng() % alphabet.size()]);
    auto once = normalize(s);
    TermVector tv(s);
    EXPECT_EQ(normalize(tv.joined()), once) << s;
    for (const auto& t : once) EXPECT_FALSE(t.empty());
    EXPECT_TRUE(std::is_sorted(once.begin(), once.end()));
    EXPECT_EQ(std::adjacent_find(once.begin(), once.end()), once.end());
  }
}

TEST(TermVector, NormIsSqrtOfSupport) {
  TermVector v("a b c d");
  EXPECT_DOUBLE_EQ(v.norm(), 2.0);
  EXPECT_DOUBLE_EQ(TermVector().norm(), 0.0);
}

TEST(TermVector, InitializerListNormalizes) {
  TermVector v{"Heart", "heart", "ATTACK"};
  EXPECT_EQ(v.support(), (Terms{"attack", "heart"}));
  EXPECT_TRUE(v.contains("heart"));
  EXPECT_FALSE(v.contains("Heart"));
}

TEST(Cosine, Examples) {
  TermVector a("heart attack symptoms");
  EXPECT_DOUBLE_EQ(cosine(a, a), 1.0);
  EXPECT_NEAR(cosine(a, TermVector("heart attack treatment")), 2.0 / 3.0, 1e-15);
  EXPECT_EQ(cosine(TermVector("a"), TermVector()), 0.0);
  EXPECT_EQ(cosine(TermVector(), TermVector()), 0.0);
}

TEST(Cosine, SymmetricBoundedAndSelfOne) {
  std::mt19937 rng(5);
  auto random_vec = [&] {
    std::vector<std::string> terms;
    for (int n = rng() % 8; n > 0; --n) terms.push_back("t" + std::to_string(rng() % 12));
    return TermVector::from_terms(terms);
  };
  for (int i = 0; i < 5000; ++i) {
    auto a = random_vec(), b = random_vec();
    double ab = cosine(a, b);
    EXPECT_EQ(ab, cosine(b, a));
    EXPECT_GE(ab, 0.0);
    EXPECT_LE(ab, 1.0 + 1e-15);
    if (!a.empty()) EXPECT_NEAR(cosine(a, a), 1.0, 1e-15);
    // Independent count of shared terms.
    std::size_t shared = 0;
    for (const auto& t : a.support()) shared += b.contains(t);
    EXPECT_EQ(intersection_size(a, b), shared);
  }
}

TEST(QueryRecord, TermsMatchRawText) {
  auto r = QueryRecord::make(7, "Cheap Flights, Paris!", Timestamp(5), Origin::kFake);
  EXPECT_EQ(r.terms, TermVector("cheap flights paris"));
  EXPECT_EQ(r.origin, Origin::kFake);
  EXPECT_EQ(r.id, 7u);
}

TEST(UserProfile, KeepsQueriesSortedByTime) {
  UserProfile p("alice");
  p.add(QueryRecord::make(1, "b", Timestamp(20)));
  p.add(QueryRecord::make(2, "a", Timestamp(10)));
  p.add(QueryRecord::make(3, "c", Timestamp(20)));
  p.add(QueryRecord::make(4, "d", Timestamp(15)));
  ASSERT_EQ(p.size(), 4u);
  std::vector<QueryId> ids;
  for (const auto& q : p.past_queries()) ids.push_back(q.id);
  // Equal timestamps keep insertion order.
  EXPECT_EQ(ids, (std::vector<QueryId>{2, 4, 1, 3}));
}

TEST(SensitiveTopicDictionary, NormalizesEntries) {
  SensitiveTopicDictionary d("health", {"Heart Attack", "diabetes", "DIABETES"});
  EXPECT_EQ(d.terms(), (Terms{"attack", "diabetes", "heart"}));
  EXPECT_TRUE(d.contains("diabetes"));
  EXPECT_FALSE(d.contains("election"));
}

TEST(SensitiveTopicDictionary, RejectsEmpty) {
  EXPECT_THROW(SensitiveTopicDictionary("health", {"  ", "!!"}), Error);
  EXPECT_THROW(SensitiveTopicDictionary("", {"cancer"}), Error);
}

TEST(SearchResult, ContiguousRanks) {
  EXPECT_TRUE(ranks_are_contiguous({}));
  EXPECT_TRUE(ranks_are_contiguous({{"u1", "", 1}, {"u2", "", 2}}));
  EXPECT_FALSE(ranks_are_contiguous({{"u1", "", 1}, {"u2", "", 3}}));
  EXPECT_FALSE(ranks_are_contiguous({{"u1", "", 2}}));
}

}  // namespace
}  // namespace veil
