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

#include "veil/fake_table.hpp"

#include <filesystem>
#include <fstream>
#include <map>
#include <set>
#include <thread>

#include <gtest/gtest.h>

#include "veil/error.hpp"

namespace veil {
namespace {

std::filesystem::path temp_file(const std::string& name, const std::string& body) {
  auto p = std::filesystem::temp_directory_path() / name;
  std::ofstream(p) << body;
  return p;
}

TEST(PastQueryTable, RecordOnEmpty) {
  PastQueryTable t(4);
  t.record("cheap flights");
  EXPECT_EQ(t.size(), 1u);
}

TEST(PastQueryTable, FifoEviction) {
  PastQueryTable t(3);
  for (auto q : {"a", "b", "c", "d"}) t.record(q);
  EXPECT_EQ(t.size(), 3u);
  EXPECT_EQ(t.snapshot(), (std::vector<std::string>{"b", "c", "d"}));
}

TEST(PastQueryTable, RejectsBlank) {
  PastQueryTable t;
  EXPECT_THROW(t.record("  "), Error);
  EXPECT_THROW(t.record("!?"), Error);
  EXPECT_THROW(PastQueryTable(0), Error);
}

TEST(PastQueryTable, DuplicatesAllowed) {
  PastQueryTable t;
  t.record("news");
  t.record("news");
  EXPECT_EQ(t.size(), 2u);
}

TEST(SampleFakes, ZeroIsEmpty) {
  PastQueryTable t;
  t.record("a");
  Rng rng(1);
  auto s = t.sample_fakes(0, "", rng);
  EXPECT_TRUE(s.queries.empty());
  EXPECT_FALSE(s.shortfall);
}

TEST(SampleFakes, ExcludesRealQuery) {
  PastQueryTable t;
  for (auto q : {"a", "b", "c"}) t.record(q);
  Rng rng(2);
  for (int i = 0; i < 200; ++i) {
    auto s = t.sample_fakes(2, "c", rng);
    ASSERT_EQ(s.queries.size(), 2u);
    EXPECT_FALSE(s.shortfall);
    EXPECT_EQ(std::set<std::string>(s.queries.begin(), s.queries.end()),
              (std::set<std::string>{"a", "b"}));
  }
}

TEST(SampleFakes, Shortfall) {
  PastQueryTable t;
  t.record("a");
  Rng rng(3);
  auto s = t.sample_fakes(3, "", rng);
  EXPECT_EQ(s.queries, std::vector<std::string>{"a"});
  EXPECT_TRUE(s.shortfall);
  PastQueryTable empty;
  EXPECT_TRUE(empty.sample_fakes(1, "", rng).shortfall);
}

TEST(SampleFakes, Uniformity) {
  PastQueryTable t;
  for (int i = 0; i < 100; ++i) t.record("query " + std::to_string(i));
  Rng rng(4);
  std::map<std::string, int> counts;
  const int draws = 100000;
  for (int i = 0; i < draws; ++i) ++counts[t.sample_fakes(1, "", rng).queries.at(0)];
  ASSERT_EQ(counts.size(), 100u);
  double chi2 = 0;
  for (const auto& [q, c] : counts) {
    EXPECT_NEAR(c, 1000, 150) << q;
    chi2 += (c - 1000.0) * (c - 1000.0) / 1000.0;
  }
  // 99 degrees of freedom, 0.999 quantile is about 148.2.
  EXPECT_LT(chi2, 148.2);
}

TEST(SampleFakes, RealQueriesNeverReturned) {
  // Only relayed queries are recorded; the local user's marked queries are only
  // ever passed as the exclusion.
  PastQueryTable t;
  for (int i = 0; i < 30; ++i) t.record("relayed " + std::to_string(i));
  Rng rng(5);
  for (int i = 0; i < 500; ++i) {
    auto s = t.sample_fakes(7, "local marked query", rng);
    for (const auto& q : s.queries) EXPECT_EQ(q.rfind("relayed ", 0), 0u);
    EXPECT_EQ(std::set<std::string>(s.queries.begin(), s.queries.end()).size(), 7u);
  }
}

TEST(BootstrapSeed, FiftyLines) {
  std::string body;
  for (int i = 0; i < 50; ++i) body += "trend " + std::to_string(i) + "\n";
  PastQueryTable t;
  auto r = t.bootstrap_seed(temp_file("veil_seed50.txt", body));
  EXPECT_EQ(t.size(), 50u);
  EXPECT_EQ(r.recorded, 50u);
}

TEST(BootstrapSeed, BlankLinesSkipped) {
  std::string body;
  for (int i = 0; i < 53; ++i) body += (i % 17 == 5 ? "   " : "trend " + std::to_string(i)) + "\n";
  PastQueryTable t;
  auto r = t.bootstrap_seed(temp_file("veil_seed53.txt", body));
  EXPECT_EQ(t.size(), 50u);
  EXPECT_EQ(r.skipped, 3u);
}

TEST(BootstrapSeed, MissingFile) {
  PastQueryTable t;
  EXPECT_THROW(t.bootstrap_seed("/nonexistent/veil/seed.txt"), Error);
}

TEST(PastQueryTable, ConcurrentRecordAndSample) {
  PastQueryTable t(500);
  t.record("seed");
  std::vector<std::thread> threads;
  for (int w = 0; w < 4; ++w) {
    threads.emplace_back([&, w] {
      Rng rng(w);
      for (int i = 0; i < 2000; ++i) {
        if (w % 2 == 0) t.record("q" + std::to_string(w) + "-" + std::to_string(i));
        else t.sample_fakes(3, "", rng);
      }
    });
  }
  for (auto& th : threads) th.join();
  EXPECT_EQ(t.size(), 500u);
}

}  // namespace
}  // namespace veil
