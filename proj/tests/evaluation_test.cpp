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

#include "veil/evaluation.hpp"

#include <cmath>
#include <sstream>

#include <gtest/gtest.h>

#include "veil/error.hpp"
#include "veil/random.hpp"
#include "veil/synthetic.hpp"

namespace veil {
namespace {

QueryLog parse(const std::string& text, LogFormat f = LogFormat::kAolTsv) {
  std::istringstream in(text);
  return parse_log(in, f);
}

UserProfile profile(const std::string& user, const std::vector<std::string>& queries) {
  UserProfile p(user);
  QueryId id = 0;
  for (const auto& q : queries) p.add(QueryRecord::make(++id, q, Timestamp(id)));
  return p;
}

QueryLog make_log(const std::vector<std::pair<std::string, std::string>>& rows) {
  QueryLog log;
  std::int64_t t = 0;
  for (const auto& [u, q] : rows) log.records.push_back({u, q, Timestamp(t += 1000)});
  return log;
}

std::vector<SensitiveTopicDictionary> dicts() {
  return {SensitiveTopicDictionary("health", {"diabetes", "cancer", "insulin", "tumor"}),
          SensitiveTopicDictionary("politics", {"election", "senate"})};
}

TEST(IngestLog, TenRowTsv) {
  std::string text = "AnonID\tQuery\tQueryTime\tItemRank\tClickURL\n";
  for (int i = 0; i < 10; ++i)
    text += std::to_string(100 + i % 3) + "\tquery " + std::to_string(i) +
            "\t2006-03-01 07:17:1" + std::to_string(i) + "\t1\thttp://x.com\n";
  auto log = parse(text);
  EXPECT_EQ(log.records.size(), 10u);
  EXPECT_EQ(log.skipped, 0u);
  EXPECT_EQ(log.records[0].user_id, "100");
  EXPECT_EQ(log.records[0].query, "query 0");
  EXPECT_EQ(log.records[0].at, *parse_timestamp("2006-03-01T07:17:10Z"));
}

TEST(IngestLog, RowMissingQuerySkipped) {
  auto log = parse("1\tfirst query\t2006-03-01 07:17:12\n2\n3\tthird\t2006-03-02 00:00:00\t\t\n");
  EXPECT_EQ(log.records.size(), 2u);
  EXPECT_EQ(log.skipped, 1u);
}

TEST(IngestLog, EmptyFileFails) {
  EXPECT_THROW(parse(""), Error);
  EXPECT_THROW(ingest_log("/nonexistent/log.tsv", LogFormat::kAolTsv), Error);
}

TEST(IngestLog, SimpleCsv) {
  auto log = parse("user_id,query,iso_timestamp\nalice,cheap flights,2006-03-01T10:00:00Z\n"
                   "bob,weather,2006-03-01T10:00:00+02:00\nbroken line\n",
                   LogFormat::kSimpleCsv);
  ASSERT_EQ(log.records.size(), 2u);
  EXPECT_EQ(log.skipped, 1u);
  EXPECT_EQ(log.records[1].at - log.records[0].at, Timestamp(-2 * 3'600'000));
  std::ostringstream out;
  write_simple_csv(log, out);
  auto again = parse(out.str(), LogFormat::kSimpleCsv);
  ASSERT_EQ(again.records.size(), 2u);
  EXPECT_EQ(again.records[1].at, log.records[1].at);
}

TEST(Timestamp, RoundTrip) {
  auto t = parse_timestamp("2006-05-31 23:59:59");
  ASSERT_TRUE(t);
  EXPECT_EQ(format_timestamp(*t), "2006-05-31T23:59:59Z");
  EXPECT_EQ(parse_timestamp("1970-01-01T00:00:01.500Z"), Timestamp(1500));
  EXPECT_FALSE(parse_timestamp("yesterday"));
  EXPECT_FALSE(parse_timestamp("2006-13-01 00:00:00"));
}

TEST(Split, NineQueries) {
  std::vector<std::pair<std::string, std::string>> rows;
  for (int i = 0; i < 9; ++i) rows.push_back({"u", "q" + std::to_string(i)});
  auto s = split_train_test(make_log(rows));
  ASSERT_EQ(s.profiles.size(), 1u);
  EXPECT_EQ(s.profiles[0].size(), 6u);
  EXPECT_EQ(s.test.size(), 3u);
  EXPECT_EQ(s.test[0].record.raw_text, "q6");
}

TEST(Split, TwoQueriesDropped) {
  auto s = split_train_test(make_log({{"u", "a"}, {"u", "b"}, {"v", "a"}, {"v", "b"}, {"v", "c"}}));
  EXPECT_EQ(s.dropped_users, 1u);
  ASSERT_EQ(s.profiles.size(), 1u);
  EXPECT_EQ(s.profiles[0].user_id(), "v");
}

TEST(Split, ChronologicalPerUser) {
  QueryLog log;
  log.records = {{"u", "late", Timestamp(900)}, {"u", "early", Timestamp(100)},
                 {"u", "mid", Timestamp(500)}};
  auto s = split_train_test(log);
  ASSERT_EQ(s.test.size(), 1u);
  EXPECT_EQ(s.test[0].record.raw_text, "late");
  EXPECT_EQ(s.profiles[0].past_queries()[0].raw_text, "early");
}

TEST(Split, PaperScaleTrainingTotal) {
  // 121 users with 732 queries and 77 with 731 give 488 and 487 training queries.
  QueryLog log;
  for (int u = 0; u < 198; ++u) {
    int n = u < 121 ? 732 : 731;
    for (int i = 0; i < n; ++i) log.records.push_back({"u" + std::to_string(u), "q", Timestamp(i)});
  }
  auto s = split_train_test(log);
  EXPECT_EQ(s.training_total, 96'547u);
  EXPECT_NEAR(double(s.training_total) / 198, 487.6, 0.05);
}

TEST(SimAttack, Examples) {
  std::vector<UserProfile> ps = {profile("alice", {"diabetes diet"}),
                                 profile("bob", {"football scores", "cheap flights"})};
  auto v = simattack(TermVector("diabetes diet"), ps, 0.5);
  EXPECT_EQ(v.user_id, "alice");
  EXPECT_DOUBLE_EQ(v.best_metric, 1.0);
  EXPECT_FALSE(simattack(TermVector("weather"), ps, 0.5).user_id);
  std::vector<UserProfile> tied = {profile("a", {"news today"}), profile("b", {"news today"})};
  EXPECT_FALSE(simattack(TermVector("news today"), tied, 0.5).user_id);
  // Exactly 0.5 is not strictly above the threshold.
  std::vector<UserProfile> half = {profile("a", {"x y z w"})};
  EXPECT_DOUBLE_EQ(simattack(TermVector("x"), half, 0.5).best_metric, 0.5);
  EXPECT_FALSE(simattack(TermVector("x"), half, 0.5).user_id);
}

TEST(SimAttack, MetricIsLinkabilityFold) {
  Rng rng(8);
  auto random_query = [&] {
    std::string q;
    for (int n = 1 + rng() % 3; n > 0; --n) q += "w" + std::to_string(rng() % 10) + " ";
    return q;
  };
  for (int i = 0; i < 2000; ++i) {
    std::vector<UserProfile> ps;
    for (int u = 0; u < 1 + int(rng() % 4); ++u) {
      std::vector<std::string> qs;
      for (int n = 1 + rng() % 6; n > 0; --n) qs.push_back(random_query());
      ps.push_back(profile("u" + std::to_string(u), qs));
    }
    TermVector q(random_query());
    double best = -1;
    int count = 0;
    std::string who;
    for (const auto& p : ps) {
      double m = linkability_score(q, p, 0.5);
      if (m > best) best = m, count = 1, who = p.user_id();
      else if (m == best) ++count;
    }
    auto v = simattack(q, ps, 0.5);
    EXPECT_EQ(v.best_metric, best);
    if (best > 0.5 && count == 1) EXPECT_EQ(v.user_id, who);
    else EXPECT_FALSE(v.user_id);
  }
}

TrainTestSplit disjoint_two_users() {
  std::vector<std::pair<std::string, std::string>> rows;
  const std::vector<std::string> a = {"diabetes diet", "insulin pump", "diabetes insulin",
                                      "diet insulin", "diabetes diet", "insulin pump"};
  const std::vector<std::string> b = {"football scores", "league table", "football league",
                                      "scores table", "football scores", "league table"};
  for (std::size_t i = 0; i < a.size(); ++i) {
    rows.push_back({"alice", a[i]});
    rows.push_back({"bob", b[i]});
  }
  return split_train_test(make_log(rows));
}

TEST(RunAttack, DisjointUsersFullyReidentified) {
  auto split = disjoint_two_users();
  AttackConfig cfg;
  cfg.mechanism = Mechanism::kNone;
  auto out = run_attack(split, cfg);
  EXPECT_EQ(out.real_queries, 4u);
  // Exhaustive oracle: every test query only matches its author's profile.
  for (const auto& tq : split.test) {
    int matches = 0;
    for (const auto& p : split.profiles) matches += linkability_score(tq.record.terms, p, 0.5) > 0.5;
    EXPECT_EQ(matches, 1);
  }
  EXPECT_DOUBLE_EQ(out.rate, 1.0);
  EXPECT_EQ(out.stream_queries, 4u);
}

TEST(RunAttack, ObfuscationLowersRateOnDisjointUsers) {
  auto split = disjoint_two_users();
  AttackConfig cfg;
  cfg.mechanism = Mechanism::kFixedK;
  cfg.sensitivity.k_max = 3;
  auto out = run_attack(split, cfg);
  EXPECT_LT(out.rate, 1.0);
  EXPECT_EQ(out.stream_queries, 4u * 4);
  EXPECT_DOUBLE_EQ(out.rate, 4.0 / 16.0);
  EXPECT_DOUBLE_EQ(out.real_rate, 1.0);
}

TEST(RunAttack, EmptyTestSetFails) {
  TrainTestSplit empty;
  EXPECT_THROW(run_attack(empty, AttackConfig{}), Error);
}

TEST(Mechanism, Names) {
  EXPECT_EQ(parse_mechanism("none"), Mechanism::kNone);
  EXPECT_EQ(parse_mechanism("adaptive"), Mechanism::kAdaptive);
  EXPECT_EQ(parse_mechanism("cyclosa"), Mechanism::kAdaptive);
  EXPECT_EQ(parse_mechanism("fixed_k"), Mechanism::kFixedK);
  EXPECT_STREQ(to_string(Mechanism::kAdaptive), "adaptive");
  EXPECT_THROW(parse_mechanism("tor"), Error);
}

TEST(RunAttack, AdaptiveNeverWorseThanNone) {
  auto d = dicts();
  for (std::uint64_t seed = 1; seed <= 20; ++seed) {
    SyntheticLogConfig sc;
    sc.users = 20;
    sc.queries_per_user = 30;
    sc.seed = seed;
    auto split = split_train_test(generate_log(sc, d).log);
    AttackConfig none;
    none.mechanism = Mechanism::kNone;
    none.dictionaries = d;
    AttackConfig adaptive = none;
    adaptive.mechanism = Mechanism::kAdaptive;
    adaptive.seed = seed;
    auto a = run_attack(split, none);
    auto b = run_attack(split, adaptive);
    EXPECT_LE(b.rate, a.rate) << "seed " << seed;
    EXPECT_GE(b.stream_queries, b.real_queries);
  }
}

TEST(RunAttack, KValuesFollowDecisions) {
  auto d = dicts();
  SyntheticLogConfig sc;
  sc.users = 15;
  sc.queries_per_user = 30;
  auto split = split_train_test(generate_log(sc, d).log);
  AttackConfig cfg;
  cfg.dictionaries = d;
  auto out = run_attack(split, cfg);
  ASSERT_EQ(out.k_values.size(), out.real_queries);
  std::size_t fakes = 0;
  for (int k : out.k_values) {
    EXPECT_GE(k, 0);
    EXPECT_LE(k, 7);
    fakes += k;
  }
  EXPECT_EQ(out.stream_queries, out.real_queries + fakes - out.fake_shortfall);
  auto cdf = out.k_cdf();
  ASSERT_EQ(cdf.size(), 8u);
  EXPECT_DOUBLE_EQ(cdf.back(), 1.0);
  EXPECT_TRUE(std::is_sorted(cdf.begin(), cdf.end()));
}

TEST(RunAttack, ScaleFreeUnderDuplication) {
  auto d = dicts();
  SyntheticLogConfig sc;
  sc.users = 15;
  sc.queries_per_user = 30;
  auto split = split_train_test(generate_log(sc, d).log);
  AttackConfig cfg;
  cfg.mechanism = Mechanism::kNone;
  auto once = run_attack(split, cfg);
  auto doubled = split;
  doubled.test.clear();
  for (const auto& tq : split.test) {
    doubled.test.push_back(tq);
    doubled.test.push_back(tq);
  }
  auto twice = run_attack(doubled, cfg);
  EXPECT_DOUBLE_EQ(once.rate, twice.rate);
  EXPECT_EQ(twice.real_queries, 2 * once.real_queries);

  auto log = generate_log(sc, d);
  auto rep1 = categorize_log(log.log, d, &log.sensitive);
  QueryLog dup;
  std::set<std::uint64_t> truth;
  for (std::size_t i = 0; i < log.log.records.size(); ++i) {
    dup.records.push_back(log.log.records[i]);
    dup.records.push_back(log.log.records[i]);
    if (log.sensitive.count(i)) truth.insert(2 * i), truth.insert(2 * i + 1);
  }
  auto rep2 = categorize_log(dup, d, &truth);
  EXPECT_DOUBLE_EQ(rep1.against_truth->precision, rep2.against_truth->precision);
  EXPECT_DOUBLE_EQ(rep1.against_truth->recall, rep2.against_truth->recall);
}

TEST(Metrics, CategorizerExamples) {
  auto pr = categorizer_metrics({1, 2}, {1, 2});
  EXPECT_EQ(pr.precision, 1.0);
  EXPECT_EQ(pr.recall, 1.0);
  pr = categorizer_metrics({1, 2}, {2, 3});
  EXPECT_DOUBLE_EQ(pr.precision, 0.5);
  EXPECT_DOUBLE_EQ(pr.recall, 0.5);
  pr = categorizer_metrics({}, {});
  EXPECT_EQ(pr.precision, 1.0);
  EXPECT_EQ(pr.recall, 1.0);
  pr = categorizer_metrics({}, {4});
  EXPECT_EQ(pr.precision, 0.0);
  EXPECT_EQ(pr.recall, 0.0);
}

TEST(Metrics, AccuracyExamples) {
  std::vector<SearchResult> orig;
  for (int i = 0; i < 9; ++i) orig.push_back({"u" + std::to_string(i), "", i + 1});
  auto same = accuracy_metrics(orig, orig);
  EXPECT_EQ(same.correctness, 1.0);
  EXPECT_EQ(same.completeness, 1.0);
  auto noisy = orig;
  noisy.push_back({"noise", "", 10});
  auto a = accuracy_metrics(orig, noisy);
  EXPECT_DOUBLE_EQ(a.correctness, 0.9);
  EXPECT_DOUBLE_EQ(a.completeness, 1.0);
  EXPECT_EQ(accuracy_metrics({}, {}).correctness, 1.0);
  EXPECT_EQ(accuracy_metrics(orig, {}).correctness, 0.0);
}

TEST(Categorize, CountsTopics) {
  auto log = make_log({{"u", "diabetes diet"}, {"u", "senate election"}, {"u", "weather"}});
  auto d = dicts();
  std::set<std::uint64_t> truth = {0, 1, 2};
  auto rep = categorize_log(log, d, &truth);
  EXPECT_EQ(rep.queries, 3u);
  EXPECT_EQ(rep.sensitive, 2u);
  EXPECT_EQ(rep.per_topic.at("health"), 1u);
  EXPECT_EQ(rep.per_topic.at("politics"), 1u);
  EXPECT_EQ(rep.detected, (std::set<std::uint64_t>{0, 1}));
  EXPECT_DOUBLE_EQ(rep.against_truth->precision, 1.0);
  EXPECT_DOUBLE_EQ(rep.against_truth->recall, 2.0 / 3.0);
}

TEST(Synthetic, DeterministicAndShaped) {
  auto d = dicts();
  SyntheticLogConfig sc;
  sc.users = 10;
  sc.queries_per_user = 40;
  sc.sensitive_fraction = 0.25;
  auto a = generate_log(sc, d);
  auto b = generate_log(sc, d);
  ASSERT_EQ(a.log.records.size(), 400u);
  for (std::size_t i = 0; i < a.log.records.size(); ++i) {
    EXPECT_EQ(a.log.records[i].query, b.log.records[i].query);
    EXPECT_EQ(a.log.records[i].at, b.log.records[i].at);
  }
  EXPECT_EQ(a.sensitive, b.sensitive);
  double frac = double(a.sensitive.size()) / a.log.records.size();
  EXPECT_NEAR(frac, 0.25, 0.06);
  // Every injected sensitive query is caught by the dictionaries, and only those.
  auto rep = categorize_log(a.log, d, &a.sensitive);
  EXPECT_DOUBLE_EQ(rep.against_truth->precision, 1.0);
  EXPECT_DOUBLE_EQ(rep.against_truth->recall, 1.0);
  EXPECT_THROW(generate_log(SyntheticLogConfig{.users = 0}, d), Error);
}

}  // namespace
}  // namespace veil
