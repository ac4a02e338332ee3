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

#include "veil/simulator.hpp"

#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>

#include <gtest/gtest.h>

#include "veil/error.hpp"

namespace veil {
namespace {

SimConfig small(std::size_t nodes, std::size_t queries) {
  SimConfig cfg;
  cfg.node_count = nodes;
  cfg.max_queries = queries;
  cfg.duration_hours = 1.0;
  cfg.corpus_documents = 500;
  return cfg;
}

TEST(EventLoop, OrdersByTimeThenInsertion) {
  EventLoop loop;
  std::vector<int> order;
  loop.schedule(Timestamp(5), [&] { order.push_back(2); });
  loop.schedule(Timestamp(1), [&] { order.push_back(1); });
  loop.schedule(Timestamp(5), [&] {
    order.push_back(3);
    loop.schedule(Timestamp(5), [&] { order.push_back(4); });
  });
  loop.schedule(Timestamp(9), [&] { order.push_back(5); });
  EXPECT_EQ(loop.run_until(Timestamp(8)), 4u);
  EXPECT_EQ(order, (std::vector<int>{1, 2, 3, 4}));
  EXPECT_EQ(loop.pending(), 1u);
}

TEST(Latency, NearestRankSummary) {
  std::vector<double> v;
  for (int i = 1; i <= 100; ++i) v.push_back(i);
  auto s = summarize_latencies(v);
  EXPECT_EQ(s.count, 100u);
  EXPECT_DOUBLE_EQ(s.median_ms, 50);
  EXPECT_DOUBLE_EQ(s.p90_ms, 90);
  EXPECT_DOUBLE_EQ(s.p99_ms, 99);
  EXPECT_DOUBLE_EQ(s.max_ms, 100);
  EXPECT_DOUBLE_EQ(s.mean_ms, 50.5);
  ASSERT_FALSE(s.cdf.empty());
  EXPECT_DOUBLE_EQ(s.cdf.back().second, 1.0);
}

TEST(Simulation, DeterministicForSeed) {
  auto cfg = small(10, 200);
  EXPECT_EQ(run_simulation(cfg).to_json(true), run_simulation(cfg).to_json(true));
  auto other = cfg;
  other.seed = 2;
  EXPECT_NE(run_simulation(cfg).to_json(), run_simulation(other).to_json());
}

TEST(Simulation, AccurateAndConserving) {
  auto rep = run_simulation(small(20, 500));
  EXPECT_EQ(rep.queries_submitted, 500u);
  EXPECT_EQ(rep.queries_completed, 500u);
  EXPECT_EQ(rep.queries_failed, 0u);
  EXPECT_EQ(rep.min_correctness, 1.0);
  EXPECT_EQ(rep.min_completeness, 1.0);
  EXPECT_TRUE(rep.conservation_holds);
  std::uint64_t total = 0;
  for (const auto& [node, calls] : rep.backend_calls_by_node) total += calls;
  EXPECT_EQ(total, rep.backend_calls);
  // One hop out, the engine, one hop back: about 45 ms.
  EXPECT_GT(rep.latency.median_ms, 25);
  EXPECT_LT(rep.latency.median_ms, 70);
  EXPECT_GT(rep.k_histogram.size(), 2u);
}

TEST(Simulation, SingleNodeServesItself) {
  auto cfg = small(1, 50);
  cfg.duration_hours = 3.0;
  auto rep = run_simulation(cfg);
  EXPECT_EQ(rep.queries_completed, 50u);
  EXPECT_EQ(rep.min_correctness, 1.0);
  EXPECT_TRUE(rep.conservation_holds);
}

TEST(Simulation, HostLogsNeverCarryRelayedText) {
  auto cfg = small(8, 300);
  cfg.deadline = Timestamp(30);  // force timeouts, retries and their log lines
  auto rep = run_simulation(cfg);
  ASSERT_FALSE(rep.relayed_queries.empty());
  ASSERT_FALSE(rep.host_log.empty());
  for (const auto& line : rep.host_log)
    for (const auto& q : rep.relayed_queries)
      ASSERT_EQ(line.find(q), std::string::npos) << line;
}

TEST(Simulation, ClosedFormRatePerNode) {
  SimConfig cfg;
  cfg.node_count = 100;
  cfg.forced_k = 3;
  cfg.corpus_documents = 500;
  auto rep = run_simulation(cfg);
  // 100 users at 31.23 queries per hour, four copies each, over 100 nodes.
  EXPECT_NEAR(rep.closed_form_rate_per_hour, 31.23 * 4, 1e-9);
  EXPECT_NEAR(rep.mean_node_rate_per_hour, rep.closed_form_rate_per_hour,
              0.05 * rep.closed_form_rate_per_hour);
  EXPECT_LE(rep.load_ratio, 2.0);
  EXPECT_EQ(rep.blocked_nodes, 0u);
}

TEST(Simulation, SingleProxyIsBlocked) {
  SimConfig cfg;
  cfg.node_count = 100;
  cfg.forced_k = 3;
  cfg.topology = Topology::kSingleProxy;
  cfg.corpus_documents = 500;
  auto rep = run_simulation(cfg);
  EXPECT_EQ(rep.blocked_nodes, 1u);
  EXPECT_GT(rep.queries_failed, 0u);
  EXPECT_GT(rep.max_node_rate_per_hour, 1000);
}

TEST(Simulation, MinNodesWithoutBlocking) {
  EXPECT_EQ(min_nodes_without_blocking(100, 31.23, 3, 1000), 13u);
  EXPECT_EQ(min_nodes_without_blocking(84, 31.23, 3, 1000), 11u);
  EXPECT_EQ(min_nodes_without_blocking(1, 10, 0, 1000), 1u);
}

TEST(SimConfig, ParsesShippedConfigs) {
  auto dir = std::filesystem::path(VEIL_SOURCE_DIR) / "configs";
  std::ifstream in(dir / "sim.json");
  std::stringstream buf;
  buf << in.rdbuf();
  auto cfg = parse_sim_config(buf.str(), dir);
  EXPECT_EQ(cfg.node_count, 100u);
  EXPECT_EQ(cfg.forced_k, 3);
  EXPECT_NO_THROW(cfg.validate());
  auto adaptive = parse_sim_config(R"({"k": "adaptive", "node_count": 5})");
  EXPECT_FALSE(adaptive.forced_k);
  EXPECT_THROW(parse_sim_config(R"({"node_count": 0})"), Error);
  EXPECT_THROW(parse_sim_config(R"({"no_such_key": 1})"), Error);
  EXPECT_THROW(parse_sim_config("[1,2]"), Error);
}

TEST(SimConfig, LogDrivenWorkload) {
  auto path = std::filesystem::temp_directory_path() / "veil_sim_log.csv";
  {
    std::ofstream out(path);
    for (int i = 0; i < 60; ++i)
      out << "u" << i % 4 << ",query number " << i << ",2006-03-01T10:" << (10 + i / 60)
          << ":" << (i % 60 < 10 ? "0" : "") << i % 60 << "Z\n";
  }
  SimConfig cfg = small(4, 0);
  cfg.log_path = path;
  auto rep = run_simulation(cfg);
  EXPECT_EQ(rep.queries_submitted, 60u);
  EXPECT_EQ(rep.queries_completed, 60u);
  EXPECT_EQ(rep.users, 4u);
}

}  // namespace
}  // namespace veil
