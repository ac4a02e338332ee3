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

#include "veil/bench.hpp"

#include <algorithm>
#include <random>

#include <gtest/gtest.h>

#include "veil/error.hpp"

namespace veil {
namespace {

// Independent FIFO oracle: deterministic arrivals, per-request service times.
std::vector<double> oracle_sojourn_ms(const std::vector<double>& service_us, double rate,
                                      std::size_t n) {
  std::vector<double> out;
  double server_free = 0;
  for (std::size_t i = 0; i < n; ++i) {
    double arrival = i * 1e6 / rate;
    double begin = arrival > server_free ? arrival : server_free;
    server_free = begin + service_us[i % service_us.size()];
    out.push_back((server_free - arrival) / 1000);
  }
  std::sort(out.begin(), out.end());
  return out;
}

TEST(ReplayTrace, MatchesQueueOracle) {
  std::vector<double> service = {80, 120, 95, 300, 60, 110};
  BenchConfig cfg;
  cfg.rates = {12000, 2000, 9000};
  cfg.requests_per_rate = 999;
  auto rep = replay_trace(service, cfg);
  ASSERT_EQ(rep.points.size(), 3u);
  EXPECT_EQ(rep.points[0].offered_rps, 2000);
  for (const auto& p : rep.points) {
    auto sorted = oracle_sojourn_ms(service, p.offered_rps, 999);
    EXPECT_NEAR(p.median_ms, sorted[499], 1e-9);
    EXPECT_NEAR(p.p99_ms, sorted[989], 1e-9);
  }
  EXPECT_TRUE(rep.monotone());
  EXPECT_NEAR(rep.capacity_rps, 1e6 / (765.0 / 6), 1e-9);
}

TEST(ReplayTrace, MonotoneOnRandomTraces) {
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> us(1.0, 200.0);
  for (int trial = 0; trial < 200; ++trial) {
    std::vector<double> service(1 + rng() % 50);
    for (auto& s : service) s = us(rng);
    BenchConfig cfg;
    cfg.rates.clear();
    for (int i = 0; i < 8; ++i) cfg.rates.push_back(1 + static_cast<double>(rng() % 20000));
    cfg.requests_per_rate = 1 + rng() % 2000;
    ASSERT_TRUE(replay_trace(service, cfg).monotone()) << "trial " << trial;
  }
}

TEST(ReplayTrace, OverloadGrowsLinearly) {
  std::vector<double> service = {100};  // capacity 10,000 req/s
  BenchConfig cfg;
  cfg.rates = {5000, 20000};
  cfg.requests_per_rate = 10001;
  auto rep = replay_trace(service, cfg);
  EXPECT_NEAR(rep.points[0].median_ms, 0.1, 1e-9);
  // Waiting grows by 50 us per request: median request 5000 waits 250 ms.
  EXPECT_NEAR(rep.points[1].median_ms, 0.1 + 5000 * 0.05, 1e-6);
  EXPECT_NEAR(rep.points[1].achieved_rps, 10000, 10);
}

TEST(ReplayTrace, RejectsBadInput) {
  BenchConfig cfg;
  EXPECT_THROW(replay_trace({}, cfg), Error);
  cfg.rates = {0};
  EXPECT_THROW(replay_trace({1.0}, cfg), Error);
}

TEST(ServiceTimes, RealRelayPath) {
  auto t = measure_service_times(500, 3);
  ASSERT_EQ(t.size(), 500u);
  for (double us : t) EXPECT_GT(us, 0);
}

TEST(OpenLoop, LightLoadIsFast) {
  auto p = measure_open_loop(1000, 500, 4);
  EXPECT_LT(p.median_ms, 10.0);
  EXPECT_GT(p.achieved_rps, 900);
}

TEST(Bench, EndToEnd) {
  BenchConfig cfg;
  cfg.trace_size = 2000;
  cfg.requests_per_rate = 5000;
  cfg.wall_clock_requests = 2000;
  auto rep = run_throughput_bench(cfg);
  EXPECT_TRUE(rep.monotone());
  ASSERT_EQ(rep.wall_clock.size(), 3u);
  EXPECT_GT(rep.capacity_rps, 5000);
  EXPECT_LT(rep.points[1].median_ms, 100);
}

}  // namespace
}  // namespace veil
