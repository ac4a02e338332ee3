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

#ifndef VEIL_BENCH_HPP_
#define VEIL_BENCH_HPP_

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace veil {

struct BenchConfig {
  std::vector<double> rates{1000, 5000, 10000};  // offered requests per second
  std::size_t requests_per_rate = 20'000;
  std::size_t trace_size = 5'000;
  std::size_t wall_clock_requests = 5'000;  // 0 skips the open-loop run
  std::uint64_t seed = 1;
};

struct BenchPoint {
  double offered_rps = 0;
  double achieved_rps = 0;
  double median_ms = 0;
  double p99_ms = 0;
};

struct BenchReport {
  std::size_t trace_size = 0;
  double mean_service_us = 0;
  double median_service_us = 0;
  double capacity_rps = 0;  // 1 / mean service time
  std::vector<BenchPoint> points;
  std::optional<double> knee_rps;  // first rate whose median exceeds 1 s
  std::vector<BenchPoint> wall_clock;  // measured open-loop runs, same rates

  bool monotone() const;
  std::string to_json() const;
};

// Wall-clock service time, in microseconds, of n requests through the relay
// path: the relay opens a forward, records it, calls a stubbed backend and
// seals the response, which the client then opens.
std::vector<double> measure_service_times(std::size_t n, std::uint64_t seed);

// Paces real requests at a fixed rate on one thread and times each from its
// scheduled arrival to completion.
BenchPoint measure_open_loop(double rate, std::size_t requests, std::uint64_t seed);

// Single-server FIFO replay of the trace under constant-rate arrivals.
BenchReport replay_trace(const std::vector<double>& service_us, const BenchConfig& cfg);

BenchReport run_throughput_bench(const BenchConfig& cfg);

}  // namespace veil

#endif  // VEIL_BENCH_HPP_
