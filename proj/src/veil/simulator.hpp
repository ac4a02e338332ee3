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

#ifndef VEIL_SIMULATOR_HPP_
#define VEIL_SIMULATOR_HPP_

#include <cstdint>
#include <filesystem>
#include <functional>
#include <map>
#include <optional>
#include <queue>
#include <string>
#include <vector>

#include "veil/backend.hpp"
#include "veil/evaluation.hpp"
#include "veil/sensitivity.hpp"

namespace veil {

// Single logical clock and an ordered event queue. Equal times run in
// scheduling order.
class EventLoop {
 public:
  Timestamp now() const noexcept { return now_; }
  void schedule(Timestamp at, std::function<void()> fn);
  // Runs events up to and including until. Returns the number run.
  std::size_t run_until(Timestamp until);
  std::size_t pending() const noexcept { return queue_.size(); }

 private:
  struct Event {
    Timestamp at;
    std::uint64_t seq;
    std::function<void()> fn;
  };
  struct Later {
    bool operator()(const Event& a, const Event& b) const {
      return a.at != b.at ? a.at > b.at : a.seq > b.seq;
    }
  };
  Timestamp now_{0};
  std::uint64_t seq_ = 0;
  std::priority_queue<Event, std::vector<Event>, Later> queue_;
};

struct LatencyModel {
  double hop_base_ms = 20.0;
  double hop_jitter_ms = 10.0;  // uniform in [-jitter, +jitter]
  double backend_ms = 5.0;
  double backend_jitter_ms = 0.0;
};

enum class Topology { kPeerToPeer, kSingleProxy };

struct SimConfig {
  std::size_t node_count = 20;
  // Users are spread round-robin over nodes; 0 means one user per node.
  std::size_t users = 0;
  LatencyModel latency;
  Topology topology = Topology::kPeerToPeer;

  // Workload: synthetic Poisson arrivals, or a replayed log.
  std::optional<std::filesystem::path> log_path;
  LogFormat log_format = LogFormat::kSimpleCsv;
  double queries_per_hour = 31.23;
  double duration_hours = 1.0;
  std::size_t max_queries = 0;  // 0 = no cap
  double sensitive_fraction = 0.15;
  double vocabulary_overlap = 0.5;

  // Unset means the adaptive decision.
  std::optional<int> forced_k;
  SensitivityConfig sensitivity;
  std::optional<std::filesystem::path> dict_dir;  // built-in lists when unset

  RateLimiterConfig limiter;
  std::size_t view_size = 20;
  Timestamp shuffle_period{10'000};
  bool shuffles = true;
  Timestamp deadline{5'000};
  std::size_t table_capacity = 10'000;
  std::size_t seed_queries = 200;
  std::size_t corpus_documents = 2'000;
  std::optional<std::filesystem::path> corpus_path;
  Timestamp warmup{2'000};
  std::uint64_t seed = 1;

  // Throws Error(kInvalidArgument).
  void validate() const;
};

// Parses the JSON form of SimConfig; unknown keys throw Error(kParse).
SimConfig parse_sim_config(const std::string& json_text,
                           const std::filesystem::path& base_dir = {});

struct LatencySummary {
  std::size_t count = 0;
  double mean_ms = 0, median_ms = 0, p90_ms = 0, p99_ms = 0, max_ms = 0;
  std::vector<std::pair<double, double>> cdf;  // (latency ms, P(L <= latency))
};

LatencySummary summarize_latencies(std::vector<double> ms);

struct SimReport {
  std::size_t nodes = 0;
  std::size_t users = 0;
  std::string topology;
  double workload_hours = 0;
  std::size_t queries_submitted = 0;
  std::size_t queries_completed = 0;
  std::size_t queries_failed = 0;
  std::size_t degraded = 0;
  LatencySummary latency;

  std::map<std::string, std::uint64_t> backend_calls_by_node;
  std::uint64_t backend_calls = 0;
  double mean_node_rate_per_hour = 0;
  double max_node_rate_per_hour = 0;
  double load_ratio = 0;  // max / mean over all nodes
  double closed_form_rate_per_hour = 0;  // U * qph * (mean k + 1) / N
  std::size_t blocked_nodes = 0;

  // Conservation: backend calls == sum(k_effective + 1) + retries.
  std::uint64_t sum_k_requested = 0;
  std::uint64_t shortfall = 0;
  std::uint64_t retries = 0;
  bool conservation_holds = false;

  double mean_k = 0;
  std::map<int, std::size_t> k_histogram;
  double min_correctness = 1.0, min_completeness = 1.0;
  double mean_correctness = 1.0, mean_completeness = 1.0;

  std::uint64_t replays_dropped = 0;
  std::uint64_t unattested_dropped = 0;
  std::vector<std::string> host_log;  // every line a node passed to its host
  std::vector<std::string> relayed_queries;  // for leak checks in tests

  std::string to_json(bool include_logs = false) const;
};

SimReport run_simulation(const SimConfig& cfg);

// Smallest node count whose closed-form per-node rate stays at or below
// the threshold for users at queries_per_hour with k fakes per query.
std::size_t min_nodes_without_blocking(std::size_t users, double queries_per_hour,
                                       double mean_k, std::uint64_t threshold);

// Built-in sensitive-topic lists used when no dictionary directory is given.
std::vector<SensitiveTopicDictionary> builtin_dictionaries();

}  // namespace veil

#endif  // VEIL_SIMULATOR_HPP_
