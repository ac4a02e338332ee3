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
#include <chrono>
#include <cmath>
#include <numeric>
#include <thread>

#include <json.hpp>

#include "veil/error.hpp"
#include "veil/sealed_core.hpp"
#include "veil/synthetic.hpp"

namespace veil {

namespace {

class BenchEnvironment final : public NodeEnvironment {
 public:
  Timestamp now() override { return Timestamp(1'000'000); }
  void send(const PeerId&, Bytes frame) override { outbox.push_back(std::move(frame)); }
  void search(const std::string&, std::function<void(BackendReply)> done) override {
    // Stubbed engine: nothing leaves the process.
    BackendReply r;
    r.results = {{"https://example.org/a", "a", 1}, {"https://example.org/b", "b", 2}};
    done(std::move(r));
  }
  void schedule_at(Timestamp, std::function<void()>) override {}

  Bytes take() {
    if (outbox.empty()) throw Error(Errc::kInternal, "bench: expected a frame");
    Bytes f = std::move(outbox.front());
    outbox.erase(outbox.begin());
    return f;
  }
  std::vector<Bytes> outbox;
};

double nearest_rank(std::vector<double>& v, double p) {
  auto rank = static_cast<std::size_t>(std::ceil(p / 100.0 * static_cast<double>(v.size())));
  rank = std::clamp<std::size_t>(rank, 1, v.size());
  std::nth_element(v.begin(), v.begin() + static_cast<std::ptrdiff_t>(rank - 1), v.end());
  return v[rank - 1];
}

}  // namespace

namespace {

// One client and one relay core wired back to back with a stubbed engine.
class RelayPath {
 public:
  explicit RelayPath(std::uint64_t seed, std::size_t queries)
      : client_(client_config(), client_env_, seed), relay_(relay_config(), relay_env_, seed + 1) {
    client_.add_peer("relay");
    relay_.on_frame(client_env_.take());
    client_.on_frame(relay_env_.take());
    if (!client_.attestation("relay")) throw Error(Errc::kInternal, "bench: attestation failed");
    SyntheticLogConfig sc;
    sc.users = 20;
    sc.queries_per_user = std::max<std::size_t>((queries + 19) / 20, 1);
    sc.sensitive_fraction = 0;
    sc.seed = seed;
    for (auto& r : generate_log(sc, {}).log.records) queries_.push_back(std::move(r.query));
    client_.seed_queries(std::vector<std::string>{"warm up query"});
  }

  // Full request: client seals and dispatches, relay serves, client opens the reply.
  void serve(std::size_t i) {
    client_.dispatch(queries_[i % queries_.size()], 0, [this](DispatchOutcome o) {
      delivered_ += o.status == DispatchOutcome::Status::kOk;
    });
    relay_.on_frame(client_env_.take());
    client_.on_frame(relay_env_.take());
  }

  std::size_t delivered() const { return delivered_; }

 private:
  static CoreConfig client_config() {
    CoreConfig c;
    c.self_id = "client";
    c.fixed_relay = "relay";
    c.periodic_shuffle = false;
    return c;
  }
  static CoreConfig relay_config() {
    CoreConfig c;
    c.self_id = "relay";
    c.periodic_shuffle = false;
    return c;
  }

  BenchEnvironment client_env_, relay_env_;
  SealedCore client_, relay_;
  std::vector<std::string> queries_;
  std::size_t delivered_ = 0;
};

}  // namespace

std::vector<double> measure_service_times(std::size_t n, std::uint64_t seed) {
  if (n == 0) throw Error(Errc::kInvalidArgument, "trace size must be positive");
  RelayPath path(seed, n);
  std::vector<double> out;
  out.reserve(n);
  for (std::size_t i = 0; i < n; ++i) {
    auto t0 = std::chrono::steady_clock::now();
    path.serve(i);
    auto t1 = std::chrono::steady_clock::now();
    out.push_back(std::chrono::duration<double, std::micro>(t1 - t0).count());
  }
  if (path.delivered() != n) throw Error(Errc::kInternal, "bench: relay path lost requests");
  return out;
}

BenchPoint measure_open_loop(double rate, std::size_t requests, std::uint64_t seed) {
  if (!(rate > 0) || requests == 0)
    throw Error(Errc::kInvalidArgument, "open-loop bench needs a positive rate and count");
  using Clock = std::chrono::steady_clock;
  RelayPath path(seed, requests);
  const auto gap = std::chrono::duration<double>(1.0 / rate);
  std::vector<double> latency_ms;
  latency_ms.reserve(requests);
  const auto t0 = Clock::now();
  Clock::time_point last = t0;
  for (std::size_t i = 0; i < requests; ++i) {
    const auto arrival =
        t0 + std::chrono::duration_cast<Clock::duration>(gap * static_cast<double>(i));
    while (Clock::now() < arrival) std::this_thread::yield();
    path.serve(i);
    last = Clock::now();
    latency_ms.push_back(std::chrono::duration<double, std::milli>(last - arrival).count());
  }
  if (path.delivered() != requests)
    throw Error(Errc::kInternal, "bench: relay path lost requests");
  BenchPoint p;
  p.offered_rps = rate;
  p.achieved_rps = static_cast<double>(requests) / std::chrono::duration<double>(last - t0).count();
  p.median_ms = nearest_rank(latency_ms, 50);
  p.p99_ms = nearest_rank(latency_ms, 99);
  return p;
}

BenchReport replay_trace(const std::vector<double>& service_us, const BenchConfig& cfg) {
  if (service_us.empty()) throw Error(Errc::kInvalidArgument, "empty service trace");
  if (cfg.requests_per_rate == 0) throw Error(Errc::kInvalidArgument, "requests_per_rate must be positive");
  BenchReport rep;
  rep.trace_size = service_us.size();
  rep.mean_service_us = std::accumulate(service_us.begin(), service_us.end(), 0.0) /
                        static_cast<double>(service_us.size());
  auto copy = service_us;
  rep.median_service_us = nearest_rank(copy, 50);
  rep.capacity_rps = 1e6 / rep.mean_service_us;

  auto rates = cfg.rates;
  std::sort(rates.begin(), rates.end());
  for (double rate : rates) {
    if (!(rate > 0)) throw Error(Errc::kInvalidArgument, "rates must be positive");
    const double gap_us = 1e6 / rate;
    std::vector<double> latency_ms;
    latency_ms.reserve(cfg.requests_per_rate);
    // Waiting-time form: exact monotonicity in the rate survives rounding.
    double wait_us = 0;
    double sojourn_us = 0;
    for (std::size_t i = 0; i < cfg.requests_per_rate; ++i) {
      if (i > 0) wait_us = std::max(0.0, sojourn_us - gap_us);
      sojourn_us = wait_us + service_us[i % service_us.size()];
      latency_ms.push_back(sojourn_us / 1000.0);
    }
    const double last_finish =
        static_cast<double>(cfg.requests_per_rate - 1) * gap_us + sojourn_us;
    BenchPoint p;
    p.offered_rps = rate;
    p.achieved_rps = static_cast<double>(cfg.requests_per_rate) / (last_finish / 1e6);
    p.median_ms = nearest_rank(latency_ms, 50);
    p.p99_ms = nearest_rank(latency_ms, 99);
    rep.points.push_back(p);
    if (!rep.knee_rps && p.median_ms > 1000.0) rep.knee_rps = rate;
  }
  return rep;
}

BenchReport run_throughput_bench(const BenchConfig& cfg) {
  auto rep = replay_trace(measure_service_times(cfg.trace_size, cfg.seed), cfg);
  if (cfg.wall_clock_requests > 0) {
    auto rates = cfg.rates;
    std::sort(rates.begin(), rates.end());
    for (double rate : rates)
      rep.wall_clock.push_back(measure_open_loop(rate, cfg.wall_clock_requests, cfg.seed));
  }
  return rep;
}

bool BenchReport::monotone() const {
  for (std::size_t i = 1; i < points.size(); ++i)
    if (points[i].median_ms < points[i - 1].median_ms) return false;
  return true;
}

std::string BenchReport::to_json() const {
  nlohmann::json j;
  j["trace_size"] = trace_size;
  j["mean_service_us"] = mean_service_us;
  j["median_service_us"] = median_service_us;
  j["capacity_rps"] = capacity_rps;
  j["monotone"] = monotone();
  j["knee_rps"] = knee_rps ? nlohmann::json(*knee_rps) : nlohmann::json(nullptr);
  auto pts = nlohmann::json::array();
  for (const auto& p : points)
    pts.push_back({{"offered_rps", p.offered_rps}, {"achieved_rps", p.achieved_rps},
                   {"median_ms", p.median_ms}, {"p99_ms", p.p99_ms}});
  j["points"] = pts;
  auto wall = nlohmann::json::array();
  for (const auto& p : wall_clock)
    wall.push_back({{"offered_rps", p.offered_rps}, {"achieved_rps", p.achieved_rps},
                    {"median_ms", p.median_ms}, {"p99_ms", p.p99_ms}});
  j["wall_clock"] = wall;
  return j.dump(2);
}

}  // namespace veil
