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

#ifndef VEIL_RELAY_NODE_HPP_
#define VEIL_RELAY_NODE_HPP_

#include <chrono>
#include <cstdint>
#include <deque>
#include <functional>
#include <mutex>
#include <optional>
#include <string>
#include <vector>

#include "veil/core.hpp"
#include "veil/sealed_core.hpp"
#include "veil/sensitivity.hpp"

namespace veil {

struct NodeConfig {
  CoreConfig core;
  SensitivityConfig sensitivity;
  // Overrides the adaptive decision when set (baselines, benchmarks).
  std::optional<int> forced_k;
  std::size_t recent_decisions = 50;
};

struct DecisionEntry {
  QueryId query_id = 0;
  Timestamp at{0};
  ProtectionDecision decision;
  int k_effective = 0;
  bool degraded = false;
  bool ok = false;
};

struct SubmitOutcome {
  bool ok = false;
  ProtectionDecision decision;
  std::vector<SearchResult> results;
  int k_effective = 0;
  bool degraded = false;
  int retries = 0;
  Errc error_code = Errc::kInternal;
  std::string error;
  Timestamp issued_at{0};
  Timestamp completed_at{0};
};

// The untrusted half of a node: owns the user's profile and the sensitivity
// assessment, and hands each protected query to the sealed core.
class RelayNode {
 public:
  using SubmitCallback = std::function<void(SubmitOutcome)>;

  RelayNode(NodeConfig cfg, std::vector<SensitiveTopicDictionary> dictionaries,
            NodeEnvironment& env, std::uint64_t seed);

  SealedCore& core() noexcept { return core_; }
  const SealedCore& core() const noexcept { return core_; }
  const PeerId& id() const noexcept { return core_.self_id(); }

  // Decision for text against the current profile, without submitting.
  ProtectionDecision assess(const std::string& text) const;

  // Never throws for protocol failures; done runs exactly once. Throws
  // Error(kInvalidArgument) when text has no terms.
  void submit_async(std::string text, SubmitCallback done);

  // Live mode only: blocks until the outcome arrives or wait elapses.
  SubmitOutcome submit_blocking(std::string text, std::chrono::milliseconds wait);

  std::vector<std::string> available_topics() const;
  std::vector<std::string> enabled_topics() const;
  // Throws Error(kInvalidArgument) on an unknown topic.
  void set_enabled_topics(std::vector<std::string> topics);

  std::vector<DecisionEntry> recent_decisions() const;
  std::uint64_t degraded_count() const;
  std::size_t profile_size() const;
  const NodeConfig& config() const noexcept { return cfg_; }

 private:
  void record_decision(QueryId id, const SubmitOutcome& out);

  NodeConfig cfg_;
  NodeEnvironment& env_;
  std::vector<SensitiveTopicDictionary> all_dicts_;
  SealedCore core_;

  mutable std::mutex mu_;
  std::vector<SensitiveTopicDictionary> active_dicts_;
  std::vector<std::string> enabled_;
  UserProfile profile_;
  QueryId next_id_ = 1;
  std::deque<DecisionEntry> recent_;
  std::uint64_t degraded_ = 0;
};

}  // namespace veil

#endif  // VEIL_RELAY_NODE_HPP_
