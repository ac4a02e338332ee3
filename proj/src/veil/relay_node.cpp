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

#include "veil/relay_node.hpp"

#include <algorithm>
#include <future>
#include <memory>

#include "veil/error.hpp"

namespace veil {

RelayNode::RelayNode(NodeConfig cfg,
                     std::vector<SensitiveTopicDictionary> dictionaries,
                     NodeEnvironment& env, std::uint64_t seed)
    : cfg_(std::move(cfg)),
      env_(env),
      all_dicts_(std::move(dictionaries)),
      core_(cfg_.core, env, seed),
      profile_(cfg_.core.self_id) {
  cfg_.sensitivity.validate();
  if (cfg_.forced_k && *cfg_.forced_k < 0)
    throw Error(Errc::kInvalidArgument, "forced_k must be non-negative");
  auto topics = cfg_.sensitivity.enabled_topics;
  if (topics.empty()) topics = available_topics();
  set_enabled_topics(std::move(topics));
}

std::vector<std::string> RelayNode::available_topics() const {
  std::vector<std::string> out;
  for (const auto& d : all_dicts_) out.push_back(d.topic());
  return out;
}

std::vector<std::string> RelayNode::enabled_topics() const {
  std::lock_guard lock(mu_);
  return enabled_;
}

void RelayNode::set_enabled_topics(std::vector<std::string> topics) {
  auto known = available_topics();
  for (const auto& t : topics) {
    if (std::find(known.begin(), known.end(), t) == known.end())
      throw Error(Errc::kInvalidArgument, "unknown topic: " + t);
  }
  std::sort(topics.begin(), topics.end());
  topics.erase(std::unique(topics.begin(), topics.end()), topics.end());
  auto dicts = restrict_to_topics(all_dicts_, topics);
  std::lock_guard lock(mu_);
  enabled_ = std::move(topics);
  active_dicts_ = std::move(dicts);
}

ProtectionDecision RelayNode::assess(const std::string& text) const {
  TermVector terms(text);
  std::lock_guard lock(mu_);
  auto d = decide_k(terms, profile_, active_dicts_, cfg_.sensitivity);
  if (cfg_.forced_k) d.k = *cfg_.forced_k;
  return d;
}

void RelayNode::submit_async(std::string text, SubmitCallback done) {
  TermVector terms(text);
  if (terms.empty()) throw Error(Errc::kInvalidArgument, "query has no terms");
  const auto now = env_.now();
  ProtectionDecision decision;
  QueryId id = 0;
  {
    std::lock_guard lock(mu_);
    decision = decide_k(terms, profile_, active_dicts_, cfg_.sensitivity);
    if (cfg_.forced_k) decision.k = *cfg_.forced_k;
    id = next_id_++;
    // The profile is assessed before the query joins it.
    profile_.add(QueryRecord::make(id, text, now, Origin::kReal));
  }
  auto finish = [this, id, decision, now,
                 done = std::move(done)](DispatchOutcome d) {
    SubmitOutcome out;
    out.ok = d.status == DispatchOutcome::Status::kOk;
    out.decision = decision;
    out.results = std::move(d.results);
    out.k_effective = d.k_effective;
    out.degraded = d.degraded;
    out.retries = d.retries;
    out.error_code = out.ok ? Errc::kInternal : d.error_code;
    out.error = std::move(d.error);
    out.issued_at = now;
    out.completed_at = env_.now();
    record_decision(id, out);
    if (done) done(std::move(out));
  };
  try {
    core_.dispatch(std::move(text), decision.k, finish);
  } catch (const Error& e) {
    DispatchOutcome d;
    d.status = DispatchOutcome::Status::kFailed;
    d.k_requested = decision.k;
    d.error_code = e.code();
    d.error = e.what();
    finish(std::move(d));
  }
}

SubmitOutcome RelayNode::submit_blocking(std::string text,
                                         std::chrono::milliseconds wait) {
  auto promise = std::make_shared<std::promise<SubmitOutcome>>();
  auto future = promise->get_future();
  submit_async(std::move(text),
               [promise](SubmitOutcome out) { promise->set_value(std::move(out)); });
  if (future.wait_for(wait) != std::future_status::ready) {
    SubmitOutcome out;
    out.error_code = Errc::kTimeout;
    out.error = "no outcome before the wait elapsed";
    return out;
  }
  return future.get();
}

void RelayNode::record_decision(QueryId id, const SubmitOutcome& out) {
  std::lock_guard lock(mu_);
  if (out.degraded) ++degraded_;
  if (cfg_.recent_decisions == 0) return;
  recent_.push_back({id, out.issued_at, out.decision, out.k_effective,
                     out.degraded, out.ok});
  while (recent_.size() > cfg_.recent_decisions) recent_.pop_front();
}

std::vector<DecisionEntry> RelayNode::recent_decisions() const {
  std::lock_guard lock(mu_);
  return {recent_.begin(), recent_.end()};
}

std::uint64_t RelayNode::degraded_count() const {
  std::lock_guard lock(mu_);
  return degraded_;
}

std::size_t RelayNode::profile_size() const {
  std::lock_guard lock(mu_);
  return profile_.size();
}

}  // namespace veil
