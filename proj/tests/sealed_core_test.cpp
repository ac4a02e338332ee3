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

#include "veil/sealed_core.hpp"

#include <gtest/gtest.h>

#include "test_net.hpp"

namespace veil {
namespace {

using testing::TestNet;

struct Cluster {
  explicit Cluster(int n, CoreConfig base = {}) : net(testing::tiny_corpus()) {
    for (int i = 0; i < n; ++i) ids.push_back("n" + std::to_string(i));
    for (const auto& id : ids) {
      auto& c = net.add(id, base);
      auto seeds = testing::seed_list();
      c.seed_queries(seeds);
    }
    for (const auto& id : ids) net.core(id).bootstrap_peers(ids);
    net.run_for(Timestamp(1'000));
  }

  DispatchOutcome submit(const PeerId& from, const std::string& q, int k) {
    std::optional<DispatchOutcome> got;
    net.core(from).dispatch(q, k, [&](DispatchOutcome o) { got = std::move(o); });
    for (int i = 0; i < 200 && !got; ++i) net.run_for(Timestamp(100));
    EXPECT_TRUE(got.has_value());
    return got.value_or(DispatchOutcome{});
  }

  std::vector<std::string> ids;
  TestNet net;
};

std::vector<PeerId> forward_targets(const TestNet& net, const PeerId& from, std::size_t since) {
  std::vector<PeerId> out;
  for (std::size_t i = since; i < net.wire.size(); ++i)
    if (net.wire[i].from == from && net.wire[i].env.msg_type == MsgType::kQueryForward)
      out.push_back(net.wire[i].to);
  return out;
}

TEST(Attestation, MatchingDigestYieldsSession) {
  Cluster c(4);
  auto& a = c.net.core("n0");
  for (const auto& peer : {"n1", "n2", "n3"}) {
    auto rec = a.attestation(peer);
    ASSERT_TRUE(rec) << peer;
    EXPECT_EQ(rec->quote_hash, c.net.core(peer).digest());
    EXPECT_NE(rec->session_key, SessionKey());
  }
  EXPECT_EQ(a.status().sessions, 3u);
  EXPECT_EQ(a.status().eligible_relays, 3u);
  EXPECT_FALSE(a.attestation("n0"));
}

TEST(Attestation, MismatchedDigestRejected) {
  TestNet net(testing::tiny_corpus());
  std::vector<std::string> ids = {"a", "b", "c", "evil"};
  for (const auto& id : ids) {
    CoreConfig cfg;
    if (id == "evil") cfg.build_identity = "patched-core";
    auto& core = net.add(id, cfg);
    auto seeds = testing::seed_list();
    core.seed_queries(seeds);
  }
  for (const auto& id : ids) net.core(id).bootstrap_peers(ids);
  net.run_for(Timestamp(1'000));
  auto& a = net.core("a");
  EXPECT_TRUE(a.rejected("evil"));
  EXPECT_FALSE(a.attestation("evil"));
  EXPECT_EQ(a.status().eligible_relays, 2u);

  for (int i = 0; i < 50; ++i) {
    std::optional<DispatchOutcome> got;
    a.dispatch("diabetes diet", 2, [&](DispatchOutcome o) { got = o; });
    net.run_for(Timestamp(500));
    ASSERT_TRUE(got);
  }
  EXPECT_EQ(net.core("evil").status().counters.forwards_handled, 0u);
  for (const auto& w : net.wire)
    if (w.to == "evil") EXPECT_FALSE(is_sealed(w.env.msg_type));
}

TEST(Attestation, AllowListAdmitsOtherBuild) {
  TestNet net(testing::tiny_corpus());
  CoreConfig open;
  open.allowed_digests = {build_digest(kDefaultBuildIdentity), build_digest("core-2")};
  auto& a = net.add("a", open);
  CoreConfig other;
  other.build_identity = "core-2";
  other.allowed_digests = open.allowed_digests;
  net.add("b", other);
  std::vector<std::string> ids = {"a", "b"};
  a.bootstrap_peers(ids);
  net.core("b").bootstrap_peers(ids);
  net.run_for(Timestamp(1'000));
  EXPECT_TRUE(a.attestation("b"));
  EXPECT_TRUE(net.core("b").attestation("a"));
}

TEST(Attestation, HandshakeTimeoutBlacklists) {
  TestNet net(testing::tiny_corpus());
  auto& a = net.add("a");
  net.add("b");
  net.down.insert("ghost");
  std::vector<std::string> ids = {"a", "b", "ghost"};
  a.bootstrap_peers(ids);
  net.core("b").bootstrap_peers(std::vector<std::string>{"a"});
  net.run_for(Timestamp(5'500));
  auto view = a.view_snapshot();
  ASSERT_TRUE(view.find("ghost"));
  EXPECT_TRUE(view.find("ghost")->blacklisted(net.loop.now()));
  EXPECT_FALSE(view.find("b")->blacklisted(net.loop.now()));
  EXPECT_FALSE(a.attestation("ghost"));
}

TEST(Dispatch, NotBootstrappedThrows) {
  TestNet net(testing::tiny_corpus());
  auto& a = net.add("a");
  EXPECT_FALSE(a.bootstrapped());
  EXPECT_THROW(a.dispatch("x", 0, [](DispatchOutcome) {}), Error);
}

TEST(Dispatch, KZeroSendsOneEnvelope) {
  Cluster c(5);
  auto since = c.net.wire.size();
  auto out = c.submit("n0", "diabetes diet", 0);
  EXPECT_EQ(out.status, DispatchOutcome::Status::kOk);
  EXPECT_EQ(forward_targets(c.net, "n0", since).size(), 1u);
  EXPECT_EQ(out.results, c.net.engine->corpus().search(TermVector("diabetes diet")));
  EXPECT_EQ(out.k_effective, 0);
}

TEST(Dispatch, KThreeUsesFourDistinctRelays) {
  Cluster c(6);
  auto since = c.net.wire.size();
  auto out = c.submit("n0", "cheap flights paris", 3);
  ASSERT_EQ(out.status, DispatchOutcome::Status::kOk) << out.error;
  auto targets = forward_targets(c.net, "n0", since);
  ASSERT_EQ(targets.size(), 4u);
  EXPECT_EQ(std::set<PeerId>(targets.begin(), targets.end()).size(), 4u);
  EXPECT_EQ(out.results, c.net.engine->corpus().search(TermVector("cheap flights paris")));
  EXPECT_EQ(out.k_effective, 3);
  EXPECT_FALSE(out.degraded);
  c.net.run_for(Timestamp(1'000));
  EXPECT_EQ(c.net.core("n0").status().counters.fake_responses_dropped, 3u);
  EXPECT_EQ(c.net.core("n0").status().pending, 0u);
}

TEST(Dispatch, ForwardsAreSameLength) {
  Cluster c(9);
  auto since = c.net.wire.size();
  c.submit("n0", "diabetes diet", 7);
  std::set<std::size_t> sizes;
  for (std::size_t i = since; i < c.net.wire.size(); ++i)
    if (c.net.wire[i].env.msg_type == MsgType::kQueryForward)
      sizes.insert(c.net.wire[i].env.sealed_payload.size());
  EXPECT_EQ(sizes.size(), 1u);
}

TEST(Dispatch, RelayRecordsForwardedQueriesOnly) {
  Cluster c(3);
  c.submit("n0", "heart attack signs", 1);
  EXPECT_FALSE(c.net.core("n0").table().contains("heart attack signs"));
  bool recorded = c.net.core("n1").table().contains("heart attack signs") ||
                  c.net.core("n2").table().contains("heart attack signs");
  EXPECT_TRUE(recorded);
}

TEST(Dispatch, ShortfallDegrades) {
  Cluster c(3);
  auto out = c.submit("n0", "football scores", 5);
  EXPECT_EQ(out.status, DispatchOutcome::Status::kOk);
  EXPECT_EQ(out.k_requested, 5);
  EXPECT_EQ(out.k_effective, 1);
  EXPECT_TRUE(out.degraded);
  EXPECT_EQ(c.net.core("n0").status().counters.degraded, 1u);
}

TEST(Dispatch, RealPathTimesOutTwice) {
  Cluster c(8);
  c.net.hang_queries.insert("diabetes symptoms");
  auto out = c.submit("n0", "diabetes symptoms", 3);
  EXPECT_EQ(out.status, DispatchOutcome::Status::kFailed);
  EXPECT_EQ(out.error_code, Errc::kTimeout);
  EXPECT_EQ(out.retries, 1);
  auto st = c.net.core("n0").status().counters;
  EXPECT_EQ(st.fake_responses_dropped, 3u);
  EXPECT_EQ(st.queries_failed, 1u);
  // Both real relays are now blacklisted.
  auto view = c.net.core("n0").view_snapshot();
  int blacklisted = 0;
  for (const auto& p : view.peers()) blacklisted += p.blacklisted(c.net.loop.now());
  EXPECT_EQ(blacklisted, 2);
}

TEST(Dispatch, RetrySucceedsWhenFirstRelayDies) {
  Cluster c(4);
  c.net.down.insert("n1");
  c.net.down.insert("n2");
  int ok = 0;
  for (int i = 0; i < 10; ++i) {
    auto out = c.submit("n0", "python tutorial", 0);
    ok += out.status == DispatchOutcome::Status::kOk;
    if (out.status == DispatchOutcome::Status::kOk)
      EXPECT_EQ(out.results, c.net.engine->corpus().search(TermVector("python tutorial")));
  }
  EXPECT_GE(ok, 9);
}

TEST(Dispatch, BackendBlockedSurfacesError) {
  TestNet net(testing::tiny_corpus(), RateLimiterConfig{.block_threshold = 0});
  std::vector<std::string> ids = {"a", "b", "c"};
  for (const auto& id : ids) {
    auto seeds = testing::seed_list();
    net.add(id).seed_queries(seeds);
  }
  for (const auto& id : ids) net.core(id).bootstrap_peers(ids);
  net.run_for(Timestamp(1'000));
  std::optional<DispatchOutcome> got;
  net.core("a").dispatch("paris weather today", 0, [&](DispatchOutcome o) { got = o; });
  net.run_for(Timestamp(2'000));
  ASSERT_TRUE(got);
  EXPECT_EQ(got->status, DispatchOutcome::Status::kFailed);
  EXPECT_EQ(got->error_code, Errc::kBackend);
  EXPECT_EQ(got->retries, 1);
}

TEST(Dispatch, PendingQueryInvariant) {
  Cluster c(10);
  for (int k = 0; k <= 7; ++k) {
    auto since = c.net.wire.size();
    auto out = c.submit("n3", "election results", k);
    auto targets = forward_targets(c.net, "n3", since);
    EXPECT_EQ(targets.size(), std::size_t(out.k_effective) + 1);
    EXPECT_EQ(std::set<PeerId>(targets.begin(), targets.end()).size(), targets.size());
    for (const auto& t : targets) EXPECT_NE(t, "n3");
  }
}

TEST(Replay, DuplicateForwardIgnored) {
  Cluster c(3);
  auto since = c.net.wire.size();
  c.submit("n0", "pasta recipe easy", 0);
  const TestNet::Wire* fwd = nullptr;
  for (std::size_t i = since; i < c.net.wire.size(); ++i)
    if (c.net.wire[i].env.msg_type == MsgType::kQueryForward) fwd = &c.net.wire[i];
  ASSERT_NE(fwd, nullptr);
  auto& relay = c.net.core(fwd->to);
  auto calls_before = relay.status().counters.backend_calls;
  auto frame = fwd->frame;
  auto to = fwd->to;
  for (int i = 0; i < 100; ++i) c.net.deliver(to, frame);
  c.net.run_for(Timestamp(1'000));
  EXPECT_EQ(relay.status().counters.backend_calls, calls_before);
  EXPECT_EQ(relay.status().counters.replays_dropped, 100u);
}

TEST(Replay, UnattestedSenderDropped) {
  Cluster c(3);
  auto& a = c.net.core("n0");
  auto stranger = KeyPair::generate();
  auto other = KeyPair::generate();
  auto key = stranger.derive_session(other.public_key());
  auto env = seal_envelope(MsgType::kQueryForward, "stranger", key,
                           R"({"qid":"x","q":"diabetes diet","ts":0})", 256);
  a.on_frame(encode_frame(env));
  EXPECT_EQ(a.status().counters.unattested_dropped, 1u);
  EXPECT_EQ(a.status().counters.backend_calls, 0u);

  // A known peer id with the wrong key fails authentication.
  auto spoof = seal_envelope(MsgType::kQueryForward, "n1", key,
                             R"({"qid":"x","q":"diabetes diet","ts":0})", 256);
  a.on_frame(encode_frame(spoof));
  EXPECT_EQ(a.status().counters.decrypt_failures, 1u);
  EXPECT_EQ(a.status().counters.backend_calls, 0u);

  Bytes junk = {0, 0, 0, 3, 1, 2, 3};
  a.on_frame(junk);
  EXPECT_EQ(a.status().counters.malformed_dropped, 1u);
}

TEST(Shuffle, PeriodicExchangeKeepsViewsBounded) {
  CoreConfig cfg;
  cfg.sampling.view_size = 4;
  Cluster c(12, cfg);
  c.net.run_for(Timestamp(120'000));
  std::uint64_t shuffles = 0;
  for (const auto& id : c.ids) {
    auto& core = c.net.core(id);
    auto v = core.view_snapshot();
    EXPECT_LE(v.size(), 4u);
    EXPECT_FALSE(v.contains(id));
    shuffles += core.status().counters.shuffles_completed;
    // Every peer in the view has been attested or is being attested.
    EXPECT_GE(core.status().sessions, 1u);
  }
  EXPECT_GT(shuffles, 50u);
  // Shuffle traffic is sealed.
  EXPECT_GT(c.net.count(MsgType::kShuffle, "n0"), 0u);
}

TEST(Shuffle, UnresponsivePartnerBlacklisted) {
  Cluster c(3);
  c.net.down.insert("n1");
  c.net.down.insert("n2");
  c.net.run_for(Timestamp(60'000));
  auto st = c.net.core("n0").status().counters;
  EXPECT_GT(st.shuffles_timed_out, 0u);
  EXPECT_EQ(c.net.core("n0").status().eligible_relays, 0u);
}

TEST(FixedRelay, SelfServesLocally) {
  TestNet net(testing::tiny_corpus());
  CoreConfig cfg;
  cfg.fixed_relay = "solo";
  auto& solo = net.add("solo", cfg);
  auto seeds = testing::seed_list();
  solo.seed_queries(seeds);
  std::optional<DispatchOutcome> got;
  solo.dispatch("diabetes diet", 3, [&](DispatchOutcome o) { got = o; });
  net.run_for(Timestamp(1'000));
  ASSERT_TRUE(got);
  EXPECT_EQ(got->status, DispatchOutcome::Status::kOk);
  EXPECT_EQ(got->results, net.engine->corpus().search(TermVector("diabetes diet")));
  EXPECT_EQ(net.engine->calls(), 4u);
  EXPECT_TRUE(net.wire.empty());
}

}  // namespace
}  // namespace veil
