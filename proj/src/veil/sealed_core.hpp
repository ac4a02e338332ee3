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

#ifndef VEIL_SEALED_CORE_HPP_
#define VEIL_SEALED_CORE_HPP_

#include <cstdint>
#include <deque>
#include <filesystem>
#include <functional>
#include <map>
#include <mutex>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <vector>

#include "veil/core.hpp"
#include "veil/crypto.hpp"
#include "veil/envelope.hpp"
#include "veil/error.hpp"
#include "veil/fake_table.hpp"
#include "veil/node_env.hpp"
#include "veil/peer_sampling.hpp"
#include "veil/random.hpp"

namespace veil {

inline constexpr char kDefaultBuildIdentity[] = "veil-protocol-core/1";

struct CoreConfig {
  PeerId self_id;
  std::string build_identity = kDefaultBuildIdentity;
  // Accepted build digests; empty means "same build as mine".
  std::vector<std::string> allowed_digests;
  PeerSamplingConfig sampling;
  std::size_t table_capacity = PastQueryTable::kDefaultCapacity;
  std::size_t bucket_size = kDefaultBucketSize;
  Timestamp deadline{5'000};
  int real_path_retries = 1;
  Timestamp replay_window{600'000};
  Timestamp attest_timeout{5'000};
  Timestamp shuffle_timeout{5'000};
  bool periodic_shuffle = true;
  // Baseline: route every query, real and fake, through this one proxy.
  std::optional<PeerId> fixed_relay;
};

struct AttestationRecord {
  PeerId peer_id;
  std::string quote_hash;
  Timestamp verified_at{0};
  SessionKey session_key;
};

struct PendingQuery {
  QueryId query_id = 0;
  PeerId real_relay;
  std::set<PeerId> fake_relays;
  Timestamp issued_at{0};
  Timestamp deadline{0};
};

struct DispatchOutcome {
  enum class Status { kOk, kFailed };
  Status status = Status::kOk;
  std::vector<SearchResult> results;
  int k_requested = 0;
  int k_effective = 0;
  bool degraded = false;
  int retries = 0;
  Errc error_code = Errc::kInternal;
  std::string error;
};

struct CoreCounters {
  std::uint64_t forwards_handled = 0;
  std::uint64_t backend_calls = 0;
  std::uint64_t replays_dropped = 0;
  std::uint64_t decrypt_failures = 0;
  std::uint64_t unattested_dropped = 0;
  std::uint64_t malformed_dropped = 0;
  std::uint64_t fake_responses_dropped = 0;
  std::uint64_t unknown_responses = 0;
  std::uint64_t envelopes_sent = 0;
  std::uint64_t queries_dispatched = 0;
  std::uint64_t queries_completed = 0;
  std::uint64_t queries_failed = 0;
  std::uint64_t degraded = 0;
  std::uint64_t retries = 0;
  std::uint64_t attestations_ok = 0;
  std::uint64_t attestations_rejected = 0;
  std::uint64_t shuffles_completed = 0;
  std::uint64_t shuffles_timed_out = 0;
};

struct CoreStatus {
  std::size_t view_size = 0;
  std::size_t eligible_relays = 0;
  std::size_t table_size = 0;
  std::size_t pending = 0;
  std::size_t sessions = 0;
  CoreCounters counters;
};

// The protocol core that would run inside the enclave: session keys, the
// table of other users' past queries, the peer view, relay selection and
// forwarding. Its public methods are the ecall surface; NodeEnvironment is
// the ocall surface. Thread safe.
class SealedCore {
 public:
  using DispatchCallback = std::function<void(DispatchOutcome)>;

  SealedCore(CoreConfig cfg, NodeEnvironment& env, std::uint64_t seed);
  SealedCore(const SealedCore&) = delete;
  SealedCore& operator=(const SealedCore&) = delete;

  const PeerId& self_id() const noexcept { return cfg_.self_id; }
  const std::string& digest() const noexcept { return digest_; }
  const PublicKey& public_key() const noexcept { return keys_.public_key(); }

  // Fills the view from the registry and starts attesting its members.
  void bootstrap_peers(std::span<const std::string> registry);
  // Adds a peer to the view (if room) and attests it.
  void add_peer(const PeerId& peer);
  SeedReport bootstrap_seed(const std::filesystem::path& seed_file);
  void seed_queries(std::span<const std::string> queries);

  bool bootstrapped() const;

  void start_attestation(const PeerId& peer);
  void start_shuffle();

  // Sends the real query plus k fakes over k+1 distinct relays. Throws
  // Error(kNotBootstrapped) before bootstrap; other failures are reported
  // through done, which runs exactly once.
  void dispatch(std::string query_text, int k, DispatchCallback done);

  // Entry point for every frame received from the network.
  void on_frame(std::span<const std::uint8_t> frame);

  CoreStatus status() const;
  std::optional<AttestationRecord> attestation(const PeerId& peer) const;
  bool rejected(const PeerId& peer) const;
  PartialView view_snapshot() const;
  const PastQueryTable& table() const noexcept { return table_; }

 private:
  struct Outgoing {
    PeerId to;
    Bytes frame;
  };
  struct Token {
    QueryId query_id = 0;
    bool real = false;
    PeerId relay;
    Timestamp expires_at{0};
  };
  struct ActiveQuery {
    PendingQuery pending;
    std::string text;
    std::string real_token;
    std::set<PeerId> used_relays;
    int retries = 0;
    DispatchOutcome outcome;
    DispatchCallback done;
  };
  struct ShuffleInFlight {
    PeerId partner;
    Timestamp deadline{0};
    std::vector<PeerDescriptor> sent;
  };
  struct ReplayCache {
    std::set<Nonce> seen;
    std::deque<std::pair<Timestamp, Nonce>> order;
  };
  // Work produced under the lock and executed after releasing it.
  struct Effects {
    std::vector<Outgoing> sends;
    std::vector<std::pair<Timestamp, std::function<void()>>> timers;
    std::vector<std::pair<std::string, std::function<void(BackendReply)>>> searches;
    std::vector<std::function<void()>> callbacks;
    std::vector<std::string> logs;
  };

  void run(Effects& fx);
  void shuffle_tick();
  void shuffle_locked(Effects& fx);

  void handle_sealed(const Envelope& env, Effects& fx);
  void handle_attest(const Envelope& env, Effects& fx);
  void handle_forward(const PeerId& sender, const std::string& body, Effects& fx);
  void handle_response(const PeerId& sender, const std::string& body, Effects& fx);
  void handle_shuffle(const PeerId& sender, const std::string& body, bool reply,
                      Effects& fx);

  void send_sealed(const PeerId& to, MsgType type, const std::string& body,
                   Effects& fx);
  void send_forward(const PeerId& relay, const std::string& token,
                    const std::string& text, Effects& fx);
  void serve_locally(const std::string& token, const std::string& text,
                     Effects& fx);
  void deliver_response(const PeerId& relay, const std::string& token,
                        const BackendReply& reply, Effects& fx);
  void on_deadline(QueryId id, Effects& fx);
  void retry_or_fail(QueryId id, const std::string& why, Effects& fx);
  void finish(QueryId id, Effects& fx);
  void sweep_tokens(Effects& fx);
  void attest_new_peers(Effects& fx);
  void begin_attestation(const PeerId& peer, Effects& fx);
  bool digest_allowed(const std::string& digest) const;
  bool replayed(const PeerId& sender, const Nonce& nonce);
  void remember_nonce(const PeerId& sender, const Nonce& nonce);
  std::string fresh_token();

  CoreConfig cfg_;
  NodeEnvironment& env_;
  KeyPair keys_;
  std::string digest_;
  PastQueryTable table_;

  mutable std::mutex mu_;
  Rng rng_;
  PartialView view_;
  std::map<PeerId, AttestationRecord> sessions_;
  std::set<PeerId> rejected_;
  std::map<PeerId, Timestamp> attest_in_flight_;
  std::map<PeerId, ReplayCache> seen_nonces_;
  std::map<QueryId, ActiveQuery> active_;
  std::map<std::string, Token> tokens_;
  std::map<std::string, ShuffleInFlight> shuffles_;
  QueryId next_query_id_ = 1;
  bool shuffle_scheduled_ = false;
  CoreCounters counters_;
};

}  // namespace veil

#endif  // VEIL_SEALED_CORE_HPP_
