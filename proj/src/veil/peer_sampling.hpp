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

#ifndef VEIL_PEER_SAMPLING_HPP_
#define VEIL_PEER_SAMPLING_HPP_

#include <cstddef>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "veil/core.hpp"
#include "veil/random.hpp"

namespace veil {

struct PeerDescriptor {
  PeerId peer_id;
  std::string address;
  bool attested = false;
  Timestamp last_seen{0};
  std::optional<Timestamp> blacklisted_until;
  int offenses = 0;

  bool blacklisted(Timestamp now) const {
    return blacklisted_until && now < *blacklisted_until;
  }
  bool eligible(Timestamp now) const { return attested && !blacklisted(now); }
};

struct PeerSamplingConfig {
  std::size_t view_size = 20;
  Timestamp shuffle_period{10'000};
  Timestamp blacklist_base{60'000};
  // Blacklist duration doubles per repeat offense up to base * 2^cap.
  int max_backoff_exponent = 6;
};

struct RelaySample {
  std::vector<PeerDescriptor> peers;
  bool shortfall = false;
};

// Random partial view of the overlay. Never holds self, never exceeds
// view_size. Not synchronized; owners serialize access.
class PartialView {
 public:
  PartialView(PeerId self, std::size_t view_size);

  // Up to view_size uniform registry entries, self and duplicates excluded.
  // Registry entries are addresses, which double as peer ids. Throws
  // Error(kNoPeers) when nothing but self is listed.
  static PartialView bootstrap(PeerId self,
                               std::span<const std::string> registry,
                               std::size_t view_size, Rng& rng,
                               Timestamp now = Timestamp{0});

  const PeerId& self_id() const noexcept { return self_; }
  std::size_t view_size() const noexcept { return view_size_; }
  std::size_t size() const noexcept { return peers_.size(); }
  bool empty() const noexcept { return peers_.empty(); }
  const std::vector<PeerDescriptor>& peers() const noexcept { return peers_; }

  const PeerDescriptor* find(const PeerId& id) const;
  bool contains(const PeerId& id) const { return find(id) != nullptr; }

  // Adds a peer when there is room and it is neither self nor present.
  bool insert(PeerDescriptor peer);
  void set_attested(const PeerId& id, bool attested);
  void mark_alive(const PeerId& id, Timestamp now);
  // Lifts an active blacklist; the offense count keeps its backoff history.
  void reinstate(const PeerId& id);
  // Starts or extends the blacklist timer with exponential backoff.
  void blacklist(const PeerId& id, Timestamp now,
                 const PeerSamplingConfig& cfg = {});

  // Uniform random half of the view (rounded up) plus a fresh self entry.
  std::vector<PeerDescriptor> shuffle_subset(Rng& rng, Timestamp now,
                                             const std::string& self_address) const;

  // Merge entries received from a partner. Duplicates collapse by peer id with
  // the freshest last_seen winning; local attestation and blacklist state is
  // kept for known peers. Overflow is trimmed uniformly at random.
  // Entries listed in sent (just shipped to the partner) are evicted first.
  void merge(std::span<const PeerDescriptor> received, Rng& rng,
             std::span<const PeerDescriptor> sent = {});

  // count distinct eligible (attested, not blacklisted) peers, uniformly
  // without replacement. Throws Error(kNoPeers) if none is eligible; sets
  // shortfall when fewer than count are.
  RelaySample sample_relays(std::size_t count, Timestamp now, Rng& rng) const;

  std::size_t eligible_count(Timestamp now) const;

  // Random eligible peer to shuffle with, if any.
  std::optional<PeerDescriptor> pick_shuffle_partner(Timestamp now,
                                                     Rng& rng) const;

 private:
  PeerDescriptor* find_mut(const PeerId& id);

  PeerId self_;
  std::size_t view_size_;
  std::vector<PeerDescriptor> peers_;
};

// Synchronous channel: delivers outgoing to partner and returns its reply, or
// nullopt on timeout.
using ShuffleChannel = std::function<std::optional<std::vector<PeerDescriptor>>(
    const PeerDescriptor& partner, const std::vector<PeerDescriptor>& outgoing)>;

enum class ShuffleOutcome { kMerged, kTimedOut };

// One active shuffle round: send half the view plus self, merge the reply.
// On timeout the partner is blacklisted and the view is otherwise unchanged.
ShuffleOutcome shuffle_exchange(PartialView& local, const PeerDescriptor& partner,
                                const ShuffleChannel& channel, Timestamp now,
                                Rng& rng, const PeerSamplingConfig& cfg = {});

}  // namespace veil

#endif  // VEIL_PEER_SAMPLING_HPP_
