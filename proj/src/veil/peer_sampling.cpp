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

#include "veil/peer_sampling.hpp"

#include <algorithm>
#include <utility>

#include "veil/error.hpp"

namespace veil {

PartialView::PartialView(PeerId self, std::size_t view_size)
    : self_(std::move(self)), view_size_(view_size) {
  if (view_size_ == 0)
    throw Error(Errc::kInvalidArgument, "view_size must be positive");
}

PartialView PartialView::bootstrap(PeerId self,
                                   std::span<const std::string> registry,
                                   std::size_t view_size, Rng& rng,
                                   Timestamp now) {
  std::vector<std::string> candidates;
  for (const auto& addr : registry) {
    if (addr.empty() || addr == self) continue;
    if (std::find(candidates.begin(), candidates.end(), addr) ==
        candidates.end())
      candidates.push_back(addr);
  }
  if (candidates.empty())
    throw Error(Errc::kNoPeers, "registry lists no peer other than self");
  std::shuffle(candidates.begin(), candidates.end(), rng);
  PartialView view(std::move(self), view_size);
  for (auto& addr : candidates) {
    if (view.size() == view_size) break;
    PeerDescriptor p;
    p.peer_id = addr;
    p.address = addr;
    p.last_seen = now;
    view.peers_.push_back(std::move(p));
  }
  return view;
}

const PeerDescriptor* PartialView::find(const PeerId& id) const {
  auto it = std::find_if(peers_.begin(), peers_.end(),
                         [&](const PeerDescriptor& p) { return p.peer_id == id; });
  return it == peers_.end() ? nullptr : &*it;
}

PeerDescriptor* PartialView::find_mut(const PeerId& id) {
  return const_cast<PeerDescriptor*>(std::as_const(*this).find(id));
}

bool PartialView::insert(PeerDescriptor peer) {
  if (peer.peer_id == self_ || contains(peer.peer_id) ||
      peers_.size() >= view_size_)
    return false;
  peers_.push_back(std::move(peer));
  return true;
}

void PartialView::set_attested(const PeerId& id, bool attested) {
  if (auto* p = find_mut(id)) p->attested = attested;
}

void PartialView::mark_alive(const PeerId& id, Timestamp now) {
  if (auto* p = find_mut(id)) p->last_seen = std::max(p->last_seen, now);
}

void PartialView::reinstate(const PeerId& id) {
  if (auto* p = find_mut(id)) p->blacklisted_until.reset();
}

void PartialView::blacklist(const PeerId& id, Timestamp now,
                            const PeerSamplingConfig& cfg) {
  auto* p = find_mut(id);
  if (!p) return;
  int exponent = std::min(p->offenses, cfg.max_backoff_exponent);
  p->blacklisted_until = now + cfg.blacklist_base * (1LL << exponent);
  ++p->offenses;
}

std::vector<PeerDescriptor> PartialView::shuffle_subset(
    Rng& rng, Timestamp now, const std::string& self_address) const {
  std::vector<PeerDescriptor> pool = peers_;
  std::shuffle(pool.begin(), pool.end(), rng);
  pool.resize((pool.size() + 1) / 2);
  PeerDescriptor me;
  me.peer_id = self_;
  me.address = self_address;
  me.last_seen = now;
  pool.push_back(std::move(me));
  // Receivers form their own opinion on attestation and liveness.
  for (auto& p : pool) {
    p.attested = false;
    p.blacklisted_until.reset();
    p.offenses = 0;
  }
  return pool;
}

void PartialView::merge(std::span<const PeerDescriptor> received, Rng& rng,
                        std::span<const PeerDescriptor> sent) {
  for (const auto& r : received) {
    if (r.peer_id == self_ || r.peer_id.empty()) continue;
    if (auto* known = find_mut(r.peer_id)) {
      if (r.last_seen > known->last_seen) {
        known->last_seen = r.last_seen;
        known->address = r.address;
      }
      continue;
    }
    PeerDescriptor fresh;
    fresh.peer_id = r.peer_id;
    fresh.address = r.address;
    fresh.last_seen = r.last_seen;
    peers_.push_back(std::move(fresh));
  }
  auto evict = [&](std::size_t i) {
    peers_[i] = std::move(peers_.back());
    peers_.pop_back();
  };
  // Swap policy: the partner now holds what we sent, so dropping those
  // entries first keeps every link alive somewhere in the overlay.
  std::vector<PeerId> handed_over;
  for (const auto& s : sent)
    if (s.peer_id != self_) handed_over.push_back(s.peer_id);
  std::shuffle(handed_over.begin(), handed_over.end(), rng);
  for (const auto& id : handed_over) {
    if (peers_.size() <= view_size_) break;
    auto it = std::find_if(peers_.begin(), peers_.end(),
                           [&](const PeerDescriptor& p) { return p.peer_id == id; });
    if (it != peers_.end()) evict(static_cast<std::size_t>(it - peers_.begin()));
  }
  while (peers_.size() > view_size_) evict(uniform_index(rng, peers_.size()));
}

std::size_t PartialView::eligible_count(Timestamp now) const {
  return static_cast<std::size_t>(
      std::count_if(peers_.begin(), peers_.end(),
                    [&](const PeerDescriptor& p) { return p.eligible(now); }));
}

RelaySample PartialView::sample_relays(std::size_t count, Timestamp now,
                                       Rng& rng) const {
  if (count == 0)
    throw Error(Errc::kInvalidArgument, "relay count must be at least 1");
  std::vector<const PeerDescriptor*> eligible;
  for (const auto& p : peers_)
    if (p.eligible(now)) eligible.push_back(&p);
  if (eligible.empty())
    throw Error(Errc::kNoPeers, "no attested, non-blacklisted peer in view");
  RelaySample out;
  const std::size_t take = std::min(count, eligible.size());
  // Partial Fisher-Yates.
  for (std::size_t i = 0; i < take; ++i) {
    std::size_t j = i + uniform_index(rng, eligible.size() - i);
    std::swap(eligible[i], eligible[j]);
    out.peers.push_back(*eligible[i]);
  }
  out.shortfall = take < count;
  return out;
}

std::optional<PeerDescriptor> PartialView::pick_shuffle_partner(
    Timestamp now, Rng& rng) const {
  std::vector<const PeerDescriptor*> eligible;
  for (const auto& p : peers_)
    if (p.eligible(now)) eligible.push_back(&p);
  if (eligible.empty()) return std::nullopt;
  return *eligible[uniform_index(rng, eligible.size())];
}

ShuffleOutcome shuffle_exchange(PartialView& local, const PeerDescriptor& partner,
                                const ShuffleChannel& channel, Timestamp now,
                                Rng& rng, const PeerSamplingConfig& cfg) {
  auto outgoing = local.shuffle_subset(rng, now, local.self_id());
  auto reply = channel(partner, outgoing);
  if (!reply) {
    local.blacklist(partner.peer_id, now, cfg);
    return ShuffleOutcome::kTimedOut;
  }
  local.mark_alive(partner.peer_id, now);
  local.merge(*reply, rng, outgoing);
  return ShuffleOutcome::kMerged;
}

}  // namespace veil
