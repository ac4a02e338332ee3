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

#include <algorithm>

#include <json.hpp>

namespace veil {

using json = nlohmann::json;

namespace {

json results_to_json(const std::vector<SearchResult>& results) {
  json arr = json::array();
  for (const auto& r : results)
    arr.push_back({{"url", r.url}, {"title", r.title}, {"rank", r.rank}});
  return arr;
}

std::vector<SearchResult> results_from_json(const json& arr) {
  std::vector<SearchResult> out;
  for (const auto& item : arr) {
    out.push_back({item.at("url").get<std::string>(),
                   item.value("title", ""), item.at("rank").get<int>()});
  }
  return out;
}

json peers_to_json(const std::vector<PeerDescriptor>& peers) {
  json arr = json::array();
  for (const auto& p : peers)
    arr.push_back({{"id", p.peer_id}, {"addr", p.address},
                   {"seen", p.last_seen.count()}});
  return arr;
}

std::vector<PeerDescriptor> peers_from_json(const json& arr) {
  std::vector<PeerDescriptor> out;
  for (const auto& item : arr) {
    PeerDescriptor p;
    p.peer_id = item.at("id").get<std::string>();
    p.address = item.value("addr", p.peer_id);
    p.last_seen = Timestamp(item.at("seen").get<std::int64_t>());
    out.push_back(std::move(p));
  }
  return out;
}

std::string quote_body(const std::string& digest, const PublicKey& pk) {
  return json{{"digest", digest}, {"pk", to_hex(pk)}}.dump();
}

}  // namespace

SealedCore::SealedCore(CoreConfig cfg, NodeEnvironment& env, std::uint64_t seed)
    : cfg_(std::move(cfg)),
      env_(env),
      keys_(KeyPair::generate()),
      digest_(build_digest(cfg_.build_identity)),
      table_(cfg_.table_capacity),
      rng_(seed),
      view_(cfg_.self_id, cfg_.sampling.view_size) {
  if (cfg_.self_id.empty())
    throw Error(Errc::kInvalidArgument, "node needs a self id");
  if (cfg_.bucket_size == 0)
    throw Error(Errc::kInvalidArgument, "bucket_size must be positive");
  if (cfg_.real_path_retries < 0)
    throw Error(Errc::kInvalidArgument, "retries must be non-negative");
}

void SealedCore::run(Effects& fx) {
  for (auto& line : fx.logs) env_.log(line);
  for (auto& [at, fn] : fx.timers) env_.schedule_at(at, std::move(fn));
  for (auto& out : fx.sends) env_.send(out.to, std::move(out.frame));
  for (auto& [q, cb] : fx.searches) env_.search(q, std::move(cb));
  for (auto& cb : fx.callbacks) cb();
}

// ---- bootstrap -------------------------------------------------------------

void SealedCore::bootstrap_peers(std::span<const std::string> registry) {
  Effects fx;
  {
    std::lock_guard lock(mu_);
    const auto now = env_.now();
    view_ = PartialView::bootstrap(cfg_.self_id, registry,
                                   cfg_.sampling.view_size, rng_, now);
    for (const auto& p : view_.peers()) begin_attestation(p.peer_id, fx);
    if (cfg_.periodic_shuffle && !shuffle_scheduled_) {
      shuffle_scheduled_ = true;
      const auto period = cfg_.sampling.shuffle_period.count();
      // Random phase so nodes started together do not shuffle in lockstep.
      Timestamp first = now + Timestamp(1 + static_cast<std::int64_t>(
                                                uniform_index(rng_, period)));
      fx.timers.emplace_back(first, [this] { shuffle_tick(); });
    }
    fx.logs.push_back("bootstrap: view of " + std::to_string(view_.size()) +
                      " peers");
  }
  run(fx);
}

void SealedCore::add_peer(const PeerId& peer) {
  Effects fx;
  {
    std::lock_guard lock(mu_);
    PeerDescriptor p;
    p.peer_id = peer;
    p.address = peer;
    p.last_seen = env_.now();
    view_.insert(std::move(p));
    begin_attestation(peer, fx);
  }
  run(fx);
}

SeedReport SealedCore::bootstrap_seed(const std::filesystem::path& seed_file) {
  return table_.bootstrap_seed(seed_file);
}

void SealedCore::seed_queries(std::span<const std::string> queries) {
  for (const auto& q : queries) table_.record(q);
}

bool SealedCore::bootstrapped() const {
  std::lock_guard lock(mu_);
  return table_.size() > 0 && (!view_.empty() || cfg_.fixed_relay.has_value());
}

// ---- attestation -----------------------------------------------------------

bool SealedCore::digest_allowed(const std::string& digest) const {
  if (cfg_.allowed_digests.empty()) return digest == digest_;
  return std::find(cfg_.allowed_digests.begin(), cfg_.allowed_digests.end(),
                   digest) != cfg_.allowed_digests.end();
}

void SealedCore::start_attestation(const PeerId& peer) {
  Effects fx;
  {
    std::lock_guard lock(mu_);
    begin_attestation(peer, fx);
  }
  run(fx);
}

void SealedCore::begin_attestation(const PeerId& peer, Effects& fx) {
  if (peer == cfg_.self_id) return;
  if (sessions_.count(peer)) {
    view_.set_attested(peer, true);
    return;
  }
  if (rejected_.count(peer) || attest_in_flight_.count(peer)) return;
  const auto now = env_.now();
  attest_in_flight_[peer] = now;
  auto env = plain_envelope(MsgType::kAttest, cfg_.self_id,
                            quote_body(digest_, keys_.public_key()));
  fx.sends.push_back({peer, encode_frame(env)});
  ++counters_.envelopes_sent;
  fx.timers.emplace_back(now + cfg_.attest_timeout, [this, peer, now] {
    Effects later;
    {
      std::lock_guard lock(mu_);
      auto it = attest_in_flight_.find(peer);
      if (it == attest_in_flight_.end() || it->second != now) return;
      attest_in_flight_.erase(it);
      view_.blacklist(peer, env_.now(), cfg_.sampling);
      later.logs.push_back("attestation timeout: " + peer);
    }
    run(later);
  });
}

void SealedCore::handle_attest(const Envelope& env, Effects& fx) {
  const PeerId& sender = env.sender_id;
  std::string digest;
  PublicKey pk{};
  try {
    auto j = json::parse(env.sealed_payload.begin(), env.sealed_payload.end());
    digest = j.at("digest").get<std::string>();
    auto raw = from_hex(j.at("pk").get<std::string>());
    if (!raw || raw->size() != kPublicKeySize) throw Error(Errc::kParse, "pk");
    std::copy(raw->begin(), raw->end(), pk.begin());
  } catch (const std::exception&) {
    ++counters_.malformed_dropped;
    return;
  }

  if (env.msg_type == MsgType::kAttestReply) {
    // Only replies to our own challenges count.
    if (!attest_in_flight_.erase(sender)) return;
  }
  if (!digest_allowed(digest)) {
    rejected_.insert(sender);
    sessions_.erase(sender);
    view_.set_attested(sender, false);
    ++counters_.attestations_rejected;
    fx.logs.push_back("attestation rejected: " + sender);
    return;
  }
  AttestationRecord rec;
  try {
    rec.session_key = keys_.derive_session(pk);
  } catch (const Error&) {
    ++counters_.attestations_rejected;
    rejected_.insert(sender);
    return;
  }
  rec.peer_id = sender;
  rec.quote_hash = digest;
  rec.verified_at = env_.now();
  sessions_[sender] = std::move(rec);
  rejected_.erase(sender);
  if (!view_.contains(sender)) {
    PeerDescriptor incoming;
    incoming.peer_id = sender;
    incoming.address = sender;
    incoming.last_seen = env_.now();
    view_.insert(std::move(incoming));
  }
  view_.set_attested(sender, true);
  view_.reinstate(sender);
  view_.mark_alive(sender, env_.now());
  ++counters_.attestations_ok;

  if (env.msg_type == MsgType::kAttest) {
    auto reply = plain_envelope(MsgType::kAttestReply, cfg_.self_id,
                                quote_body(digest_, keys_.public_key()));
    fx.sends.push_back({sender, encode_frame(reply)});
    ++counters_.envelopes_sent;
  }
}

std::optional<AttestationRecord> SealedCore::attestation(const PeerId& peer) const {
  std::lock_guard lock(mu_);
  auto it = sessions_.find(peer);
  if (it == sessions_.end()) return std::nullopt;
  return it->second;
}

bool SealedCore::rejected(const PeerId& peer) const {
  std::lock_guard lock(mu_);
  return rejected_.count(peer) > 0;
}

void SealedCore::attest_new_peers(Effects& fx) {
  std::vector<PeerId> ids;
  for (const auto& p : view_.peers())
    if (!p.attested) ids.push_back(p.peer_id);
  for (const auto& id : ids) begin_attestation(id, fx);
}

// ---- inbound ---------------------------------------------------------------

void SealedCore::on_frame(std::span<const std::uint8_t> frame) {
  Effects fx;
  {
    std::lock_guard lock(mu_);
    Envelope env;
    try {
      env = decode_frame(frame);
    } catch (const Error&) {
      ++counters_.malformed_dropped;
      return;
    }
    if (env.sender_id == cfg_.self_id) {
      ++counters_.malformed_dropped;
      return;
    }
    if (is_sealed(env.msg_type)) {
      handle_sealed(env, fx);
    } else {
      handle_attest(env, fx);
    }
  }
  run(fx);
}

bool SealedCore::replayed(const PeerId& sender, const Nonce& nonce) {
  auto it = seen_nonces_.find(sender);
  return it != seen_nonces_.end() && it->second.seen.count(nonce) > 0;
}

void SealedCore::remember_nonce(const PeerId& sender, const Nonce& nonce) {
  const auto now = env_.now();
  auto& cache = seen_nonces_[sender];
  cache.seen.insert(nonce);
  cache.order.emplace_back(now, nonce);
  while (!cache.order.empty() &&
         cache.order.front().first < now - cfg_.replay_window) {
    cache.seen.erase(cache.order.front().second);
    cache.order.pop_front();
  }
}

void SealedCore::handle_sealed(const Envelope& env, Effects& fx) {
  auto session = sessions_.find(env.sender_id);
  if (session == sessions_.end()) {
    ++counters_.unattested_dropped;
    return;
  }
  if (replayed(env.sender_id, env.nonce)) {
    ++counters_.replays_dropped;
    return;
  }
  auto body = open_envelope(env, session->second.session_key);
  if (!body) {
    ++counters_.decrypt_failures;
    return;
  }
  remember_nonce(env.sender_id, env.nonce);

  // Messages older than the replay window would have left the nonce cache.
  try {
    auto j = json::parse(*body);
    Timestamp sent(j.at("ts").get<std::int64_t>());
    if (sent < env_.now() - cfg_.replay_window) {
      ++counters_.replays_dropped;
      return;
    }
  } catch (const std::exception&) {
    ++counters_.malformed_dropped;
    return;
  }
  view_.mark_alive(env.sender_id, env_.now());

  switch (env.msg_type) {
    case MsgType::kQueryForward:
      handle_forward(env.sender_id, *body, fx);
      break;
    case MsgType::kQueryResponse:
      handle_response(env.sender_id, *body, fx);
      break;
    case MsgType::kShuffle:
      handle_shuffle(env.sender_id, *body, false, fx);
      break;
    case MsgType::kShuffleReply:
      handle_shuffle(env.sender_id, *body, true, fx);
      break;
    default:
      ++counters_.malformed_dropped;
  }
}

// ---- relay side ------------------------------------------------------------

void SealedCore::handle_forward(const PeerId& sender, const std::string& body,
                                Effects& fx) {
  std::string token;
  std::string text;
  try {
    auto j = json::parse(body);
    token = j.at("qid").get<std::string>();
    text = j.at("q").get<std::string>();
  } catch (const std::exception&) {
    ++counters_.malformed_dropped;
    return;
  }
  ++counters_.forwards_handled;
  try {
    table_.record(text);
  } catch (const Error&) {
    BackendReply bad;
    bad.status = BackendReply::Status::kError;
    bad.error = "empty query";
    deliver_response(sender, token, bad, fx);
    return;
  }
  ++counters_.backend_calls;
  fx.searches.emplace_back(text, [this, sender, token](BackendReply reply) {
    Effects later;
    {
      std::lock_guard lock(mu_);
      deliver_response(sender, token, reply, later);
    }
    run(later);
  });
}

void SealedCore::serve_locally(const std::string& token, const std::string& text,
                               Effects& fx) {
  // Own queries never enter the table of other users' queries.
  ++counters_.backend_calls;
  fx.searches.emplace_back(text, [this, token](BackendReply reply) {
    Effects later;
    {
      std::lock_guard lock(mu_);
      deliver_response(cfg_.self_id, token, reply, later);
    }
    run(later);
  });
}

void SealedCore::deliver_response(const PeerId& relay_or_client,
                                  const std::string& token,
                                  const BackendReply& reply, Effects& fx) {
  json body{{"qid", token},
            {"status", to_string(reply.status)},
            {"results", results_to_json(reply.results)},
            {"ts", env_.now().count()}};
  if (!reply.error.empty()) body["error"] = reply.error;
  if (relay_or_client == cfg_.self_id) {
    handle_response(cfg_.self_id, body.dump(), fx);
  } else {
    send_sealed(relay_or_client, MsgType::kQueryResponse, body.dump(), fx);
  }
}

// ---- client side -----------------------------------------------------------

std::string SealedCore::fresh_token() {
  std::array<std::uint8_t, 16> raw{};
  for (std::size_t i = 0; i < raw.size(); i += 8) {
    auto v = rng_();
    for (std::size_t b = 0; b < 8; ++b)
      raw[i + b] = static_cast<std::uint8_t>(v >> (8 * b));
  }
  return to_hex(raw);
}

void SealedCore::send_sealed(const PeerId& to, MsgType type,
                             const std::string& body, Effects& fx) {
  auto it = sessions_.find(to);
  if (it == sessions_.end()) {
    fx.logs.push_back(std::string("no session for ") + to + ", dropping " +
                      to_string(type));
    return;
  }
  auto env = seal_envelope(type, cfg_.self_id, it->second.session_key, body,
                           cfg_.bucket_size);
  fx.sends.push_back({to, encode_frame(env)});
  ++counters_.envelopes_sent;
}

void SealedCore::send_forward(const PeerId& relay, const std::string& token,
                              const std::string& text, Effects& fx) {
  if (relay == cfg_.self_id) {
    serve_locally(token, text, fx);
    return;
  }
  json body{{"qid", token}, {"q", text}, {"ts", env_.now().count()}};
  send_sealed(relay, MsgType::kQueryForward, body.dump(), fx);
}

void SealedCore::dispatch(std::string query_text, int k, DispatchCallback done) {
  Effects fx;
  {
    std::lock_guard lock(mu_);
    if (table_.size() == 0 || (view_.empty() && !cfg_.fixed_relay))
      throw Error(Errc::kNotBootstrapped, "node is not bootstrapped");
    k = std::max(k, 0);
    const auto now = env_.now();

    DispatchOutcome outcome;
    outcome.k_requested = k;

    std::vector<PeerId> relays;
    if (cfg_.fixed_relay) {
      relays.assign(static_cast<std::size_t>(k) + 1, *cfg_.fixed_relay);
    } else {
      try {
        auto sample = view_.sample_relays(static_cast<std::size_t>(k) + 1, now, rng_);
        for (auto& p : sample.peers) relays.push_back(p.peer_id);
      } catch (const Error& e) {
        outcome.status = DispatchOutcome::Status::kFailed;
        outcome.error_code = e.code();
        outcome.error = e.what();
        ++counters_.queries_failed;
        fx.callbacks.push_back(
            [done = std::move(done), outcome]() mutable { done(outcome); });
        goto unlock;
      }
    }
    {
      auto fakes = table_.sample_fakes(static_cast<std::size_t>(k), query_text, rng_);
      const int k_eff = std::min<int>(
          {k, static_cast<int>(fakes.queries.size()),
           static_cast<int>(relays.size()) - 1});
      outcome.k_effective = k_eff;
      outcome.degraded = k_eff < k;
      if (outcome.degraded) {
        ++counters_.degraded;
        fx.logs.push_back("degraded protection: k " + std::to_string(k) +
                          " -> " + std::to_string(k_eff));
      }

      const QueryId id = next_query_id_++;
      ActiveQuery aq;
      aq.text = query_text;
      aq.pending.query_id = id;
      aq.pending.issued_at = now;
      aq.pending.deadline = now + cfg_.deadline;
      aq.pending.real_relay = relays[0];
      aq.used_relays.insert(relays[0]);

      struct Leg {
        PeerId relay;
        std::string text;
        bool real;
      };
      std::vector<Leg> legs;
      legs.push_back({relays[0], query_text, true});
      for (int i = 0; i < k_eff; ++i) {
        const auto& relay = relays[static_cast<std::size_t>(i) + 1];
        aq.pending.fake_relays.insert(relay);
        aq.used_relays.insert(relay);
        legs.push_back({relay, fakes.queries[static_cast<std::size_t>(i)], false});
      }
      // Wire order must not reveal which leg is real.
      std::shuffle(legs.begin(), legs.end(), rng_);
      for (const auto& leg : legs) {
        auto token = fresh_token();
        tokens_[token] = Token{id, leg.real, leg.relay,
                               now + cfg_.deadline * (cfg_.real_path_retries + 2)};
        if (leg.real) aq.real_token = token;
        send_forward(leg.relay, token, leg.text, fx);
      }
      aq.outcome = outcome;
      aq.done = std::move(done);
      active_.emplace(id, std::move(aq));
      ++counters_.queries_dispatched;

      const auto deadline = now + cfg_.deadline;
      fx.timers.emplace_back(deadline, [this, id] {
        Effects later;
        {
          std::lock_guard lock(mu_);
          on_deadline(id, later);
        }
        run(later);
      });
    }
  unlock:;
  }
  run(fx);
}

void SealedCore::handle_response(const PeerId& sender, const std::string& body,
                                 Effects& fx) {
  std::string token;
  std::string status;
  std::vector<SearchResult> results;
  std::string error;
  try {
    auto j = json::parse(body);
    token = j.at("qid").get<std::string>();
    status = j.at("status").get<std::string>();
    results = results_from_json(j.at("results"));
    error = j.value("error", "");
  } catch (const std::exception&) {
    ++counters_.malformed_dropped;
    return;
  }
  auto tok = tokens_.find(token);
  if (tok == tokens_.end() || tok->second.relay != sender) {
    ++counters_.unknown_responses;
    return;
  }
  const Token t = tok->second;
  tokens_.erase(tok);
  if (!t.real) {
    ++counters_.fake_responses_dropped;
    return;
  }
  auto it = active_.find(t.query_id);
  if (it == active_.end() || it->second.real_token != token) {
    ++counters_.unknown_responses;
    return;
  }
  if (status == "ok") {
    it->second.outcome.status = DispatchOutcome::Status::kOk;
    it->second.outcome.results = std::move(results);
    finish(t.query_id, fx);
  } else {
    it->second.outcome.error_code = Errc::kBackend;
    retry_or_fail(t.query_id,
                  "relay reported " + status + (error.empty() ? "" : ": " + error),
                  fx);
  }
}

void SealedCore::on_deadline(QueryId id, Effects& fx) {
  sweep_tokens(fx);
  auto it = active_.find(id);
  if (it == active_.end()) return;
  const auto now = env_.now();
  if (now < it->second.pending.deadline) return;  // superseded by a retry
  const PeerId relay = it->second.pending.real_relay;
  if (relay != cfg_.self_id) view_.blacklist(relay, now, cfg_.sampling);
  tokens_.erase(it->second.real_token);
  it->second.outcome.error_code = Errc::kTimeout;
  retry_or_fail(id, "relay " + relay + " timed out", fx);
}

void SealedCore::retry_or_fail(QueryId id, const std::string& why, Effects& fx) {
  auto it = active_.find(id);
  if (it == active_.end()) return;
  auto& aq = it->second;
  const auto now = env_.now();
  if (aq.retries < cfg_.real_path_retries) {
    std::optional<PeerId> fresh;
    if (cfg_.fixed_relay) {
      fresh = *cfg_.fixed_relay;
    } else {
      std::vector<PeerId> candidates;
      for (const auto& p : view_.peers())
        if (p.eligible(now) && !aq.used_relays.count(p.peer_id))
          candidates.push_back(p.peer_id);
      if (!candidates.empty())
        fresh = candidates[uniform_index(rng_, candidates.size())];
    }
    if (fresh) {
      ++aq.retries;
      ++counters_.retries;
      aq.outcome.retries = aq.retries;
      aq.used_relays.insert(*fresh);
      aq.pending.real_relay = *fresh;
      aq.pending.deadline = now + cfg_.deadline;
      auto token = fresh_token();
      tokens_[token] = Token{id, true, *fresh, now + cfg_.deadline * 2};
      aq.real_token = token;
      fx.logs.push_back("retrying real path: " + why);
      send_forward(*fresh, token, aq.text, fx);
      const auto deadline = aq.pending.deadline;
      fx.timers.emplace_back(deadline, [this, id] {
        Effects later;
        {
          std::lock_guard lock(mu_);
          on_deadline(id, later);
        }
        run(later);
      });
      return;
    }
  }
  aq.outcome.status = DispatchOutcome::Status::kFailed;
  aq.outcome.error = why;
  finish(id, fx);
}

void SealedCore::finish(QueryId id, Effects& fx) {
  auto it = active_.find(id);
  if (it == active_.end()) return;
  auto outcome = std::move(it->second.outcome);
  auto done = std::move(it->second.done);
  if (!it->second.real_token.empty()) tokens_.erase(it->second.real_token);
  active_.erase(it);
  if (outcome.status == DispatchOutcome::Status::kOk) {
    ++counters_.queries_completed;
  } else {
    ++counters_.queries_failed;
  }
  fx.callbacks.push_back([done = std::move(done), outcome = std::move(outcome)]() mutable {
    if (done) done(std::move(outcome));
  });
}

void SealedCore::sweep_tokens(Effects& fx) {
  const auto now = env_.now();
  for (auto it = tokens_.begin(); it != tokens_.end();) {
    if (it->second.expires_at <= now && !it->second.real) {
      // A relay that never answered a fake leg is treated like any
      // unresponsive peer.
      if (it->second.relay != cfg_.self_id)
        view_.blacklist(it->second.relay, now, cfg_.sampling);
      fx.logs.push_back("fake leg expired at " + it->second.relay);
      it = tokens_.erase(it);
    } else {
      ++it;
    }
  }
}

// ---- peer sampling ---------------------------------------------------------

void SealedCore::start_shuffle() {
  Effects fx;
  {
    std::lock_guard lock(mu_);
    shuffle_locked(fx);
  }
  run(fx);
}

void SealedCore::shuffle_tick() {
  Effects fx;
  {
    std::lock_guard lock(mu_);
    shuffle_locked(fx);
    fx.timers.emplace_back(env_.now() + cfg_.sampling.shuffle_period,
                           [this] { shuffle_tick(); });
  }
  run(fx);
}

void SealedCore::shuffle_locked(Effects& fx) {
  const auto now = env_.now();
  auto partner = view_.pick_shuffle_partner(now, rng_);
  if (!partner) {
    attest_new_peers(fx);
    return;
  }
  auto sid = fresh_token();
  auto outgoing = view_.shuffle_subset(rng_, now, cfg_.self_id);
  json body{{"sid", sid}, {"entries", peers_to_json(outgoing)}, {"ts", now.count()}};
  shuffles_[sid] = {partner->peer_id, now + cfg_.shuffle_timeout, outgoing};
  send_sealed(partner->peer_id, MsgType::kShuffle, body.dump(), fx);
  const PeerId pid = partner->peer_id;
  fx.timers.emplace_back(now + cfg_.shuffle_timeout, [this, sid, pid] {
    Effects later;
    {
      std::lock_guard lock(mu_);
      if (shuffles_.erase(sid)) {
        view_.blacklist(pid, env_.now(), cfg_.sampling);
        ++counters_.shuffles_timed_out;
        later.logs.push_back("shuffle timeout: " + pid);
      }
    }
    run(later);
  });
}

void SealedCore::handle_shuffle(const PeerId& sender, const std::string& body,
                                bool reply, Effects& fx) {
  std::string sid;
  std::vector<PeerDescriptor> received;
  try {
    auto j = json::parse(body);
    sid = j.at("sid").get<std::string>();
    received = peers_from_json(j.at("entries"));
  } catch (const std::exception&) {
    ++counters_.malformed_dropped;
    return;
  }
  const auto now = env_.now();
  std::vector<PeerDescriptor> sent;
  if (!reply) {
    sent = view_.shuffle_subset(rng_, now, cfg_.self_id);
    json answer{{"sid", sid}, {"entries", peers_to_json(sent)},
                {"ts", now.count()}};
    send_sealed(sender, MsgType::kShuffleReply, answer.dump(), fx);
  } else {
    auto it = shuffles_.find(sid);
    if (it == shuffles_.end() || it->second.partner != sender) return;
    sent = std::move(it->second.sent);
    shuffles_.erase(it);
    ++counters_.shuffles_completed;
  }
  view_.merge(received, rng_, sent);
  attest_new_peers(fx);
}

// ---- introspection ---------------------------------------------------------

CoreStatus SealedCore::status() const {
  std::lock_guard lock(mu_);
  CoreStatus s;
  s.view_size = view_.size();
  s.eligible_relays = view_.eligible_count(env_.now());
  s.table_size = table_.size();
  s.pending = active_.size();
  s.sessions = sessions_.size();
  s.counters = counters_;
  return s;
}

PartialView SealedCore::view_snapshot() const {
  std::lock_guard lock(mu_);
  return view_;
}

}  // namespace veil
