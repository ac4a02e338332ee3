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

#include "veil/simulator.hpp"

#include <algorithm>
#include <cmath>
#include <memory>
#include <random>
#include <set>

#include <json.hpp>

#include "veil/error.hpp"
#include "veil/random.hpp"
#include "veil/relay_node.hpp"
#include "veil/synthetic.hpp"

namespace veil {

using json = nlohmann::json;

void EventLoop::schedule(Timestamp at, std::function<void()> fn) {
  queue_.push({std::max(at, now_), seq_++, std::move(fn)});
}

std::size_t EventLoop::run_until(Timestamp until) {
  std::size_t n = 0;
  while (!queue_.empty() && queue_.top().at <= until) {
    auto fn = std::move(const_cast<Event&>(queue_.top()).fn);
    now_ = queue_.top().at;
    queue_.pop();
    fn();
    ++n;
  }
  now_ = std::max(now_, until);
  return n;
}

void SimConfig::validate() const {
  if (node_count == 0) throw Error(Errc::kInvalidArgument, "node_count must be positive");
  if (topology == Topology::kPeerToPeer && node_count == 1 && view_size == 0)
    throw Error(Errc::kInvalidArgument, "view_size must be positive");
  if (latency.hop_base_ms < 0 || latency.hop_jitter_ms < 0 ||
      latency.hop_jitter_ms > latency.hop_base_ms || latency.backend_ms < 0 ||
      latency.backend_jitter_ms < 0 || latency.backend_jitter_ms > latency.backend_ms)
    throw Error(Errc::kInvalidArgument, "latency model needs 0 <= jitter <= base");
  if (!log_path && (queries_per_hour <= 0 || duration_hours <= 0))
    throw Error(Errc::kInvalidArgument, "synthetic workload needs positive rate and duration");
  if (forced_k && *forced_k < 0) throw Error(Errc::kInvalidArgument, "forced k must be >= 0");
  if (deadline.count() <= 0) throw Error(Errc::kInvalidArgument, "deadline must be positive");
  if (seed_queries == 0) throw Error(Errc::kInvalidArgument, "seed_queries must be positive");
  if (!corpus_path && corpus_documents == 0)
    throw Error(Errc::kInvalidArgument, "corpus_documents must be positive");
  sensitivity.validate();
}

SimConfig parse_sim_config(const std::string& json_text,
                           const std::filesystem::path& base_dir) {
  SimConfig c;
  auto path = [&](const json& v) {
    std::filesystem::path p = v.get<std::string>();
    return p.is_relative() && !base_dir.empty() ? base_dir / p : p;
  };
  try {
    auto j = json::parse(json_text);
    if (!j.is_object()) throw Error(Errc::kParse, "simulation config must be an object");
    for (const auto& [key, v] : j.items()) {
      if (key == "node_count") c.node_count = v.get<std::size_t>();
      else if (key == "users") c.users = v.get<std::size_t>();
      else if (key == "hop_base_ms") c.latency.hop_base_ms = v.get<double>();
      else if (key == "hop_jitter_ms") c.latency.hop_jitter_ms = v.get<double>();
      else if (key == "backend_ms") c.latency.backend_ms = v.get<double>();
      else if (key == "backend_jitter_ms") c.latency.backend_jitter_ms = v.get<double>();
      else if (key == "topology") {
        auto t = v.get<std::string>();
        if (t == "p2p") c.topology = Topology::kPeerToPeer;
        else if (t == "single_proxy") c.topology = Topology::kSingleProxy;
        else throw Error(Errc::kInvalidArgument, "topology must be p2p or single_proxy");
      }
      else if (key == "log_path") c.log_path = path(v);
      else if (key == "log_format") c.log_format = parse_log_format(v.get<std::string>());
      else if (key == "queries_per_hour") c.queries_per_hour = v.get<double>();
      else if (key == "duration_hours") c.duration_hours = v.get<double>();
      else if (key == "max_queries") c.max_queries = v.get<std::size_t>();
      else if (key == "sensitive_fraction") c.sensitive_fraction = v.get<double>();
      else if (key == "vocabulary_overlap") c.vocabulary_overlap = v.get<double>();
      else if (key == "k") {
        if (v.is_string() && v.get<std::string>() == "adaptive") c.forced_k.reset();
        else c.forced_k = v.get<int>();
      }
      else if (key == "k_max") c.sensitivity.k_max = v.get<int>();
      else if (key == "alpha") c.sensitivity.smoothing_alpha = v.get<double>();
      else if (key == "topics") c.sensitivity.enabled_topics = v.get<std::vector<std::string>>();
      else if (key == "dict_dir") c.dict_dir = path(v);
      else if (key == "block_threshold") c.limiter.block_threshold = v.get<std::uint64_t>();
      else if (key == "view_size") c.view_size = v.get<std::size_t>();
      else if (key == "shuffle_period_ms") c.shuffle_period = Timestamp(v.get<std::int64_t>());
      else if (key == "shuffles") c.shuffles = v.get<bool>();
      else if (key == "deadline_ms") c.deadline = Timestamp(v.get<std::int64_t>());
      else if (key == "table_capacity") c.table_capacity = v.get<std::size_t>();
      else if (key == "seed_queries") c.seed_queries = v.get<std::size_t>();
      else if (key == "corpus_documents") c.corpus_documents = v.get<std::size_t>();
      else if (key == "corpus_path") c.corpus_path = path(v);
      else if (key == "warmup_ms") c.warmup = Timestamp(v.get<std::int64_t>());
      else if (key == "seed") c.seed = v.get<std::uint64_t>();
      else throw Error(Errc::kParse, "unknown simulation key: " + key);
    }
  } catch (const json::exception& e) {
    throw Error(Errc::kParse, std::string("bad simulation config: ") + e.what());
  }
  c.validate();
  return c;
}

LatencySummary summarize_latencies(std::vector<double> ms) {
  LatencySummary s;
  s.count = ms.size();
  if (ms.empty()) return s;
  std::sort(ms.begin(), ms.end());
  auto pct = [&](double p) {
    // Nearest-rank percentile.
    auto rank = static_cast<std::size_t>(std::ceil(p / 100.0 * static_cast<double>(ms.size())));
    return ms[std::clamp<std::size_t>(rank, 1, ms.size()) - 1];
  };
  double sum = 0;
  for (double v : ms) sum += v;
  s.mean_ms = sum / static_cast<double>(ms.size());
  s.median_ms = pct(50);
  s.p90_ms = pct(90);
  s.p99_ms = pct(99);
  s.max_ms = ms.back();
  for (int p = 5; p <= 100; p += 5) s.cdf.emplace_back(pct(p), p / 100.0);
  return s;
}

std::size_t min_nodes_without_blocking(std::size_t users, double queries_per_hour,
                                       double mean_k, std::uint64_t threshold) {
  if (threshold == 0) throw Error(Errc::kInvalidArgument, "threshold must be positive");
  const double load = static_cast<double>(users) * queries_per_hour * (mean_k + 1.0);
  return std::max<std::size_t>(1, static_cast<std::size_t>(std::ceil(load / static_cast<double>(threshold))));
}

std::vector<SensitiveTopicDictionary> builtin_dictionaries() {
  return {
      SensitiveTopicDictionary("health", {"cancer", "diabetes", "hiv", "depression", "pregnancy", "abortion",
                                          "tumor", "chemotherapy", "insulin", "anxiety", "therapy", "disease",
                                          "symptoms", "std", "herpes", "addiction", "rehab", "psychiatrist",
                                          "antidepressant", "schizophrenia", "hepatitis", "alzheimer"}),
      SensitiveTopicDictionary("politics", {"democrat", "republican", "election", "senator", "congress",
                                            "liberal", "conservative", "socialism", "communist", "protest",
                                            "immigration", "abortion", "vote", "ballot", "campaign", "president"}),
      SensitiveTopicDictionary("religion", {"bible", "quran", "church", "mosque", "synagogue", "atheism",
                                            "christian", "muslim", "jewish", "buddhism", "hindu", "prayer",
                                            "catholic", "baptism", "islam", "scientology"}),
      SensitiveTopicDictionary("sex", {"sex", "porn", "nude", "erotic", "condom", "viagra", "escort",
                                       "lesbian", "gay", "fetish", "sexual", "orgasm", "xxx", "dating"}),
  };
}

namespace {

class SimEnvironment;

struct World {
  EventLoop loop;
  Rng rng;
  LatencyModel latency;
  std::shared_ptr<MockEngine> engine;
  std::map<PeerId, SealedCore*> cores;
  std::vector<std::string> host_log;

  Timestamp hop() {
    double ms = latency.hop_base_ms;
    if (latency.hop_jitter_ms > 0)
      ms += std::uniform_real_distribution<double>(-latency.hop_jitter_ms, latency.hop_jitter_ms)(rng);
    return Timestamp(std::llround(ms));
  }
  Timestamp backend_time() {
    double ms = latency.backend_ms;
    if (latency.backend_jitter_ms > 0)
      ms += std::uniform_real_distribution<double>(-latency.backend_jitter_ms, latency.backend_jitter_ms)(rng);
    return Timestamp(std::llround(ms));
  }
};

class SimEnvironment final : public NodeEnvironment {
 public:
  SimEnvironment(World& world, PeerId self) : world_(world), self_(std::move(self)) {}

  Timestamp now() override { return world_.loop.now(); }

  void send(const PeerId& to, Bytes frame) override {
    world_.loop.schedule(now() + world_.hop(), [this, to, frame = std::move(frame)] {
      auto it = world_.cores.find(to);
      if (it != world_.cores.end()) it->second->on_frame(frame);
    });
  }

  void search(const std::string& query_text,
              std::function<void(BackendReply)> done) override {
    world_.loop.schedule(now() + world_.backend_time(),
                         [this, query_text, done = std::move(done)] {
                           done(world_.engine->search(self_, query_text, now()));
                         });
  }

  void schedule_at(Timestamp at, std::function<void()> fn) override {
    world_.loop.schedule(at, std::move(fn));
  }

  void log(std::string_view line) override {
    world_.host_log.push_back(self_ + ": " + std::string(line));
  }

 private:
  World& world_;
  PeerId self_;
};

std::string node_name(std::size_t i) { return "n" + std::to_string(i); }

std::shared_ptr<MockCorpus> build_corpus(const std::vector<std::string>& texts,
                                         std::span<const SensitiveTopicDictionary> dicts,
                                         std::size_t documents, Rng& rng) {
  std::set<std::string> vocab;
  for (const auto& t : texts) {
    TermVector tv(t);
    for (const auto& w : tv.support()) vocab.insert(w);
  }
  for (const auto& d : dicts)
    for (const auto& w : d.terms()) vocab.insert(w);
  std::vector<std::string> words(vocab.begin(), vocab.end());
  std::vector<CorpusDocument> docs;
  std::uniform_int_distribution<std::size_t> len(3, 12);
  for (std::size_t i = 0; i < documents; ++i) {
    std::vector<std::string> terms;
    // Every vocabulary word appears at least once.
    if (i < words.size()) terms.push_back(words[i]);
    const std::size_t n = len(rng);
    while (terms.size() < n) terms.push_back(words[uniform_index(rng, words.size())]);
    CorpusDocument d;
    d.url = "https://example.org/doc/" + std::to_string(i);
    d.title = "document " + std::to_string(i);
    d.terms = TermVector::from_terms(std::move(terms));
    docs.push_back(std::move(d));
  }
  for (std::size_t i = documents; i < words.size(); ++i) {
    CorpusDocument d;
    d.url = "https://example.org/doc/" + std::to_string(i);
    d.title = "document " + std::to_string(i);
    d.terms = TermVector::from_terms({words[i]});
    docs.push_back(std::move(d));
  }
  return std::make_shared<MockCorpus>(std::move(docs));
}

}  // namespace

SimReport run_simulation(const SimConfig& cfg) {
  cfg.validate();
  World world;
  world.rng.seed(derive_seed(cfg.seed, 0));
  world.latency = cfg.latency;

  auto dicts = cfg.dict_dir ? load_dictionary_dir(*cfg.dict_dir) : builtin_dictionaries();

  // Workload.
  QueryLog log;
  const std::size_t users = cfg.users ? cfg.users : cfg.node_count;
  double workload_hours = cfg.duration_hours;
  if (cfg.log_path) {
    log = ingest_log(*cfg.log_path, cfg.log_format);
    std::stable_sort(log.records.begin(), log.records.end(),
                     [](const LogRecord& a, const LogRecord& b) { return a.at < b.at; });
    if (cfg.max_queries && log.records.size() > cfg.max_queries) log.records.resize(cfg.max_queries);
    workload_hours = std::max(
        1.0 / 3600.0,
        static_cast<double>((log.records.back().at - log.records.front().at).count()) / 3.6e6);
  } else {
    SyntheticLogConfig sc;
    sc.users = users;
    sc.queries_per_hour = cfg.queries_per_hour;
    sc.queries_per_user = static_cast<std::size_t>(
        std::ceil(cfg.queries_per_hour * cfg.duration_hours * 1.5 + 30));
    sc.sensitive_fraction = cfg.sensitive_fraction;
    sc.vocabulary_overlap = cfg.vocabulary_overlap;
    sc.start = Timestamp(0);
    sc.seed = derive_seed(cfg.seed, 1);
    auto synth = generate_log(sc, dicts);
    const Timestamp end(static_cast<std::int64_t>(cfg.duration_hours * 3.6e6));
    for (auto& r : synth.log.records)
      if (r.at < end) log.records.push_back(std::move(r));
    if (cfg.max_queries && log.records.size() > cfg.max_queries) log.records.resize(cfg.max_queries);
  }
  if (log.records.empty()) throw Error(Errc::kInvalidArgument, "workload is empty");

  std::vector<std::string> all_texts;
  for (const auto& r : log.records) all_texts.push_back(r.query);

  // Seed pool: synthetic queries disjoint from any user's.
  std::vector<std::string> seeds;
  {
    SyntheticLogConfig sc;
    sc.users = 10;
    sc.queries_per_user = (cfg.seed_queries + 9) / 10;
    sc.sensitive_fraction = 0;
    sc.vocabulary_overlap = 0;
    sc.repeat_probability = 0;
    sc.seed = derive_seed(cfg.seed, 2);
    for (auto& r : generate_log(sc, {}).log.records) {
      // Keep seed words apart from the workload vocabulary.
      seeds.push_back("trending " + r.query);
      if (seeds.size() == cfg.seed_queries) break;
    }
  }
  all_texts.insert(all_texts.end(), seeds.begin(), seeds.end());

  Rng corpus_rng(derive_seed(cfg.seed, 3));
  std::shared_ptr<const MockCorpus> corpus =
      cfg.corpus_path ? std::make_shared<const MockCorpus>(MockCorpus::load_jsonl(*cfg.corpus_path))
                      : build_corpus(all_texts, dicts, cfg.corpus_documents, corpus_rng);
  world.engine = std::make_shared<MockEngine>(corpus, cfg.limiter);

  // Nodes.
  std::vector<PeerId> ids;
  for (std::size_t i = 0; i < cfg.node_count; ++i) ids.push_back(node_name(i));
  const PeerId proxy_id = "proxy";
  std::vector<std::unique_ptr<SimEnvironment>> envs;
  std::vector<std::unique_ptr<RelayNode>> nodes;
  for (std::size_t i = 0; i < cfg.node_count; ++i) {
    NodeConfig nc;
    nc.core.self_id = ids[i];
    nc.core.sampling.view_size = cfg.view_size;
    nc.core.sampling.shuffle_period = cfg.shuffle_period;
    nc.core.periodic_shuffle = cfg.shuffles;
    nc.core.deadline = cfg.deadline;
    nc.core.table_capacity = cfg.table_capacity;
    nc.sensitivity = cfg.sensitivity;
    nc.forced_k = cfg.forced_k;
    nc.recent_decisions = 0;
    if (cfg.topology == Topology::kSingleProxy) nc.core.fixed_relay = proxy_id;
    else if (cfg.node_count == 1) nc.core.fixed_relay = ids[0];
    envs.push_back(std::make_unique<SimEnvironment>(world, ids[i]));
    nodes.push_back(std::make_unique<RelayNode>(nc, dicts, *envs.back(), derive_seed(cfg.seed, 100 + i)));
    world.cores[ids[i]] = &nodes.back()->core();
    nodes.back()->core().seed_queries(seeds);
  }
  std::unique_ptr<SimEnvironment> proxy_env;
  std::unique_ptr<SealedCore> proxy;
  if (cfg.topology == Topology::kSingleProxy) {
    CoreConfig pc;
    pc.self_id = proxy_id;
    pc.periodic_shuffle = false;
    pc.deadline = cfg.deadline;
    proxy_env = std::make_unique<SimEnvironment>(world, proxy_id);
    proxy = std::make_unique<SealedCore>(pc, *proxy_env, derive_seed(cfg.seed, 99));
    world.cores[proxy_id] = proxy.get();
    for (auto& n : nodes) n->core().add_peer(proxy_id);
  } else if (cfg.node_count > 1) {
    for (auto& n : nodes) n->core().bootstrap_peers(ids);
  }

  // Map users to nodes and schedule arrivals after warm-up.
  std::map<std::string, std::size_t> home;
  for (const auto& r : log.records) home.emplace(r.user_id, 0);
  {
    std::size_t j = 0;
    for (auto& [user, node] : home) node = j++ % cfg.node_count;
  }
  const Timestamp origin = log.records.front().at;

  SimReport rep;
  rep.nodes = cfg.node_count;
  rep.users = home.size();
  rep.topology = cfg.topology == Topology::kPeerToPeer ? "p2p" : "single_proxy";
  rep.workload_hours = workload_hours;

  std::vector<double> latencies;
  double sum_correct = 0, sum_complete = 0;
  std::uint64_t sum_k_eff = 0;
  Timestamp last_arrival{0};
  for (const auto& r : log.records) {
    const Timestamp at = cfg.warmup + (r.at - origin);
    last_arrival = std::max(last_arrival, at);
    RelayNode* node = nodes[home.at(r.user_id)].get();
    const std::string text = r.query;
    world.loop.schedule(at, [&, node, text] {
      ++rep.queries_submitted;
      rep.relayed_queries.push_back(text);
      node->submit_async(text, [&, text](SubmitOutcome out) {
        rep.sum_k_requested += static_cast<std::uint64_t>(out.decision.k);
        rep.shortfall += static_cast<std::uint64_t>(out.decision.k - out.k_effective);
        sum_k_eff += static_cast<std::uint64_t>(out.k_effective);
        rep.retries += static_cast<std::uint64_t>(out.retries);
        ++rep.k_histogram[out.decision.k];
        if (out.degraded) ++rep.degraded;
        if (!out.ok) {
          ++rep.queries_failed;
          return;
        }
        ++rep.queries_completed;
        latencies.push_back(static_cast<double>((out.completed_at - out.issued_at).count()));
        auto acc = accuracy_metrics(corpus->search(TermVector(text)), out.results);
        sum_correct += acc.correctness;
        sum_complete += acc.completeness;
        rep.min_correctness = std::min(rep.min_correctness, acc.correctness);
        rep.min_completeness = std::min(rep.min_completeness, acc.completeness);
      });
    });
  }
  // Enough slack for a timeout, one retry and every fake leg to settle.
  const Timestamp drain = cfg.deadline * 4 + Timestamp(10'000);
  world.loop.run_until(last_arrival + drain);

  rep.latency = summarize_latencies(std::move(latencies));
  if (rep.queries_completed) {
    rep.mean_correctness = sum_correct / static_cast<double>(rep.queries_completed);
    rep.mean_completeness = sum_complete / static_cast<double>(rep.queries_completed);
  } else {
    rep.min_correctness = rep.min_completeness = 0;
    rep.mean_correctness = rep.mean_completeness = 0;
  }
  const auto settled = rep.queries_completed + rep.queries_failed;
  rep.mean_k = settled ? static_cast<double>(rep.sum_k_requested) / static_cast<double>(settled) : 0;

  auto by_source = world.engine->calls_by_source();
  std::vector<PeerId> sources = ids;
  if (proxy) sources.push_back(proxy_id);
  double max_rate = 0;
  for (const auto& id : sources) {
    auto it = by_source.find(id);
    const std::uint64_t calls = it == by_source.end() ? 0 : it->second;
    rep.backend_calls_by_node[id] = calls;
    rep.backend_calls += calls;
    max_rate = std::max(max_rate, static_cast<double>(calls) / workload_hours);
  }
  // Relays are the user nodes, or the proxy alone in the baseline.
  const double relays = proxy ? 1.0 : static_cast<double>(cfg.node_count);
  rep.mean_node_rate_per_hour = static_cast<double>(rep.backend_calls) / relays / workload_hours;
  rep.max_node_rate_per_hour = max_rate;
  rep.load_ratio = rep.mean_node_rate_per_hour > 0 ? max_rate / rep.mean_node_rate_per_hour : 0;
  const double offered_qph = static_cast<double>(rep.queries_submitted) / workload_hours;
  rep.closed_form_rate_per_hour =
      (cfg.log_path ? offered_qph : static_cast<double>(users) * cfg.queries_per_hour) *
      (rep.mean_k + 1.0) / relays;
  rep.blocked_nodes = world.engine->limiter().ever_blocked_count();
  rep.conservation_holds =
      settled == rep.queries_submitted &&
      rep.backend_calls == sum_k_eff + settled + rep.retries;

  for (auto& n : nodes) {
    auto c = n->core().status().counters;
    rep.replays_dropped += c.replays_dropped;
    rep.unattested_dropped += c.unattested_dropped;
  }
  rep.host_log = std::move(world.host_log);
  return rep;
}

std::string SimReport::to_json(bool include_logs) const {
  json j;
  j["nodes"] = nodes;
  j["users"] = users;
  j["topology"] = topology;
  j["workload_hours"] = workload_hours;
  j["queries"] = {{"submitted", queries_submitted}, {"completed", queries_completed},
                  {"failed", queries_failed}, {"degraded", degraded}};
  json cdf = json::array();
  for (auto [ms, p] : latency.cdf) cdf.push_back({{"latency_ms", ms}, {"p", p}});
  j["latency_ms"] = {{"count", latency.count}, {"mean", latency.mean_ms},
                     {"median", latency.median_ms}, {"p90", latency.p90_ms},
                     {"p99", latency.p99_ms}, {"max", latency.max_ms}, {"cdf", cdf}};
  j["load"] = {{"backend_calls", backend_calls},
               {"by_node", backend_calls_by_node},
               {"mean_rate_per_hour", mean_node_rate_per_hour},
               {"max_rate_per_hour", max_node_rate_per_hour},
               {"max_over_mean", load_ratio},
               {"closed_form_rate_per_hour", closed_form_rate_per_hour},
               {"blocked_nodes", blocked_nodes}};
  j["conservation"] = {{"sum_k_requested", sum_k_requested}, {"shortfall", shortfall},
                       {"retries", retries}, {"holds", conservation_holds}};
  json hist = json::object();
  for (auto [k, n] : k_histogram) hist[std::to_string(k)] = n;
  j["k"] = {{"mean", mean_k}, {"histogram", hist}};
  j["accuracy"] = {{"min_correctness", min_correctness}, {"min_completeness", min_completeness},
                   {"mean_correctness", mean_correctness}, {"mean_completeness", mean_completeness}};
  j["dropped"] = {{"replays", replays_dropped}, {"unattested", unattested_dropped}};
  if (include_logs) j["host_log"] = host_log;
  return j.dump(2);
}

}  // namespace veil
