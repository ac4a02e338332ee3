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

#include "veil/evaluation.hpp"

#include <algorithm>
#include <chrono>
#include <cstdio>
#include <fstream>
#include <istream>
#include <numeric>
#include <ostream>
#include <unordered_map>
#include <unordered_set>

#include "veil/error.hpp"
#include "veil/random.hpp"

namespace veil {

LogFormat parse_log_format(std::string_view name) {
  if (name == "aol_tsv" || name == "aol") return LogFormat::kAolTsv;
  if (name == "simple_csv" || name == "csv") return LogFormat::kSimpleCsv;
  throw Error(Errc::kInvalidArgument, "unknown log format: " + std::string(name));
}

const char* to_string(LogFormat f) {
  return f == LogFormat::kAolTsv ? "aol_tsv" : "simple_csv";
}

std::optional<Timestamp> parse_timestamp(std::string_view text) {
  std::string s(text);
  while (!s.empty() && (s.back() == '\r' || s.back() == ' ')) s.pop_back();
  int y = 0, mo = 0, d = 0, h = 0, mi = 0, sec = 0, used = 0;
  char sep = 0;
  if (std::sscanf(s.c_str(), "%4d-%2d-%2d%c%2d:%2d:%2d%n", &y, &mo, &d, &sep, &h,
                  &mi, &sec, &used) != 7 ||
      (sep != ' ' && sep != 'T'))
    return std::nullopt;
  using namespace std::chrono;
  year_month_day ymd{year{y}, month{static_cast<unsigned>(mo)},
                     day{static_cast<unsigned>(d)}};
  if (!ymd.ok() || h > 23 || mi > 59 || sec > 60) return std::nullopt;
  std::int64_t ms = 0;
  std::size_t pos = static_cast<std::size_t>(used);
  if (pos < s.size() && s[pos] == '.') {
    ++pos;
    int digits = 0;
    while (pos < s.size() && std::isdigit(static_cast<unsigned char>(s[pos]))) {
      if (digits < 3) ms = ms * 10 + (s[pos] - '0');
      ++digits;
      ++pos;
    }
    if (digits == 0) return std::nullopt;
    for (int i = digits; i < 3; ++i) ms *= 10;
  }
  std::int64_t offset_min = 0;
  if (pos < s.size()) {
    if (s[pos] == 'Z' && pos + 1 == s.size()) {
      ++pos;
    } else if ((s[pos] == '+' || s[pos] == '-') && s.size() - pos == 6 &&
               s[pos + 3] == ':') {
      int oh = 0, om = 0;
      if (std::sscanf(s.c_str() + pos + 1, "%2d:%2d", &oh, &om) != 2)
        return std::nullopt;
      offset_min = (s[pos] == '+' ? 1 : -1) * (oh * 60 + om);
      pos = s.size();
    } else {
      return std::nullopt;
    }
  }
  auto days = sys_days(ymd).time_since_epoch().count();
  std::int64_t total = ((static_cast<std::int64_t>(days) * 24 + h) * 60 + mi) * 60 + sec;
  total -= offset_min * 60;
  return Timestamp(total * 1000 + ms);
}

std::string format_timestamp(Timestamp t) {
  using namespace std::chrono;
  auto ms = t.count();
  auto secs = ms >= 0 ? ms / 1000 : (ms - 999) / 1000;
  auto day_count = secs >= 0 ? secs / 86400 : (secs - 86399) / 86400;
  auto rem = secs - day_count * 86400;
  year_month_day ymd{sys_days{days{day_count}}};
  char buf[64];
  std::snprintf(buf, sizeof buf, "%04d-%02u-%02uT%02lld:%02lld:%02lldZ",
                static_cast<int>(ymd.year()), static_cast<unsigned>(ymd.month()),
                static_cast<unsigned>(ymd.day()),
                static_cast<long long>(rem / 3600),
                static_cast<long long>(rem / 60 % 60),
                static_cast<long long>(rem % 60));
  return buf;
}

namespace {

std::string trim(std::string_view s) {
  auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string_view::npos) return {};
  auto e = s.find_last_not_of(" \t\r\n");
  return std::string(s.substr(b, e - b + 1));
}

std::optional<LogRecord> parse_aol(const std::string& line) {
  std::vector<std::string> cols;
  std::size_t start = 0;
  while (true) {
    auto tab = line.find('\t', start);
    cols.push_back(line.substr(start, tab - start));
    if (tab == std::string::npos) break;
    start = tab + 1;
  }
  if (cols.size() < 3) return std::nullopt;
  LogRecord r;
  r.user_id = trim(cols[0]);
  r.query = trim(cols[1]);
  auto at = parse_timestamp(trim(cols[2]));
  if (r.user_id.empty() || !at || TermVector(r.query).empty()) return std::nullopt;
  r.at = *at;
  return r;
}

std::optional<LogRecord> parse_csv(const std::string& line) {
  auto first = line.find(',');
  auto last = line.rfind(',');
  if (first == std::string::npos || first == last) return std::nullopt;
  LogRecord r;
  r.user_id = trim(line.substr(0, first));
  r.query = trim(line.substr(first + 1, last - first - 1));
  if (r.query.size() >= 2 && r.query.front() == '"' && r.query.back() == '"')
    r.query = r.query.substr(1, r.query.size() - 2);
  auto at = parse_timestamp(trim(line.substr(last + 1)));
  if (r.user_id.empty() || !at || TermVector(r.query).empty()) return std::nullopt;
  r.at = *at;
  return r;
}

}  // namespace

QueryLog parse_log(std::istream& in, LogFormat format) {
  QueryLog log;
  log.format = format;
  std::string line;
  bool first = true;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    const bool header = first && (line.starts_with("AnonID") ||
                                  line.starts_with("user_id,"));
    first = false;
    if (header || trim(line).empty()) continue;
    auto rec = format == LogFormat::kAolTsv ? parse_aol(line) : parse_csv(line);
    if (rec) {
      log.records.push_back(std::move(*rec));
    } else {
      ++log.skipped;
    }
  }
  if (log.records.empty())
    throw Error(Errc::kParse, "query log has no valid rows");
  return log;
}

QueryLog ingest_log(const std::filesystem::path& path, LogFormat format) {
  std::ifstream in(path);
  if (!in) throw Error(Errc::kIo, "cannot open log " + path.string());
  return parse_log(in, format);
}

void write_simple_csv(const QueryLog& log, std::ostream& out) {
  for (const auto& r : log.records)
    out << r.user_id << ',' << r.query << ',' << format_timestamp(r.at) << '\n';
}

TrainTestSplit split_train_test(const QueryLog& log, std::size_t min_queries) {
  std::map<std::string, std::vector<const LogRecord*>> by_user;
  for (const auto& r : log.records) by_user[r.user_id].push_back(&r);

  TrainTestSplit split;
  QueryId next_id = 1;
  for (auto& [user, recs] : by_user) {
    if (recs.size() < std::max<std::size_t>(min_queries, 1)) {
      ++split.dropped_users;
      continue;
    }
    std::stable_sort(recs.begin(), recs.end(),
                     [](const LogRecord* a, const LogRecord* b) { return a->at < b->at; });
    const std::size_t train = recs.size() * 2 / 3;
    UserProfile profile(user);
    for (std::size_t i = 0; i < recs.size(); ++i) {
      auto rec = QueryRecord::make(next_id++, recs[i]->query, recs[i]->at);
      if (i < train) {
        profile.add(std::move(rec));
      } else {
        split.test.push_back({user, std::move(rec)});
      }
    }
    split.training_total += train;
    split.profiles.push_back(std::move(profile));
  }
  std::stable_sort(split.test.begin(), split.test.end(),
                   [](const TestQuery& a, const TestQuery& b) {
                     return a.record.issued_at < b.record.issued_at;
                   });
  return split;
}

AttackVerdict simattack(const TermVector& query,
                        std::span<const UserProfile> profiles, double alpha) {
  AttackVerdict v;
  std::size_t best = 0;
  std::size_t ties = 0;
  for (std::size_t i = 0; i < profiles.size(); ++i) {
    double m = linkability_score(query, profiles[i], alpha);
    if (ties == 0 || m > v.best_metric) {
      v.best_metric = m;
      best = i;
      ties = 1;
    } else if (m == v.best_metric) {
      ++ties;
    }
  }
  if (ties == 1 && v.best_metric > kAttackThreshold)
    v.user_id = profiles[best].user_id();
  return v;
}

Mechanism parse_mechanism(std::string_view name) {
  if (name == "none") return Mechanism::kNone;
  if (name == "cyclosa" || name == "adaptive") return Mechanism::kAdaptive;
  if (name == "fixed_k") return Mechanism::kFixedK;
  throw Error(Errc::kInvalidArgument, "unknown mechanism: " + std::string(name));
}

const char* to_string(Mechanism m) {
  switch (m) {
    case Mechanism::kNone: return "none";
    case Mechanism::kAdaptive: return "adaptive";
    case Mechanism::kFixedK: return "fixed_k";
  }
  return "none";
}

double AttackOutcome::mean_k() const {
  if (k_values.empty()) return 0.0;
  return std::accumulate(k_values.begin(), k_values.end(), 0.0) /
         static_cast<double>(k_values.size());
}

std::vector<double> AttackOutcome::k_cdf() const {
  std::vector<double> cdf(static_cast<std::size_t>(std::max(k_max, 0)) + 1, 0.0);
  if (k_values.empty()) return cdf;
  for (int k : k_values)
    for (int j = std::clamp(k, 0, k_max); j <= k_max; ++j) cdf[static_cast<std::size_t>(j)] += 1;
  for (auto& c : cdf) c /= static_cast<double>(k_values.size());
  return cdf;
}

namespace {

struct PoolEntry {
  std::size_t owner;
  const QueryRecord* record;
};

// k distinct pool entries not owned by owner.
std::vector<const QueryRecord*> draw_fakes(const std::vector<PoolEntry>& pool,
                                           std::size_t owner_count_for_user,
                                           std::size_t owner, std::size_t k,
                                           Rng& rng) {
  std::vector<const QueryRecord*> out;
  const std::size_t eligible = pool.size() - owner_count_for_user;
  if (k == 0 || eligible == 0) return out;
  if (k >= eligible) {
    for (const auto& e : pool)
      if (e.owner != owner) out.push_back(e.record);
    std::shuffle(out.begin(), out.end(), rng);
    return out;
  }
  std::unordered_set<std::size_t> taken;
  while (out.size() < k) {
    auto i = uniform_index(rng, pool.size());
    if (pool[i].owner == owner || !taken.insert(i).second) continue;
    out.push_back(pool[i].record);
  }
  return out;
}

}  // namespace

AttackOutcome run_attack(const TrainTestSplit& split, const AttackConfig& cfg) {
  if (split.test.empty()) throw Error(Errc::kInvalidArgument, "empty test set");
  if (split.profiles.empty()) throw Error(Errc::kInvalidArgument, "no profiles");
  cfg.sensitivity.validate();
  const double alpha = cfg.sensitivity.smoothing_alpha;

  std::map<std::string, std::size_t> index;
  for (std::size_t i = 0; i < split.profiles.size(); ++i)
    index[split.profiles[i].user_id()] = i;

  std::vector<PoolEntry> pool;
  std::vector<std::size_t> owned(split.profiles.size(), 0);
  for (std::size_t i = 0; i < split.profiles.size(); ++i) {
    for (const auto& q : split.profiles[i].past_queries()) pool.push_back({i, &q});
    owned[i] = split.profiles[i].size();
  }

  std::vector<UserProfile> client = split.profiles;
  std::vector<UserProfile> adversary = split.profiles;
  Rng rng(cfg.seed);

  AttackOutcome out;
  out.mechanism = cfg.mechanism;
  out.k_max = cfg.mechanism == Mechanism::kNone ? 0 : cfg.sensitivity.k_max;

  struct Observed {
    const TermVector* terms;
    std::optional<std::size_t> author;  // set for the real query only
  };
  std::vector<Observed> bundle;
  for (const auto& tq : split.test) {
    auto it = index.find(tq.user_id);
    if (it == index.end()) continue;
    const std::size_t author = it->second;

    int k = 0;
    if (cfg.mechanism == Mechanism::kAdaptive) {
      k = decide_k(tq.record.terms, client[author], cfg.dictionaries, cfg.sensitivity).k;
    } else if (cfg.mechanism == Mechanism::kFixedK) {
      k = cfg.sensitivity.k_max;
    }
    client[author].add(tq.record);
    out.k_values.push_back(k);

    auto fakes = draw_fakes(pool, owned[author], author, static_cast<std::size_t>(k), rng);
    if (fakes.size() < static_cast<std::size_t>(k))
      out.fake_shortfall += static_cast<std::size_t>(k) - fakes.size();
    bundle.clear();
    bundle.push_back({&tq.record.terms, author});
    for (const auto* f : fakes) bundle.push_back({&f->terms, std::nullopt});
    std::shuffle(bundle.begin(), bundle.end(), rng);

    auto& stats = out.per_user[tq.user_id];
    ++stats.real_queries;
    ++out.real_queries;
    out.stream_queries += bundle.size();
    for (const auto& obs : bundle) {
      // Static adversary: verdicts on fakes change nothing, skip them.
      if (!obs.author && !cfg.online_adversary) continue;
      auto v = simattack(*obs.terms, adversary, alpha);
      if (obs.author && v.user_id == tq.user_id) {
        ++out.reidentified;
        ++stats.reidentified;
      }
      if (cfg.online_adversary && v.user_id) {
        auto& target = adversary[index.at(*v.user_id)];
        target.add(QueryRecord::make(0, obs.terms->joined(), tq.record.issued_at));
      }
    }
  }
  if (out.real_queries == 0)
    throw Error(Errc::kInvalidArgument, "no test query belongs to a profiled user");
  out.rate = static_cast<double>(out.reidentified) / static_cast<double>(out.stream_queries);
  out.real_rate = static_cast<double>(out.reidentified) / static_cast<double>(out.real_queries);
  return out;
}

PrecisionRecall categorizer_metrics(const std::set<std::uint64_t>& detected,
                                    const std::set<std::uint64_t>& truth) {
  std::size_t both = 0;
  for (auto id : detected) both += truth.count(id);
  PrecisionRecall pr;
  pr.precision = detected.empty() ? (truth.empty() ? 1.0 : 0.0)
                                  : static_cast<double>(both) / static_cast<double>(detected.size());
  pr.recall = truth.empty() ? 1.0
                            : static_cast<double>(both) / static_cast<double>(truth.size());
  return pr;
}

Accuracy accuracy_metrics(const std::vector<SearchResult>& original,
                          const std::vector<SearchResult>& returned) {
  std::set<std::string> orig, ret;
  for (const auto& r : original) orig.insert(r.url);
  for (const auto& r : returned) ret.insert(r.url);
  std::size_t both = 0;
  for (const auto& u : ret) both += orig.count(u);
  Accuracy a;
  a.correctness = ret.empty() ? (orig.empty() ? 1.0 : 0.0)
                              : static_cast<double>(both) / static_cast<double>(ret.size());
  a.completeness = orig.empty() ? 1.0
                                : static_cast<double>(both) / static_cast<double>(orig.size());
  return a;
}

CategorizeReport categorize_log(const QueryLog& log,
                                std::span<const SensitiveTopicDictionary> dicts,
                                const std::set<std::uint64_t>* truth) {
  CategorizeReport rep;
  for (const auto& d : dicts) rep.per_topic[d.topic()] = 0;
  for (std::size_t i = 0; i < log.records.size(); ++i) {
    auto v = semantic_assess(TermVector(log.records[i].query), dicts);
    ++rep.queries;
    if (!v.sensitive) continue;
    ++rep.sensitive;
    rep.detected.insert(i);
    for (const auto& t : v.matched_topics) ++rep.per_topic[t];
  }
  if (truth) rep.against_truth = categorizer_metrics(rep.detected, *truth);
  return rep;
}

}  // namespace veil
