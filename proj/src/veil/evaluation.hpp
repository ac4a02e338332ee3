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

#ifndef VEIL_EVALUATION_HPP_
#define VEIL_EVALUATION_HPP_

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <map>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "veil/core.hpp"
#include "veil/sensitivity.hpp"

namespace veil {

enum class LogFormat { kAolTsv, kSimpleCsv };

// "aol_tsv" | "simple_csv"; throws Error(kInvalidArgument).
LogFormat parse_log_format(std::string_view name);
const char* to_string(LogFormat f);

struct LogRecord {
  std::string user_id;
  std::string query;
  Timestamp at{0};
};

struct QueryLog {
  std::vector<LogRecord> records;
  LogFormat format = LogFormat::kSimpleCsv;
  std::size_t skipped = 0;
};

// "YYYY-MM-DD HH:MM:SS" or ISO 8601 with 'T', optional fraction, 'Z' or
// +HH:MM offset. Milliseconds since the Unix epoch, UTC.
std::optional<Timestamp> parse_timestamp(std::string_view text);
std::string format_timestamp(Timestamp t);

// AOL: AnonID, Query, QueryTime[, ItemRank, ClickURL], tab separated, header
// optional. simple_csv: user_id,query,iso_timestamp (the query may contain
// commas). Malformed rows are skipped and counted. Throws Error(kIo) on an
// unreadable file and Error(kParse) when no row is valid.
QueryLog ingest_log(const std::filesystem::path& path, LogFormat format);
QueryLog parse_log(std::istream& in, LogFormat format);
void write_simple_csv(const QueryLog& log, std::ostream& out);

struct TestQuery {
  std::string user_id;
  QueryRecord record;
};

struct TrainTestSplit {
  std::vector<UserProfile> profiles;  // sorted by user id
  std::vector<TestQuery> test;        // chronological
  std::size_t dropped_users = 0;
  std::size_t training_total = 0;
};

// Per user, the chronologically first floor(2n/3) queries train the
// adversary; the rest are test queries. Users with fewer than min_queries
// are dropped.
TrainTestSplit split_train_test(const QueryLog& log, std::size_t min_queries = 3);

struct AttackVerdict {
  std::optional<std::string> user_id;
  double best_metric = 0.0;
};

inline constexpr double kAttackThreshold = 0.5;

// Smoothed similarity between query and every profile; the unique maximum
// above the threshold names the user.
AttackVerdict simattack(const TermVector& query,
                        std::span<const UserProfile> profiles, double alpha);

enum class Mechanism { kNone, kAdaptive, kFixedK };
Mechanism parse_mechanism(std::string_view name);
const char* to_string(Mechanism m);

struct AttackConfig {
  Mechanism mechanism = Mechanism::kAdaptive;
  SensitivityConfig sensitivity;
  std::vector<SensitiveTopicDictionary> dictionaries;
  std::uint64_t seed = 1;
  // Extension: the adversary appends every query it attributes to the
  // profile it attributed it to.
  bool online_adversary = false;
};

struct UserAttackStats {
  std::size_t real_queries = 0;
  std::size_t reidentified = 0;
};

struct AttackOutcome {
  Mechanism mechanism = Mechanism::kNone;
  int k_max = 0;
  std::size_t real_queries = 0;
  std::size_t stream_queries = 0;  // real plus fake
  std::size_t reidentified = 0;
  // reidentified / stream_queries: share of everything the engine received
  // that was tied to its true author.
  double rate = 0.0;
  // reidentified / real_queries.
  double real_rate = 0.0;
  std::vector<int> k_values;  // per real query, in stream order
  std::size_t fake_shortfall = 0;
  std::map<std::string, UserAttackStats> per_user;

  double mean_k() const;
  // P(K <= k) for k = 0..k_max.
  std::vector<double> k_cdf() const;
};

// Feeds the adversary the stream the engine would observe under the given
// mechanism. Fakes come from other users' training queries. The client-side
// profile is the user's training queries plus earlier test queries. Throws
// Error(kInvalidArgument) on an empty test set.
AttackOutcome run_attack(const TrainTestSplit& split, const AttackConfig& cfg);

struct PrecisionRecall {
  double precision = 0.0;
  double recall = 0.0;
};

PrecisionRecall categorizer_metrics(const std::set<std::uint64_t>& detected,
                                    const std::set<std::uint64_t>& truth);

struct Accuracy {
  double correctness = 0.0;
  double completeness = 0.0;
};

// Compares url sets.
Accuracy accuracy_metrics(const std::vector<SearchResult>& original,
                          const std::vector<SearchResult>& returned);

struct CategorizeReport {
  std::size_t queries = 0;
  std::size_t sensitive = 0;
  std::map<std::string, std::size_t> per_topic;
  std::set<std::uint64_t> detected;  // record indices
  std::optional<PrecisionRecall> against_truth;
};

CategorizeReport categorize_log(const QueryLog& log,
                                std::span<const SensitiveTopicDictionary> dicts,
                                const std::set<std::uint64_t>* truth = nullptr);

}  // namespace veil

#endif  // VEIL_EVALUATION_HPP_
