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

#ifndef VEIL_CORE_HPP_
#define VEIL_CORE_HPP_

#include <chrono>
#include <cstdint>
#include <initializer_list>
#include <string>
#include <string_view>
#include <vector>

namespace veil {

// Milliseconds since an arbitrary epoch (wall clock for live nodes, the
// logical clock for simulations).
using Timestamp = std::chrono::milliseconds;
using QueryId = std::uint64_t;
using PeerId = std::string;

enum class Origin { kReal, kFake };

// Lowercases ASCII, splits on every run of non-alphanumeric bytes, drops empty
// tokens and duplicates. Bytes >= 0x80 are kept as word characters so UTF-8
// sequences are never split. Result is sorted.
std::vector<std::string> normalize(std::string_view raw_text);

// Binary term vector: the support set over the term universe. Always sorted
// and duplicate free.
class TermVector {
 public:
  TermVector() = default;
  explicit TermVector(std::string_view raw_text);
  TermVector(std::initializer_list<std::string_view> terms);

  static TermVector from_terms(std::vector<std::string> terms);

  const std::vector<std::string>& support() const noexcept { return support_; }
  std::size_t size() const noexcept { return support_.size(); }
  bool empty() const noexcept { return support_.empty(); }
  bool contains(std::string_view term) const;
  double norm() const;

  // Space-joined terms; normalizing it yields the same vector.
  std::string joined() const;

  friend bool operator==(const TermVector&, const TermVector&) = default;

 private:
  std::vector<std::string> support_;
};

std::size_t intersection_size(const TermVector& a, const TermVector& b);

// |a ∩ b| / (sqrt|a| sqrt|b|), 0 when either side is empty.
double cosine(const TermVector& a, const TermVector& b);

struct QueryRecord {
  QueryId id = 0;
  std::string raw_text;
  TermVector terms;
  Timestamp issued_at{0};
  Origin origin = Origin::kReal;

  static QueryRecord make(QueryId id, std::string raw_text, Timestamp issued_at,
                          Origin origin = Origin::kReal);
};

// Past queries of one user, kept sorted by issued_at (stable for ties).
class UserProfile {
 public:
  UserProfile() = default;
  explicit UserProfile(std::string user_id) : user_id_(std::move(user_id)) {}

  const std::string& user_id() const noexcept { return user_id_; }
  const std::vector<QueryRecord>& past_queries() const noexcept {
    return past_queries_;
  }
  bool empty() const noexcept { return past_queries_.empty(); }
  std::size_t size() const noexcept { return past_queries_.size(); }

  void add(QueryRecord record);

 private:
  std::string user_id_;
  std::vector<QueryRecord> past_queries_;
};

struct ProtectionDecision {
  bool semantic_sensitive = false;
  double linkability = 0.0;
  int k = 0;
  std::vector<std::string> matched_topics;

  friend bool operator==(const ProtectionDecision&,
                         const ProtectionDecision&) = default;
};

class SensitiveTopicDictionary {
 public:
  // Each entry is normalized; multi-word entries contribute every token.
  // Throws Error(kInvalidArgument) when the topic is empty or no term survives.
  SensitiveTopicDictionary(std::string topic,
                           const std::vector<std::string>& entries);

  const std::string& topic() const noexcept { return topic_; }
  const std::vector<std::string>& terms() const noexcept { return terms_; }
  bool contains(std::string_view term) const;

 private:
  std::string topic_;
  std::vector<std::string> terms_;  // sorted, unique
};

struct SearchResult {
  std::string url;
  std::string title;
  int rank = 0;

  friend bool operator==(const SearchResult&, const SearchResult&) = default;
};

// True when ranks are exactly 1..n in order.
bool ranks_are_contiguous(const std::vector<SearchResult>& results);

}  // namespace veil

#endif  // VEIL_CORE_HPP_
