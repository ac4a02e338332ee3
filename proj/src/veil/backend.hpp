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

#ifndef VEIL_BACKEND_HPP_
#define VEIL_BACKEND_HPP_

#include <atomic>
#include <cstddef>
#include <cstdint>
#include <deque>
#include <filesystem>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <unordered_map>
#include <vector>

#include "veil/core.hpp"

namespace veil {

struct CorpusDocument {
  std::string url;
  std::string title;
  TermVector terms;
};

// Deterministic stand-in for a web search engine.
class MockCorpus {
 public:
  static constexpr std::size_t kTopN = 10;

  // Throws Error(kInvalidArgument) on duplicate urls.
  explicit MockCorpus(std::vector<CorpusDocument> documents);

  // JSON lines, one {url, title, text} object per line; terms come from
  // title and text. Throws Error(kIo) / Error(kParse).
  static MockCorpus load_jsonl(const std::filesystem::path& path);

  // score = |query ∩ doc| / |query|; zero-score documents are not returned.
  // Ties go to the lexicographically smaller url. Ranks 1..n.
  std::vector<SearchResult> search(const TermVector& query,
                                   std::size_t top_n = kTopN) const;

  std::size_t size() const noexcept { return documents_.size(); }
  const std::vector<CorpusDocument>& documents() const noexcept {
    return documents_;
  }

 private:
  std::vector<CorpusDocument> documents_;
  std::unordered_map<std::string, std::vector<std::uint32_t>> postings_;
};

struct RateLimiterConfig {
  std::uint64_t block_threshold = 1000;  // requests per window
  Timestamp window{3'600'000};
  Timestamp block_duration{3'600'000};
};

enum class RateVerdict { kAllowed, kBlocked };

// Per-source sliding-window request counter modelling an engine's bot
// detection. Thread safe.
class RateLimiter {
 public:
  explicit RateLimiter(RateLimiterConfig cfg = {});

  // Counts the request; blocks the source once its window count exceeds the
  // threshold. A blocked source is refused until blocked_until.
  RateVerdict check_rate(const std::string& source_id, Timestamp now);

  bool is_blocked(const std::string& source_id, Timestamp now) const;
  std::size_t ever_blocked_count() const;
  std::uint64_t peak_window_count(const std::string& source_id) const;
  const RateLimiterConfig& config() const noexcept { return cfg_; }

 private:
  struct Source {
    std::deque<Timestamp> hits;
    std::optional<Timestamp> blocked_until;
    bool ever_blocked = false;
    std::uint64_t peak = 0;
  };

  RateLimiterConfig cfg_;
  mutable std::mutex mu_;
  std::map<std::string, Source> sources_;
};

struct BackendReply {
  enum class Status { kOk, kBlocked, kError };
  Status status = Status::kOk;
  std::vector<SearchResult> results;
  std::string error;
};

const char* to_string(BackendReply::Status s);

class SearchBackend {
 public:
  virtual ~SearchBackend() = default;
  // source_id identifies the requesting relay as the engine sees it.
  virtual BackendReply search(const std::string& source_id,
                              const std::string& query_text, Timestamp now) = 0;
};

// Mock corpus behind a rate limiter.
class MockEngine final : public SearchBackend {
 public:
  MockEngine(std::shared_ptr<const MockCorpus> corpus, RateLimiterConfig cfg = {});

  BackendReply search(const std::string& source_id,
                      const std::string& query_text, Timestamp now) override;

  std::uint64_t calls() const noexcept { return calls_.load(); }
  std::map<std::string, std::uint64_t> calls_by_source() const;
  const RateLimiter& limiter() const noexcept { return limiter_; }
  const MockCorpus& corpus() const noexcept { return *corpus_; }

 private:
  std::shared_ptr<const MockCorpus> corpus_;
  RateLimiter limiter_;
  std::atomic<std::uint64_t> calls_{0};
  mutable std::mutex mu_;
  std::map<std::string, std::uint64_t> by_source_;
};

#ifdef VEIL_WITH_HTTP_BACKEND
struct HttpBackendConfig {
  // e.g. "http://127.0.0.1:8080/search?q=%QUERY%"
  std::string url_template;
  // Client-side cap so development runs never trip a real engine.
  RateLimiterConfig cap{.block_threshold = 100};
  int timeout_ms = 5000;
};

// GETs the templated url and parses a JSON array of {url, title} objects.
class HttpBackend final : public SearchBackend {
 public:
  explicit HttpBackend(HttpBackendConfig cfg);

  BackendReply search(const std::string& source_id,
                      const std::string& query_text, Timestamp now) override;

 private:
  HttpBackendConfig cfg_;
  std::string origin_;
  std::string path_template_;
  RateLimiter cap_;
};

std::string url_encode(std::string_view text);
#endif

}  // namespace veil

#endif  // VEIL_BACKEND_HPP_
