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

#include "veil/backend.hpp"

#include <algorithm>
#include <fstream>
#include <unordered_set>

#include <json.hpp>

#include "veil/error.hpp"

#ifdef VEIL_WITH_HTTP_BACKEND
#include <httplib.h>
#endif

namespace veil {

using json = nlohmann::json;

MockCorpus::MockCorpus(std::vector<CorpusDocument> documents)
    : documents_(std::move(documents)) {
  std::unordered_set<std::string> urls;
  for (std::uint32_t i = 0; i < documents_.size(); ++i) {
    if (!urls.insert(documents_[i].url).second)
      throw Error(Errc::kInvalidArgument,
                  "duplicate corpus url " + documents_[i].url);
    for (const auto& t : documents_[i].terms.support()) postings_[t].push_back(i);
  }
}

MockCorpus MockCorpus::load_jsonl(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(Errc::kIo, "cannot open corpus " + path.string());
  std::vector<CorpusDocument> docs;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    try {
      auto j = json::parse(line);
      CorpusDocument d;
      d.url = j.at("url").get<std::string>();
      d.title = j.value("title", "");
      d.terms = TermVector(d.title + " " + j.value("text", ""));
      docs.push_back(std::move(d));
    } catch (const json::exception& e) {
      throw Error(Errc::kParse, path.string() + ":" + std::to_string(lineno) +
                                    ": " + e.what());
    }
  }
  return MockCorpus(std::move(docs));
}

std::vector<SearchResult> MockCorpus::search(const TermVector& query,
                                             std::size_t top_n) const {
  if (query.empty()) return {};
  std::unordered_map<std::uint32_t, std::size_t> overlap;
  for (const auto& t : query.support()) {
    auto it = postings_.find(t);
    if (it == postings_.end()) continue;
    for (auto doc : it->second) ++overlap[doc];
  }
  // Same denominator for every document, so ranking by raw overlap count is
  // ranking by score.
  std::vector<std::pair<std::size_t, std::uint32_t>> ranked;
  for (auto [doc, n] : overlap) ranked.emplace_back(n, doc);
  auto better = [&](const auto& a, const auto& b) {
    if (a.first != b.first) return a.first > b.first;
    return documents_[a.second].url < documents_[b.second].url;
  };
  const std::size_t take = std::min(top_n, ranked.size());
  std::partial_sort(ranked.begin(), ranked.begin() + static_cast<std::ptrdiff_t>(take),
                    ranked.end(), better);
  std::vector<SearchResult> out;
  out.reserve(take);
  for (std::size_t i = 0; i < take; ++i) {
    const auto& d = documents_[ranked[i].second];
    out.push_back({d.url, d.title, static_cast<int>(i + 1)});
  }
  return out;
}

RateLimiter::RateLimiter(RateLimiterConfig cfg) : cfg_(cfg) {}

RateVerdict RateLimiter::check_rate(const std::string& source_id, Timestamp now) {
  std::lock_guard lock(mu_);
  auto& s = sources_[source_id];
  if (s.blocked_until) {
    if (now < *s.blocked_until) return RateVerdict::kBlocked;
    s.blocked_until.reset();
    s.hits.clear();
  }
  s.hits.push_back(now);
  while (!s.hits.empty() && s.hits.front() <= now - cfg_.window) s.hits.pop_front();
  s.peak = std::max<std::uint64_t>(s.peak, s.hits.size());
  if (s.hits.size() > cfg_.block_threshold) {
    s.blocked_until = now + cfg_.block_duration;
    s.ever_blocked = true;
    return RateVerdict::kBlocked;
  }
  return RateVerdict::kAllowed;
}

bool RateLimiter::is_blocked(const std::string& source_id, Timestamp now) const {
  std::lock_guard lock(mu_);
  auto it = sources_.find(source_id);
  return it != sources_.end() && it->second.blocked_until &&
         now < *it->second.blocked_until;
}

std::size_t RateLimiter::ever_blocked_count() const {
  std::lock_guard lock(mu_);
  return static_cast<std::size_t>(
      std::count_if(sources_.begin(), sources_.end(),
                    [](const auto& kv) { return kv.second.ever_blocked; }));
}

std::uint64_t RateLimiter::peak_window_count(const std::string& source_id) const {
  std::lock_guard lock(mu_);
  auto it = sources_.find(source_id);
  return it == sources_.end() ? 0 : it->second.peak;
}

const char* to_string(BackendReply::Status s) {
  switch (s) {
    case BackendReply::Status::kOk: return "ok";
    case BackendReply::Status::kBlocked: return "blocked";
    case BackendReply::Status::kError: return "error";
  }
  return "error";
}

MockEngine::MockEngine(std::shared_ptr<const MockCorpus> corpus,
                       RateLimiterConfig cfg)
    : corpus_(std::move(corpus)), limiter_(cfg) {
  if (!corpus_) throw Error(Errc::kInvalidArgument, "mock engine needs a corpus");
}

BackendReply MockEngine::search(const std::string& source_id,
                                const std::string& query_text, Timestamp now) {
  ++calls_;
  {
    std::lock_guard lock(mu_);
    ++by_source_[source_id];
  }
  BackendReply reply;
  if (limiter_.check_rate(source_id, now) == RateVerdict::kBlocked) {
    reply.status = BackendReply::Status::kBlocked;
    reply.error = "source blocked by bot detection";
    return reply;
  }
  reply.results = corpus_->search(TermVector(query_text));
  return reply;
}

std::map<std::string, std::uint64_t> MockEngine::calls_by_source() const {
  std::lock_guard lock(mu_);
  return by_source_;
}

#ifdef VEIL_WITH_HTTP_BACKEND

std::string url_encode(std::string_view text) {
  static constexpr char kHex[] = "0123456789ABCDEF";
  std::string out;
  for (unsigned char c : text) {
    if ((c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z') ||
        (c >= '0' && c <= '9') || c == '-' || c == '_' || c == '.' || c == '~') {
      out.push_back(static_cast<char>(c));
    } else {
      out.push_back('%');
      out.push_back(kHex[c >> 4]);
      out.push_back(kHex[c & 0xf]);
    }
  }
  return out;
}

HttpBackend::HttpBackend(HttpBackendConfig cfg)
    : cfg_(std::move(cfg)), cap_(cfg_.cap) {
  const auto& t = cfg_.url_template;
  if (t.find("%QUERY%") == std::string::npos)
    throw Error(Errc::kInvalidArgument, "url template lacks %QUERY%");
  auto scheme_end = t.find("://");
  if (scheme_end == std::string::npos)
    throw Error(Errc::kInvalidArgument, "url template lacks a scheme");
  auto path_start = t.find('/', scheme_end + 3);
  if (path_start == std::string::npos)
    throw Error(Errc::kInvalidArgument, "url template lacks a path");
  origin_ = t.substr(0, path_start);
  path_template_ = t.substr(path_start);
}

BackendReply HttpBackend::search(const std::string& source_id,
                                 const std::string& query_text, Timestamp now) {
  BackendReply reply;
  if (cap_.check_rate(source_id, now) == RateVerdict::kBlocked) {
    reply.status = BackendReply::Status::kBlocked;
    reply.error = "local rate cap reached";
    return reply;
  }
  std::string path = path_template_;
  path.replace(path.find("%QUERY%"), 7, url_encode(query_text));

  httplib::Client cli(origin_);
  cli.set_connection_timeout(std::chrono::milliseconds(cfg_.timeout_ms));
  cli.set_read_timeout(std::chrono::milliseconds(cfg_.timeout_ms));
  auto res = cli.Get(path);
  if (!res) {
    reply.status = BackendReply::Status::kError;
    reply.error = "http request failed: " + httplib::to_string(res.error());
    return reply;
  }
  if (res->status == 429 || res->status == 403) {
    reply.status = BackendReply::Status::kBlocked;
    reply.error = "engine refused with status " + std::to_string(res->status);
    return reply;
  }
  if (res->status != 200) {
    reply.status = BackendReply::Status::kError;
    reply.error = "engine returned status " + std::to_string(res->status);
    return reply;
  }
  try {
    auto j = json::parse(res->body);
    if (!j.is_array()) throw Error(Errc::kParse, "expected a JSON array");
    int rank = 0;
    for (const auto& item : j) {
      SearchResult r;
      r.url = item.at("url").get<std::string>();
      r.title = item.value("title", "");
      r.rank = ++rank;
      reply.results.push_back(std::move(r));
    }
  } catch (const std::exception& e) {
    reply.status = BackendReply::Status::kError;
    reply.results.clear();
    reply.error = std::string("unparseable engine response: ") + e.what();
  }
  return reply;
}

#endif

}  // namespace veil
