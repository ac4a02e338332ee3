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

#include "veil/core.hpp"

#include <algorithm>
#include <cmath>

#include "veil/error.hpp"

namespace veil {
namespace {

bool is_word_byte(unsigned char c) {
  return (c >= '0' && c <= '9') || (c >= 'a' && c <= 'z') ||
         (c >= 'A' && c <= 'Z') || c >= 0x80;
}

char lower(unsigned char c) {
  return (c >= 'A' && c <= 'Z') ? static_cast<char>(c - 'A' + 'a')
                                : static_cast<char>(c);
}

void sort_unique(std::vector<std::string>& terms) {
  std::sort(terms.begin(), terms.end());
  terms.erase(std::unique(terms.begin(), terms.end()), terms.end());
}

}  // namespace

std::vector<std::string> normalize(std::string_view raw_text) {
  std::vector<std::string> out;
  std::string current;
  for (char ch : raw_text) {
    auto c = static_cast<unsigned char>(ch);
    if (is_word_byte(c)) {
      current.push_back(lower(c));
    } else if (!current.empty()) {
      out.push_back(std::move(current));
      current.clear();
    }
  }
  if (!current.empty()) out.push_back(std::move(current));
  sort_unique(out);
  return out;
}

TermVector::TermVector(std::string_view raw_text)
    : support_(normalize(raw_text)) {}

TermVector::TermVector(std::initializer_list<std::string_view> terms) {
  for (auto t : terms) {
    for (auto& n : normalize(t)) support_.push_back(std::move(n));
  }
  sort_unique(support_);
}

TermVector TermVector::from_terms(std::vector<std::string> terms) {
  TermVector v;
  for (auto& t : terms) {
    for (auto& n : normalize(t)) v.support_.push_back(std::move(n));
  }
  sort_unique(v.support_);
  return v;
}

bool TermVector::contains(std::string_view term) const {
  return std::binary_search(support_.begin(), support_.end(), term);
}

double TermVector::norm() const {
  return std::sqrt(static_cast<double>(support_.size()));
}

std::string TermVector::joined() const {
  std::string out;
  for (const auto& t : support_) {
    if (!out.empty()) out.push_back(' ');
    out += t;
  }
  return out;
}

std::size_t intersection_size(const TermVector& a, const TermVector& b) {
  const auto& x = a.support();
  const auto& y = b.support();
  std::size_t n = 0;
  auto i = x.begin();
  auto j = y.begin();
  while (i != x.end() && j != y.end()) {
    int c = i->compare(*j);
    if (c == 0) {
      ++n;
      ++i;
      ++j;
    } else if (c < 0) {
      ++i;
    } else {
      ++j;
    }
  }
  return n;
}

double cosine(const TermVector& a, const TermVector& b) {
  if (a.empty() || b.empty()) return 0.0;
  const auto common = static_cast<double>(intersection_size(a, b));
  if (common == 0.0) return 0.0;
  if (a.size() == b.size() && common == static_cast<double>(a.size()))
    return 1.0;
  return common / std::sqrt(static_cast<double>(a.size() * b.size()));
}

QueryRecord QueryRecord::make(QueryId id, std::string raw_text,
                              Timestamp issued_at, Origin origin) {
  QueryRecord r;
  r.id = id;
  r.terms = TermVector(raw_text);
  r.raw_text = std::move(raw_text);
  r.issued_at = issued_at;
  r.origin = origin;
  return r;
}

void UserProfile::add(QueryRecord record) {
  auto pos = std::upper_bound(
      past_queries_.begin(), past_queries_.end(), record.issued_at,
      [](Timestamp t, const QueryRecord& q) { return t < q.issued_at; });
  past_queries_.insert(pos, std::move(record));
}

SensitiveTopicDictionary::SensitiveTopicDictionary(
    std::string topic, const std::vector<std::string>& entries)
    : topic_(std::move(topic)) {
  if (topic_.empty())
    throw Error(Errc::kInvalidArgument, "dictionary topic name is empty");
  for (const auto& e : entries) {
    for (auto& t : normalize(e)) terms_.push_back(std::move(t));
  }
  sort_unique(terms_);
  if (terms_.empty())
    throw Error(Errc::kInvalidArgument,
                "dictionary '" + topic_ + "' has no terms");
}

bool SensitiveTopicDictionary::contains(std::string_view term) const {
  return std::binary_search(terms_.begin(), terms_.end(), term);
}

bool ranks_are_contiguous(const std::vector<SearchResult>& results) {
  for (std::size_t i = 0; i < results.size(); ++i) {
    if (results[i].rank != static_cast<int>(i + 1)) return false;
  }
  return true;
}

}  // namespace veil
