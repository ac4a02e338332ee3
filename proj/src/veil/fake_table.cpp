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

#include "veil/fake_table.hpp"

#include <algorithm>
#include <fstream>
#include <mutex>
#include <numeric>

#include "veil/core.hpp"
#include "veil/error.hpp"

namespace veil {
namespace {

std::string trim(std::string_view s) {
  auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string_view::npos) return {};
  auto e = s.find_last_not_of(" \t\r\n");
  return std::string(s.substr(b, e - b + 1));
}

bool has_terms(std::string_view text) { return !normalize(text).empty(); }

}  // namespace

PastQueryTable::PastQueryTable(std::size_t capacity) : capacity_(capacity) {
  if (capacity_ == 0)
    throw Error(Errc::kInvalidArgument, "table capacity must be positive");
}

void PastQueryTable::record(std::string query_text) {
  std::string text = trim(query_text);
  if (!has_terms(text))
    throw Error(Errc::kInvalidArgument, "refusing to record an empty query");
  std::unique_lock lock(mu_);
  entries_.push_back(std::move(text));
  while (entries_.size() > capacity_) entries_.pop_front();
}

FakeSample PastQueryTable::sample_fakes(std::size_t n, std::string_view exclude,
                                        Rng& rng) const {
  FakeSample out;
  if (n == 0) return out;
  std::shared_lock lock(mu_);
  const std::size_t size = entries_.size();
  if (size == 0) {
    out.shortfall = true;
    return out;
  }

  auto eligible = [&](const std::string& q) {
    return q != exclude && std::find(out.queries.begin(), out.queries.end(),
                                     q) == out.queries.end();
  };

  // Rejection sampling handles the common case of a large, varied table.
  const std::size_t attempts = 4 * n + 16;
  for (std::size_t i = 0; i < attempts && out.queries.size() < n; ++i) {
    const auto& q = entries_[uniform_index(rng, size)];
    if (eligible(q)) out.queries.push_back(q);
  }
  if (out.queries.size() == n) return out;

  // Small or repetitive table: walk a random permutation instead.
  out.queries.clear();
  std::vector<std::size_t> order(size);
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::shuffle(order.begin(), order.end(), rng);
  for (std::size_t idx : order) {
    const auto& q = entries_[idx];
    if (eligible(q)) {
      out.queries.push_back(q);
      if (out.queries.size() == n) break;
    }
  }
  out.shortfall = out.queries.size() < n;
  return out;
}

SeedReport PastQueryTable::bootstrap_seed(
    const std::filesystem::path& seed_file) {
  std::ifstream in(seed_file);
  if (!in) throw Error(Errc::kIo, "cannot open seed file " + seed_file.string());
  SeedReport report;
  std::string line;
  while (std::getline(in, line)) {
    std::string text = trim(line);
    if (!has_terms(text)) {
      ++report.skipped;
      continue;
    }
    record(std::move(text));
    ++report.recorded;
  }
  if (in.bad())
    throw Error(Errc::kIo, "read error on seed file " + seed_file.string());
  return report;
}

std::size_t PastQueryTable::size() const {
  std::shared_lock lock(mu_);
  return entries_.size();
}

bool PastQueryTable::contains(std::string_view query_text) const {
  std::shared_lock lock(mu_);
  return std::find(entries_.begin(), entries_.end(), query_text) !=
         entries_.end();
}

std::vector<std::string> PastQueryTable::snapshot() const {
  std::shared_lock lock(mu_);
  return {entries_.begin(), entries_.end()};
}

}  // namespace veil
