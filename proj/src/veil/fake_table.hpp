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

#ifndef VEIL_FAKE_TABLE_HPP_
#define VEIL_FAKE_TABLE_HPP_

#include <cstddef>
#include <deque>
#include <filesystem>
#include <shared_mutex>
#include <string>
#include <string_view>
#include <vector>

#include "veil/random.hpp"

namespace veil {

struct FakeSample {
  std::vector<std::string> queries;
  bool shortfall = false;
};

struct SeedReport {
  std::size_t recorded = 0;
  std::size_t skipped = 0;
};

// Bounded FIFO of query strings relayed for other users; the pool fake queries
// are drawn from. Lives in the sealed core. Internally synchronized.
class PastQueryTable {
 public:
  static constexpr std::size_t kDefaultCapacity = 10'000;

  explicit PastQueryTable(std::size_t capacity = kDefaultCapacity);

  // Throws Error(kInvalidArgument) when text has no terms.
  void record(std::string query_text);

  // n draws, distinct by text within the call, never equal to exclude.
  // Entries are weighted by multiplicity, so duplicated queries come up more
  // often. Returns every eligible distinct entry and sets shortfall when fewer
  // than n exist.
  FakeSample sample_fakes(std::size_t n, std::string_view exclude,
                          Rng& rng) const;

  // One query per line, blank lines skipped. Throws Error(kIo) on open
  // failure.
  SeedReport bootstrap_seed(const std::filesystem::path& seed_file);

  std::size_t size() const;
  std::size_t capacity() const noexcept { return capacity_; }
  bool contains(std::string_view query_text) const;
  std::vector<std::string> snapshot() const;

 private:
  std::size_t capacity_;
  mutable std::shared_mutex mu_;
  std::deque<std::string> entries_;
};

}  // namespace veil

#endif  // VEIL_FAKE_TABLE_HPP_
