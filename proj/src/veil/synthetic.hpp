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

#ifndef VEIL_SYNTHETIC_HPP_
#define VEIL_SYNTHETIC_HPP_

#include <cstdint>
#include <set>
#include <span>
#include <string>
#include <vector>

#include "veil/evaluation.hpp"

namespace veil {

// Generator for query logs with controlled vocabulary overlap and sensitive
// share, standing in for logs that cannot be redistributed.
struct SyntheticLogConfig {
  std::size_t users = 50;
  std::size_t queries_per_user = 60;
  // Share of each user's vocabulary drawn from a pool common to all users.
  double vocabulary_overlap = 0.5;
  std::size_t vocabulary_per_user = 40;
  // Share of queries carrying a term from one of the dictionaries.
  double sensitive_fraction = 0.15;
  // Chance that a query reissues one of the user's earlier queries.
  double repeat_probability = 0.35;
  std::size_t min_terms = 1;
  std::size_t max_terms = 3;
  double queries_per_hour = 31.23;
  Timestamp start{1141171200000};  // 2006-03-01T00:00:00Z
  std::uint64_t seed = 1;

  void validate() const;
};

struct SyntheticLog {
  QueryLog log;
  std::set<std::uint64_t> sensitive;  // record indices
};

// dictionaries supply sensitive terms; when empty, sensitive_fraction must be 0.
SyntheticLog generate_log(const SyntheticLogConfig& cfg,
                          std::span<const SensitiveTopicDictionary> dictionaries);

// Pseudo-word for index i; lowercase letters only, never a dictionary word.
std::string synthetic_word(std::uint64_t i);

}  // namespace veil

#endif  // VEIL_SYNTHETIC_HPP_
