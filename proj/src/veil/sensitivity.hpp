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

#ifndef VEIL_SENSITIVITY_HPP_
#define VEIL_SENSITIVITY_HPP_

#include <cstddef>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "veil/core.hpp"

namespace veil {

struct SensitivityConfig {
  int k_max = 7;
  double smoothing_alpha = 0.5;
  std::vector<std::string> enabled_topics;
  // Most recent past queries consulted by the linkability score; unset means
  // the whole profile.
  std::optional<std::size_t> profile_window;

  // Throws Error(kInvalidArgument) unless k_max >= 1 and 0 < alpha < 1.
  void validate() const;
};

struct SemanticVerdict {
  bool sensitive = false;
  std::vector<std::string> matched_topics;  // sorted
};

// A query is semantically sensitive when any of its terms appears in any of
// the given dictionaries. The caller restricts dicts to the enabled topics.
SemanticVerdict semantic_assess(const TermVector& query,
                                std::span<const SensitiveTopicDictionary> dicts);

// Exponential smoothing over similarities ranked in ascending order:
// S <- sims[0]; S <- alpha * s + (1 - alpha) * S for the rest. Sorts in place.
// Returns 0 for an empty list. Shared by the client-side linkability score and
// the re-identification attack.
double smoothed_similarity(std::span<double> similarities, double alpha);

double linkability_score(const TermVector& query, const UserProfile& profile,
                         double alpha,
                         std::optional<std::size_t> window = std::nullopt);

// Round-half-up projection of a score in [0,1] onto 0..k_max.
int project_k(double linkability, int k_max);

ProtectionDecision decide_k(const TermVector& query, const UserProfile& profile,
                            std::span<const SensitiveTopicDictionary> dicts,
                            const SensitivityConfig& cfg);

// Keeps the dictionaries whose topic is in enabled (order preserved).
std::vector<SensitiveTopicDictionary> restrict_to_topics(
    std::span<const SensitiveTopicDictionary> dicts,
    std::span<const std::string> enabled);

// One term per line, '#' comments, topic = file stem.
SensitiveTopicDictionary load_dictionary(const std::filesystem::path& path);

// Every *.txt file in dir, sorted by topic name.
std::vector<SensitiveTopicDictionary> load_dictionary_dir(
    const std::filesystem::path& dir);

}  // namespace veil

#endif  // VEIL_SENSITIVITY_HPP_
