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

#include "veil/sensitivity.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>

#include "veil/error.hpp"

namespace veil {

void SensitivityConfig::validate() const {
  if (k_max < 1)
    throw Error(Errc::kInvalidArgument, "k_max must be at least 1");
  if (!(smoothing_alpha > 0.0 && smoothing_alpha < 1.0))
    throw Error(Errc::kInvalidArgument, "smoothing_alpha must be in (0,1)");
  if (profile_window && *profile_window == 0)
    throw Error(Errc::kInvalidArgument, "profile_window must be positive");
}

SemanticVerdict semantic_assess(
    const TermVector& query, std::span<const SensitiveTopicDictionary> dicts) {
  SemanticVerdict v;
  for (const auto& dict : dicts) {
    bool hit = std::any_of(query.support().begin(), query.support().end(),
                           [&](const std::string& t) { return dict.contains(t); });
    if (hit) v.matched_topics.push_back(dict.topic());
  }
  std::sort(v.matched_topics.begin(), v.matched_topics.end());
  v.matched_topics.erase(
      std::unique(v.matched_topics.begin(), v.matched_topics.end()),
      v.matched_topics.end());
  v.sensitive = !v.matched_topics.empty();
  return v;
}

double smoothed_similarity(std::span<double> similarities, double alpha) {
  if (similarities.empty()) return 0.0;
  std::sort(similarities.begin(), similarities.end());
  double s = similarities.front();
  for (std::size_t i = 1; i < similarities.size(); ++i)
    s = alpha * similarities[i] + (1.0 - alpha) * s;
  return s;
}

double linkability_score(const TermVector& query, const UserProfile& profile,
                         double alpha, std::optional<std::size_t> window) {
  const auto& past = profile.past_queries();
  std::size_t first = 0;
  if (window && *window < past.size()) first = past.size() - *window;
  std::vector<double> sims;
  sims.reserve(past.size() - first);
  for (std::size_t i = first; i < past.size(); ++i)
    sims.push_back(cosine(query, past[i].terms));
  return smoothed_similarity(sims, alpha);
}

int project_k(double linkability, int k_max) {
  double clamped = std::clamp(linkability, 0.0, 1.0);
  int k = static_cast<int>(std::floor(clamped * k_max + 0.5));
  return std::clamp(k, 0, k_max);
}

ProtectionDecision decide_k(const TermVector& query, const UserProfile& profile,
                            std::span<const SensitiveTopicDictionary> dicts,
                            const SensitivityConfig& cfg) {
  cfg.validate();
  ProtectionDecision d;
  auto verdict = semantic_assess(query, dicts);
  d.semantic_sensitive = verdict.sensitive;
  d.matched_topics = std::move(verdict.matched_topics);
  d.linkability =
      linkability_score(query, profile, cfg.smoothing_alpha, cfg.profile_window);
  d.k = d.semantic_sensitive ? cfg.k_max : project_k(d.linkability, cfg.k_max);
  return d;
}

std::vector<SensitiveTopicDictionary> restrict_to_topics(
    std::span<const SensitiveTopicDictionary> dicts,
    std::span<const std::string> enabled) {
  std::vector<SensitiveTopicDictionary> out;
  for (const auto& d : dicts) {
    if (std::find(enabled.begin(), enabled.end(), d.topic()) != enabled.end())
      out.push_back(d);
  }
  return out;
}

SensitiveTopicDictionary load_dictionary(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in)
    throw Error(Errc::kIo, "cannot open dictionary " + path.string());
  std::vector<std::string> lines;
  std::string line;
  while (std::getline(in, line)) {
    auto first = line.find_first_not_of(" \t\r");
    if (first == std::string::npos || line[first] == '#') continue;
    lines.push_back(line);
  }
  return SensitiveTopicDictionary(path.stem().string(), lines);
}

std::vector<SensitiveTopicDictionary> load_dictionary_dir(
    const std::filesystem::path& dir) {
  std::error_code ec;
  if (!std::filesystem::is_directory(dir, ec))
    throw Error(Errc::kIo, "dictionary directory not found: " + dir.string());
  std::vector<std::filesystem::path> files;
  for (const auto& entry : std::filesystem::directory_iterator(dir)) {
    if (!entry.is_regular_file()) continue;
    if (entry.path().filename().string().starts_with(".")) continue;
    files.push_back(entry.path());
  }
  std::sort(files.begin(), files.end(), [](const auto& a, const auto& b) {
    return a.stem().string() < b.stem().string();
  });
  std::vector<SensitiveTopicDictionary> out;
  for (const auto& f : files) out.push_back(load_dictionary(f));
  return out;
}

}  // namespace veil
