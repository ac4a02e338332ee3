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

#include "veil/synthetic.hpp"

#include <algorithm>
#include <cmath>
#include <random>

#include "veil/error.hpp"
#include "veil/random.hpp"

namespace veil {

void SyntheticLogConfig::validate() const {
  if (users == 0 || queries_per_user == 0)
    throw Error(Errc::kInvalidArgument, "users and queries_per_user must be positive");
  if (vocabulary_overlap < 0.0 || vocabulary_overlap > 1.0)
    throw Error(Errc::kInvalidArgument, "vocabulary_overlap must be in [0,1]");
  if (sensitive_fraction < 0.0 || sensitive_fraction > 1.0)
    throw Error(Errc::kInvalidArgument, "sensitive_fraction must be in [0,1]");
  if (repeat_probability < 0.0 || repeat_probability >= 1.0)
    throw Error(Errc::kInvalidArgument, "repeat_probability must be in [0,1)");
  if (vocabulary_per_user == 0 || min_terms == 0 || min_terms > max_terms)
    throw Error(Errc::kInvalidArgument, "bad vocabulary or term bounds");
  if (queries_per_hour <= 0.0)
    throw Error(Errc::kInvalidArgument, "queries_per_hour must be positive");
}

std::string synthetic_word(std::uint64_t i) {
  // "zq" prefix keeps generated words out of natural-language dictionaries.
  std::string w = "zq";
  do {
    w.push_back(static_cast<char>('a' + i % 26));
    i /= 26;
  } while (i > 0);
  return w;
}

SyntheticLog generate_log(const SyntheticLogConfig& cfg,
                          std::span<const SensitiveTopicDictionary> dictionaries) {
  cfg.validate();
  std::vector<std::string> sensitive_terms;
  for (const auto& d : dictionaries)
    sensitive_terms.insert(sensitive_terms.end(), d.terms().begin(), d.terms().end());
  if (cfg.sensitive_fraction > 0.0 && sensitive_terms.empty())
    throw Error(Errc::kInvalidArgument, "sensitive queries need a dictionary");

  Rng rng(cfg.seed);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  const std::size_t shared_per_user = static_cast<std::size_t>(
      std::llround(cfg.vocabulary_overlap * static_cast<double>(cfg.vocabulary_per_user)));
  const std::size_t private_per_user = cfg.vocabulary_per_user - shared_per_user;
  const std::size_t shared_pool = std::max<std::size_t>(cfg.vocabulary_per_user, 1);
  std::uint64_t next_word = shared_pool;

  std::exponential_distribution<double> gap(cfg.queries_per_hour / 3'600'000.0);
  std::uniform_int_distribution<std::size_t> terms_n(cfg.min_terms, cfg.max_terms);

  SyntheticLog out;
  out.log.format = LogFormat::kSimpleCsv;
  struct Pending {
    LogRecord rec;
    bool sensitive;
  };
  std::vector<Pending> all;
  for (std::size_t u = 0; u < cfg.users; ++u) {
    std::vector<std::string> vocab;
    for (std::size_t i = 0; i < shared_per_user; ++i)
      vocab.push_back(synthetic_word(uniform_index(rng, shared_pool)));
    for (std::size_t i = 0; i < private_per_user; ++i) vocab.push_back(synthetic_word(next_word++));
    // Zipf-like preference: earlier vocabulary entries are favoured.
    std::vector<double> weights;
    for (std::size_t i = 0; i < vocab.size(); ++i) weights.push_back(1.0 / static_cast<double>(i + 1));
    std::shuffle(vocab.begin(), vocab.end(), rng);
    std::discrete_distribution<std::size_t> pick(weights.begin(), weights.end());

    const std::string user = "u" + std::to_string(u + 1);
    std::vector<std::string> history;
    double t = static_cast<double>(cfg.start.count());
    for (std::size_t q = 0; q < cfg.queries_per_user; ++q) {
      t += gap(rng);
      std::string text;
      bool sensitive = unit(rng) < cfg.sensitive_fraction;
      if (!sensitive && !history.empty() && unit(rng) < cfg.repeat_probability) {
        text = history[uniform_index(rng, history.size())];
      } else {
        std::vector<std::string> words;
        const std::size_t n = terms_n(rng);
        while (words.size() < n) {
          auto w = vocab[pick(rng)];
          if (std::find(words.begin(), words.end(), w) == words.end()) words.push_back(w);
          if (words.size() == vocab.size()) break;
        }
        if (sensitive) words.push_back(sensitive_terms[uniform_index(rng, sensitive_terms.size())]);
        std::shuffle(words.begin(), words.end(), rng);
        for (const auto& w : words) text += (text.empty() ? "" : " ") + w;
        if (!sensitive) history.push_back(text);
      }
      all.push_back({{user, text, Timestamp(static_cast<std::int64_t>(t))}, sensitive});
    }
  }
  std::stable_sort(all.begin(), all.end(), [](const Pending& a, const Pending& b) {
    return a.rec.at < b.rec.at;
  });
  for (auto& p : all) {
    if (p.sensitive) out.sensitive.insert(out.log.records.size());
    out.log.records.push_back(std::move(p.rec));
  }
  return out;
}

}  // namespace veil
