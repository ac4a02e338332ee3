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

#include "veil/api_ops.hpp"

#include <fstream>
#include <sstream>

#include <json.hpp>

#include "veil/bench.hpp"
#include "veil/error.hpp"
#include "veil/evaluation.hpp"
#include "veil/simulator.hpp"
#include "veil/synthetic.hpp"

namespace veil {

using json = nlohmann::json;

namespace {

json parse_object(const std::string& text) {
  if (text.find_first_not_of(" \t\r\n") == std::string::npos) return json::object();
  try {
    auto j = json::parse(text);
    if (!j.is_object()) throw Error(Errc::kParse, "expected a JSON object");
    return j;
  } catch (const json::exception& e) {
    throw Error(Errc::kParse, std::string("bad request: ") + e.what());
  }
}

template <typename T>
T get_or(const json& j, const char* key, T fallback) {
  try {
    return j.contains(key) ? j.at(key).get<T>() : fallback;
  } catch (const json::exception& e) {
    throw Error(Errc::kParse, std::string("bad value for ") + key + ": " + e.what());
  }
}

LogFormat guess_format(const json& j, const std::string& path) {
  if (j.contains("log_format")) return parse_log_format(j.at("log_format").get<std::string>());
  return path.ends_with(".tsv") || path.ends_with(".txt") ? LogFormat::kAolTsv
                                                          : LogFormat::kSimpleCsv;
}

std::vector<SensitiveTopicDictionary> dictionaries(const json& j) {
  if (j.contains("dict_dir")) return load_dictionary_dir(j.at("dict_dir").get<std::string>());
  return builtin_dictionaries();
}

SyntheticLogConfig synthetic_config(const json& s) {
  SyntheticLogConfig c;
  c.users = get_or<std::size_t>(s, "users", c.users);
  c.queries_per_user = get_or<std::size_t>(s, "queries_per_user", c.queries_per_user);
  c.vocabulary_overlap = get_or<double>(s, "vocabulary_overlap", c.vocabulary_overlap);
  c.vocabulary_per_user = get_or<std::size_t>(s, "vocabulary_per_user", c.vocabulary_per_user);
  c.sensitive_fraction = get_or<double>(s, "sensitive_fraction", c.sensitive_fraction);
  c.repeat_probability = get_or<double>(s, "repeat_probability", c.repeat_probability);
  c.queries_per_hour = get_or<double>(s, "queries_per_hour", c.queries_per_hour);
  c.seed = get_or<std::uint64_t>(s, "seed", c.seed);
  c.validate();
  return c;
}

std::set<std::uint64_t> read_truth(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(Errc::kIo, "cannot open truth file " + path);
  std::set<std::uint64_t> out;
  std::string line;
  std::uint64_t i = 0;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line == "1") out.insert(i);
    else if (line != "0") throw Error(Errc::kParse, "truth lines must be 0 or 1");
    ++i;
  }
  return out;
}

}  // namespace

std::string simulate_json(const std::string& request) {
  auto j = parse_object(request);
  const bool logs = get_or<bool>(j, "include_logs", false);
  j.erase("include_logs");
  std::filesystem::path base = get_or<std::string>(j, "base_dir", "");
  j.erase("base_dir");
  auto cfg = parse_sim_config(j.dump(), base);
  return run_simulation(cfg).to_json(logs);
}

std::string bench_json(const std::string& request) {
  auto j = parse_object(request);
  BenchConfig cfg;
  cfg.rates = get_or<std::vector<double>>(j, "rates", cfg.rates);
  cfg.requests_per_rate = get_or<std::size_t>(j, "requests_per_rate", cfg.requests_per_rate);
  cfg.trace_size = get_or<std::size_t>(j, "trace_size", cfg.trace_size);
  cfg.wall_clock_requests =
      get_or<std::size_t>(j, "wall_clock_requests", cfg.wall_clock_requests);
  cfg.seed = get_or<std::uint64_t>(j, "seed", cfg.seed);
  if (cfg.rates.empty()) throw Error(Errc::kInvalidArgument, "no rates given");
  return run_throughput_bench(cfg).to_json();
}

std::string evaluate_json(const std::string& request) {
  auto j = parse_object(request);
  AttackConfig cfg;
  cfg.mechanism = parse_mechanism(get_or<std::string>(j, "mechanism", "adaptive"));
  cfg.sensitivity.k_max = get_or<int>(j, "k_max", 7);
  cfg.sensitivity.smoothing_alpha = get_or<double>(j, "alpha", 0.5);
  cfg.seed = get_or<std::uint64_t>(j, "seed", 1);
  cfg.online_adversary = get_or<bool>(j, "online_adversary", false);
  cfg.dictionaries = dictionaries(j);
  if (j.contains("topics"))
    cfg.dictionaries = restrict_to_topics(cfg.dictionaries,
                                          j.at("topics").get<std::vector<std::string>>());

  QueryLog log;
  std::optional<std::set<std::uint64_t>> truth;
  json source;
  if (j.contains("log_path")) {
    auto path = j.at("log_path").get<std::string>();
    log = ingest_log(path, guess_format(j, path));
    source = {{"log_path", path}, {"format", to_string(log.format)}};
  } else {
    auto sc = synthetic_config(j.value("synthetic", json::object()));
    auto synth = generate_log(sc, cfg.dictionaries);
    log = std::move(synth.log);
    truth = std::move(synth.sensitive);
    source = {{"synthetic", {{"users", sc.users}, {"queries_per_user", sc.queries_per_user},
                             {"vocabulary_overlap", sc.vocabulary_overlap},
                             {"sensitive_fraction", sc.sensitive_fraction},
                             {"seed", sc.seed}}}};
  }
  auto split = split_train_test(log);
  auto out = run_attack(split, cfg);

  json per_user = json::array();
  for (const auto& [user, s] : out.per_user)
    per_user.push_back({{"user", user}, {"real_queries", s.real_queries},
                        {"reidentified", s.reidentified}});
  json hist = json::object();
  for (int k : out.k_values) hist[std::to_string(k)] = hist.value(std::to_string(k), 0) + 1;
  json r = {{"mechanism", to_string(out.mechanism)},
            {"k_max", out.k_max},
            {"reidentification_rate", out.rate},
            {"real_query_rate", out.real_rate},
            {"reidentified", out.reidentified},
            {"real_queries", out.real_queries},
            {"stream_queries", out.stream_queries},
            {"mean_k", out.mean_k()},
            {"k_cdf", out.k_cdf()},
            {"k_histogram", hist},
            {"fake_shortfall", out.fake_shortfall},
            {"online_adversary", cfg.online_adversary},
            {"users", split.profiles.size()},
            {"dropped_users", split.dropped_users},
            {"training_queries", split.training_total},
            {"test_queries", split.test.size()},
            {"skipped_rows", log.skipped},
            {"source", source},
            {"per_user", per_user}};
  if (truth) {
    auto cat = categorize_log(log, cfg.dictionaries, &*truth);
    r["precision"] = cat.against_truth->precision;
    r["recall"] = cat.against_truth->recall;
  }
  return r.dump(2);
}

std::string categorize_json(const std::string& request) {
  auto j = parse_object(request);
  if (!j.contains("log_path")) throw Error(Errc::kInvalidArgument, "log_path is required");
  auto path = j.at("log_path").get<std::string>();
  auto log = ingest_log(path, guess_format(j, path));
  auto dicts = dictionaries(j);
  std::optional<std::set<std::uint64_t>> truth;
  if (j.contains("truth_path")) truth = read_truth(j.at("truth_path").get<std::string>());
  auto rep = categorize_log(log, dicts, truth ? &*truth : nullptr);
  json r = {{"queries", rep.queries},
            {"sensitive", rep.sensitive},
            {"sensitive_fraction", rep.queries ? static_cast<double>(rep.sensitive) /
                                                     static_cast<double>(rep.queries)
                                               : 0.0},
            {"per_topic", rep.per_topic},
            {"skipped_rows", log.skipped}};
  if (rep.against_truth) {
    r["precision"] = rep.against_truth->precision;
    r["recall"] = rep.against_truth->recall;
  }
  return r.dump(2);
}

std::string generate_log_csv(const std::string& request) {
  auto j = parse_object(request);
  auto sc = synthetic_config(j);
  auto synth = generate_log(sc, dictionaries(j));
  std::ostringstream out;
  write_simple_csv(synth.log, out);
  return out.str();
}

std::string normalize_json(const std::string& text) {
  return json(normalize(text)).dump();
}

}  // namespace veil
