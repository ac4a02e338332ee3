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

#include "veil/node_config.hpp"

#include <fstream>
#include <sstream>

#include <json.hpp>

#include "veil/error.hpp"

namespace veil {

using json = nlohmann::json;

namespace {

std::string trim(std::string_view s) {
  auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string_view::npos) return {};
  auto e = s.find_last_not_of(" \t\r\n");
  return std::string(s.substr(b, e - b + 1));
}

std::vector<std::string> split_list(const std::string& s) {
  std::vector<std::string> out;
  std::stringstream in(s);
  std::string item;
  while (std::getline(in, item, ',')) {
    auto t = trim(item);
    if (!t.empty()) out.push_back(t);
  }
  return out;
}

// Every value arrives as JSON so both syntaxes share one setter.
void apply(LiveNodeConfig& c, const std::string& key, const json& v,
           const std::filesystem::path& base) {
  auto path = [&] {
    std::filesystem::path p = v.get<std::string>();
    return p.is_relative() && !base.empty() ? base / p : p;
  };
  auto list = [&] {
    if (v.is_array()) return v.get<std::vector<std::string>>();
    return split_list(v.get<std::string>());
  };
  auto& core = c.node.core;
  auto& sens = c.node.sensitivity;
  if (key == "k_max") sens.k_max = v.get<int>();
  else if (key == "alpha") sens.smoothing_alpha = v.get<double>();
  else if (key == "profile_window") sens.profile_window = v.get<std::size_t>();
  else if (key == "topics") sens.enabled_topics = list();
  else if (key == "forced_k") c.node.forced_k = v.get<int>();
  else if (key == "view_size") core.sampling.view_size = v.get<std::size_t>();
  else if (key == "shuffle_period_ms") core.sampling.shuffle_period = Timestamp(v.get<std::int64_t>());
  else if (key == "table_capacity") core.table_capacity = v.get<std::size_t>();
  else if (key == "bucket_size") core.bucket_size = v.get<std::size_t>();
  else if (key == "deadline_ms") core.deadline = Timestamp(v.get<std::int64_t>());
  else if (key == "retries") core.real_path_retries = v.get<int>();
  else if (key == "allowed_digests") core.allowed_digests = list();
  else if (key == "fixed_relay") core.fixed_relay = v.get<std::string>();
  else if (key == "registry_path") c.registry_path = path();
  else if (key == "dict_dir") c.dict_dir = path();
  else if (key == "seed_path") c.seed_path = path();
  else if (key == "corpus_path") c.corpus_path = path();
  else if (key == "listen_addr") c.listen_addr = v.get<std::string>();
  else if (key == "api_addr") c.api_addr = v.get<std::string>();
  else if (key == "backend") c.backend = v.get<std::string>();
  else if (key == "http_url_template") c.http_url_template = v.get<std::string>();
  else if (key == "block_threshold") c.block_threshold = v.get<std::uint64_t>();
  else if (key == "seed") c.seed = v.get<std::uint64_t>();
  else throw Error(Errc::kParse, "unknown config key: " + key);
}

json scalar(const std::string& raw) {
  // Numbers and booleans parse as JSON; anything else stays a string.
  try {
    auto j = json::parse(raw);
    if (j.is_number() || j.is_boolean() || j.is_array()) return j;
  } catch (const json::exception&) {
  }
  return raw;
}

}  // namespace

std::pair<std::string, int> split_host_port(const std::string& addr) {
  auto colon = addr.rfind(':');
  if (colon == std::string::npos || colon == 0 || colon + 1 == addr.size())
    throw Error(Errc::kInvalidArgument, "expected host:port, got " + addr);
  int port = 0;
  try {
    port = std::stoi(addr.substr(colon + 1));
  } catch (const std::exception&) {
    throw Error(Errc::kInvalidArgument, "bad port in " + addr);
  }
  if (port < 0 || port > 65535)
    throw Error(Errc::kInvalidArgument, "port out of range in " + addr);
  return {addr.substr(0, colon), port};
}

LiveNodeConfig parse_node_config(std::string_view text,
                                 const std::filesystem::path& base_dir) {
  LiveNodeConfig c;
  auto start = text.find_first_not_of(" \t\r\n");
  try {
    if (start != std::string_view::npos && text[start] == '{') {
      auto j = json::parse(text);
      for (const auto& [key, value] : j.items()) apply(c, key, value, base_dir);
    } else {
      std::stringstream in{std::string(text)};
      std::string line;
      int lineno = 0;
      while (std::getline(in, line)) {
        ++lineno;
        auto t = trim(line);
        if (t.empty() || t[0] == '#') continue;
        auto eq = t.find('=');
        if (eq == std::string::npos)
          throw Error(Errc::kParse, "line " + std::to_string(lineno) + ": expected key=value");
        apply(c, trim(t.substr(0, eq)), scalar(trim(t.substr(eq + 1))), base_dir);
      }
    }
  } catch (const json::exception& e) {
    throw Error(Errc::kParse, std::string("bad config value: ") + e.what());
  }
  c.node.core.self_id = c.listen_addr;
  split_host_port(c.listen_addr);
  split_host_port(c.api_addr);
  c.node.sensitivity.validate();
  if (c.backend != "mock" && c.backend != "http")
    throw Error(Errc::kInvalidArgument, "backend must be mock or http");
  if (c.backend == "http" && c.http_url_template.empty())
    throw Error(Errc::kInvalidArgument, "http backend needs http_url_template");
  if (c.node.core.bucket_size == 0)
    throw Error(Errc::kInvalidArgument, "bucket_size must be positive");
  if (c.node.core.deadline.count() <= 0)
    throw Error(Errc::kInvalidArgument, "deadline_ms must be positive");
  return c;
}

LiveNodeConfig load_node_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(Errc::kIo, "cannot open config " + path.string());
  std::stringstream buf;
  buf << in.rdbuf();
  return parse_node_config(buf.str(), path.parent_path());
}

}  // namespace veil
