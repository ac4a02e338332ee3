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

#ifndef VEIL_NODE_CONFIG_HPP_
#define VEIL_NODE_CONFIG_HPP_

#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>

#include "veil/relay_node.hpp"

namespace veil {

// Settings for a live node. Peer ids are listen addresses ("host:port").
struct LiveNodeConfig {
  NodeConfig node;
  std::string listen_addr = "127.0.0.1:7400";
  std::string api_addr = "127.0.0.1:7480";
  std::filesystem::path registry_path;
  std::filesystem::path dict_dir;
  std::filesystem::path seed_path;
  std::filesystem::path corpus_path;
  std::string backend = "mock";  // mock | http
  std::string http_url_template;
  std::uint64_t block_threshold = 1000;
  std::uint64_t seed = 1;
};

// Accepts a JSON object or key=value lines ('#' comments). Relative paths
// are resolved against base_dir. Unknown keys and bad values throw
// Error(kParse) / Error(kInvalidArgument).
LiveNodeConfig parse_node_config(std::string_view text,
                                 const std::filesystem::path& base_dir = {});
LiveNodeConfig load_node_config(const std::filesystem::path& path);

// Splits "host:port"; throws Error(kInvalidArgument).
std::pair<std::string, int> split_host_port(const std::string& addr);

}  // namespace veil

#endif  // VEIL_NODE_CONFIG_HPP_
