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

#ifndef VEIL_HTTP_API_HPP_
#define VEIL_HTTP_API_HPP_

#include <chrono>
#include <functional>
#include <memory>
#include <string>
#include <thread>

#include "veil/relay_node.hpp"

namespace veil {

struct ApiRequest {
  std::string method;
  std::string path;
  std::string body;
};

struct ApiResponse {
  int status = 200;
  std::string body;
};

// The local HTTP surface consumed by the web client and the CLI, independent
// of any socket so it can be exercised directly.
//   POST /search            {"q": "..."}
//   GET  /status
//   GET  /config
//   PUT  /config/topics     ["health", ...]
//   GET  /decisions/recent
class ClientApi {
 public:
  explicit ClientApi(RelayNode& node,
                     std::chrono::milliseconds search_wait = std::chrono::seconds(15));

  ApiResponse handle(const ApiRequest& request);

 private:
  ApiResponse search(const std::string& body);
  ApiResponse status();
  ApiResponse config();
  ApiResponse put_topics(const std::string& body);
  ApiResponse recent();

  RelayNode& node_;
  std::chrono::milliseconds search_wait_;
};

// Serves ClientApi over HTTP. Binds loopback unless told otherwise.
class ApiServer {
 public:
  ApiServer(ClientApi& api, std::string host, int port);
  ~ApiServer();
  ApiServer(const ApiServer&) = delete;
  ApiServer& operator=(const ApiServer&) = delete;

  // Returns the bound port (useful when port was 0). Throws Error(kIo).
  int start();
  void stop();

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

}  // namespace veil

#endif  // VEIL_HTTP_API_HPP_
