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

#ifndef VEIL_LIVE_NODE_HPP_
#define VEIL_LIVE_NODE_HPP_

#include <atomic>
#include <condition_variable>
#include <deque>
#include <functional>
#include <map>
#include <memory>
#include <mutex>
#include <queue>
#include <thread>
#include <vector>

#include "veil/backend.hpp"
#include "veil/http_api.hpp"
#include "veil/node_config.hpp"
#include "veil/node_env.hpp"
#include "veil/relay_node.hpp"

namespace veil {

// Length-prefixed frames over TCP. Peer ids are "host:port" strings.
class TcpTransport {
 public:
  using FrameHandler = std::function<void(Bytes)>;

  TcpTransport(std::string listen_addr, FrameHandler on_frame);
  ~TcpTransport();
  TcpTransport(const TcpTransport&) = delete;
  TcpTransport& operator=(const TcpTransport&) = delete;

  // Binds and starts accepting. Throws Error(kIo).
  void start();
  void stop();
  // Queues a frame; delivery failures are logged through on_error.
  void send(const PeerId& to, Bytes frame);
  void set_error_log(std::function<void(std::string)> log) { log_ = std::move(log); }

 private:
  void accept_loop();
  void read_loop(int fd);
  void send_loop();
  int connect_to(const PeerId& to);

  std::string listen_addr_;
  FrameHandler on_frame_;
  std::function<void(std::string)> log_;
  int listen_fd_ = -1;
  std::atomic<bool> running_{false};
  std::thread acceptor_;
  std::thread sender_;

  std::mutex readers_mu_;
  std::vector<std::thread> readers_;
  std::vector<int> reader_fds_;

  std::mutex out_mu_;
  std::condition_variable out_cv_;
  std::deque<std::pair<PeerId, Bytes>> outbox_;
  std::map<PeerId, int> connections_;  // sender thread only
};

// Wall clock, a timer thread and a small worker pool for backend calls.
class LiveEnvironment final : public NodeEnvironment {
 public:
  LiveEnvironment(std::shared_ptr<SearchBackend> backend, PeerId self,
                  std::size_t workers = 4);
  ~LiveEnvironment() override;

  void attach(TcpTransport* transport) { transport_ = transport; }
  void stop();

  Timestamp now() override;
  void send(const PeerId& to, Bytes frame) override;
  void search(const std::string& query_text,
              std::function<void(BackendReply)> done) override;
  void schedule_at(Timestamp at, std::function<void()> fn) override;
  void log(std::string_view line) override;

 private:
  struct Timer {
    Timestamp at;
    std::uint64_t seq;
    std::function<void()> fn;
    bool operator>(const Timer& o) const {
      return at != o.at ? at > o.at : seq > o.seq;
    }
  };
  void timer_loop();
  void worker_loop();

  std::shared_ptr<SearchBackend> backend_;
  PeerId self_;
  TcpTransport* transport_ = nullptr;
  std::atomic<bool> running_{true};

  std::mutex timer_mu_;
  std::condition_variable timer_cv_;
  std::priority_queue<Timer, std::vector<Timer>, std::greater<>> timers_;
  std::uint64_t timer_seq_ = 0;
  std::thread timer_thread_;

  std::mutex work_mu_;
  std::condition_variable work_cv_;
  std::deque<std::function<void()>> work_;
  std::vector<std::thread> workers_;
};

// A complete node: transport, environment, relay node and local API.
class LiveNode {
 public:
  explicit LiveNode(LiveNodeConfig cfg);
  ~LiveNode();

  // Loads seed queries, dictionaries and registry, listens, attests peers and
  // serves the API. Returns the bound API port.
  int start();
  void stop();

  RelayNode& node() { return *node_; }
  ClientApi& api() { return *api_; }
  const LiveNodeConfig& config() const { return cfg_; }

 private:
  LiveNodeConfig cfg_;
  std::shared_ptr<SearchBackend> backend_;
  std::unique_ptr<LiveEnvironment> env_;
  std::unique_ptr<RelayNode> node_;
  std::unique_ptr<TcpTransport> transport_;
  std::unique_ptr<ClientApi> api_;
  std::unique_ptr<ApiServer> server_;
  bool started_ = false;
};

std::vector<std::string> read_registry(const std::filesystem::path& path);

}  // namespace veil

#endif  // VEIL_LIVE_NODE_HPP_
