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

#include "veil/live_node.hpp"

#include <arpa/inet.h>
#include <netdb.h>
#include <netinet/in.h>
#include <netinet/tcp.h>
#include <sys/socket.h>
#include <unistd.h>

#include <cerrno>
#include <chrono>
#include <cstring>
#include <fstream>
#include <iostream>

#include "veil/envelope.hpp"
#include "veil/error.hpp"

namespace veil {

namespace {

int open_socket(const std::string& host, int port, bool listen_side) {
  addrinfo hints{};
  hints.ai_family = AF_UNSPEC;
  hints.ai_socktype = SOCK_STREAM;
  if (listen_side) hints.ai_flags = AI_PASSIVE;
  addrinfo* res = nullptr;
  const auto port_str = std::to_string(port);
  if (getaddrinfo(host.c_str(), port_str.c_str(), &hints, &res) != 0 || !res)
    return -1;
  int fd = -1;
  for (auto* ai = res; ai; ai = ai->ai_next) {
    fd = ::socket(ai->ai_family, ai->ai_socktype, ai->ai_protocol);
    if (fd < 0) continue;
    int one = 1;
    if (listen_side) {
      ::setsockopt(fd, SOL_SOCKET, SO_REUSEADDR, &one, sizeof one);
      if (::bind(fd, ai->ai_addr, ai->ai_addrlen) == 0 && ::listen(fd, 64) == 0)
        break;
    } else {
      ::setsockopt(fd, IPPROTO_TCP, TCP_NODELAY, &one, sizeof one);
      if (::connect(fd, ai->ai_addr, ai->ai_addrlen) == 0) break;
    }
    ::close(fd);
    fd = -1;
  }
  freeaddrinfo(res);
  return fd;
}

bool write_all(int fd, const Bytes& data) {
  std::size_t off = 0;
  while (off < data.size()) {
    auto n = ::send(fd, data.data() + off, data.size() - off, MSG_NOSIGNAL);
    if (n < 0 && errno == EINTR) continue;
    if (n <= 0) return false;
    off += static_cast<std::size_t>(n);
  }
  return true;
}

}  // namespace

// ---- TcpTransport ----------------------------------------------------------

TcpTransport::TcpTransport(std::string listen_addr, FrameHandler on_frame)
    : listen_addr_(std::move(listen_addr)), on_frame_(std::move(on_frame)) {}

TcpTransport::~TcpTransport() { stop(); }

void TcpTransport::start() {
  auto [host, port] = split_host_port(listen_addr_);
  listen_fd_ = open_socket(host, port, true);
  if (listen_fd_ < 0) throw Error(Errc::kIo, "cannot listen on " + listen_addr_);
  running_ = true;
  acceptor_ = std::thread([this] { accept_loop(); });
  sender_ = std::thread([this] { send_loop(); });
}

void TcpTransport::stop() {
  if (!running_.exchange(false)) return;
  ::shutdown(listen_fd_, SHUT_RDWR);
  ::close(listen_fd_);
  out_cv_.notify_all();
  if (acceptor_.joinable()) acceptor_.join();
  if (sender_.joinable()) sender_.join();
  std::vector<std::thread> readers;
  {
    std::lock_guard lock(readers_mu_);
    for (int fd : reader_fds_) ::shutdown(fd, SHUT_RDWR);
    readers.swap(readers_);
  }
  for (auto& t : readers) t.join();
}

void TcpTransport::accept_loop() {
  while (running_) {
    int fd = ::accept(listen_fd_, nullptr, nullptr);
    if (fd < 0) {
      if (!running_) break;
      if (errno == EINTR || errno == ECONNABORTED) continue;
      break;
    }
    std::lock_guard lock(readers_mu_);
    reader_fds_.push_back(fd);
    readers_.emplace_back([this, fd] { read_loop(fd); });
  }
}

void TcpTransport::read_loop(int fd) {
  FrameReader reader;
  std::uint8_t buf[16384];
  while (running_) {
    auto n = ::recv(fd, buf, sizeof buf, 0);
    if (n < 0 && errno == EINTR) continue;
    if (n <= 0) break;
    try {
      reader.feed({buf, static_cast<std::size_t>(n)});
      while (auto frame = reader.next()) on_frame_(std::move(*frame));
    } catch (const Error& e) {
      if (log_) log_(std::string("dropping connection: ") + e.what());
      break;
    }
  }
  ::close(fd);
}

void TcpTransport::send(const PeerId& to, Bytes frame) {
  {
    std::lock_guard lock(out_mu_);
    outbox_.emplace_back(to, std::move(frame));
  }
  out_cv_.notify_one();
}

int TcpTransport::connect_to(const PeerId& to) {
  auto it = connections_.find(to);
  if (it != connections_.end()) return it->second;
  auto [host, port] = split_host_port(to);
  int fd = open_socket(host, port, false);
  if (fd >= 0) connections_[to] = fd;
  return fd;
}

void TcpTransport::send_loop() {
  while (true) {
    std::pair<PeerId, Bytes> item;
    {
      std::unique_lock lock(out_mu_);
      out_cv_.wait(lock, [this] { return !outbox_.empty() || !running_; });
      if (!running_) break;
      item = std::move(outbox_.front());
      outbox_.pop_front();
    }
    bool sent = false;
    // A cached connection may have gone stale; reconnect once.
    for (int attempt = 0; attempt < 2 && !sent; ++attempt) {
      int fd = -1;
      try {
        fd = connect_to(item.first);
      } catch (const Error&) {
        break;
      }
      if (fd < 0) break;
      sent = write_all(fd, item.second);
      if (!sent) {
        ::close(fd);
        connections_.erase(item.first);
      }
    }
    if (!sent && log_) log_("undeliverable frame to " + item.first);
  }
  for (auto& [id, fd] : connections_) ::close(fd);
  connections_.clear();
}

// ---- LiveEnvironment -------------------------------------------------------

LiveEnvironment::LiveEnvironment(std::shared_ptr<SearchBackend> backend,
                                 PeerId self, std::size_t workers)
    : backend_(std::move(backend)), self_(std::move(self)) {
  timer_thread_ = std::thread([this] { timer_loop(); });
  for (std::size_t i = 0; i < workers; ++i)
    workers_.emplace_back([this] { worker_loop(); });
}

LiveEnvironment::~LiveEnvironment() { stop(); }

void LiveEnvironment::stop() {
  if (!running_.exchange(false)) return;
  timer_cv_.notify_all();
  work_cv_.notify_all();
  if (timer_thread_.joinable()) timer_thread_.join();
  for (auto& t : workers_) t.join();
  workers_.clear();
}

Timestamp LiveEnvironment::now() {
  return std::chrono::duration_cast<Timestamp>(
      std::chrono::system_clock::now().time_since_epoch());
}

void LiveEnvironment::send(const PeerId& to, Bytes frame) {
  if (transport_) transport_->send(to, std::move(frame));
}

void LiveEnvironment::search(const std::string& query_text,
                             std::function<void(BackendReply)> done) {
  {
    std::lock_guard lock(work_mu_);
    work_.emplace_back([this, query_text, done = std::move(done)] {
      BackendReply reply;
      try {
        reply = backend_->search(self_, query_text, now());
      } catch (const std::exception& e) {
        reply.status = BackendReply::Status::kError;
        reply.error = e.what();
      }
      done(std::move(reply));
    });
  }
  work_cv_.notify_one();
}

void LiveEnvironment::schedule_at(Timestamp at, std::function<void()> fn) {
  {
    std::lock_guard lock(timer_mu_);
    timers_.push({at, timer_seq_++, std::move(fn)});
  }
  timer_cv_.notify_one();
}

void LiveEnvironment::log(std::string_view line) {
  std::cerr << "[" << self_ << "] " << line << "\n";
}

void LiveEnvironment::timer_loop() {
  std::unique_lock lock(timer_mu_);
  while (running_) {
    if (timers_.empty()) {
      timer_cv_.wait(lock);
      continue;
    }
    auto due = std::chrono::system_clock::time_point(timers_.top().at);
    if (std::chrono::system_clock::now() < due) {
      timer_cv_.wait_until(lock, due);
      continue;
    }
    auto fn = std::move(const_cast<Timer&>(timers_.top()).fn);
    timers_.pop();
    lock.unlock();
    fn();
    lock.lock();
  }
}

void LiveEnvironment::worker_loop() {
  while (true) {
    std::function<void()> job;
    {
      std::unique_lock lock(work_mu_);
      work_cv_.wait(lock, [this] { return !work_.empty() || !running_; });
      if (!running_) return;
      job = std::move(work_.front());
      work_.pop_front();
    }
    job();
  }
}

// ---- LiveNode --------------------------------------------------------------

std::vector<std::string> read_registry(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(Errc::kIo, "cannot open registry " + path.string());
  std::vector<std::string> out;
  std::string line;
  while (std::getline(in, line)) {
    auto b = line.find_first_not_of(" \t\r");
    if (b == std::string::npos || line[b] == '#') continue;
    auto e = line.find_last_not_of(" \t\r");
    out.push_back(line.substr(b, e - b + 1));
  }
  return out;
}

LiveNode::LiveNode(LiveNodeConfig cfg) : cfg_(std::move(cfg)) {
  if (cfg_.backend == "mock") {
    if (cfg_.corpus_path.empty())
      throw Error(Errc::kInvalidArgument, "mock backend needs corpus_path");
    auto corpus = std::make_shared<const MockCorpus>(MockCorpus::load_jsonl(cfg_.corpus_path));
    backend_ = std::make_shared<MockEngine>(
        corpus, RateLimiterConfig{.block_threshold = cfg_.block_threshold});
  } else {
#ifdef VEIL_WITH_HTTP_BACKEND
    backend_ = std::make_shared<HttpBackend>(
        HttpBackendConfig{.url_template = cfg_.http_url_template});
#else
    throw Error(Errc::kInvalidArgument, "built without the http backend");
#endif
  }
  std::vector<SensitiveTopicDictionary> dicts;
  if (!cfg_.dict_dir.empty()) dicts = load_dictionary_dir(cfg_.dict_dir);
  env_ = std::make_unique<LiveEnvironment>(backend_, cfg_.listen_addr);
  node_ = std::make_unique<RelayNode>(cfg_.node, std::move(dicts), *env_, cfg_.seed);
  transport_ = std::make_unique<TcpTransport>(
      cfg_.listen_addr, [this](Bytes frame) { node_->core().on_frame(frame); });
  transport_->set_error_log([this](std::string line) { env_->log(line); });
  env_->attach(transport_.get());
  api_ = std::make_unique<ClientApi>(*node_, cfg_.node.core.deadline * 3);
}

LiveNode::~LiveNode() { stop(); }

int LiveNode::start() {
  if (!cfg_.seed_path.empty()) node_->core().bootstrap_seed(cfg_.seed_path);
  transport_->start();
  started_ = true;
  if (!cfg_.registry_path.empty()) {
    auto registry = read_registry(cfg_.registry_path);
    try {
      node_->core().bootstrap_peers(registry);
    } catch (const Error& e) {
      if (e.code() != Errc::kNoPeers || !cfg_.node.core.fixed_relay) throw;
    }
  }
  auto [host, port] = split_host_port(cfg_.api_addr);
  server_ = std::make_unique<ApiServer>(*api_, host, port);
  return server_->start();
}

void LiveNode::stop() {
  if (server_) server_->stop();
  if (started_) transport_->stop();
  started_ = false;
  if (env_) env_->stop();
}

}  // namespace veil
