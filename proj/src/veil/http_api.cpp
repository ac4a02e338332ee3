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

#include "veil/http_api.hpp"

#include <httplib.h>
#include <json.hpp>

#include "veil/error.hpp"

namespace veil {

using json = nlohmann::json;

namespace {

ApiResponse reply(int status, const json& body) { return {status, body.dump()}; }

ApiResponse error_reply(int status, const std::string& message) {
  return reply(status, json{{"error", message}});
}

int http_status_for(Errc code) {
  switch (code) {
    case Errc::kInvalidArgument:
    case Errc::kParse:
      return 400;
    case Errc::kNotBootstrapped:
      return 503;
    case Errc::kTimeout:
      return 504;
    default:
      return 502;
  }
}

json decision_json(const ProtectionDecision& d) {
  return {{"k", d.k},
          {"semantic_sensitive", d.semantic_sensitive},
          {"linkability", d.linkability},
          {"matched_topics", d.matched_topics}};
}

}  // namespace

ClientApi::ClientApi(RelayNode& node, std::chrono::milliseconds search_wait)
    : node_(node), search_wait_(search_wait) {}

ApiResponse ClientApi::handle(const ApiRequest& request) {
  std::string path = request.path.substr(0, request.path.find('?'));
  if (path.size() > 1 && path.back() == '/') path.pop_back();

  struct Route {
    const char* path;
    const char* method;
  };
  static constexpr Route kRoutes[] = {{"/search", "POST"},
                                      {"/status", "GET"},
                                      {"/config", "GET"},
                                      {"/config/topics", "PUT"},
                                      {"/decisions/recent", "GET"}};
  bool known_path = false;
  for (const auto& r : kRoutes) {
    if (path != r.path) continue;
    known_path = true;
    if (request.method != r.method) continue;
    try {
      if (path == "/search") return search(request.body);
      if (path == "/status") return status();
      if (path == "/config") return config();
      if (path == "/config/topics") return put_topics(request.body);
      return recent();
    } catch (const Error& e) {
      return error_reply(http_status_for(e.code()), e.what());
    } catch (const std::exception& e) {
      return error_reply(500, e.what());
    }
  }
  if (known_path) return error_reply(405, "method not allowed");
  return error_reply(404, "not found");
}

ApiResponse ClientApi::search(const std::string& body) {
  std::string q;
  try {
    auto j = json::parse(body);
    q = j.at("q").get<std::string>();
  } catch (const json::exception&) {
    return error_reply(400, "expected {\"q\": string}");
  }
  if (TermVector(q).empty()) return error_reply(400, "query has no terms");
  if (!node_.core().bootstrapped())
    return error_reply(503, "node is not bootstrapped");

  auto out = node_.submit_blocking(q, search_wait_);
  if (!out.ok) return error_reply(http_status_for(out.error_code), out.error);
  json results = json::array();
  for (const auto& r : out.results)
    results.push_back({{"url", r.url}, {"title", r.title}, {"rank", r.rank}});
  return reply(200, json{{"results", results},
                         {"decision", decision_json(out.decision)},
                         {"k_effective", out.k_effective},
                         {"degraded", out.degraded}});
}

ApiResponse ClientApi::status() {
  auto s = node_.core().status();
  const auto& c = s.counters;
  return reply(200, json{{"node_id", node_.id()},
                         {"bootstrapped", node_.core().bootstrapped()},
                         {"view_size", s.view_size},
                         {"eligible_relays", s.eligible_relays},
                         {"table_size", s.table_size},
                         {"pending", s.pending},
                         {"sessions", s.sessions},
                         {"degraded_count", node_.degraded_count()},
                         {"forwards_handled", c.forwards_handled},
                         {"replays_dropped", c.replays_dropped},
                         {"queries_completed", c.queries_completed},
                         {"queries_failed", c.queries_failed}});
}

ApiResponse ClientApi::config() {
  const auto& cfg = node_.config();
  return reply(200, json{{"k_max", cfg.sensitivity.k_max},
                         {"alpha", cfg.sensitivity.smoothing_alpha},
                         {"available_topics", node_.available_topics()},
                         {"enabled_topics", node_.enabled_topics()},
                         {"view_size", cfg.core.sampling.view_size},
                         {"table_capacity", cfg.core.table_capacity},
                         {"bucket_size", cfg.core.bucket_size},
                         {"deadline_ms", cfg.core.deadline.count()}});
}

ApiResponse ClientApi::put_topics(const std::string& body) {
  std::vector<std::string> topics;
  try {
    auto j = json::parse(body);
    if (!j.is_array()) return error_reply(400, "expected a JSON array of topics");
    topics = j.get<std::vector<std::string>>();
  } catch (const json::exception&) {
    return error_reply(400, "expected a JSON array of topics");
  }
  node_.set_enabled_topics(std::move(topics));
  return reply(200, json{{"enabled_topics", node_.enabled_topics()}});
}

ApiResponse ClientApi::recent() {
  json arr = json::array();
  for (const auto& e : node_.recent_decisions()) {
    auto d = decision_json(e.decision);
    d["query_id"] = e.query_id;
    d["at_ms"] = e.at.count();
    d["k_effective"] = e.k_effective;
    d["degraded"] = e.degraded;
    d["ok"] = e.ok;
    arr.push_back(std::move(d));
  }
  return reply(200, arr);
}

struct ApiServer::Impl {
  ClientApi& api;
  std::string host;
  int port;
  httplib::Server server;
  std::thread thread;
};

ApiServer::ApiServer(ClientApi& api, std::string host, int port)
    : impl_(new Impl{api, std::move(host), port, {}, {}}) {
  auto handler = [this](const httplib::Request& req, httplib::Response& res) {
    auto out = impl_->api.handle({req.method, req.path, req.body});
    res.status = out.status;
    res.set_content(out.body, "application/json");
  };
  const char* pattern = R"(/.*)";
  impl_->server.Get(pattern, handler);
  impl_->server.Post(pattern, handler);
  impl_->server.Put(pattern, handler);
  impl_->server.Delete(pattern, handler);
}

ApiServer::~ApiServer() { stop(); }

int ApiServer::start() {
  int port = impl_->port;
  if (port == 0) {
    port = impl_->server.bind_to_any_port(impl_->host);
  } else if (!impl_->server.bind_to_port(impl_->host, port)) {
    port = -1;
  }
  if (port < 0)
    throw Error(Errc::kIo, "cannot bind api on " + impl_->host + ":" +
                               std::to_string(impl_->port));
  impl_->thread = std::thread([this] { impl_->server.listen_after_bind(); });
  impl_->server.wait_until_ready();
  return port;
}

void ApiServer::stop() {
  if (!impl_) return;
  impl_->server.stop();
  if (impl_->thread.joinable()) impl_->thread.join();
}

}  // namespace veil
