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

#include "veil.h"

#include <cstdlib>
#include <cstring>
#include <memory>
#include <string>

#include <json.hpp>

#include "veil/api_ops.hpp"
#include "veil/error.hpp"
#include "veil/live_node.hpp"

struct veil_node {
  std::unique_ptr<veil::LiveNode> live;
};

namespace {

thread_local std::string g_last_error;

veil_status to_status(veil::Errc code) { return static_cast<veil_status>(code); }

veil_status fail(veil_status status, const std::string& message) {
  g_last_error = message;
  return status;
}

char* dup_string(const std::string& s) {
  char* out = static_cast<char*>(std::malloc(s.size() + 1));
  if (!out) throw std::bad_alloc();
  std::memcpy(out, s.c_str(), s.size() + 1);
  return out;
}

template <typename Fn>
veil_status guarded(Fn&& fn) {
  try {
    g_last_error.clear();
    return fn();
  } catch (const veil::Error& e) {
    return fail(to_status(e.code()), e.what());
  } catch (const std::bad_alloc&) {
    return fail(VEIL_ERR_INTERNAL, "out of memory");
  } catch (const std::exception& e) {
    return fail(VEIL_ERR_INTERNAL, e.what());
  } catch (...) {
    return fail(VEIL_ERR_INTERNAL, "unknown failure");
  }
}

template <typename Op>
veil_status json_op(const char* request, char** out, Op op) {
  if (!out) return fail(VEIL_ERR_INVALID_ARGUMENT, "out must not be NULL");
  *out = nullptr;
  return guarded([&] {
    *out = dup_string(op(request ? std::string(request) : std::string()));
    return VEIL_OK;
  });
}

veil_status from_http(int status) {
  switch (status) {
    case 200: return VEIL_OK;
    case 400: return VEIL_ERR_INVALID_ARGUMENT;
    case 503: return VEIL_ERR_NOT_BOOTSTRAPPED;
    case 504: return VEIL_ERR_TIMEOUT;
    case 502: return VEIL_ERR_BACKEND;
    default: return VEIL_ERR_INTERNAL;
  }
}

}  // namespace

extern "C" {

const char* veil_version(void) { return "0.1.0"; }

const char* veil_status_string(veil_status status) {
  switch (status) {
    case VEIL_OK: return "ok";
    case VEIL_ERR_INVALID_ARGUMENT: return "invalid argument";
    case VEIL_ERR_IO: return "i/o error";
    case VEIL_ERR_PARSE: return "parse error";
    case VEIL_ERR_NOT_BOOTSTRAPPED: return "not bootstrapped";
    case VEIL_ERR_NO_PEERS: return "no eligible peers";
    case VEIL_ERR_TIMEOUT: return "timeout";
    case VEIL_ERR_UNATTESTED: return "peer not attested";
    case VEIL_ERR_CRYPTO: return "crypto failure";
    case VEIL_ERR_BACKEND: return "search backend failure";
    case VEIL_ERR_INTERNAL: return "internal error";
  }
  return "unknown status";
}

const char* veil_last_error(void) { return g_last_error.c_str(); }

void veil_string_free(char* s) { std::free(s); }

veil_status veil_simulate(const char* request_json, char** out) {
  return json_op(request_json, out, veil::simulate_json);
}

veil_status veil_bench(const char* request_json, char** out) {
  return json_op(request_json, out, veil::bench_json);
}

veil_status veil_evaluate(const char* request_json, char** out) {
  return json_op(request_json, out, veil::evaluate_json);
}

veil_status veil_categorize(const char* request_json, char** out) {
  return json_op(request_json, out, veil::categorize_json);
}

veil_status veil_generate_log(const char* request_json, char** csv_out) {
  return json_op(request_json, csv_out, veil::generate_log_csv);
}

veil_status veil_normalize(const char* text, char** terms_json) {
  return json_op(text, terms_json, veil::normalize_json);
}

veil_status veil_node_create(const char* config_text, const char* base_dir,
                             veil_node** out) {
  if (!out || !config_text) return fail(VEIL_ERR_INVALID_ARGUMENT, "NULL argument");
  *out = nullptr;
  return guarded([&] {
    auto cfg = veil::parse_node_config(config_text, base_dir ? base_dir : "");
    auto node = std::make_unique<veil_node>();
    node->live = std::make_unique<veil::LiveNode>(std::move(cfg));
    *out = node.release();
    return VEIL_OK;
  });
}

veil_status veil_node_start(veil_node* node, int* api_port) {
  if (!node) return fail(VEIL_ERR_INVALID_ARGUMENT, "NULL node");
  return guarded([&] {
    int port = node->live->start();
    if (api_port) *api_port = port;
    return VEIL_OK;
  });
}

veil_status veil_node_request(veil_node* node, const char* method, const char* path,
                              const char* body, int* http_status, char** response_body) {
  if (!node || !method || !path || !response_body)
    return fail(VEIL_ERR_INVALID_ARGUMENT, "NULL argument");
  *response_body = nullptr;
  return guarded([&] {
    auto res = node->live->api().handle({method, path, body ? body : ""});
    if (http_status) *http_status = res.status;
    *response_body = dup_string(res.body);
    return VEIL_OK;
  });
}

veil_status veil_node_search(veil_node* node, const char* query, char** response_json) {
  if (!node || !query || !response_json) return fail(VEIL_ERR_INVALID_ARGUMENT, "NULL argument");
  *response_json = nullptr;
  return guarded([&] {
    nlohmann::json body{{"q", query}};
    auto res = node->live->api().handle({"POST", "/search", body.dump()});
    *response_json = dup_string(res.body);
    auto status = from_http(res.status);
    if (status != VEIL_OK) g_last_error = res.body;
    return status;
  });
}

veil_status veil_node_status(veil_node* node, char** status_json) {
  if (!node || !status_json) return fail(VEIL_ERR_INVALID_ARGUMENT, "NULL argument");
  *status_json = nullptr;
  return guarded([&] {
    *status_json = dup_string(node->live->api().handle({"GET", "/status", ""}).body);
    return VEIL_OK;
  });
}

veil_status veil_node_stop(veil_node* node) {
  if (!node) return fail(VEIL_ERR_INVALID_ARGUMENT, "NULL node");
  return guarded([&] {
    node->live->stop();
    return VEIL_OK;
  });
}

void veil_node_destroy(veil_node* node) { delete node; }

}  // extern "C"
