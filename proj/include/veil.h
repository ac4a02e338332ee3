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

#ifndef VEIL_H_
#define VEIL_H_

#ifdef __cplusplus
extern "C" {
#endif

#if defined(VEIL_BUILDING_LIBRARY)
#define VEIL_API __attribute__((visibility("default")))
#else
#define VEIL_API
#endif

typedef enum veil_status {
  VEIL_OK = 0,
  VEIL_ERR_INVALID_ARGUMENT = 1,
  VEIL_ERR_IO = 2,
  VEIL_ERR_PARSE = 3,
  VEIL_ERR_NOT_BOOTSTRAPPED = 4,
  VEIL_ERR_NO_PEERS = 5,
  VEIL_ERR_TIMEOUT = 6,
  VEIL_ERR_UNATTESTED = 7,
  VEIL_ERR_CRYPTO = 8,
  VEIL_ERR_BACKEND = 9,
  VEIL_ERR_INTERNAL = 10
} veil_status;

typedef struct veil_node veil_node;

VEIL_API const char* veil_version(void);
VEIL_API const char* veil_status_string(veil_status status);

/* Message for the last failure on the calling thread; never NULL. */
VEIL_API const char* veil_last_error(void);

/* Frees any string returned through an out parameter. NULL is ignored. */
VEIL_API void veil_string_free(char* s);

/* JSON request in, JSON report out (caller frees *out). */
VEIL_API veil_status veil_simulate(const char* request_json, char** out);
VEIL_API veil_status veil_bench(const char* request_json, char** out);
VEIL_API veil_status veil_evaluate(const char* request_json, char** out);
VEIL_API veil_status veil_categorize(const char* request_json, char** out);
VEIL_API veil_status veil_generate_log(const char* request_json, char** csv_out);
VEIL_API veil_status veil_normalize(const char* text, char** terms_json);

/* A live node. config_text is JSON or key=value lines; relative paths are
 * resolved against base_dir (may be NULL). */
VEIL_API veil_status veil_node_create(const char* config_text, const char* base_dir,
                                      veil_node** out);
/* Listens for peers, attests them and serves the local HTTP API. */
VEIL_API veil_status veil_node_start(veil_node* node, int* api_port);
/* Same contract as POST /search; *response_json gets the response body. */
VEIL_API veil_status veil_node_search(veil_node* node, const char* query,
                                      char** response_json);
VEIL_API veil_status veil_node_status(veil_node* node, char** status_json);
/* Dispatches one request to the local API without a socket. */
VEIL_API veil_status veil_node_request(veil_node* node, const char* method,
                                       const char* path, const char* body,
                                       int* http_status, char** response_body);
VEIL_API veil_status veil_node_stop(veil_node* node);
VEIL_API void veil_node_destroy(veil_node* node);

#ifdef __cplusplus
}
#endif

#endif /* VEIL_H_ */
