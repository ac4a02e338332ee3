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

#ifndef VEIL_NODE_ENV_HPP_
#define VEIL_NODE_ENV_HPP_

#include <functional>
#include <string>
#include <string_view>

#include "veil/backend.hpp"
#include "veil/core.hpp"
#include "veil/crypto.hpp"

namespace veil {

// Everything the sealed core asks of its host: the equivalent of ocalls.
// Implementations must tolerate calls from any thread and must not call back
// into the core synchronously from send() or schedule_at().
class NodeEnvironment {
 public:
  virtual ~NodeEnvironment() = default;

  virtual Timestamp now() = 0;

  // Fire-and-forget delivery of one encoded frame.
  virtual void send(const PeerId& to, Bytes frame) = 0;

  // Issue query_text to the search engine on behalf of this node. done may
  // run synchronously or later, on any thread.
  virtual void search(const std::string& query_text,
                      std::function<void(BackendReply)> done) = 0;

  // Run fn at (or after) the given time.
  virtual void schedule_at(Timestamp at, std::function<void()> fn) = 0;

  // Host-side diagnostic log. The sealed core never passes query text here.
  virtual void log(std::string_view line) { (void)line; }
};

}  // namespace veil

#endif  // VEIL_NODE_ENV_HPP_
