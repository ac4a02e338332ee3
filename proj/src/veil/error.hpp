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

#ifndef VEIL_ERROR_HPP_
#define VEIL_ERROR_HPP_

#include <stdexcept>
#include <string>

namespace veil {

// Mirrors veil_status in the C header; values must stay in sync.
enum class Errc : int {
  kInvalidArgument = 1,
  kIo = 2,
  kParse = 3,
  kNotBootstrapped = 4,
  kNoPeers = 5,
  kTimeout = 6,
  kUnattested = 7,
  kCrypto = 8,
  kBackend = 9,
  kInternal = 10,
};

class Error : public std::runtime_error {
 public:
  Error(Errc code, const std::string& what)
      : std::runtime_error(what), code_(code) {}

  Errc code() const noexcept { return code_; }

 private:
  Errc code_;
};

}  // namespace veil

#endif  // VEIL_ERROR_HPP_
