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

#ifndef VEIL_ENVELOPE_HPP_
#define VEIL_ENVELOPE_HPP_

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>

#include "veil/core.hpp"
#include "veil/crypto.hpp"

namespace veil {

enum class MsgType : std::uint8_t {
  kQueryForward = 1,
  kQueryResponse = 2,
  kShuffle = 3,
  kShuffleReply = 4,
  kAttest = 5,
  kAttestReply = 6,
};

const char* to_string(MsgType t);
bool is_sealed(MsgType t);

// Wire message between nodes. For Attest/AttestReply the payload carries the
// cleartext quote (no key exists yet); every other type carries
// AEAD(padded JSON) under the pairwise session key.
struct Envelope {
  Nonce nonce{};
  MsgType msg_type = MsgType::kQueryForward;
  PeerId sender_id;
  Bytes sealed_payload;

  friend bool operator==(const Envelope&, const Envelope&) = default;
};

inline constexpr std::size_t kMaxFrameSize = 16u << 20;

// [4-byte BE length][16-byte nonce][1-byte type][2-byte BE sender length]
// [sender id][payload]; length counts everything after itself.
Bytes encode_frame(const Envelope& env);

// Decodes exactly one frame. Throws Error(kParse) on malformed input.
Envelope decode_frame(std::span<const std::uint8_t> frame);

// Bytes authenticated alongside the payload: nonce, type, sender id.
Bytes associated_data(const Envelope& env);

Envelope seal_envelope(MsgType type, const PeerId& sender, const SessionKey& key,
                       std::string_view body, std::size_t bucket_size);
Envelope seal_envelope(MsgType type, const PeerId& sender, const SessionKey& key,
                       std::string_view body, std::size_t bucket_size,
                       const Nonce& nonce);

// Authenticated decryption plus unpadding; nullopt on any failure.
std::optional<std::string> open_envelope(const Envelope& env,
                                         const SessionKey& key);

Envelope plain_envelope(MsgType type, const PeerId& sender,
                        std::string_view body);

// Reassembles frames from a byte stream.
class FrameReader {
 public:
  void feed(std::span<const std::uint8_t> data);
  // Next complete frame (including its length prefix). Throws Error(kParse)
  // when a declared length exceeds kMaxFrameSize.
  std::optional<Bytes> next();

 private:
  Bytes buffer_;
  std::size_t offset_ = 0;
};

}  // namespace veil

#endif  // VEIL_ENVELOPE_HPP_
