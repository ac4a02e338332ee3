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

#include "veil/envelope.hpp"

#include <algorithm>

#include "veil/error.hpp"

namespace veil {
namespace {

void put_u32(Bytes& out, std::uint32_t v) {
  out.push_back(static_cast<std::uint8_t>(v >> 24));
  out.push_back(static_cast<std::uint8_t>(v >> 16));
  out.push_back(static_cast<std::uint8_t>(v >> 8));
  out.push_back(static_cast<std::uint8_t>(v));
}

std::uint32_t get_u32(const std::uint8_t* p) {
  return (std::uint32_t{p[0]} << 24) | (std::uint32_t{p[1]} << 16) |
         (std::uint32_t{p[2]} << 8) | p[3];
}

bool valid_type(std::uint8_t t) { return t >= 1 && t <= 6; }

}  // namespace

const char* to_string(MsgType t) {
  switch (t) {
    case MsgType::kQueryForward: return "QueryForward";
    case MsgType::kQueryResponse: return "QueryResponse";
    case MsgType::kShuffle: return "Shuffle";
    case MsgType::kShuffleReply: return "ShuffleReply";
    case MsgType::kAttest: return "Attest";
    case MsgType::kAttestReply: return "AttestReply";
  }
  return "?";
}

bool is_sealed(MsgType t) {
  return t != MsgType::kAttest && t != MsgType::kAttestReply;
}

Bytes encode_frame(const Envelope& env) {
  if (env.sender_id.size() > 0xffff)
    throw Error(Errc::kInvalidArgument, "sender id too long");
  const std::size_t body =
      kNonceSize + 1 + 2 + env.sender_id.size() + env.sealed_payload.size();
  if (body > kMaxFrameSize)
    throw Error(Errc::kInvalidArgument, "frame exceeds maximum size");
  Bytes out;
  out.reserve(4 + body);
  put_u32(out, static_cast<std::uint32_t>(body));
  out.insert(out.end(), env.nonce.begin(), env.nonce.end());
  out.push_back(static_cast<std::uint8_t>(env.msg_type));
  out.push_back(static_cast<std::uint8_t>(env.sender_id.size() >> 8));
  out.push_back(static_cast<std::uint8_t>(env.sender_id.size()));
  out.insert(out.end(), env.sender_id.begin(), env.sender_id.end());
  out.insert(out.end(), env.sealed_payload.begin(), env.sealed_payload.end());
  return out;
}

Envelope decode_frame(std::span<const std::uint8_t> frame) {
  constexpr std::size_t kFixed = 4 + kNonceSize + 1 + 2;
  if (frame.size() < kFixed) throw Error(Errc::kParse, "frame truncated");
  const std::uint32_t len = get_u32(frame.data());
  if (len != frame.size() - 4)
    throw Error(Errc::kParse, "frame length mismatch");
  Envelope env;
  std::copy_n(frame.begin() + 4, kNonceSize, env.nonce.begin());
  const std::uint8_t type = frame[4 + kNonceSize];
  if (!valid_type(type)) throw Error(Errc::kParse, "unknown message type");
  env.msg_type = static_cast<MsgType>(type);
  const std::size_t id_len = (std::size_t{frame[kFixed - 2]} << 8) | frame[kFixed - 1];
  if (kFixed + id_len > frame.size())
    throw Error(Errc::kParse, "sender id overruns frame");
  env.sender_id.assign(reinterpret_cast<const char*>(frame.data()) + kFixed,
                       id_len);
  env.sealed_payload.assign(frame.begin() + kFixed + id_len, frame.end());
  return env;
}

Bytes associated_data(const Envelope& env) {
  Bytes ad(env.nonce.begin(), env.nonce.end());
  ad.push_back(static_cast<std::uint8_t>(env.msg_type));
  ad.insert(ad.end(), env.sender_id.begin(), env.sender_id.end());
  return ad;
}

Envelope seal_envelope(MsgType type, const PeerId& sender, const SessionKey& key,
                       std::string_view body, std::size_t bucket_size) {
  return seal_envelope(type, sender, key, body, bucket_size, random_nonce());
}

Envelope seal_envelope(MsgType type, const PeerId& sender, const SessionKey& key,
                       std::string_view body, std::size_t bucket_size,
                       const Nonce& nonce) {
  Envelope env;
  env.nonce = nonce;
  env.msg_type = type;
  env.sender_id = sender;
  auto padded = pad_to_bucket(body, bucket_size);
  env.sealed_payload = seal(key, env.nonce, associated_data(env), padded);
  return env;
}

std::optional<std::string> open_envelope(const Envelope& env,
                                         const SessionKey& key) {
  auto plain = open(key, env.nonce, associated_data(env), env.sealed_payload);
  if (!plain) return std::nullopt;
  return unpad(*plain);
}

Envelope plain_envelope(MsgType type, const PeerId& sender,
                        std::string_view body) {
  Envelope env;
  env.nonce = random_nonce();
  env.msg_type = type;
  env.sender_id = sender;
  env.sealed_payload.assign(body.begin(), body.end());
  return env;
}

void FrameReader::feed(std::span<const std::uint8_t> data) {
  if (offset_ > 0 && offset_ == buffer_.size()) {
    buffer_.clear();
    offset_ = 0;
  }
  buffer_.insert(buffer_.end(), data.begin(), data.end());
}

std::optional<Bytes> FrameReader::next() {
  const std::size_t avail = buffer_.size() - offset_;
  if (avail < 4) return std::nullopt;
  const std::uint32_t len = get_u32(buffer_.data() + offset_);
  if (len > kMaxFrameSize) throw Error(Errc::kParse, "frame too large");
  if (avail < 4 + std::size_t{len}) return std::nullopt;
  Bytes frame(buffer_.begin() + static_cast<std::ptrdiff_t>(offset_),
              buffer_.begin() + static_cast<std::ptrdiff_t>(offset_ + 4 + len));
  offset_ += 4 + len;
  if (offset_ > 4096 && offset_ * 2 > buffer_.size()) {
    buffer_.erase(buffer_.begin(),
                  buffer_.begin() + static_cast<std::ptrdiff_t>(offset_));
    offset_ = 0;
  }
  return frame;
}

}  // namespace veil
