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

#include "veil/crypto.hpp"

#include <sodium.h>

#include <algorithm>
#include <cstring>
#include <mutex>

#include "veil/error.hpp"

namespace veil {
namespace {

using XNonce = std::array<std::uint8_t, crypto_aead_xchacha20poly1305_ietf_NPUBBYTES>;

XNonce extend(const Nonce& n) {
  XNonce x{};
  std::copy(n.begin(), n.end(), x.begin());
  return x;
}

static_assert(crypto_aead_xchacha20poly1305_ietf_KEYBYTES == kKeySize);
static_assert(crypto_aead_xchacha20poly1305_ietf_ABYTES == kTagSize);
static_assert(crypto_scalarmult_BYTES == kPublicKeySize);

}  // namespace

void ensure_crypto() {
  static std::once_flag once;
  static bool ok = false;
  std::call_once(once, [] { ok = sodium_init() >= 0; });
  if (!ok) throw Error(Errc::kCrypto, "libsodium initialization failed");
}

Nonce random_nonce() {
  ensure_crypto();
  Nonce n;
  randombytes_buf(n.data(), n.size());
  return n;
}

SessionKey::~SessionKey() { sodium_memzero(bytes_.data(), bytes_.size()); }

KeyPair KeyPair::generate() {
  ensure_crypto();
  KeyPair kp;
  randombytes_buf(kp.secret_.data(), kp.secret_.size());
  crypto_scalarmult_base(kp.public_.data(), kp.secret_.data());
  return kp;
}

KeyPair::KeyPair(KeyPair&& other) noexcept
    : public_(other.public_), secret_(other.secret_) {
  sodium_memzero(other.secret_.data(), other.secret_.size());
}

KeyPair& KeyPair::operator=(KeyPair&& other) noexcept {
  if (this != &other) {
    public_ = other.public_;
    secret_ = other.secret_;
    sodium_memzero(other.secret_.data(), other.secret_.size());
  }
  return *this;
}

KeyPair::~KeyPair() { sodium_memzero(secret_.data(), secret_.size()); }

SessionKey KeyPair::derive_session(const PublicKey& peer) const {
  std::array<std::uint8_t, crypto_scalarmult_BYTES> shared{};
  if (crypto_scalarmult(shared.data(), secret_.data(), peer.data()) != 0)
    throw Error(Errc::kCrypto, "key agreement failed");
  const bool mine_first = std::memcmp(public_.data(), peer.data(), kPublicKeySize) < 0;
  const auto& lo = mine_first ? public_ : peer;
  const auto& hi = mine_first ? peer : public_;

  crypto_generichash_state st;
  crypto_generichash_init(&st, nullptr, 0, kKeySize);
  crypto_generichash_update(&st, shared.data(), shared.size());
  crypto_generichash_update(&st, lo.data(), lo.size());
  crypto_generichash_update(&st, hi.data(), hi.size());
  std::array<std::uint8_t, kKeySize> key{};
  crypto_generichash_final(&st, key.data(), key.size());
  sodium_memzero(shared.data(), shared.size());
  SessionKey out(key);
  sodium_memzero(key.data(), key.size());
  return out;
}

Bytes seal(const SessionKey& key, const Nonce& nonce,
           std::span<const std::uint8_t> associated,
           std::span<const std::uint8_t> plaintext) {
  ensure_crypto();
  Bytes out(plaintext.size() + kTagSize);
  unsigned long long len = 0;
  auto xn = extend(nonce);
  crypto_aead_xchacha20poly1305_ietf_encrypt(
      out.data(), &len, plaintext.data(), plaintext.size(), associated.data(),
      associated.size(), nullptr, xn.data(), key.bytes().data());
  out.resize(static_cast<std::size_t>(len));
  return out;
}

std::optional<Bytes> open(const SessionKey& key, const Nonce& nonce,
                          std::span<const std::uint8_t> associated,
                          std::span<const std::uint8_t> sealed) {
  ensure_crypto();
  if (sealed.size() < kTagSize) return std::nullopt;
  Bytes out(sealed.size() - kTagSize);
  unsigned long long len = 0;
  auto xn = extend(nonce);
  if (crypto_aead_xchacha20poly1305_ietf_decrypt(
          out.data(), &len, nullptr, sealed.data(), sealed.size(),
          associated.data(), associated.size(), xn.data(),
          key.bytes().data()) != 0)
    return std::nullopt;
  out.resize(static_cast<std::size_t>(len));
  return out;
}

Bytes pad_to_bucket(std::string_view text, std::size_t bucket) {
  if (bucket == 0) throw Error(Errc::kInvalidArgument, "bucket size is zero");
  if (text.size() > 0xffffffffu)
    throw Error(Errc::kInvalidArgument, "payload too large");
  const std::size_t raw = 4 + text.size();
  const std::size_t padded = ((raw + bucket - 1) / bucket) * bucket;
  Bytes out(padded, 0);
  const auto n = static_cast<std::uint32_t>(text.size());
  out[0] = static_cast<std::uint8_t>(n >> 24);
  out[1] = static_cast<std::uint8_t>(n >> 16);
  out[2] = static_cast<std::uint8_t>(n >> 8);
  out[3] = static_cast<std::uint8_t>(n);
  std::memcpy(out.data() + 4, text.data(), text.size());
  return out;
}

std::optional<std::string> unpad(std::span<const std::uint8_t> padded) {
  if (padded.size() < 4) return std::nullopt;
  const std::uint32_t n = (std::uint32_t{padded[0]} << 24) |
                          (std::uint32_t{padded[1]} << 16) |
                          (std::uint32_t{padded[2]} << 8) | padded[3];
  if (n > padded.size() - 4) return std::nullopt;
  return std::string(reinterpret_cast<const char*>(padded.data()) + 4, n);
}

std::string build_digest(std::string_view build_identity) {
  ensure_crypto();
  std::array<std::uint8_t, crypto_hash_sha256_BYTES> h{};
  crypto_hash_sha256(h.data(),
                     reinterpret_cast<const unsigned char*>(build_identity.data()),
                     build_identity.size());
  return to_hex(h);
}

std::string to_hex(std::span<const std::uint8_t> bytes) {
  static constexpr char kDigits[] = "0123456789abcdef";
  std::string out;
  out.reserve(bytes.size() * 2);
  for (auto b : bytes) {
    out.push_back(kDigits[b >> 4]);
    out.push_back(kDigits[b & 0xf]);
  }
  return out;
}

std::optional<Bytes> from_hex(std::string_view hex) {
  if (hex.size() % 2 != 0) return std::nullopt;
  auto val = [](char c) -> int {
    if (c >= '0' && c <= '9') return c - '0';
    if (c >= 'a' && c <= 'f') return c - 'a' + 10;
    if (c >= 'A' && c <= 'F') return c - 'A' + 10;
    return -1;
  };
  Bytes out;
  out.reserve(hex.size() / 2);
  for (std::size_t i = 0; i < hex.size(); i += 2) {
    int hi = val(hex[i]);
    int lo = val(hex[i + 1]);
    if (hi < 0 || lo < 0) return std::nullopt;
    out.push_back(static_cast<std::uint8_t>(hi * 16 + lo));
  }
  return out;
}

}  // namespace veil
