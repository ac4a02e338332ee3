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

#ifndef VEIL_CRYPTO_HPP_
#define VEIL_CRYPTO_HPP_

#include <array>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace veil {

using Bytes = std::vector<std::uint8_t>;

inline constexpr std::size_t kNonceSize = 16;
inline constexpr std::size_t kKeySize = 32;
inline constexpr std::size_t kTagSize = 16;
inline constexpr std::size_t kPublicKeySize = 32;
inline constexpr std::size_t kDefaultBucketSize = 256;

using Nonce = std::array<std::uint8_t, kNonceSize>;
using PublicKey = std::array<std::uint8_t, kPublicKeySize>;

// Initializes libsodium once; throws Error(kCrypto) on failure.
void ensure_crypto();

Nonce random_nonce();

// Pairwise symmetric key. Wiped on destruction.
class SessionKey {
 public:
  SessionKey() = default;
  explicit SessionKey(const std::array<std::uint8_t, kKeySize>& bytes)
      : bytes_(bytes) {}
  SessionKey(const SessionKey&) = default;
  SessionKey& operator=(const SessionKey&) = default;
  ~SessionKey();

  const std::array<std::uint8_t, kKeySize>& bytes() const noexcept {
    return bytes_;
  }
  friend bool operator==(const SessionKey&, const SessionKey&) = default;

 private:
  std::array<std::uint8_t, kKeySize> bytes_{};
};

// X25519 key pair generated at start-up inside the sealed core.
class KeyPair {
 public:
  static KeyPair generate();

  KeyPair(const KeyPair&) = delete;
  KeyPair& operator=(const KeyPair&) = delete;
  KeyPair(KeyPair&&) noexcept;
  KeyPair& operator=(KeyPair&&) noexcept;
  ~KeyPair();

  const PublicKey& public_key() const noexcept { return public_; }

  // Both sides derive the same key: H(shared secret || lower pk || higher pk).
  // Throws Error(kCrypto) for degenerate peer keys.
  SessionKey derive_session(const PublicKey& peer) const;

 private:
  KeyPair() = default;
  PublicKey public_{};
  std::array<std::uint8_t, 32> secret_{};
};

// XChaCha20-Poly1305; the 16-byte nonce is zero-extended to 24 bytes.
// Output is ciphertext || tag.
Bytes seal(const SessionKey& key, const Nonce& nonce,
           std::span<const std::uint8_t> associated,
           std::span<const std::uint8_t> plaintext);
std::optional<Bytes> open(const SessionKey& key, const Nonce& nonce,
                          std::span<const std::uint8_t> associated,
                          std::span<const std::uint8_t> sealed);

// [4-byte big-endian length][text][zero fill] up to a multiple of bucket.
Bytes pad_to_bucket(std::string_view text, std::size_t bucket);
std::optional<std::string> unpad(std::span<const std::uint8_t> padded);

// Hex digest identifying a protocol-core build; stands in for the enclave
// measurement carried by an attestation quote.
std::string build_digest(std::string_view build_identity);

std::string to_hex(std::span<const std::uint8_t> bytes);
std::optional<Bytes> from_hex(std::string_view hex);

}  // namespace veil

#endif  // VEIL_CRYPTO_HPP_
