// Copyright 2026 The FedRisk Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

// HMAC-SHA256 tags (OpenSSL) and a branch-free tag comparison.

#pragma once

#include <openssl/evp.h>
#include <openssl/hmac.h>

#include <array>
#include <cstdint>
#include <random>
#include <span>

#include "fedrisk/bytes.hpp"
#include "fedrisk/error.hpp"

namespace fedrisk {

inline constexpr std::size_t kTagSize = 32;
inline constexpr std::size_t kKeySize = 32;

using MacTag = std::array<std::uint8_t, kTagSize>;
using MacKey = std::array<std::uint8_t, kKeySize>;

inline MacTag hmac_sha256(std::span<const std::uint8_t> key,
                          std::span<const std::uint8_t> message) {
  MacTag tag{};
  unsigned int len = 0;
  const unsigned char* ok =
      HMAC(EVP_sha256(), key.data(), static_cast<int>(key.size()),
           message.data(), message.size(), tag.data(), &len);
  if (ok == nullptr || len != kTagSize) {
    fail(ErrorCode::kInvalidArgument, "HMAC computation failed");
  }
  return tag;
}

inline std::array<std::uint8_t, 32> sha256(std::span<const std::uint8_t> data) {
  std::array<std::uint8_t, 32> digest{};
  unsigned int len = 0;
  if (EVP_Digest(data.data(), data.size(), digest.data(), &len, EVP_sha256(),
                 nullptr) != 1 ||
      len != digest.size()) {
    fail(ErrorCode::kInvalidArgument, "SHA-256 computation failed");
  }
  return digest;
}

// Touches every byte regardless of where the first difference is.
inline bool constant_time_equal(std::span<const std::uint8_t> a,
                                std::span<const std::uint8_t> b) {
  if (a.size() != b.size()) return false;
  std::uint8_t acc = 0;
  for (std::size_t i = 0; i < a.size(); ++i) acc |= a[i] ^ b[i];
  return acc == 0;
}

// Keys for simulated participants come from a seeded generator so that whole
// runs replay bit-for-bit.
inline MacKey derive_key(std::mt19937_64& rng) {
  MacKey key{};
  for (std::size_t i = 0; i < kKeySize; i += 8) {
    const std::uint64_t v = rng();
    for (std::size_t j = 0; j < 8; ++j) {
      key[i + j] = static_cast<std::uint8_t>(v >> (8 * j));
    }
  }
  return key;
}

}  // namespace fedrisk
