#pragma once

// Authenticated symmetric wrapping of satellite-to-TCS frames under the
// pre-negotiated key k_{j-tcs}. Wrapped frame: nonce || ciphertext || tag.

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string_view>
#include <vector>

#include "psaa/bits.hpp"
#include "psaa/rng.hpp"

namespace psaa::symwrap {

enum class Cipher { kAes256Gcm, kChaCha20Poly1305 };

std::string_view cipher_name(Cipher c);
/// "aes-256-gcm" or "chacha20-poly1305"; throws std::invalid_argument.
Cipher cipher_from_name(std::string_view name);

inline constexpr std::size_t kNonceBytes = 12;
inline constexpr std::size_t kTagBytes = 16;
inline constexpr std::size_t kOverheadBytes = kNonceBytes + kTagBytes;

std::vector<std::uint8_t> seal(Cipher c, const Digest& key, std::span<const std::uint8_t> plaintext,
                               std::span<const std::uint8_t> aad, Rng& rng);
/// nullopt when the frame is malformed or authentication fails.
std::optional<std::vector<std::uint8_t>> open(Cipher c, const Digest& key, std::span<const std::uint8_t> frame,
                                              std::span<const std::uint8_t> aad);

}  // namespace psaa::symwrap
