#pragma once

// Fixed- and variable-width bit strings plus LSB-first bit streams.
//
// Bit i of any bit string lives in byte i / 8 at position i % 8. Unused high
// bits of the final byte are always zero, so byte-wise equality is bit-wise
// equality.

#include <array>
#include <compare>
#include <cstddef>
#include <cstdint>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace psaa {

std::string to_hex(std::span<const std::uint8_t> bytes);
std::vector<std::uint8_t> from_hex(std::string_view hex);

template <std::size_t Bits>
class FixedBits {
 public:
  static constexpr std::size_t kBits = Bits;
  static constexpr std::size_t kBytes = (Bits + 7) / 8;

  FixedBits() = default;

  /// Takes the first kBits bits of `bytes`; shorter inputs are zero-extended.
  static FixedBits from_bytes(std::span<const std::uint8_t> bytes) {
    FixedBits out;
    for (std::size_t i = 0; i < kBytes && i < bytes.size(); ++i) out.bytes_[i] = bytes[i];
    out.mask_tail();
    return out;
  }

  bool bit(std::size_t i) const { return (bytes_[i / 8] >> (i % 8)) & 1u; }
  void set_bit(std::size_t i, bool v) {
    const auto m = static_cast<std::uint8_t>(1u << (i % 8));
    bytes_[i / 8] = v ? (bytes_[i / 8] | m) : (bytes_[i / 8] & ~m);
  }
  void flip(std::size_t i) { bytes_[i / 8] ^= static_cast<std::uint8_t>(1u << (i % 8)); }

  std::span<const std::uint8_t> bytes() const { return bytes_; }
  std::span<std::uint8_t> mutable_bytes() { return bytes_; }

  FixedBits operator^(const FixedBits& o) const {
    FixedBits out;
    for (std::size_t i = 0; i < kBytes; ++i) out.bytes_[i] = bytes_[i] ^ o.bytes_[i];
    return out;
  }

  std::string hex() const { return to_hex(bytes_); }

  auto operator<=>(const FixedBits&) const = default;

 private:
  void mask_tail() {
    if constexpr (Bits % 8 != 0) bytes_[kBytes - 1] &= static_cast<std::uint8_t>((1u << (Bits % 8)) - 1);
  }

  std::array<std::uint8_t, kBytes> bytes_{};
};

inline constexpr std::size_t kIdBits = 100;
inline constexpr std::size_t kHashBits = 256;
inline constexpr std::size_t kTimestampBits = 100;

/// 100-bit identity (true IDs, TIDs, DIDs).
using Id = FixedBits<kIdBits>;
/// 256-bit output of the system hash h.
using Digest = FixedBits<kHashBits>;

/// Runtime-length bit vector.
class BitVector {
 public:
  BitVector() = default;
  explicit BitVector(std::size_t nbits) : size_(nbits), bytes_((nbits + 7) / 8, 0) {}
  static BitVector from_bytes(std::span<const std::uint8_t> bytes, std::size_t nbits);

  std::size_t size() const { return size_; }
  bool bit(std::size_t i) const { return (bytes_[i / 8] >> (i % 8)) & 1u; }
  void set_bit(std::size_t i, bool v) {
    const auto m = static_cast<std::uint8_t>(1u << (i % 8));
    bytes_[i / 8] = v ? (bytes_[i / 8] | m) : (bytes_[i / 8] & ~m);
  }
  void flip(std::size_t i) { bytes_[i / 8] ^= static_cast<std::uint8_t>(1u << (i % 8)); }

  std::span<const std::uint8_t> bytes() const { return bytes_; }

  std::size_t popcount() const;
  std::size_t hamming_distance(const BitVector& o) const;

  /// Lengths must agree.
  BitVector operator^(const BitVector& o) const;

  bool operator==(const BitVector&) const = default;

 private:
  std::size_t size_ = 0;
  std::vector<std::uint8_t> bytes_;
};

/// Appends fields LSB-first into a growing byte buffer.
class BitWriter {
 public:
  void put(std::uint64_t value, unsigned width);
  void put_bits(std::span<const std::uint8_t> bytes, std::size_t nbits);
  std::size_t bit_size() const { return nbits_; }
  const std::vector<std::uint8_t>& bytes() const { return buf_; }
  std::vector<std::uint8_t> take() && { return std::move(buf_); }

 private:
  std::vector<std::uint8_t> buf_;
  std::size_t nbits_ = 0;
};

class BitReader {
 public:
  BitReader(std::span<const std::uint8_t> bytes, std::size_t nbits) : bytes_(bytes), nbits_(nbits) {}
  /// Throws std::out_of_range when fewer than `width` bits remain.
  std::uint64_t get(unsigned width);
  void get_bits(std::span<std::uint8_t> out, std::size_t nbits);
  std::size_t remaining() const { return nbits_ - pos_; }

 private:
  std::span<const std::uint8_t> bytes_;
  std::size_t nbits_;
  std::size_t pos_ = 0;
};

}  // namespace psaa
