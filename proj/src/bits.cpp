#include "psaa/bits.hpp"

#include <algorithm>
#include <bit>

namespace psaa {

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

namespace {
int hex_value(char c) {
  if (c >= '0' && c <= '9') return c - '0';
  if (c >= 'a' && c <= 'f') return c - 'a' + 10;
  if (c >= 'A' && c <= 'F') return c - 'A' + 10;
  return -1;
}
}  // namespace

std::vector<std::uint8_t> from_hex(std::string_view hex) {
  if (hex.size() % 2 != 0) throw std::invalid_argument("hex string has odd length");
  std::vector<std::uint8_t> out(hex.size() / 2);
  for (std::size_t i = 0; i < out.size(); ++i) {
    const int hi = hex_value(hex[2 * i]);
    const int lo = hex_value(hex[2 * i + 1]);
    if (hi < 0 || lo < 0) throw std::invalid_argument("invalid hex digit");
    out[i] = static_cast<std::uint8_t>((hi << 4) | lo);
  }
  return out;
}

BitVector BitVector::from_bytes(std::span<const std::uint8_t> bytes, std::size_t nbits) {
  BitVector out(nbits);
  for (std::size_t i = 0; i < out.bytes_.size() && i < bytes.size(); ++i) out.bytes_[i] = bytes[i];
  if (nbits % 8 != 0 && !out.bytes_.empty())
    out.bytes_.back() &= static_cast<std::uint8_t>((1u << (nbits % 8)) - 1);
  return out;
}

std::size_t BitVector::popcount() const {
  std::size_t c = 0;
  for (auto b : bytes_) c += static_cast<std::size_t>(std::popcount(b));
  return c;
}

std::size_t BitVector::hamming_distance(const BitVector& o) const { return (*this ^ o).popcount(); }

BitVector BitVector::operator^(const BitVector& o) const {
  if (o.size_ != size_) throw std::invalid_argument("bit vector length mismatch");
  BitVector out(size_);
  for (std::size_t i = 0; i < bytes_.size(); ++i) out.bytes_[i] = bytes_[i] ^ o.bytes_[i];
  return out;
}

void BitWriter::put(std::uint64_t value, unsigned width) {
  if (width < 64) value &= (std::uint64_t{1} << width) - 1;
  unsigned done = 0;
  while (done < width) {
    if (nbits_ % 8 == 0) buf_.push_back(0);
    const unsigned off = nbits_ % 8;
    const unsigned take = std::min(8 - off, width - done);
    const auto chunk = done < 64 ? static_cast<unsigned>((value >> done) & ((1u << take) - 1)) : 0u;
    buf_.back() |= static_cast<std::uint8_t>(chunk << off);
    nbits_ += take;
    done += take;
  }
}

void BitWriter::put_bits(std::span<const std::uint8_t> bytes, std::size_t nbits) {
  if (nbits_ % 8 == 0 && nbits % 8 == 0) {
    buf_.insert(buf_.end(), bytes.begin(), bytes.begin() + static_cast<std::ptrdiff_t>(nbits / 8));
    nbits_ += nbits;
    return;
  }
  for (std::size_t i = 0; i < nbits / 8; ++i) put(bytes[i], 8);
  if (nbits % 8 != 0) put(bytes[nbits / 8], static_cast<unsigned>(nbits % 8));
}

std::uint64_t BitReader::get(unsigned width) {
  if (width > remaining()) throw std::out_of_range("bit stream exhausted");
  std::uint64_t v = 0;
  unsigned done = 0;
  while (done < width) {
    const unsigned off = pos_ % 8;
    const unsigned take = std::min(8 - off, width - done);
    const std::uint64_t chunk = (bytes_[pos_ / 8] >> off) & ((1u << take) - 1);
    if (done < 64) v |= chunk << done;
    pos_ += take;
    done += take;
  }
  return v;
}

void BitReader::get_bits(std::span<std::uint8_t> out, std::size_t nbits) {
  if (nbits > remaining()) throw std::out_of_range("bit stream exhausted");
  for (auto& b : out) b = 0;
  for (std::size_t i = 0; i < nbits / 8; ++i) out[i] = static_cast<std::uint8_t>(get(8));
  if (nbits % 8 != 0) out[nbits / 8] = static_cast<std::uint8_t>(get(static_cast<unsigned>(nbits % 8)));
}

}  // namespace psaa
