#pragma once

// Bit-exact message codec.
//
// A payload is the concatenation of a message's fields in declaration
// order, each written LSB first: identities and timestamps take 100 bits,
// digests 256, ring elements n * ceil(log2 q) (coefficient 0 first), signals
// n. The outer frame appends zero padding and a 3-bit trailer holding the
// pad length so the frame is a whole number of bytes. Reported sizes count
// payload bits only.

#include <cstddef>
#include <cstdint>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "psaa/messages.hpp"
#include "psaa/ring.hpp"

namespace psaa::wire {

class WireError : public std::runtime_error {
 public:
  enum class Kind { kLength, kRange };
  WireError(Kind kind, const std::string& what) : std::runtime_error(what), kind_(kind) {}
  Kind kind() const { return kind_; }

 private:
  Kind kind_;
};

struct FieldWidths {
  std::size_t id = kIdBits;
  std::size_t timestamp = kTimestampBits;
  std::size_t hash = kHashBits;
  std::size_t ring_element = 0;
  std::size_t signal = 0;

  static FieldWidths for_params(const ring::RingParams& params);
};

inline constexpr unsigned kTrailerBits = 3;

std::size_t payload_bits(protocol::MessageKind kind, const FieldWidths& widths);

/// Payload bits followed by padding and the trailer.
std::vector<std::uint8_t> encode(const protocol::Message& msg);
/// Throws WireError: kLength when the frame is not exactly the kind's width,
/// kRange when a coefficient is >= q or a timestamp exceeds 64 bits.
protocol::Message decode(std::span<const std::uint8_t> frame, protocol::MessageKind kind, const ring::RingPtr& ring);

template <class M>
M decode_as(std::span<const std::uint8_t> frame, protocol::MessageKind kind, const ring::RingPtr& ring) {
  return std::get<M>(decode(frame, kind, ring));
}

/// Payload length recorded in a frame's trailer.
std::size_t frame_payload_bits(std::span<const std::uint8_t> frame);

std::vector<std::uint8_t> encode_vault(const protocol::DeviceVault& vault);
protocol::DeviceVault decode_vault(std::span<const std::uint8_t> frame, const ring::RingPtr& ring);
std::size_t vault_bits(const FieldWidths& widths);

struct SizeReport {
  std::string profile;
  FieldWidths widths;
  std::size_t access_request = 0;
  std::size_t access_response_user = 0;
  std::size_t access_forward_tcs = 0;
  std::size_t user_sent = 0;
  std::size_t satellite_sent = 0;
  std::size_t tcs_sent = 0;
  std::size_t total = 0;
  std::size_t prenegotiation_total = 0;
  std::size_t handover_total = 0;
};

/// Authentication-phase sizes from the field widths alone.
SizeReport size_report(const ring::RingParams& params);

}  // namespace psaa::wire
