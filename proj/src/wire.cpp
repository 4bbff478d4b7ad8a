#include "psaa/wire.hpp"

#include <array>

namespace psaa::wire {

using namespace psaa::protocol;

namespace {

class FieldWriter {
 public:
  void id(const Id& v) { w_.put_bits(v.bytes(), kIdBits); }
  void digest(const Digest& v) { w_.put_bits(v.bytes(), kHashBits); }
  void timestamp(Timestamp t) {
    w_.put(t.ms, 64);
    w_.put(0, kTimestampBits - 64);
  }
  void element(const ring::RingElement& e) {
    const unsigned width = e.ring().params().coeff_bits();
    for (auto c : e.coeffs()) w_.put(c, width);
  }
  void signal(const recon::SignalVector& s) { w_.put_bits(s.bits.bytes(), s.bits.size()); }
  void bits(const BitVector& b) { w_.put_bits(b.bytes(), b.size()); }

  std::vector<std::uint8_t> frame() && {
    const std::size_t payload = w_.bit_size();
    const unsigned pad = static_cast<unsigned>((8 - (payload + kTrailerBits) % 8) % 8);
    w_.put(0, pad);
    w_.put(pad, kTrailerBits);
    return std::move(w_).take();
  }

 private:
  BitWriter w_;
};

class FieldReader {
 public:
  FieldReader(std::span<const std::uint8_t> bytes, std::size_t nbits, ring::RingPtr ring)
      : r_(bytes, nbits), ring_(std::move(ring)) {}

  Id id() {
    std::array<std::uint8_t, Id::kBytes> b{};
    r_.get_bits(b, kIdBits);
    return Id::from_bytes(b);
  }
  Digest digest() {
    std::array<std::uint8_t, Digest::kBytes> b{};
    r_.get_bits(b, kHashBits);
    return Digest::from_bytes(b);
  }
  Timestamp timestamp() {
    const std::uint64_t low = r_.get(64);
    if (r_.get(kTimestampBits - 64) != 0) throw WireError(WireError::Kind::kRange, "timestamp exceeds 64 bits");
    return Timestamp{low};
  }
  ring::RingElement element() {
    const unsigned width = ring_->params().coeff_bits();
    std::vector<std::uint64_t> coeffs(ring_->n());
    for (auto& c : coeffs) {
      c = r_.get(width);
      if (c >= ring_->q()) throw WireError(WireError::Kind::kRange, "coefficient out of range [0, q)");
    }
    return ring::RingElement(ring_, std::move(coeffs));
  }
  recon::SignalVector signal() { return recon::SignalVector{bits(ring_->n())}; }
  BitVector bits(std::size_t nbits) {
    std::vector<std::uint8_t> b((nbits + 7) / 8);
    r_.get_bits(b, nbits);
    return BitVector::from_bytes(b, nbits);
  }

 private:
  BitReader r_;
  ring::RingPtr ring_;
};

struct Encoder {
  FieldWriter& w;
  void operator()(const RegRequest& m) const {
    w.id(m.user_id);
    w.digest(m.rpw);
    w.element(m.pk);
  }
  void operator()(const RegResponse& m) const {
    w.id(m.did);
    w.digest(m.dp);
    w.digest(m.dpu);
    w.digest(m.mver);
  }
  void operator()(const PreNegRequest& m) const {
    w.id(m.sat_id);
    w.element(m.dpk);
    w.timestamp(m.t1);
    w.digest(m.a1);
  }
  void operator()(const PreNegResponse& m) const {
    w.id(m.tcs_id);
    w.element(m.pk_tcs);
    w.signal(m.sw);
    w.element(m.te);
    w.digest(m.dcu);
    w.timestamp(m.t2);
    w.digest(m.a2);
  }
  void operator()(const AccessRequest& m) const {
    w.id(m.tid);
    w.id(m.tcs_id);
    w.element(m.te);
    w.signal(m.sw);
    w.digest(m.a3);
    w.digest(m.a4);
    w.timestamp(m.t3);
  }
  void operator()(const AccessResponseUser& m) const {
    w.digest(m.a5);
    w.timestamp(m.t4);
  }
  void operator()(const AccessForwardTcs& m) const {
    w.id(m.tid);
    w.element(m.te);
    w.signal(m.sw);
    w.digest(m.hp);
    w.timestamp(m.t4);
  }
  void operator()(const HandoverRequest& m) const {
    w.id(m.tid);
    w.id(m.nsat_id);
    w.digest(m.hpo);
    w.digest(m.a6);
    w.timestamp(m.t5);
  }
  void operator()(const HandoverResponse& m) const {
    w.digest(m.a7);
    w.timestamp(m.t6);
  }
};

Message decode_fields(FieldReader& r, MessageKind kind) {
  switch (kind) {
    case MessageKind::kRegRequest: {
      auto id = r.id();
      auto rpw = r.digest();
      return RegRequest{id, rpw, r.element()};
    }
    case MessageKind::kRegResponse: {
      auto did = r.id();
      auto dp = r.digest();
      auto dpu = r.digest();
      return RegResponse{did, dp, dpu, r.digest()};
    }
    case MessageKind::kPreNegRequest: {
      auto id = r.id();
      auto dpk = r.element();
      auto t1 = r.timestamp();
      return PreNegRequest{id, std::move(dpk), t1, r.digest()};
    }
    case MessageKind::kPreNegResponse: {
      auto id = r.id();
      auto pk = r.element();
      auto sw = r.signal();
      auto te = r.element();
      auto dcu = r.digest();
      auto t2 = r.timestamp();
      return PreNegResponse{id, std::move(pk), std::move(sw), std::move(te), dcu, t2, r.digest()};
    }
    case MessageKind::kAccessRequest: {
      auto tid = r.id();
      auto tcs = r.id();
      auto te = r.element();
      auto sw = r.signal();
      auto a3 = r.digest();
      auto a4 = r.digest();
      return AccessRequest{tid, tcs, std::move(te), std::move(sw), a3, a4, r.timestamp()};
    }
    case MessageKind::kAccessResponseUser: {
      auto a5 = r.digest();
      return AccessResponseUser{a5, r.timestamp()};
    }
    case MessageKind::kAccessForwardTcs: {
      auto tid = r.id();
      auto te = r.element();
      auto sw = r.signal();
      auto hp = r.digest();
      return AccessForwardTcs{tid, std::move(te), std::move(sw), hp, r.timestamp()};
    }
    case MessageKind::kHandoverRequest: {
      auto tid = r.id();
      auto nsat = r.id();
      auto hpo = r.digest();
      auto a6 = r.digest();
      return HandoverRequest{tid, nsat, hpo, a6, r.timestamp()};
    }
    case MessageKind::kHandoverResponse: {
      auto a7 = r.digest();
      return HandoverResponse{a7, r.timestamp()};
    }
  }
  throw std::invalid_argument("unknown message kind");
}

// Validates frame length, padding and trailer; returns the payload width.
std::size_t check_frame(std::span<const std::uint8_t> frame, std::size_t expected_payload) {
  const std::size_t expected_bytes = (expected_payload + kTrailerBits + 7) / 8;
  if (frame.size() != expected_bytes)
    throw WireError(WireError::Kind::kLength, "frame is " + std::to_string(frame.size()) + " bytes, expected " +
                                                  std::to_string(expected_bytes));
  if (frame_payload_bits(frame) != expected_payload) throw WireError(WireError::Kind::kLength, "trailer disagrees with frame kind");
  const std::size_t total = frame.size() * 8;
  for (std::size_t i = expected_payload; i < total - kTrailerBits; ++i) {
    if ((frame[i / 8] >> (i % 8)) & 1u) throw WireError(WireError::Kind::kLength, "nonzero padding");
  }
  return expected_payload;
}

}  // namespace

FieldWidths FieldWidths::for_params(const ring::RingParams& params) {
  FieldWidths w;
  w.ring_element = params.n * params.coeff_bits();
  w.signal = params.n;
  return w;
}

std::size_t payload_bits(MessageKind kind, const FieldWidths& w) {
  switch (kind) {
    case MessageKind::kRegRequest:
      return w.id + w.hash + w.ring_element;
    case MessageKind::kRegResponse:
      return w.id + 3 * w.hash;
    case MessageKind::kPreNegRequest:
      return w.id + w.ring_element + w.timestamp + w.hash;
    case MessageKind::kPreNegResponse:
      return w.id + 2 * w.ring_element + w.signal + 2 * w.hash + w.timestamp;
    case MessageKind::kAccessRequest:
      return 2 * w.id + w.ring_element + w.signal + 2 * w.hash + w.timestamp;
    case MessageKind::kAccessResponseUser:
      return w.hash + w.timestamp;
    case MessageKind::kAccessForwardTcs:
      return w.id + w.ring_element + w.signal + w.hash + w.timestamp;
    case MessageKind::kHandoverRequest:
      return 2 * w.id + 2 * w.hash + w.timestamp;
    case MessageKind::kHandoverResponse:
      return w.hash + w.timestamp;
  }
  throw std::invalid_argument("unknown message kind");
}

std::vector<std::uint8_t> encode(const Message& msg) {
  FieldWriter w;
  std::visit(Encoder{w}, msg);
  return std::move(w).frame();
}

std::size_t frame_payload_bits(std::span<const std::uint8_t> frame) {
  const std::size_t total = frame.size() * 8;
  if (total < kTrailerBits) throw WireError(WireError::Kind::kLength, "frame shorter than its trailer");
  std::size_t pad = 0;
  for (unsigned i = 0; i < kTrailerBits; ++i) {
    const std::size_t pos = total - kTrailerBits + i;
    pad |= static_cast<std::size_t>((frame[pos / 8] >> (pos % 8)) & 1u) << i;
  }
  if (pad + kTrailerBits > total) throw WireError(WireError::Kind::kLength, "pad exceeds frame");
  return total - kTrailerBits - pad;
}

Message decode(std::span<const std::uint8_t> frame, MessageKind kind, const ring::RingPtr& ring) {
  const std::size_t payload = check_frame(frame, payload_bits(kind, FieldWidths::for_params(ring->params())));
  FieldReader reader(frame, payload, ring);
  try {
    return decode_fields(reader, kind);
  } catch (const std::out_of_range& e) {
    throw WireError(WireError::Kind::kLength, e.what());
  }
}

std::size_t vault_bits(const FieldWidths& w) {
  return w.id + 2 * w.hash + w.ring_element + w.hash + fuzzy::kBiometricBits + w.hash;
}

std::vector<std::uint8_t> encode_vault(const DeviceVault& vault) {
  FieldWriter w;
  w.id(vault.did);
  w.digest(vault.dp);
  w.digest(vault.dpu);
  w.bits(vault.dsk);
  w.digest(vault.ver);
  w.bits(vault.v.offset);
  w.digest(vault.v.check);
  return std::move(w).frame();
}

DeviceVault decode_vault(std::span<const std::uint8_t> frame, const ring::RingPtr& ring) {
  const FieldWidths widths = FieldWidths::for_params(ring->params());
  const std::size_t payload = check_frame(frame, vault_bits(widths));
  FieldReader r(frame, payload, ring);
  DeviceVault v;
  v.did = r.id();
  v.dp = r.digest();
  v.dpu = r.digest();
  v.dsk = r.bits(widths.ring_element);
  v.ver = r.digest();
  v.v.offset = r.bits(fuzzy::kBiometricBits);
  v.v.check = r.digest();
  return v;
}

SizeReport size_report(const ring::RingParams& params) {
  SizeReport s;
  s.profile = params.profile_name;
  s.widths = FieldWidths::for_params(params);
  s.access_request = payload_bits(MessageKind::kAccessRequest, s.widths);
  s.access_response_user = payload_bits(MessageKind::kAccessResponseUser, s.widths);
  s.access_forward_tcs = payload_bits(MessageKind::kAccessForwardTcs, s.widths);
  s.user_sent = s.access_request;
  s.satellite_sent = s.access_response_user + s.access_forward_tcs;
  s.tcs_sent = 0;
  s.total = s.user_sent + s.satellite_sent + s.tcs_sent;
  s.prenegotiation_total =
      payload_bits(MessageKind::kPreNegRequest, s.widths) + payload_bits(MessageKind::kPreNegResponse, s.widths);
  s.handover_total =
      payload_bits(MessageKind::kHandoverRequest, s.widths) + payload_bits(MessageKind::kHandoverResponse, s.widths);
  return s;
}

}  // namespace psaa::wire
