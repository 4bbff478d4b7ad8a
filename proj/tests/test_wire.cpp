#include <catch2/catch_amalgamated.hpp>

#include "psaa/wire.hpp"

using namespace psaa;
using namespace psaa::protocol;

namespace {

template <class T>
T random_fixed(Rng& rng) {
  std::array<std::uint8_t, T::kBytes> b{};
  rng.fill(b);
  return T::from_bytes(b);
}

BitVector random_bits(std::size_t n, Rng& rng) {
  std::vector<std::uint8_t> b((n + 7) / 8);
  rng.fill(b);
  return BitVector::from_bytes(b, n);
}

Timestamp random_ts(Rng& rng) { return Timestamp{rng.next_u64()}; }

std::vector<Message> sample_messages(const ring::RingPtr& ring, Rng& rng) {
  auto re = [&] { return ring::sample_uniform(ring, rng); };
  auto sig = [&] { return recon::SignalVector{random_bits(ring->n(), rng)}; };
  auto id = [&] { return random_fixed<Id>(rng); };
  auto dg = [&] { return random_fixed<Digest>(rng); };
  return {
      RegRequest{id(), dg(), re()},
      RegResponse{id(), dg(), dg(), dg()},
      PreNegRequest{id(), re(), random_ts(rng), dg()},
      PreNegResponse{id(), re(), sig(), re(), dg(), random_ts(rng), dg()},
      AccessRequest{id(), id(), re(), sig(), dg(), dg(), random_ts(rng)},
      AccessResponseUser{dg(), random_ts(rng)},
      AccessForwardTcs{id(), re(), sig(), dg(), random_ts(rng)},
      HandoverRequest{id(), id(), dg(), dg(), random_ts(rng)},
      HandoverResponse{dg(), random_ts(rng)},
  };
}

}  // namespace

TEST_CASE("authentication sizes, paper profile") {
  const auto params = ring::RingParams::paper();
  const auto w = wire::FieldWidths::for_params(params);
  CHECK(w.ring_element == 17408);
  CHECK(w.signal == 1024);
  const std::size_t re = 1024 * 17, id = 100, ts = 100, hash = 256, sig = 1024;
  const auto s = wire::size_report(params);
  CHECK(s.access_request == 2 * id + re + sig + 2 * hash + ts);
  CHECK(s.access_response_user == hash + ts);
  CHECK(s.access_forward_tcs == id + re + sig + hash + ts);
  CHECK(s.access_request == 19244);
  CHECK(s.access_response_user == 356);
  CHECK(s.access_forward_tcs == 18888);
  CHECK(s.total == 38488);
  CHECK(s.user_sent == 19244);
  CHECK(s.satellite_sent == 356 + 18888);
  CHECK(s.tcs_sent == 0);
}

TEST_CASE("robust profile widens only ring elements") {
  const auto s = wire::size_report(ring::RingParams::robust());
  CHECK(s.widths.ring_element == 1024 * 42);
  CHECK(s.access_response_user == 356);
  CHECK(s.access_request == 19244 - 17408 + 43008);
}

TEST_CASE("golden frame for an access response") {
  AccessResponseUser m;
  std::array<std::uint8_t, 32> a5{};
  for (std::size_t i = 0; i < a5.size(); ++i) a5[i] = static_cast<std::uint8_t>(i);
  m.a5 = Digest::from_bytes(a5);
  m.t4 = Timestamp{5};
  const auto frame = wire::encode(m);
  std::string expected;
  for (int i = 0; i < 32; ++i) expected += to_hex(std::vector<std::uint8_t>{static_cast<std::uint8_t>(i)});
  expected += "05" + std::string(22, '0') + "20";
  CHECK(to_hex(frame) == expected);
  CHECK(frame.size() == 45);
  CHECK(wire::frame_payload_bits(frame) == 356);
}

TEST_CASE("every message kind round trips at both profiles") {
  for (const auto& params : {ring::RingParams::paper(), ring::RingParams::robust()}) {
    const auto ring = ring::Ring::create(params);
    const auto widths = wire::FieldWidths::for_params(params);
    Rng rng(params.q);
    for (int round = 0; round < 5; ++round) {
      for (const auto& msg : sample_messages(ring, rng)) {
        const auto kind = kind_of(msg);
        INFO(kind_name(kind));
        const auto frame = wire::encode(msg);
        const std::size_t bits = wire::payload_bits(kind, widths);
        CHECK(wire::frame_payload_bits(frame) == bits);
        CHECK(frame.size() == (bits + wire::kTrailerBits + 7) / 8);
        CHECK(wire::decode(frame, kind, ring) == msg);
      }
    }
  }
}

TEST_CASE("kind names round trip") {
  for (int k = 0; k <= static_cast<int>(MessageKind::kHandoverResponse); ++k) {
    const auto kind = static_cast<MessageKind>(k);
    CHECK(kind_from_name(kind_name(kind)) == kind);
  }
  CHECK_THROWS_AS(kind_from_name("Bogus"), std::invalid_argument);
}

TEST_CASE("malformed frames are rejected with a typed error") {
  const auto ring = ring::Ring::create(ring::RingParams::paper());
  Rng rng(3);
  const auto msgs = sample_messages(ring, rng);
  auto code_of = [&](std::vector<std::uint8_t> f, MessageKind kind) {
    try {
      wire::decode(f, kind, ring);
    } catch (const wire::WireError& e) {
      return e.kind() == wire::WireError::Kind::kLength ? 1 : 2;
    }
    return 0;
  };
  for (const auto& msg : msgs) {
    const auto kind = kind_of(msg);
    auto frame = wire::encode(msg);
    INFO(kind_name(kind));
    CHECK(code_of({frame.begin(), frame.end() - 1}, kind) == 1);
    auto longer = frame;
    longer.push_back(0);
    CHECK(code_of(longer, kind) == 1);
    CHECK(code_of({}, kind) == 1);
  }
  // Decoding as the wrong kind fails on length.
  CHECK(code_of(wire::encode(msgs[5]), MessageKind::kHandoverResponse) == 0);
  CHECK(code_of(wire::encode(msgs[5]), MessageKind::kAccessRequest) == 1);

  // Timestamp with a bit above 64 set: AccessResponseUser t4 starts at bit 256.
  auto frame = wire::encode(msgs[5]);
  frame[(256 + 70) / 8] ^= static_cast<std::uint8_t>(1u << ((256 + 70) % 8));
  CHECK(code_of(frame, MessageKind::kAccessResponseUser) == 2);

  // First coefficient of an AccessRequest te set to q.
  AccessRequest req = std::get<AccessRequest>(msgs[4]);
  auto bytes = wire::encode(req);
  const std::size_t start = 200;
  const std::uint64_t q = ring->q();
  for (unsigned b = 0; b < 17; ++b) {
    const std::size_t pos = start + b;
    const bool bit = (q >> b) & 1u;
    bytes[pos / 8] = static_cast<std::uint8_t>((bytes[pos / 8] & ~(1u << (pos % 8))) | (bit << (pos % 8)));
  }
  CHECK(code_of(bytes, MessageKind::kAccessRequest) == 2);

  // Non-zero padding.
  auto padded = wire::encode(msgs[5]);
  padded[44] |= 0x10;
  CHECK(code_of(padded, MessageKind::kAccessResponseUser) == 1);
}

TEST_CASE("decode at the wrong ring width fails") {
  const auto paper = ring::Ring::create(ring::RingParams::paper());
  const auto robust = ring::Ring::create(ring::RingParams::robust());
  Rng rng(4);
  const auto msgs = sample_messages(paper, rng);
  CHECK_THROWS_AS(wire::decode(wire::encode(msgs[4]), MessageKind::kAccessRequest, robust), wire::WireError);
}

TEST_CASE("device vault round trip") {
  for (const auto& params : {ring::RingParams::paper(), ring::RingParams::robust()}) {
    const auto ring = ring::Ring::create(params);
    const auto widths = wire::FieldWidths::for_params(params);
    Rng rng(6);
    DeviceVault v{random_fixed<Id>(rng),         random_fixed<Digest>(rng),
                  random_fixed<Digest>(rng),     random_bits(widths.ring_element, rng),
                  random_fixed<Digest>(rng),     {random_bits(fuzzy::kBiometricBits, rng), random_fixed<Digest>(rng)}};
    const auto frame = wire::encode_vault(v);
    CHECK(wire::vault_bits(widths) == 100 + 3 * 256 + widths.ring_element + 512 + 256);
    CHECK(wire::frame_payload_bits(frame) == wire::vault_bits(widths));
    CHECK(wire::decode_vault(frame, ring) == v);
    CHECK_THROWS_AS(wire::decode_vault(std::vector<std::uint8_t>(frame.begin(), frame.end() - 1), ring),
                    wire::WireError);
  }
}
