#pragma once

// Protocol message records, one per arrow of each phase, plus the at-rest
// device record. Field order is the order the values appear in each
// message's brace list and is also the wire order.

#include <chrono>
#include <compare>
#include <cstdint>
#include <string_view>
#include <variant>

#include "psaa/bits.hpp"
#include "psaa/fuzzy.hpp"
#include "psaa/recon.hpp"
#include "psaa/ring.hpp"

namespace psaa::protocol {

/// Virtual time in milliseconds; encoded in 100 bits on the wire.
struct Timestamp {
  std::uint64_t ms = 0;
  auto operator<=>(const Timestamp&) const = default;
};

using Duration = std::chrono::milliseconds;

enum class MessageKind {
  kRegRequest,
  kRegResponse,
  kPreNegRequest,
  kPreNegResponse,
  kAccessRequest,
  kAccessResponseUser,
  kAccessForwardTcs,
  kHandoverRequest,
  kHandoverResponse,
};

std::string_view kind_name(MessageKind kind);
/// Inverse of kind_name; throws std::invalid_argument.
MessageKind kind_from_name(std::string_view name);

/// {ID_i, RPW_i, pk_i}; secure channel.
struct RegRequest {
  Id user_id;
  Digest rpw;
  ring::RingElement pk;
  bool operator==(const RegRequest&) const = default;
};

/// {DID_i, DP_i, DPU_i, mver*}; secure channel.
struct RegResponse {
  Id did;
  Digest dp;
  Digest dpu;
  Digest mver;
  bool operator==(const RegResponse&) const = default;
};

/// {ID_j, DPK_j, t1, a1}
struct PreNegRequest {
  Id sat_id;
  ring::RingElement dpk;
  Timestamp t1;
  Digest a1;
  bool operator==(const PreNegRequest&) const = default;
};

/// {ID_tcs, pk_tcs, sw_{j-tcs}, te_{j-tcs}, DCU_j, t2, a2}
struct PreNegResponse {
  Id tcs_id;
  ring::RingElement pk_tcs;
  recon::SignalVector sw;
  ring::RingElement te;
  Digest dcu;
  Timestamp t2;
  Digest a2;
  bool operator==(const PreNegResponse&) const = default;
};

/// {TID_i, ID_tcs, te, sw, a3, a4, t3}
struct AccessRequest {
  Id tid;
  Id tcs_id;
  ring::RingElement te;
  recon::SignalVector sw;
  Digest a3;
  Digest a4;
  Timestamp t3;
  bool operator==(const AccessRequest&) const = default;
};

/// {a5, t4}
struct AccessResponseUser {
  Digest a5;
  Timestamp t4;
  bool operator==(const AccessResponseUser&) const = default;
};

/// {TID_i, te, sw, HP_i, t4}
struct AccessForwardTcs {
  Id tid;
  ring::RingElement te;
  recon::SignalVector sw;
  Digest hp;
  Timestamp t4;
  bool operator==(const AccessForwardTcs&) const = default;
};

/// {TID_i, ID_{N-SAT}, HPO_i, a6, t5}
struct HandoverRequest {
  Id tid;
  Id nsat_id;
  Digest hpo;
  Digest a6;
  Timestamp t5;
  bool operator==(const HandoverRequest&) const = default;
};

/// {a7, t6}
struct HandoverResponse {
  Digest a7;
  Timestamp t6;
  bool operator==(const HandoverResponse&) const = default;
};

using Message = std::variant<RegRequest, RegResponse, PreNegRequest, PreNegResponse, AccessRequest, AccessResponseUser,
                             AccessForwardTcs, HandoverRequest, HandoverResponse>;

MessageKind kind_of(const Message& msg);

/// At-rest device record {DID, DP, DPU, DSK, ver, v}. Holds no login factor
/// and no unmasked secret.
struct DeviceVault {
  Id did;
  Digest dp;
  Digest dpu;
  BitVector dsk;  // packed sk_i XOR expand(mver*)
  Digest ver;
  fuzzy::HelperData v;
  bool operator==(const DeviceVault&) const = default;
};

}  // namespace psaa::protocol
