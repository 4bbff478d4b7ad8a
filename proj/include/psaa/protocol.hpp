#pragma once

// Party state machines for system setup, registration, satellite
// pre-negotiation, access authentication, handover and credential update.
//
// Every handler checks its timestamp first, then its MAC-style digest, and
// throws ProtocolError naming the failed check. Time and randomness are
// always explicit parameters.

#include <array>
#include <cstdint>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <utility>

#include "psaa/bits.hpp"
#include "psaa/fuzzy.hpp"
#include "psaa/kex.hpp"
#include "psaa/messages.hpp"
#include "psaa/ring.hpp"
#include "psaa/rng.hpp"

namespace psaa::protocol {

enum class Check { kTimestamp, kA1, kA2, kA4, kA5, kA6, kA7, kHp, kVer, kDecode, kUnknownTid, kWrap };

std::string_view check_name(Check check);

class ProtocolError : public std::runtime_error {
 public:
  ProtocolError(Check check, const std::string& reason) : std::runtime_error(reason), check_(check) {}
  Check check() const { return check_; }

 private:
  Check check_;
};

inline constexpr Duration kDefaultFreshnessWindow{200};

struct SystemParams {
  ring::RingPtr ring;
  ring::RingElement a;
  Duration freshness_window = kDefaultFreshnessWindow;

  const ring::RingParams& ring_params() const { return ring->params(); }
};

/// Virtual clock; never moves backwards.
class Clock {
 public:
  explicit Clock(Timestamp start = {}) : now_(start) {}
  Timestamp now() const { return now_; }
  void advance(Duration d);
  /// Throws std::logic_error when `t` is earlier than now().
  void set(Timestamp t);

 private:
  Timestamp now_;
};

/// Accepts t with t <= now and now - t <= window; otherwise throws
/// ProtocolError(kTimestamp).
void check_fresh(Timestamp t, const Clock& clock, Duration window);

/// 13-byte canonical form of a 100-bit timestamp (the wire layout).
std::array<std::uint8_t, 13> timestamp_bytes(Timestamp t);

/// First 100 bits of a digest.
Id truncate_id(const Digest& d);

struct DirectoryEntry {
  Id id;
  ring::RingElement pk;
  Timestamp expiry;
};

class Ncc {
 public:
  Ncc(SystemParams params, ring::RingElement sk_ncc);

  /// Publishes {ID, pk, T} and returns p_ncc = h(sk_ncc, T). Throws
  /// std::invalid_argument when ID is registered and not yet expired.
  std::pair<DirectoryEntry, Digest> register_station(const Id& id, const ring::RingElement& pk, Timestamp expiry,
                                                     const Clock& clock);
  std::optional<DirectoryEntry> lookup(const Id& id) const;

 private:
  SystemParams params_;
  ring::RingElement sk_;
  std::map<Id, DirectoryEntry> directory_;
};

/// Fresh a and sk_ncc, both from the Gaussian sampler.
std::pair<SystemParams, Ncc> system_init(const ring::RingParams& profile, Rng& rng,
                                         Duration freshness_window = kDefaultFreshnessWindow);

class Tcs {
 public:
  struct UserRecord {
    Id tid;
    ring::RingElement pk;
    Digest sigma0;  // kdf of the registration agreement
    Digest p;
    Digest pu;
  };
  struct SatelliteSession {
    Digest key;
    Digest hpu_issued;
  };

  Tcs(SystemParams params, Id id, kex::KeyPair keys);

  const Id& id() const { return id_; }
  const ring::RingElement& pk() const { return keys_.pk; }
  const Digest& mpu() const { return mpu_; }
  /// h(mpu, T): the user-verification value issued to pre-negotiated satellites.
  Digest station_hpu() const;

  void install_credential(const Digest& p_ncc, Timestamp expiry);

  RegResponse register_user(const RegRequest& req, Rng& rng);
  /// Returns the response; k_{j-tcs} is recorded under the satellite's ID.
  PreNegResponse handle_preneg(const PreNegRequest& req, const Clock& clock, Rng& rng);
  /// Returns the session key shared with the user.
  Digest finish_access(const AccessForwardTcs& fwd, const Clock& clock, Rng& rng);

  const UserRecord* user(const Id& tid) const;
  std::optional<SatelliteSession> satellite_session(const Id& sat_id) const;
  std::size_t user_count() const { return users_.size(); }

  std::string snapshot() const;

 private:
  SystemParams params_;
  Id id_;
  kex::KeyPair keys_;
  Digest mpu_;
  std::optional<Digest> p_ncc_;
  Timestamp expiry_;
  std::map<Id, UserRecord> users_;
  std::map<Id, SatelliteSession> sat_sessions_;
};

class Satellite {
 public:
  struct Link {
    Id tcs_id;
    Digest key;  // k_{j-tcs}
    Digest hpu;  // HPU_j
  };

  Satellite(SystemParams params, Id id, kex::KeyPair keys);

  const Id& id() const { return id_; }
  const ring::RingElement& pk() const { return keys_.pk; }

  void install_credential(const Digest& p_ncc);

  PreNegRequest begin_preneg(const Clock& clock) const;
  /// Stores the link on success.
  void finish_preneg(const PreNegResponse& resp, const Clock& clock, Rng& rng);

  /// Both outputs share one timestamp t4. Requires a link.
  std::pair<AccessResponseUser, AccessForwardTcs> handle_access(const AccessRequest& req, const Clock& clock) const;
  /// Consults no per-user state. Requires a link.
  HandoverResponse handle_handover(const HandoverRequest& req, const Clock& clock) const;

  const std::optional<Link>& link() const { return link_; }
  /// Overrides the link; used to stage forged satellites.
  void set_link(Link link) { link_ = std::move(link); }

  std::string snapshot() const;

 private:
  const Link& require_link() const;

  SystemParams params_;
  Id id_;
  kex::KeyPair keys_;
  std::optional<Digest> p_ncc_;
  std::optional<Link> link_;
};

using Password = std::string;

struct UserRegState {
  Id user_id;
  Digest rpw;
  ring::RingElement pk;
  ring::RingElement sk;
  Digest sigma;
  fuzzy::HelperData v;
};

std::pair<RegRequest, UserRegState> user_register_begin(const Id& user_id, const Password& pw,
                                                        const fuzzy::Biometric& bio, const SystemParams& params,
                                                        Rng& rng);

/// The device keeps pk_i next to the vault; it is public.
struct Device {
  DeviceVault vault;
  ring::RingElement pk;
};

Device user_register_finish(const UserRegState& state, const RegResponse& resp, const SystemParams& params);

class UserSession {
 public:
  UserSession(SystemParams params, Id tid, Digest p, Digest pu, ring::RingElement sk, ring::RingElement pk);

  const Id& tid() const { return tid_; }
  const Digest& p() const { return p_; }
  const Digest& pu() const { return pu_; }
  const ring::RingElement& sk() const { return sk_; }
  const ring::RingElement& pk() const { return pk_; }
  const std::optional<Digest>& session_key() const { return key_; }

  AccessRequest access_request(const Id& tcs_id, const ring::RingElement& pk_tcs, const Clock& clock, Rng& rng);
  /// Verifies a5 and returns the session key.
  Digest finish_access(const AccessResponseUser& resp, const Clock& clock);

  HandoverRequest handover_request(const Id& nsat_id, const Clock& clock, Rng& rng);
  /// Throws on an a7 mismatch; the session key is untouched either way.
  void finish_handover(const HandoverResponse& resp, const Clock& clock);

 private:
  struct PendingAccess {
    Id tcs_id;
    ring::RingElement pk_tcs;
    ring::RingElement te;
    recon::SignalVector sw;
    recon::KeyString sigma1;
    Digest hp;
  };
  struct PendingHandover {
    Id nsat_id;
    Digest ho_digest;  // h(HO, t5)
  };

  SystemParams params_;
  Id tid_;
  Digest p_, pu_;
  ring::RingElement sk_, pk_;
  std::optional<PendingAccess> access_;
  std::optional<PendingHandover> handover_;
  std::optional<Digest> key_;
};

/// Throws ProtocolError(kVer, "login failed") for every failure cause.
UserSession user_login(const Device& device, const Id& user_id, const Password& pw, const fuzzy::Biometric& bio,
                       const SystemParams& params);

/// Offline factor change. The input device is never modified; failure of the
/// old factors throws the login error.
Device update_credentials(const Device& device, const Id& user_id, const Password& pw_old,
                          const fuzzy::Biometric& bio_old, const Password& pw_new, const fuzzy::Biometric& bio_new,
                          const SystemParams& params, Rng& rng);

}  // namespace psaa::protocol
