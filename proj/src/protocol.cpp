#include "psaa/protocol.hpp"

#include <sstream>

#include "psaa/hash.hpp"

namespace psaa::protocol {

namespace {

using Bytes = std::span<const std::uint8_t>;

std::span<const std::uint8_t> str_bytes(const std::string& s) {
  return {reinterpret_cast<const std::uint8_t*>(s.data()), s.size()};
}

BitVector pack(const ring::RingElement& e) {
  return BitVector::from_bytes(e.to_bytes(), e.size() * e.ring().params().coeff_bits());
}

void require(bool ok, Check check, const char* reason) {
  if (!ok) throw ProtocolError(check, reason);
}

[[noreturn]] void login_failed() { throw ProtocolError(Check::kVer, "login failed"); }

struct Unlocked {
  Id tid;
  Digest p, pu;
  ring::RingElement sk;
};

Unlocked unlock(const Device& device, const Id& user_id, const Password& pw, const fuzzy::Biometric& bio,
                const SystemParams& params) {
  const DeviceVault& v = device.vault;
  const std::size_t width = params.ring->n() * params.ring_params().coeff_bits();
  if (v.dsk.size() != width || v.v.offset.size() != fuzzy::kBiometricBits || bio.bits.size() != fuzzy::kBiometricBits)
    login_failed();
  const auto sigma = fuzzy::rep(bio, v.v);
  if (!sigma) login_failed();
  const Digest rpw = hash_fields({str_bytes(pw), sigma->bytes()});
  const Id tid = v.did ^ truncate_id(hash_fields({user_id.bytes(), rpw.bytes()}));
  const Digest p = v.dp ^ rpw;
  const Digest pu = v.dpu ^ hash_fields({tid.bytes(), p.bytes()});
  const Digest mver = hash_fields({tid.bytes(), p.bytes(), pu.bytes()});
  const BitVector sk_bits = v.dsk ^ expand_digest(mver, width);
  std::optional<ring::RingElement> sk;
  try {
    sk = ring::RingElement::from_bytes(params.ring, sk_bits.bytes());
  } catch (const std::out_of_range&) {
    login_failed();
  }
  const Digest ver = hash_fields({tid.bytes(), v.did.bytes(), v.dp.bytes(), sk->to_bytes()});
  if (ver != v.ver) login_failed();
  return Unlocked{tid, p, pu, std::move(*sk)};
}

}  // namespace

std::string_view check_name(Check check) {
  switch (check) {
    case Check::kTimestamp: return "timestamp";
    case Check::kA1: return "a1";
    case Check::kA2: return "a2";
    case Check::kA4: return "a4";
    case Check::kA5: return "a5";
    case Check::kA6: return "a6";
    case Check::kA7: return "a7";
    case Check::kHp: return "HP";
    case Check::kVer: return "ver";
    case Check::kDecode: return "decode";
    case Check::kUnknownTid: return "unknown_tid";
    case Check::kWrap: return "wrap";
  }
  return "unknown";
}

void Clock::advance(Duration d) {
  if (d.count() < 0) throw std::logic_error("clock cannot move backwards");
  now_.ms += static_cast<std::uint64_t>(d.count());
}

void Clock::set(Timestamp t) {
  if (t < now_) throw std::logic_error("clock cannot move backwards");
  now_ = t;
}

void check_fresh(Timestamp t, const Clock& clock, Duration window) {
  const Timestamp now = clock.now();
  if (t > now) throw ProtocolError(Check::kTimestamp, "timestamp in the future");
  if (now.ms - t.ms > static_cast<std::uint64_t>(window.count()))
    throw ProtocolError(Check::kTimestamp, "stale timestamp");
}

std::array<std::uint8_t, 13> timestamp_bytes(Timestamp t) {
  std::array<std::uint8_t, 13> out{};
  for (int i = 0; i < 8; ++i) out[i] = static_cast<std::uint8_t>(t.ms >> (8 * i));
  return out;
}

Id truncate_id(const Digest& d) { return Id::from_bytes(d.bytes()); }

// ---- NCC ----

Ncc::Ncc(SystemParams params, ring::RingElement sk_ncc) : params_(std::move(params)), sk_(std::move(sk_ncc)) {}

std::pair<DirectoryEntry, Digest> Ncc::register_station(const Id& id, const ring::RingElement& pk, Timestamp expiry,
                                                        const Clock& clock) {
  if (auto it = directory_.find(id); it != directory_.end() && it->second.expiry > clock.now())
    throw std::invalid_argument("station ID already registered and live");
  DirectoryEntry entry{id, pk, expiry};
  directory_.insert_or_assign(id, entry);
  const auto t = timestamp_bytes(expiry);
  return {entry, hash_fields({sk_.to_bytes(), t})};
}

std::optional<DirectoryEntry> Ncc::lookup(const Id& id) const {
  auto it = directory_.find(id);
  if (it == directory_.end()) return std::nullopt;
  return it->second;
}

std::pair<SystemParams, Ncc> system_init(const ring::RingParams& profile, Rng& rng, Duration freshness_window) {
  auto ring = ring::Ring::create(profile);
  auto a = ring::sample_gaussian(ring, rng);
  auto sk = ring::sample_gaussian(ring, rng);
  SystemParams params{ring, std::move(a), freshness_window};
  Ncc ncc(params, std::move(sk));
  return {std::move(params), std::move(ncc)};
}

// ---- TCS ----

Tcs::Tcs(SystemParams params, Id id, kex::KeyPair keys)
    : params_(std::move(params)), id_(id), keys_(std::move(keys)) {
  mpu_ = hash_fields({id_.bytes(), keys_.pk.to_bytes(), keys_.sk.to_bytes()});
}

Digest Tcs::station_hpu() const {
  const auto t = timestamp_bytes(expiry_);
  return hash_fields({mpu_.bytes(), t});
}

void Tcs::install_credential(const Digest& p_ncc, Timestamp expiry) {
  p_ncc_ = p_ncc;
  expiry_ = expiry;
}

RegResponse Tcs::register_user(const RegRequest& req, Rng& rng) {
  if (!req.pk.ring().params().same_ring(params_.ring_params())) throw ring::ParamMismatch("registration pk ring");
  Id tid;
  Digest sigma0;
  do {
    const auto share = kex::initiate(req.pk, keys_.sk, rng);
    sigma0 = kex::kdf(share.key);
    tid = req.user_id ^ truncate_id(sigma0);
  } while (users_.contains(tid));

  const Digest p = hash_fields({tid.bytes(), req.pk.to_bytes(), keys_.sk.to_bytes()});
  const Digest pu = hash_fields({tid.bytes(), station_hpu().bytes()});
  RegResponse resp;
  resp.did = tid ^ truncate_id(hash_fields({req.user_id.bytes(), req.rpw.bytes()}));
  resp.dp = p ^ req.rpw;
  resp.dpu = pu ^ hash_fields({tid.bytes(), p.bytes()});
  resp.mver = hash_fields({tid.bytes(), p.bytes(), pu.bytes()});
  users_.emplace(tid, UserRecord{tid, req.pk, sigma0, p, pu});
  return resp;
}

PreNegResponse Tcs::handle_preneg(const PreNegRequest& req, const Clock& clock, Rng& rng) {
  check_fresh(req.t1, clock, params_.freshness_window);
  if (!p_ncc_) throw std::logic_error("TCS has no station credential");
  const auto t1 = timestamp_bytes(req.t1);
  std::vector<std::uint8_t> mask_input(p_ncc_->bytes().begin(), p_ncc_->bytes().end());
  mask_input.insert(mask_input.end(), t1.begin(), t1.end());
  const auto pk_j = req.dpk - ring::hash_to_ring(params_.ring, mask_input);
  require(hash_fields({req.sat_id.bytes(), pk_j.to_bytes(), req.dpk.to_bytes(), t1}) == req.a1, Check::kA1,
          "a1 mismatch");

  const auto share = kex::initiate(pk_j, keys_.sk, rng);
  const Digest hpu = station_hpu();
  PreNegResponse resp{id_, keys_.pk, share.signal, share.te, {}, clock.now(), {}};
  const auto t2 = timestamp_bytes(resp.t2);
  const auto sigma = share.key.bits.bytes();
  resp.dcu = kex::kdf(share.key) ^ hpu;
  resp.a2 = hash_fields({id_.bytes(), keys_.pk.to_bytes(), sigma, hpu.bytes(), t2});
  sat_sessions_.insert_or_assign(req.sat_id,
                                 SatelliteSession{hash_fields({id_.bytes(), req.sat_id.bytes(), sigma, t2}), hpu});
  return resp;
}

Digest Tcs::finish_access(const AccessForwardTcs& fwd, const Clock& clock, Rng& rng) {
  check_fresh(fwd.t4, clock, params_.freshness_window);
  const UserRecord* rec = user(fwd.tid);
  if (!rec) throw ProtocolError(Check::kUnknownTid, "unknown TID");
  const auto sigma1 = kex::respond(rec->pk, keys_.sk, fwd.te, fwd.sw, rng);
  const auto sigma = sigma1.bits.bytes();
  require(hash_fields({fwd.tid.bytes(), id_.bytes(), rec->p.bytes(), sigma}) == fwd.hp, Check::kHp, "HP mismatch");
  return hash_fields({fwd.tid.bytes(), id_.bytes(), rec->pk.to_bytes(), keys_.pk.to_bytes(), sigma});
}

const Tcs::UserRecord* Tcs::user(const Id& tid) const {
  auto it = users_.find(tid);
  return it == users_.end() ? nullptr : &it->second;
}

std::optional<Tcs::SatelliteSession> Tcs::satellite_session(const Id& sat_id) const {
  auto it = sat_sessions_.find(sat_id);
  if (it == sat_sessions_.end()) return std::nullopt;
  return it->second;
}

std::string Tcs::snapshot() const {
  std::ostringstream os;
  os << "role=tcs\nid=" << id_.hex() << "\nprofile=" << params_.ring_params().profile_name
     << "\ncredential=" << (p_ncc_ ? "installed" : "missing") << "\nexpiry_ms=" << expiry_.ms
     << "\nusers=" << users_.size() << "\nsatellite_sessions=" << sat_sessions_.size() << '\n';
  for (const auto& [tid, rec] : users_) os << "user.tid=" << tid.hex() << '\n';
  for (const auto& [sid, s] : sat_sessions_) os << "satellite.id=" << sid.hex() << '\n';
  return os.str();
}

// ---- Satellite ----

Satellite::Satellite(SystemParams params, Id id, kex::KeyPair keys)
    : params_(std::move(params)), id_(id), keys_(std::move(keys)) {}

void Satellite::install_credential(const Digest& p_ncc) { p_ncc_ = p_ncc; }

PreNegRequest Satellite::begin_preneg(const Clock& clock) const {
  if (!p_ncc_) throw std::logic_error("satellite has no station credential");
  PreNegRequest req{id_, keys_.pk, clock.now(), {}};
  const auto t1 = timestamp_bytes(req.t1);
  std::vector<std::uint8_t> mask_input(p_ncc_->bytes().begin(), p_ncc_->bytes().end());
  mask_input.insert(mask_input.end(), t1.begin(), t1.end());
  req.dpk = keys_.pk + ring::hash_to_ring(params_.ring, mask_input);
  req.a1 = hash_fields({id_.bytes(), keys_.pk.to_bytes(), req.dpk.to_bytes(), t1});
  return req;
}

void Satellite::finish_preneg(const PreNegResponse& resp, const Clock& clock, Rng& rng) {
  check_fresh(resp.t2, clock, params_.freshness_window);
  const auto sigma_key = kex::respond(resp.pk_tcs, keys_.sk, resp.te, resp.sw, rng);
  const auto sigma = sigma_key.bits.bytes();
  const Digest hpu = resp.dcu ^ kex::kdf(sigma_key);
  const auto t2 = timestamp_bytes(resp.t2);
  require(hash_fields({resp.tcs_id.bytes(), resp.pk_tcs.to_bytes(), sigma, hpu.bytes(), t2}) == resp.a2, Check::kA2,
          "a2 mismatch");
  link_ = Link{resp.tcs_id, hash_fields({resp.tcs_id.bytes(), id_.bytes(), sigma, t2}), hpu};
}

const Satellite::Link& Satellite::require_link() const {
  if (!link_) throw std::logic_error("satellite has not completed pre-negotiation");
  return *link_;
}

std::pair<AccessResponseUser, AccessForwardTcs> Satellite::handle_access(const AccessRequest& req,
                                                                         const Clock& clock) const {
  check_fresh(req.t3, clock, params_.freshness_window);
  const Link& link = require_link();
  const auto t3 = timestamp_bytes(req.t3);
  const Digest hpu_i = hash_fields({hash_fields({req.tid.bytes(), link.hpu.bytes()}).bytes(), t3});
  const auto te = req.te.to_bytes();
  const auto sw = req.sw.bits.bytes();
  require(hash_fields({req.tid.bytes(), req.tcs_id.bytes(), te, sw, hpu_i.bytes(), req.a3.bytes(), t3}) == req.a4,
          Check::kA4, "a4 mismatch");
  const Digest hp = req.a3 ^ hpu_i;
  const Timestamp t4 = clock.now();
  const auto t4b = timestamp_bytes(t4);
  AccessResponseUser to_user{hash_fields({hp.bytes(), req.tid.bytes(), te, sw, t4b}), t4};
  AccessForwardTcs to_tcs{req.tid, req.te, req.sw, hp, t4};
  return {std::move(to_user), std::move(to_tcs)};
}

HandoverResponse Satellite::handle_handover(const HandoverRequest& req, const Clock& clock) const {
  check_fresh(req.t5, clock, params_.freshness_window);
  const Link& link = require_link();
  const auto t5 = timestamp_bytes(req.t5);
  const Digest hpu_i = hash_fields({hash_fields({req.tid.bytes(), link.hpu.bytes()}).bytes(), t5});
  require(hash_fields({req.tid.bytes(), req.nsat_id.bytes(), req.hpo.bytes(), hpu_i.bytes(), t5}) == req.a6,
          Check::kA6, "a6 mismatch");
  require(req.nsat_id == id_, Check::kA6, "not addressed to this satellite");
  const Timestamp t6 = clock.now();
  const auto t6b = timestamp_bytes(t6);
  return HandoverResponse{hash_fields({req.tid.bytes(), id_.bytes(), (req.hpo ^ hpu_i).bytes(), t6b}), t6};
}

std::string Satellite::snapshot() const {
  std::ostringstream os;
  os << "role=satellite\nid=" << id_.hex() << "\ncredential=" << (p_ncc_ ? "installed" : "missing")
     << "\nlinked=" << (link_ ? "true" : "false") << '\n';
  if (link_) os << "link.tcs=" << link_->tcs_id.hex() << '\n';
  return os.str();
}

// ---- User ----

std::pair<RegRequest, UserRegState> user_register_begin(const Id& user_id, const Password& pw,
                                                        const fuzzy::Biometric& bio, const SystemParams& params,
                                                        Rng& rng) {
  const auto extract = fuzzy::gen(bio, rng);
  const Digest rpw = hash_fields({str_bytes(pw), extract.sigma.bytes()});
  auto keys = kex::keygen(params.a, rng);
  RegRequest req{user_id, rpw, keys.pk};
  UserRegState state{user_id, rpw, std::move(keys.pk), std::move(keys.sk), extract.sigma, extract.aux};
  return {std::move(req), std::move(state)};
}

Device user_register_finish(const UserRegState& state, const RegResponse& resp, const SystemParams& params) {
  const std::size_t width = params.ring->n() * params.ring_params().coeff_bits();
  const Id tid = resp.did ^ truncate_id(hash_fields({state.user_id.bytes(), state.rpw.bytes()}));
  DeviceVault v;
  v.did = resp.did;
  v.dp = resp.dp;
  v.dpu = resp.dpu;
  v.dsk = pack(state.sk) ^ expand_digest(resp.mver, width);
  v.ver = hash_fields({tid.bytes(), v.did.bytes(), v.dp.bytes(), state.sk.to_bytes()});
  v.v = state.v;
  return Device{std::move(v), state.pk};
}

UserSession user_login(const Device& device, const Id& user_id, const Password& pw, const fuzzy::Biometric& bio,
                       const SystemParams& params) {
  auto u = unlock(device, user_id, pw, bio, params);
  return UserSession(params, u.tid, u.p, u.pu, std::move(u.sk), device.pk);
}

Device update_credentials(const Device& device, const Id& user_id, const Password& pw_old,
                          const fuzzy::Biometric& bio_old, const Password& pw_new, const fuzzy::Biometric& bio_new,
                          const SystemParams& params, Rng& rng) {
  const auto u = unlock(device, user_id, pw_old, bio_old, params);
  const auto extract = fuzzy::gen(bio_new, rng);
  const Digest rpw = hash_fields({str_bytes(pw_new), extract.sigma.bytes()});
  Device out = device;
  out.vault.did = u.tid ^ truncate_id(hash_fields({user_id.bytes(), rpw.bytes()}));
  out.vault.dp = u.p ^ rpw;
  out.vault.ver = hash_fields({u.tid.bytes(), out.vault.did.bytes(), out.vault.dp.bytes(), u.sk.to_bytes()});
  out.vault.v = extract.aux;
  return out;
}

UserSession::UserSession(SystemParams params, Id tid, Digest p, Digest pu, ring::RingElement sk, ring::RingElement pk)
    : params_(std::move(params)), tid_(tid), p_(p), pu_(pu), sk_(std::move(sk)), pk_(std::move(pk)) {}

AccessRequest UserSession::access_request(const Id& tcs_id, const ring::RingElement& pk_tcs, const Clock& clock,
                                          Rng& rng) {
  auto share = kex::initiate(pk_tcs, sk_, rng);
  const Timestamp t3 = clock.now();
  const auto t3b = timestamp_bytes(t3);
  const Digest hpu_i = hash_fields({pu_.bytes(), t3b});
  const Digest hp = hash_fields({tid_.bytes(), tcs_id.bytes(), p_.bytes(), share.key.bits.bytes()});
  AccessRequest req{tid_, tcs_id, share.te, share.signal, hpu_i ^ hp, {}, t3};
  req.a4 = hash_fields({tid_.bytes(), tcs_id.bytes(), share.te.to_bytes(), share.signal.bits.bytes(), hpu_i.bytes(),
                        req.a3.bytes(), t3b});
  access_ = PendingAccess{tcs_id, pk_tcs, std::move(share.te), std::move(share.signal), std::move(share.key), hp};
  return req;
}

Digest UserSession::finish_access(const AccessResponseUser& resp, const Clock& clock) {
  check_fresh(resp.t4, clock, params_.freshness_window);
  if (!access_) throw std::logic_error("no pending access");
  const auto& a = *access_;
  const auto t4 = timestamp_bytes(resp.t4);
  require(hash_fields({a.hp.bytes(), tid_.bytes(), a.te.to_bytes(), a.sw.bits.bytes(), t4}) == resp.a5, Check::kA5,
          "a5 mismatch");
  key_ = hash_fields({tid_.bytes(), a.tcs_id.bytes(), pk_.to_bytes(), a.pk_tcs.to_bytes(), a.sigma1.bits.bytes()});
  access_.reset();
  return *key_;
}

HandoverRequest UserSession::handover_request(const Id& nsat_id, const Clock& clock, Rng& rng) {
  const auto ho = ring::sample_gaussian(params_.ring, rng);
  const Timestamp t5 = clock.now();
  const auto t5b = timestamp_bytes(t5);
  const Digest ho_digest = hash_fields({ho.to_bytes(), t5b});
  const Digest hpu_i = hash_fields({pu_.bytes(), t5b});
  HandoverRequest req{tid_, nsat_id, hpu_i ^ ho_digest, {}, t5};
  req.a6 = hash_fields({tid_.bytes(), nsat_id.bytes(), req.hpo.bytes(), hpu_i.bytes(), t5b});
  handover_ = PendingHandover{nsat_id, ho_digest};
  return req;
}

void UserSession::finish_handover(const HandoverResponse& resp, const Clock& clock) {
  check_fresh(resp.t6, clock, params_.freshness_window);
  if (!handover_) throw std::logic_error("no pending handover");
  const auto t6 = timestamp_bytes(resp.t6);
  const auto& h = *handover_;
  require(hash_fields({tid_.bytes(), h.nsat_id.bytes(), h.ho_digest.bytes(), t6}) == resp.a7, Check::kA7,
          "a7 mismatch");
  handover_.reset();
}

}  // namespace psaa::protocol
