#include "psaa/simnet.hpp"

#include <chrono>
#include <functional>
#include <queue>
#include <stdexcept>

#include "psaa/hash.hpp"

namespace psaa::simnet {

using namespace psaa::protocol;

namespace {

constexpr std::string_view kNccName = "NCC";
constexpr Timestamp kStationExpiry{2'592'000'000};

std::span<const std::uint8_t> text_bytes(std::string_view s) {
  return {reinterpret_cast<const std::uint8_t*>(s.data()), s.size()};
}

Id name_id(std::string_view label, std::string_view name) {
  return truncate_id(hash_fields({text_bytes(label), text_bytes(name)}));
}

Digest random_digest(Rng& rng) {
  std::array<std::uint8_t, 32> b{};
  rng.fill(b);
  return Digest::from_bytes(b);
}

class Stopwatch {
 public:
  explicit Stopwatch(double& sink) : sink_(sink), start_(std::chrono::steady_clock::now()) {}
  ~Stopwatch() {
    sink_ += std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - start_).count();
  }

 private:
  double& sink_;
  std::chrono::steady_clock::time_point start_;
};

struct UserState {
  Id id;
  std::string password;
  fuzzy::Biometric bio;
  std::optional<UserRegState> pending_reg;
  std::optional<Device> device;
  std::optional<UserSession> session;
  std::optional<Id> tid;  // learned at registration; what an eavesdropper sees
  std::optional<Digest> key;
};

struct Party {
  PartySpec spec;
  std::size_t order = 0;
  Id id;
  Rng rng{0};
  std::optional<Tcs> tcs;
  std::optional<Satellite> sat;
  std::optional<UserState> user;
  Digest forged_hpu, forged_key;
};

struct Envelope {
  std::uint64_t arrive = 0;
  std::size_t recv_order = 0;
  std::size_t seq = 0;
  std::string from, to, origin;
  MessageKind kind{};
  std::vector<std::uint8_t> frame;
  bool secure = false;
  bool wrapped = false;
  std::size_t depth = 0;
  // Replayed copy or traffic caused by one: verdicts are logged but do not
  // decide the running operation.
  bool adversarial = false;
};

struct EnvelopeLater {
  bool operator()(const Envelope& a, const Envelope& b) const {
    if (a.arrive != b.arrive) return a.arrive > b.arrive;
    if (a.recv_order != b.recv_order) return a.recv_order > b.recv_order;
    return a.seq > b.seq;
  }
};

struct OpTracker {
  OpResult result;
  std::uint64_t start_ms = 0;
  std::optional<Digest> user_key, tcs_key;
  bool accepted = false;
  std::size_t key_depth = 0;
  std::uint64_t key_time = 0;
};

class Simulation {
 public:
  Simulation(const Scenario& sc, std::uint64_t seed);
  Transcript run();

 private:
  Party& party(const std::string& name);
  Party* party_by_id(const Id& id);
  Party& tcs_party();
  bool is_secure(const std::string& a, const std::string& b) const;
  Duration latency(const std::string& a, const std::string& b) const;

  void log(Event e);
  void send(const std::string& from, const std::string& to, MessageKind kind, std::vector<std::uint8_t> frame,
            std::size_t depth, bool wrapped = false, const std::string& origin = {});
  void enqueue(Envelope env, std::uint64_t arrive);
  void drain();
  void deliver(Envelope& env);
  void handle(Party& p, Envelope& env);
  void reject(const Envelope& env, std::string_view check, const std::string& reason);
  void verdict_key(const Envelope& env, bool user_side, const Digest& key);
  void verdict_accept(const Envelope& env);

  std::pair<AccessResponseUser, AccessForwardTcs> forge_access(const Party& p, const AccessRequest& req) const;
  void exec(const ScriptStep& step, std::size_t index);
  void finish_op(OpTracker& t);
  double& compute_sink(const Party& p);
  fuzzy::Biometric noisy_bio(Party& p, std::size_t flips);
  UserSession& ensure_session(Party& p, std::size_t flips);

  Scenario sc_;
  std::uint64_t seed_;
  Rng adversary_rng_;
  Clock clock_;
  std::optional<SystemParams> params_;
  std::optional<Ncc> ncc_;
  std::vector<Party> parties_;
  std::map<std::string, std::size_t> index_;
  std::priority_queue<Envelope, std::vector<Envelope>, EnvelopeLater> queue_;
  std::size_t seq_ = 0;
  std::vector<std::size_t> rule_hits_;
  bool record_captures_ = false;
  bool inbound_adversarial_ = false;
  OpTracker* op_ = nullptr;
  Transcript tr_;
};

Simulation::Simulation(const Scenario& sc, std::uint64_t seed)
    : sc_(sc), seed_(seed), adversary_rng_(Rng::derive(seed, "adversary")) {
  auto profile = ring::resolve_profile(sc_.profile, sc_.profile_config);
  Rng sys = Rng::derive(seed, "system");
  auto [params, ncc] = system_init(profile, sys, sc_.freshness_window);
  params_.emplace(std::move(params));
  ncc_.emplace(std::move(ncc));

  std::size_t tcs_count = 0;
  for (const auto& spec : sc_.parties) {
    if (spec.name == kNccName || index_.contains(spec.name))
      throw std::invalid_argument("duplicate or reserved party name: " + spec.name);
    Party p;
    p.spec = spec;
    p.order = parties_.size() + 1;
    p.rng = Rng::derive(seed, "party:" + spec.name);
    switch (spec.role) {
      case Role::kTcs:
        ++tcs_count;
        p.id = name_id("psaa-station", spec.name);
        p.tcs.emplace(*params_, p.id, kex::keygen(params_->a, p.rng));
        break;
      case Role::kSatellite:
        p.id = name_id("psaa-station", spec.name);
        p.sat.emplace(*params_, p.id, kex::keygen(params_->a, p.rng));
        if (spec.rogue) {
          p.forged_hpu = random_digest(p.rng);
          p.forged_key = random_digest(p.rng);
        }
        break;
      case Role::kUser: {
        UserState u;
        u.id = name_id("psaa-user", spec.name);
        u.password = spec.password;
        Rng bio_rng = spec.bio_seed ? Rng(spec.bio_seed) : Rng::derive(seed, "bio:" + spec.name);
        u.bio = fuzzy::random_biometric(bio_rng);
        p.id = u.id;
        p.user = std::move(u);
        break;
      }
    }
    index_.emplace(spec.name, parties_.size());
    parties_.push_back(std::move(p));
  }
  if (tcs_count != 1) throw std::invalid_argument("scenario needs exactly one TCS");
  for (const auto& p : parties_) {
    if (p.spec.rogue && p.spec.role == Role::kUser && !p.spec.impersonates.empty()) party(p.spec.impersonates);
  }
  for (const auto& l : sc_.links) {
    if (l.a != kNccName) party(l.a);
    if (l.b != kNccName) party(l.b);
  }
  rule_hits_.assign(sc_.policy.size(), 0);
  for (const auto& r : sc_.policy) record_captures_ |= r.action == Action::kEavesdrop || r.action == Action::kReplay;
  for (const auto& s : sc_.script) record_captures_ |= s.op == "inject" && s.capture.has_value();
}

Party& Simulation::party(const std::string& name) {
  auto it = index_.find(name);
  if (it == index_.end()) throw std::invalid_argument("unknown party: " + name);
  return parties_[it->second];
}

Party* Simulation::party_by_id(const Id& id) {
  for (auto& p : parties_)
    if (p.id == id && p.spec.role != Role::kUser) return &p;
  return nullptr;
}

Party& Simulation::tcs_party() {
  for (auto& p : parties_)
    if (p.tcs) return p;
  throw std::logic_error("no TCS");
}

bool Simulation::is_secure(const std::string& a, const std::string& b) const {
  for (const auto& l : sc_.links)
    if ((l.a == a && l.b == b) || (l.a == b && l.b == a)) return l.secure;
  if (a == kNccName || b == kNccName) return true;
  auto role = [&](const std::string& n) { return parties_[index_.at(n)].spec.role; };
  return (role(a) == Role::kUser && role(b) == Role::kTcs) || (role(a) == Role::kTcs && role(b) == Role::kUser);
}

Duration Simulation::latency(const std::string& a, const std::string& b) const {
  for (const auto& l : sc_.links)
    if ((l.a == a && l.b == b) || (l.a == b && l.b == a)) return l.latency;
  return sc_.latency;
}

void Simulation::log(Event e) {
  e.t_ms = clock_.now().ms;
  e.op = op_ ? op_->result.index : 0;
  tr_.events.push_back(std::move(e));
}

void Simulation::enqueue(Envelope env, std::uint64_t arrive) {
  env.arrive = arrive;
  env.recv_order = parties_[index_.at(env.to)].order;
  env.seq = seq_++;
  queue_.push(std::move(env));
}

void Simulation::send(const std::string& from, const std::string& to, MessageKind kind, std::vector<std::uint8_t> frame,
                      std::size_t depth, bool wrapped, const std::string& origin) {
  Envelope env;
  env.from = from;
  env.to = to;
  env.origin = origin.empty() ? from : origin;
  env.kind = kind;
  env.secure = is_secure(from, to);
  env.wrapped = wrapped;
  env.depth = depth;
  env.adversarial = inbound_adversarial_;

  std::size_t payload = 0;
  if (wrapped) {
    payload = wire::payload_bits(kind, wire::FieldWidths::for_params(params_->ring_params()));
    tr_.wrap_overhead_bits += frame.size() * 8 - payload;
  } else {
    payload = wire::frame_payload_bits(frame);
  }
  tr_.bits_sent[from] += payload;
  log({.type = "send", .from = from, .to = to, .kind = std::string(kind_name(kind)), .bits = payload,
       .secure = env.secure});

  const std::uint64_t arrive = clock_.now().ms + static_cast<std::uint64_t>(latency(from, to).count());
  env.frame = std::move(frame);
  if (env.secure) {
    enqueue(std::move(env), arrive);
    return;
  }
  if (record_captures_) tr_.adversary_log.push_back({from, to, kind, env.frame, wrapped});

  for (std::size_t i = 0; i < sc_.policy.size(); ++i) {
    const auto& r = sc_.policy[i];
    if ((r.kind && *r.kind != kind) || (r.from && *r.from != from) || (r.to && *r.to != to)) continue;
    const std::size_t hit = rule_hits_[i]++;
    if (r.occurrence && *r.occurrence != hit) continue;
    Event ev{.type = action_name(r.action), .from = from, .to = to, .kind = std::string(kind_name(kind))};
    switch (r.action) {
      case Action::kPassthrough:
      case Action::kEavesdrop:
        break;
      case Action::kReplay: {
        log(ev);
        Envelope copy = env;
        copy.adversarial = true;
        enqueue(std::move(copy), arrive + static_cast<std::uint64_t>(r.delay.count()));
        break;
      }
      case Action::kTamper:
        for (auto pos : r.bit_positions)
          if (pos < env.frame.size() * 8) env.frame[pos / 8] ^= static_cast<std::uint8_t>(1u << (pos % 8));
        log(ev);
        break;
      case Action::kDrop:
        log(ev);
        return;
      case Action::kInject:
        env.frame = r.frame;
        log(ev);
        break;
    }
    break;
  }
  enqueue(std::move(env), arrive);
}

void Simulation::drain() {
  while (!queue_.empty()) {
    Envelope env = queue_.top();
    queue_.pop();
    clock_.set(Timestamp{env.arrive});
    deliver(env);
  }
}

void Simulation::reject(const Envelope& env, std::string_view check, const std::string& reason) {
  log({.type = "reject", .from = env.from, .to = env.to, .kind = std::string(kind_name(env.kind)),
       .check = std::string(check), .reason = reason});
  if (op_ && !env.adversarial && op_->result.check.empty()) {
    op_->result.check = std::string(check);
    op_->result.reason = reason;
  }
}

void Simulation::verdict_key(const Envelope& env, bool user_side, const Digest& key) {
  log({.type = "key", .from = env.from, .to = env.to, .kind = std::string(kind_name(env.kind))});
  if (!op_ || env.adversarial) return;
  (user_side ? op_->user_key : op_->tcs_key) = key;
  op_->key_depth = std::max(op_->key_depth, env.depth);
  op_->key_time = std::max(op_->key_time, clock_.now().ms);
}

void Simulation::verdict_accept(const Envelope& env) {
  log({.type = "accept", .from = env.from, .to = env.to, .kind = std::string(kind_name(env.kind))});
  if (!op_ || env.adversarial) return;
  op_->accepted = true;
  op_->key_depth = std::max(op_->key_depth, env.depth);
  op_->key_time = std::max(op_->key_time, clock_.now().ms);
}

double& Simulation::compute_sink(const Party& p) {
  static double discard = 0;
  if (!op_) return discard;
  switch (p.spec.role) {
    case Role::kTcs: return op_->result.tcs_compute_ms;
    case Role::kSatellite: return op_->result.satellite_compute_ms;
    case Role::kUser: return op_->result.user_compute_ms;
  }
  return discard;
}

void Simulation::deliver(Envelope& env) {
  log({.type = "receive", .from = env.from, .to = env.to, .kind = std::string(kind_name(env.kind)),
       .secure = env.secure});
  Party& p = party(env.to);
  inbound_adversarial_ = env.adversarial;
  struct Reset {
    bool& flag;
    ~Reset() { flag = false; }
  } reset{inbound_adversarial_};
  try {
    Stopwatch sw(compute_sink(p));
    handle(p, env);
  } catch (const ProtocolError& e) {
    reject(env, check_name(e.check()), e.what());
  } catch (const wire::WireError& e) {
    reject(env, "decode", e.what());
  } catch (const ring::ParamMismatch& e) {
    reject(env, "decode", e.what());
  } catch (const std::logic_error& e) {
    reject(env, "state", e.what());
  }
}

void Simulation::handle(Party& p, Envelope& env) {
  const auto& ring = params_->ring;
  if (p.tcs) {
    Tcs& tcs = *p.tcs;
    switch (env.kind) {
      case MessageKind::kRegRequest: {
        auto req = wire::decode_as<RegRequest>(env.frame, env.kind, ring);
        auto resp = tcs.register_user(req, p.rng);
        send(p.spec.name, env.from, MessageKind::kRegResponse, wire::encode(resp), env.depth + 1);
        return;
      }
      case MessageKind::kPreNegRequest: {
        auto req = wire::decode_as<PreNegRequest>(env.frame, env.kind, ring);
        auto resp = tcs.handle_preneg(req, clock_, p.rng);
        send(p.spec.name, env.from, MessageKind::kPreNegResponse, wire::encode(resp), env.depth + 1);
        return;
      }
      case MessageKind::kAccessForwardTcs: {
        const Party& sender = party(env.from);
        auto session = tcs.satellite_session(sender.id);
        if (!session) throw ProtocolError(Check::kWrap, "no session with sender");
        auto plain = symwrap::open(sc_.cipher, session->key, env.frame, sender.id.bytes());
        if (!plain) throw ProtocolError(Check::kWrap, "wrap authentication failed");
        auto fwd = wire::decode_as<AccessForwardTcs>(*plain, env.kind, ring);
        verdict_key(env, false, tcs.finish_access(fwd, clock_, p.rng));
        return;
      }
      default:
        throw std::logic_error("unexpected message at TCS");
    }
  }
  if (p.sat) {
    Satellite& sat = *p.sat;
    switch (env.kind) {
      case MessageKind::kPreNegResponse: {
        auto resp = wire::decode_as<PreNegResponse>(env.frame, env.kind, ring);
        sat.finish_preneg(resp, clock_, p.rng);
        verdict_accept(env);
        return;
      }
      case MessageKind::kAccessRequest: {
        auto req = wire::decode_as<AccessRequest>(env.frame, env.kind, ring);
        auto [to_user, to_tcs] = p.spec.rogue ? forge_access(p, req) : sat.handle_access(req, clock_);
        const Digest wrap_key = p.spec.rogue ? p.forged_key : sat.link()->key;
        const std::string tcs_name = tcs_party().spec.name;
        auto sealed = symwrap::seal(sc_.cipher, wrap_key, wire::encode(to_tcs), p.id.bytes(), p.rng);
        send(p.spec.name, env.from, MessageKind::kAccessResponseUser, wire::encode(to_user), env.depth + 1);
        send(p.spec.name, tcs_name, MessageKind::kAccessForwardTcs, std::move(sealed), env.depth + 1, true);
        return;
      }
      case MessageKind::kHandoverRequest: {
        auto req = wire::decode_as<HandoverRequest>(env.frame, env.kind, ring);
        if (req.nsat_id != p.id) {
          Party* next = party_by_id(req.nsat_id);
          if (!next || !next->sat) throw std::logic_error("handover target unknown");
          log({.type = "relay", .from = p.spec.name, .to = next->spec.name, .kind = "HandoverRequest"});
          send(p.spec.name, next->spec.name, env.kind, env.frame, env.depth + 1, false, env.origin);
          return;
        }
        HandoverResponse resp;
        if (p.spec.rogue) {
          check_fresh(req.t5, clock_, params_->freshness_window);
          const auto t5 = timestamp_bytes(req.t5);
          const Digest hpu_i = hash_fields({hash_fields({req.tid.bytes(), p.forged_hpu.bytes()}).bytes(), t5});
          const auto t6 = timestamp_bytes(clock_.now());
          resp = {hash_fields({req.tid.bytes(), p.id.bytes(), (req.hpo ^ hpu_i).bytes(), t6}), clock_.now()};
        } else {
          resp = sat.handle_handover(req, clock_);
        }
        send(p.spec.name, env.origin, MessageKind::kHandoverResponse, wire::encode(resp), env.depth + 1);
        return;
      }
      default:
        throw std::logic_error("unexpected message at satellite");
    }
  }
  UserState& u = *p.user;
  switch (env.kind) {
    case MessageKind::kRegResponse: {
      if (!u.pending_reg) throw std::logic_error("no pending registration");
      auto resp = wire::decode_as<RegResponse>(env.frame, env.kind, ring);
      u.device = user_register_finish(*u.pending_reg, resp, *params_);
      u.tid = resp.did ^ truncate_id(hash_fields({u.id.bytes(), u.pending_reg->rpw.bytes()}));
      u.pending_reg.reset();
      u.session.reset();
      verdict_accept(env);
      return;
    }
    case MessageKind::kAccessResponseUser: {
      auto resp = wire::decode_as<AccessResponseUser>(env.frame, env.kind, ring);
      if (!u.session) throw std::logic_error("no session");
      u.key = u.session->finish_access(resp, clock_);
      verdict_key(env, true, *u.key);
      return;
    }
    case MessageKind::kHandoverResponse: {
      auto resp = wire::decode_as<HandoverResponse>(env.frame, env.kind, ring);
      if (!u.session) throw std::logic_error("no session");
      u.session->finish_handover(resp, clock_);
      verdict_accept(env);
      return;
    }
    default:
      throw std::logic_error("unexpected message at user");
  }
}

// Rogue satellite: skips the a4 check and answers with its guessed HPU.
std::pair<AccessResponseUser, AccessForwardTcs> Simulation::forge_access(const Party& p,
                                                                         const AccessRequest& req) const {
  check_fresh(req.t3, clock_, params_->freshness_window);
  const auto t3 = timestamp_bytes(req.t3);
  const Digest hpu_i = hash_fields({hash_fields({req.tid.bytes(), p.forged_hpu.bytes()}).bytes(), t3});
  const Digest hp = req.a3 ^ hpu_i;
  const Timestamp t4 = clock_.now();
  const auto t4b = timestamp_bytes(t4);
  AccessResponseUser to_user{hash_fields({hp.bytes(), req.tid.bytes(), req.te.to_bytes(), req.sw.bits.bytes(), t4b}),
                             t4};
  return {std::move(to_user), AccessForwardTcs{req.tid, req.te, req.sw, hp, t4}};
}

fuzzy::Biometric Simulation::noisy_bio(Party& p, std::size_t flips) {
  return flips ? fuzzy::perturb(p.user->bio, flips, p.rng) : p.user->bio;
}

UserSession& Simulation::ensure_session(Party& p, std::size_t flips) {
  UserState& u = *p.user;
  if (u.session) return *u.session;
  if (p.spec.rogue) {
    const Party& victim = party(p.spec.impersonates);
    if (!victim.user->tid) throw std::logic_error("impersonated user is not registered");
    auto keys = kex::keygen(params_->a, p.rng);
    u.session.emplace(*params_, *victim.user->tid, random_digest(p.rng), random_digest(p.rng), keys.sk, keys.pk);
    return *u.session;
  }
  if (!u.device) throw std::logic_error("user is not registered");
  Stopwatch sw(compute_sink(p));
  u.session.emplace(user_login(*u.device, u.id, u.password, noisy_bio(p, flips), *params_));
  return *u.session;
}

void Simulation::exec(const ScriptStep& step, std::size_t index) {
  OpTracker t;
  t.result.index = index;
  t.result.op = step.op;
  t.result.party = step.party;
  t.result.expect = step.expect;
  t.start_ms = clock_.now().ms;
  op_ = &t;
  log({.type = "op", .from = step.party, .kind = step.op});

  const auto fail = [&](std::string_view check, const std::string& reason) {
    if (t.result.check.empty()) {
      t.result.check = std::string(check);
      t.result.reason = reason;
    }
    log({.type = "reject", .from = step.party, .kind = step.op, .check = std::string(check), .reason = reason});
  };

  try {
    if (step.op == "advance") {
      clock_.advance(step.amount);
      t.accepted = true;
    } else if (step.op == "register_station") {
      Party& p = party(step.party);
      if (p.spec.role == Role::kUser) throw std::invalid_argument("register_station needs a station");
      const Id id = p.id;
      const auto& pk = p.tcs ? p.tcs->pk() : p.sat->pk();
      auto [entry, p_ncc] = ncc_->register_station(id, pk, kStationExpiry, clock_);
      log({.type = "send", .from = std::string(kNccName), .to = p.spec.name, .kind = "StationCredential",
           .bits = kHashBits, .secure = true});
      if (p.tcs)
        p.tcs->install_credential(p_ncc, kStationExpiry);
      else
        p.sat->install_credential(p_ncc);
      t.accepted = true;
    } else if (step.op == "register_user") {
      Party& p = party(step.party);
      if (!p.user) throw std::invalid_argument("register_user needs a user");
      std::pair<RegRequest, UserRegState> begun = [&] {
        Stopwatch sw(compute_sink(p));
        return user_register_begin(p.user->id, p.user->password, p.user->bio, *params_, p.rng);
      }();
      p.user->pending_reg = std::move(begun.second);
      send(p.spec.name, tcs_party().spec.name, MessageKind::kRegRequest, wire::encode(begun.first), 1);
    } else if (step.op == "preneg") {
      Party& p = party(step.party);
      if (!p.sat) throw std::invalid_argument("preneg needs a satellite");
      std::vector<std::uint8_t> frame;
      {
        Stopwatch sw(compute_sink(p));
        frame = wire::encode(p.sat->begin_preneg(clock_));
      }
      send(p.spec.name, tcs_party().spec.name, MessageKind::kPreNegRequest, std::move(frame), 1);
    } else if (step.op == "login") {
      Party& p = party(step.party);
      if (!p.user || !p.user->device) throw std::logic_error("user is not registered");
      p.user->session.reset();
      const std::string pw = step.password.value_or(p.user->password);
      Stopwatch sw(compute_sink(p));
      p.user->session.emplace(user_login(*p.user->device, p.user->id, pw, noisy_bio(p, step.bio_flips), *params_));
      t.accepted = true;
    } else if (step.op == "auth") {
      Party& p = party(step.party);
      if (!p.user) throw std::invalid_argument("auth needs a user");
      Party& via = party(step.via);
      const Tcs& tcs = *tcs_party().tcs;
      UserSession& sess = ensure_session(p, step.bio_flips);
      std::vector<std::uint8_t> frame;
      {
        Stopwatch sw(compute_sink(p));
        frame = wire::encode(sess.access_request(tcs.id(), tcs.pk(), clock_, p.rng));
      }
      send(p.spec.name, via.spec.name, MessageKind::kAccessRequest, std::move(frame), 1);
    } else if (step.op == "handover") {
      Party& p = party(step.party);
      if (!p.user) throw std::invalid_argument("handover needs a user");
      Party& via = party(step.via);
      Party& target = party(step.target);
      if (!target.sat) throw std::invalid_argument("handover target must be a satellite");
      UserSession& sess = ensure_session(p, step.bio_flips);
      std::vector<std::uint8_t> frame;
      {
        Stopwatch sw(compute_sink(p));
        frame = wire::encode(sess.handover_request(target.id, clock_, p.rng));
      }
      send(p.spec.name, via.spec.name, MessageKind::kHandoverRequest, std::move(frame), 1);
    } else if (step.op == "update") {
      Party& p = party(step.party);
      if (!p.user || !p.user->device) throw std::logic_error("user is not registered");
      UserState& u = *p.user;
      fuzzy::Biometric new_bio = u.bio;
      if (step.new_bio_seed) {
        Rng r(*step.new_bio_seed);
        new_bio = fuzzy::random_biometric(r);
      }
      const std::string new_pw = step.new_password.value_or(u.password);
      Stopwatch sw(compute_sink(p));
      u.device = update_credentials(*u.device, u.id, step.password.value_or(u.password), noisy_bio(p, step.bio_flips),
                                    new_pw, new_bio, *params_, p.rng);
      u.password = new_pw;
      u.bio = new_bio;
      u.session.reset();
      t.accepted = true;
    } else if (step.op == "inject") {
      std::string from, to;
      MessageKind kind{};
      std::vector<std::uint8_t> frame;
      bool wrapped = false;
      if (step.capture) {
        const Capture* found = nullptr;
        std::size_t seen = 0;
        for (const auto& c : tr_.adversary_log) {
          if (step.kind && c.kind != *step.kind) continue;
          if (seen++ == *step.capture) {
            found = &c;
            break;
          }
        }
        if (!found) throw std::invalid_argument("capture index out of range");
        const Capture& c = *found;
        from = c.from;
        to = step.target.empty() ? c.to : step.target;
        kind = c.kind;
        frame = c.frame;
        wrapped = c.wrapped;
      } else {
        if (!step.kind) throw std::invalid_argument("inject needs a capture or a kind");
        from = step.party;  // spoofed source
        to = step.target;
        kind = *step.kind;
        frame = step.frame;
      }
      party(from);
      party(to);
      log({.type = "inject", .from = from, .to = to, .kind = std::string(kind_name(kind))});
      Envelope env;
      env.from = from;
      env.to = to;
      env.origin = env.from;
      env.kind = kind;
      env.frame = std::move(frame);
      env.wrapped = wrapped;
      env.depth = 1;
      enqueue(std::move(env), clock_.now().ms + static_cast<std::uint64_t>(sc_.latency.count()));
    } else {
      throw std::invalid_argument("unknown op: " + step.op);
    }
  } catch (const ProtocolError& e) {
    fail(check_name(e.check()), e.what());
  } catch (const std::invalid_argument&) {
    op_ = nullptr;
    throw;
  } catch (const std::logic_error& e) {
    fail("state", e.what());
  }
  drain();
  finish_op(t);
  op_ = nullptr;
}

void Simulation::finish_op(OpTracker& t) {
  OpResult& r = t.result;
  const bool auth = r.op == "auth";
  if (auth) {
    r.keys_match = t.user_key && t.tcs_key && *t.user_key == *t.tcs_key;
    if (r.keys_match && r.check.empty())
      r.outcome = "accept";
    else if (!r.check.empty())
      r.outcome = "reject";
    else if (t.user_key && t.tcs_key) {
      r.outcome = "reject";
      r.check = "key";
      r.reason = "key mismatch";
    } else {
      r.outcome = "incomplete";
    }
  } else if (r.op == "inject") {
    r.outcome = r.check.empty() ? "accept" : "reject";
  } else if (!r.check.empty()) {
    r.outcome = "reject";
  } else {
    r.outcome = t.accepted ? "accept" : "incomplete";
  }
  if (t.key_time) {
    r.transmissions = t.key_depth;
    r.link_delay_ms = t.key_time - t.start_ms;
  }
  r.met = !r.expect || *r.expect == r.outcome;
  tr_.ok = tr_.ok && r.met;
  tr_.ops.push_back(r);
}

Transcript Simulation::run() {
  for (std::size_t i = 0; i < sc_.script.size(); ++i) exec(sc_.script[i], i);
  return std::move(tr_);
}

}  // namespace

std::string action_name(Action a) {
  switch (a) {
    case Action::kPassthrough: return "passthrough";
    case Action::kEavesdrop: return "eavesdrop";
    case Action::kReplay: return "replay";
    case Action::kTamper: return "tamper";
    case Action::kDrop: return "drop";
    case Action::kInject: return "inject";
  }
  return "unknown";
}

Transcript run_scenario(const Scenario& scenario, std::uint64_t seed) { return Simulation(scenario, seed).run(); }

Scenario honest_auth_scenario(std::size_t users, const std::string& profile) {
  Scenario sc;
  sc.profile = profile;
  sc.parties = {{.name = "TCS", .role = Role::kTcs},
                {.name = "SAT-1", .role = Role::kSatellite},
                {.name = "SAT-2", .role = Role::kSatellite}};
  for (const auto* st : {"TCS", "SAT-1", "SAT-2"}) sc.script.push_back({.op = "register_station", .party = st});
  sc.script.push_back({.op = "preneg", .party = "SAT-1", .expect = "accept"});
  sc.script.push_back({.op = "preneg", .party = "SAT-2", .expect = "accept"});
  for (std::size_t i = 0; i < users; ++i) {
    const std::string name = "user-" + std::to_string(i);
    sc.parties.push_back({.name = name, .role = Role::kUser, .password = "pw-" + std::to_string(i)});
    sc.script.push_back({.op = "register_user", .party = name, .expect = "accept"});
    sc.script.push_back({.op = "login", .party = name, .expect = "accept"});
    sc.script.push_back({.op = "auth", .party = name, .via = "SAT-1", .expect = "accept"});
  }
  return sc;
}

}  // namespace psaa::simnet
