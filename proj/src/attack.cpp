#include <algorithm>
#include <cmath>
#include <functional>

#include "psaa/hash.hpp"
#include "psaa/simnet.hpp"

namespace psaa::simnet {

using namespace psaa::protocol;

namespace {

Id tag_id(std::uint64_t tag) {
  std::array<std::uint8_t, 8> b{};
  for (int i = 0; i < 8; ++i) b[i] = static_cast<std::uint8_t>(tag >> (8 * i));
  return truncate_id(hash_fields({b}));
}

// Parties driven directly, without the network, for handler-level sweeps.
struct Bench {
  Rng rng;
  Clock clock{Timestamp{1'000'000}};
  std::pair<SystemParams, Ncc> init;
  SystemParams& params = init.first;
  Tcs tcs;
  Satellite sat, nsat;
  Timestamp expiry{2'592'000'000};

  Bench(const ring::RingParams& profile, std::uint64_t seed)
      : rng(Rng::derive(seed, "bench")),
        init(system_init(profile, rng)),
        tcs(params, tag_id(1), kex::keygen(params.a, rng)),
        sat(params, tag_id(2), kex::keygen(params.a, rng)),
        nsat(params, tag_id(3), kex::keygen(params.a, rng)) {
    tcs.install_credential(init.second.register_station(tcs.id(), tcs.pk(), expiry, clock).second, expiry);
    sat.install_credential(init.second.register_station(sat.id(), sat.pk(), expiry, clock).second);
    nsat.install_credential(init.second.register_station(nsat.id(), nsat.pk(), expiry, clock).second);
    preneg(sat);
    preneg(nsat);
  }

  void preneg(Satellite& s) {
    auto req = s.begin_preneg(clock);
    step();
    auto resp = tcs.handle_preneg(req, clock, rng);
    step();
    s.finish_preneg(resp, clock, rng);
  }

  void step() { clock.advance(Duration{10}); }

  struct Enrolled {
    Id id;
    Password pw;
    fuzzy::Biometric bio;
    Device device;
  };

  Enrolled enroll(std::uint64_t tag) {
    const Id id = tag_id(1000 + tag);
    const Password pw = "pw-" + std::to_string(tag);
    auto bio = fuzzy::random_biometric(rng);
    auto [req, st] = user_register_begin(id, pw, bio, params, rng);
    auto device = user_register_finish(st, tcs.register_user(req, rng), params);
    return Enrolled{id, pw, std::move(bio), std::move(device)};
  }
};

bool rejects(const std::function<void()>& f) {
  try {
    f();
  } catch (const ProtocolError&) {
    return true;
  } catch (const wire::WireError&) {
    return true;
  } catch (const ring::ParamMismatch&) {
    return true;
  }
  return false;
}

std::vector<std::uint8_t> flipped(std::vector<std::uint8_t> frame, std::size_t bit) {
  frame[bit / 8] ^= static_cast<std::uint8_t>(1u << (bit % 8));
  return frame;
}

// Flips every stride-th frame bit outside [skip_lo, skip_hi) and counts
// rejections by `verify`.
AttackResult sweep(std::string name, const std::vector<std::uint8_t>& frame, std::size_t stride,
                   const std::function<void(const std::vector<std::uint8_t>&)>& verify, std::size_t skip_lo = 0,
                   std::size_t skip_hi = 0) {
  AttackResult r{std::move(name)};
  for (std::size_t bit = 0; bit < frame.size() * 8; bit += stride) {
    if (bit >= skip_lo && bit < skip_hi) continue;
    ++r.trials;
    if (rejects([&] { verify(flipped(frame, bit)); })) ++r.rejected;
  }
  r.detail = "bits swept=" + std::to_string(r.trials) + " stride=" + std::to_string(stride);
  return r;
}

// True when the first `nbits` bits of `needle` occur at any bit offset.
bool contains_bits(std::span<const std::uint8_t> hay, std::span<const std::uint8_t> needle, std::size_t nbits) {
  auto bit = [](std::span<const std::uint8_t> b, std::size_t i) { return (b[i / 8] >> (i % 8)) & 1u; };
  for (std::size_t off = 0; off + nbits <= hay.size() * 8; ++off) {
    std::size_t i = 0;
    while (i < nbits && bit(hay, off + i) == bit(needle, i)) ++i;
    if (i == nbits) return true;
  }
  return false;
}

std::size_t count_rejects(const Transcript& t, std::string_view kind, std::string_view check) {
  std::size_t n = 0;
  for (const auto& e : t.events)
    if (e.type == "reject" && e.kind == kind && e.check == check) ++n;
  return n;
}

std::size_t count_ops(const Transcript& t, std::string_view op, std::string_view outcome) {
  std::size_t n = 0;
  for (const auto& r : t.ops)
    if (r.op == op && r.outcome == outcome) ++n;
  return n;
}

Scenario base_scenario(const AttackOptions& o) {
  Scenario sc;
  sc.profile = o.profile;
  sc.profile_config = o.profile_config;
  sc.parties = {{.name = "TCS", .role = Role::kTcs},
                {.name = "SAT-1", .role = Role::kSatellite},
                {.name = "SAT-2", .role = Role::kSatellite},
                {.name = "alice", .role = Role::kUser, .password = "alice-pw"}};
  for (const auto* st : {"TCS", "SAT-1", "SAT-2"}) sc.script.push_back({.op = "register_station", .party = st});
  sc.script.push_back({.op = "preneg", .party = "SAT-1"});
  sc.script.push_back({.op = "preneg", .party = "SAT-2"});
  sc.script.push_back({.op = "register_user", .party = "alice"});
  sc.script.push_back({.op = "login", .party = "alice"});
  return sc;
}

void add_rounds(Scenario& sc, std::size_t trials, bool handover) {
  for (std::size_t i = 0; i < trials; ++i) {
    sc.script.push_back({.op = "auth", .party = "alice", .via = "SAT-1"});
    if (handover) sc.script.push_back({.op = "handover", .party = "alice", .via = "SAT-1", .target = "SAT-2"});
    sc.script.push_back({.op = "advance", .amount = Duration{1000}});
  }
}

AttackResult replay_attack(const AttackOptions& o, MessageKind kind, bool handover) {
  Scenario sc = base_scenario(o);
  AdversaryRule rule;
  rule.kind = kind;
  rule.action = Action::kReplay;
  rule.delay = Duration{500};
  sc.policy.push_back(rule);
  add_rounds(sc, o.trials, handover);
  const Transcript t = run_scenario(sc, o.seed);
  std::size_t sent = 0;
  for (const auto& e : t.events)
    if (e.type == "replay") ++sent;
  AttackResult r{"replay " + std::string(kind_name(kind))};
  r.trials = sent;
  r.rejected = count_rejects(t, kind_name(kind), "timestamp");
  r.detail = "replay delay=500ms window=" + std::to_string(sc.freshness_window.count()) + "ms";
  return r;
}

}  // namespace

bool AttackReport::all_passed() const {
  for (const auto& r : results)
    if (!r.informational && (!r.passed() || r.trials == 0)) return false;
  return !results.empty();
}

AttackReport attack_suite(const AttackOptions& o) {
  AttackReport report;
  const auto profile = ring::resolve_profile(o.profile, o.profile_config);

  // Honest controls through the network.
  {
    Scenario sc = base_scenario(o);
    add_rounds(sc, o.trials, true);
    const Transcript t = run_scenario(sc, o.seed);
    AttackResult auth{"control: honest authentication", true, o.trials, o.trials - count_ops(t, "auth", "accept")};
    AttackResult ho{"control: honest handover", true, o.trials, o.trials - count_ops(t, "handover", "accept")};
    report.results.push_back(auth);
    report.results.push_back(ho);
  }

  for (auto kind : {MessageKind::kPreNegRequest, MessageKind::kPreNegResponse, MessageKind::kAccessRequest,
                    MessageKind::kAccessResponseUser, MessageKind::kAccessForwardTcs, MessageKind::kHandoverRequest,
                    MessageKind::kHandoverResponse}) {
    report.results.push_back(replay_attack(o, kind, true));
  }

  // User impersonation: knows alice's TID from the air, guesses p and pu.
  {
    Scenario sc = base_scenario(o);
    sc.parties.push_back({.name = "mallory", .role = Role::kUser, .rogue = true, .impersonates = "alice"});
    for (std::size_t i = 0; i < o.trials; ++i) {
      sc.script.push_back({.op = "auth", .party = "mallory", .via = "SAT-1"});
      sc.script.push_back({.op = "advance", .amount = Duration{1000}});
    }
    const Transcript t = run_scenario(sc, o.seed);
    AttackResult r{"user impersonation without pu_i", false, o.trials, count_rejects(t, "AccessRequest", "a4")};
    r.detail = "expected check=a4";
    report.results.push_back(r);
  }

  // Satellite impersonation: serves access and handover without HPU_j.
  {
    Scenario sc = base_scenario(o);
    sc.parties.push_back({.name = "ROGUE-SAT", .role = Role::kSatellite, .rogue = true});
    for (std::size_t i = 0; i < o.trials; ++i) {
      sc.script.push_back({.op = "auth", .party = "alice", .via = "ROGUE-SAT"});
      sc.script.push_back({.op = "advance", .amount = Duration{1000}});
    }
    const Transcript t = run_scenario(sc, o.seed);
    AttackResult r{"satellite impersonation without HPU_j (access)", false, o.trials,
                   count_rejects(t, "AccessResponseUser", "a5")};
    r.detail = "expected check=a5; TCS wrap rejections=" +
               std::to_string(count_rejects(t, "AccessForwardTcs", "wrap"));
    report.results.push_back(r);

    Scenario ho = base_scenario(o);
    ho.parties.push_back({.name = "ROGUE-SAT", .role = Role::kSatellite, .rogue = true});
    for (std::size_t i = 0; i < o.trials; ++i) {
      ho.script.push_back({.op = "handover", .party = "alice", .via = "SAT-1", .target = "ROGUE-SAT"});
      ho.script.push_back({.op = "advance", .amount = Duration{1000}});
    }
    const Transcript th = run_scenario(ho, o.seed);
    AttackResult rh{"satellite impersonation without HPU_j (handover)", false, o.trials,
                    count_rejects(th, "HandoverResponse", "a7")};
    rh.detail = "expected check=a7";
    report.results.push_back(rh);
  }

  Bench b(profile, o.seed);
  const auto alice = b.enroll(1);

  // Device loss: the vault is in hand, the factors are guessed.
  {
    AttackResult r{"device loss login guessing"};
    Rng guess = Rng::derive(o.seed, "guess");
    for (std::size_t i = 0; i < o.trials; ++i) {
      const auto wrong_bio = fuzzy::random_biometric(guess);
      const std::string wrong_pw = "guess-" + std::to_string(guess.next_u64());
      const std::array<std::function<void()>, 4> tries = {
          [&] { user_login(alice.device, alice.id, wrong_pw, wrong_bio, b.params); },
          [&] { user_login(alice.device, alice.id, alice.pw, wrong_bio, b.params); },
          [&] { user_login(alice.device, alice.id, wrong_pw, alice.bio, b.params); },
          [&] { user_login(alice.device, tag_id(guess.next_u64()), alice.pw, alice.bio, b.params); },
      };
      for (const auto& t : tries) {
        ++r.trials;
        if (rejects(t)) ++r.rejected;
      }
    }
    r.detail = "guesses: all three, bio, password, identity";
    report.results.push_back(r);
  }

  // Handler-level tamper sweeps over every MAC-protected field.
  const auto widths = wire::FieldWidths::for_params(profile);
  const auto& ring = b.params.ring;
  {
    const auto req = b.sat.begin_preneg(b.clock);
    const auto frame = wire::encode(req);
    Clock at = b.clock;
    at.advance(Duration{10});
    report.results.push_back(sweep("tamper PreNegRequest (a1)", frame, o.sweep_stride, [&](const auto& f) {
      Tcs tcs = b.tcs;
      tcs.handle_preneg(wire::decode_as<PreNegRequest>(f, MessageKind::kPreNegRequest, ring), at, b.rng);
    }));
  }
  {
    Satellite fresh = b.sat;
    const auto req = fresh.begin_preneg(b.clock);
    Clock at = b.clock;
    at.advance(Duration{10});
    Tcs tcs = b.tcs;
    const auto frame = wire::encode(tcs.handle_preneg(req, at, b.rng));
    at.advance(Duration{10});
    // sw and te are not inputs of a2; they are bound only through sigma.
    const std::size_t lo = widths.id + widths.ring_element;
    const std::size_t hi = lo + widths.signal + widths.ring_element;
    const auto verify = [&](const std::vector<std::uint8_t>& f) {
      Satellite s = fresh;
      s.finish_preneg(wire::decode_as<PreNegResponse>(f, MessageKind::kPreNegResponse, ring), at, b.rng);
    };
    auto r = sweep("tamper PreNegResponse (a2)", frame, o.sweep_stride, verify, lo, hi);
    r.detail += " excluding sw,te bits [" + std::to_string(lo) + "," + std::to_string(hi) + ")";
    report.results.push_back(r);
    AttackResult unbound{"tamper PreNegResponse sw,te (not MAC inputs)"};
    for (std::size_t bit = lo; bit < hi; bit += o.sweep_stride) {
      ++unbound.trials;
      if (rejects([&] { verify(flipped(frame, bit)); })) ++unbound.rejected;
    }
    unbound.informational = true;
    unbound.detail = "bits swept=" + std::to_string(unbound.trials) + "; detected only when the flip changes sigma";
    report.results.push_back(unbound);
  }

  auto session = user_login(alice.device, alice.id, alice.pw, alice.bio, b.params);
  {
    UserSession s = session;
    const auto req = s.access_request(b.tcs.id(), b.tcs.pk(), b.clock, b.rng);
    Clock at = b.clock;
    at.advance(Duration{10});
    const auto [to_user, to_tcs] = b.sat.handle_access(req, at);
    report.results.push_back(sweep("tamper AccessRequest (a4)", wire::encode(req), o.sweep_stride, [&](const auto& f) {
      b.sat.handle_access(wire::decode_as<AccessRequest>(f, MessageKind::kAccessRequest, ring), at);
    }));
    Clock later = at;
    later.advance(Duration{10});
    report.results.push_back(
        sweep("tamper AccessResponseUser (a5)", wire::encode(to_user), o.sweep_stride, [&](const auto& f) {
          UserSession copy = s;
          copy.finish_access(wire::decode_as<AccessResponseUser>(f, MessageKind::kAccessResponseUser, ring), later);
        }));
    Rng wrap_rng(o.seed);
    const auto sealed = symwrap::seal(symwrap::Cipher::kAes256Gcm, b.sat.link()->key, wire::encode(to_tcs),
                                      b.sat.id().bytes(), wrap_rng);
    const Digest tcs_key = b.tcs.satellite_session(b.sat.id())->key;
    auto r = sweep("tamper AccessForwardTcs (wrap, HP)", sealed, o.sweep_stride, [&](const auto& f) {
      auto plain = symwrap::open(symwrap::Cipher::kAes256Gcm, tcs_key, f, b.sat.id().bytes());
      if (!plain) throw ProtocolError(Check::kWrap, "wrap authentication failed");
      Tcs tcs = b.tcs;
      tcs.finish_access(wire::decode_as<AccessForwardTcs>(*plain, MessageKind::kAccessForwardTcs, ring), later, b.rng);
    });
    r.detail += " over the wrapped frame";
    report.results.push_back(r);
  }
  {
    UserSession s = session;
    b.step();
    const auto req = s.handover_request(b.nsat.id(), b.clock, b.rng);
    Clock at = b.clock;
    at.advance(Duration{20});
    const auto resp = b.nsat.handle_handover(req, at);
    report.results.push_back(
        sweep("tamper HandoverRequest (a6)", wire::encode(req), o.sweep_stride, [&](const auto& f) {
          b.nsat.handle_handover(wire::decode_as<HandoverRequest>(f, MessageKind::kHandoverRequest, ring), at);
        }));
    Clock later = at;
    later.advance(Duration{10});
    report.results.push_back(
        sweep("tamper HandoverResponse (a7)", wire::encode(resp), o.sweep_stride, [&](const auto& f) {
          UserSession copy = s;
          copy.finish_handover(wire::decode_as<HandoverResponse>(f, MessageKind::kHandoverResponse, ring), later);
        }));
  }

  // Eavesdropping: field-level scan of every public-channel message of one
  // full run for values that would recover a key or the true identity.
  {
    UserSession s = session;
    std::vector<std::vector<std::uint8_t>> frames;
    Clock clock = b.clock;
    clock.advance(Duration{1000});
    const auto req = s.access_request(b.tcs.id(), b.tcs.pk(), clock, b.rng);
    frames.push_back(wire::encode(req));
    clock.advance(Duration{10});
    const auto [to_user, to_tcs] = b.sat.handle_access(req, clock);
    frames.push_back(wire::encode(to_user));
    Rng wrap_rng(o.seed + 1);
    const auto sealed = symwrap::seal(symwrap::Cipher::kAes256Gcm, b.sat.link()->key, wire::encode(to_tcs),
                                      b.sat.id().bytes(), wrap_rng);
    clock.advance(Duration{10});
    const Digest key = s.finish_access(to_user, clock);
    Tcs tcs = b.tcs;
    tcs.finish_access(to_tcs, clock, b.rng);
    const auto hreq = s.handover_request(b.nsat.id(), clock, b.rng);
    frames.push_back(wire::encode(hreq));
    clock.advance(Duration{20});
    frames.push_back(wire::encode(b.nsat.handle_handover(hreq, clock)));

    const std::vector<Digest> secrets = {key, s.pu(), s.p(), b.tcs.station_hpu(), b.tcs.mpu(), b.sat.link()->key};
    AttackResult r{"eavesdrop: no key-recoverable field on air"};
    auto leaks = [&](const Message& m) {
      const auto enc = wire::encode(m);
      for (const auto& sec : secrets)
        if (contains_bits(enc, sec.bytes(), kHashBits)) return true;
      return contains_bits(enc, alice.id.bytes(), kIdBits);
    };
    const std::array<MessageKind, 4> kinds = {MessageKind::kAccessRequest, MessageKind::kAccessResponseUser,
                                              MessageKind::kHandoverRequest, MessageKind::kHandoverResponse};
    for (std::size_t i = 0; i < frames.size(); ++i) {
      ++r.trials;
      if (!leaks(wire::decode(frames[i], kinds[i], ring))) ++r.rejected;
    }
    ++r.trials;
    const auto inner = wire::encode(to_tcs);
    const bool plaintext_visible =
        std::search(sealed.begin(), sealed.end(), inner.begin(), inner.begin() + 64) != sealed.end();
    if (!plaintext_visible) ++r.rejected;
    r.detail = "messages scanned=" + std::to_string(r.trials) + " (AccessForwardTcs checked as ciphertext)";
    report.results.push_back(r);
  }
  return report;
}

DelayReport delay_overhead_report(const ring::RingParams& profile, std::size_t trials, std::uint64_t seed) {
  Scenario sc = honest_auth_scenario(trials, profile.profile_name);
  DelayReport rep;
  rep.profile = profile.profile_name;
  rep.trials = trials;
  rep.sizes = wire::size_report(profile);
  const Transcript t = run_scenario(sc, seed);

  std::vector<double> u, s, c, total;
  for (const auto& op : t.ops) {
    if (op.op != "auth") continue;
    if (op.keys_match) ++rep.key_agreements;
    u.push_back(op.user_compute_ms);
    s.push_back(op.satellite_compute_ms);
    c.push_back(op.tcs_compute_ms);
    total.push_back(op.compute_ms());
    rep.link_ms = std::max(rep.link_ms, op.link_delay_ms);
    rep.transmissions = std::max(rep.transmissions, op.transmissions);
  }
  auto stats = [](const std::vector<double>& v) {
    TimingStats st;
    if (v.empty()) return st;
    double sum = 0;
    for (double x : v) sum += x;
    st.mean_ms = sum / static_cast<double>(v.size());
    double ss = 0;
    for (double x : v) ss += (x - st.mean_ms) * (x - st.mean_ms);
    st.stddev_ms = v.size() > 1 ? std::sqrt(ss / static_cast<double>(v.size() - 1)) : 0.0;
    return st;
  };
  rep.user = stats(u);
  rep.satellite = stats(s);
  rep.tcs = stats(c);
  rep.total = stats(total);

  // Bits of the first authentication as measured on the transcript.
  std::size_t first_auth = t.ops.size();
  for (const auto& op : t.ops)
    if (op.op == "auth") {
      first_auth = op.index;
      break;
    }
  for (const auto& e : t.events) {
    if (e.type != "send" || e.op != first_auth) continue;
    if (e.from.rfind("user-", 0) == 0) rep.measured_user_bits += e.bits;
    if (e.from.rfind("SAT-", 0) == 0) rep.measured_satellite_bits += e.bits;
  }
  return rep;
}

}  // namespace psaa::simnet
