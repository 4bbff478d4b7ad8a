#include <catch2/catch_amalgamated.hpp>

#include "psaa/harness.hpp"
#include "psaa/hash.hpp"
#include "psaa/protocol.hpp"

using namespace psaa;
using namespace psaa::protocol;

namespace {

Id make_id(std::uint8_t tag) {
  std::array<std::uint8_t, Id::kBytes> b{};
  b.fill(tag);
  return Id::from_bytes(b);
}

struct World {
  Rng rng{1234};
  Clock clock{Timestamp{1'000'000}};
  std::pair<SystemParams, Ncc> init;
  SystemParams& params = init.first;
  std::optional<Ncc> ncc;
  std::optional<Tcs> tcs;
  std::optional<Satellite> sat, nsat;
  Timestamp expiry{10'000'000'000};

  explicit World(const ring::RingParams& profile = ring::RingParams::robust()) : init(system_init(profile, rng)) {
    ncc.emplace(init.second);
    tcs.emplace(params, make_id(0x7c), kex::keygen(params.a, rng));
    sat.emplace(params, make_id(0x51), kex::keygen(params.a, rng));
    nsat.emplace(params, make_id(0x52), kex::keygen(params.a, rng));
    tcs->install_credential(ncc->register_station(tcs->id(), tcs->pk(), expiry, clock).second, expiry);
    sat->install_credential(ncc->register_station(sat->id(), sat->pk(), expiry, clock).second);
    nsat->install_credential(ncc->register_station(nsat->id(), nsat->pk(), expiry, clock).second);
  }

  void preneg(Satellite& s) {
    auto req = s.begin_preneg(clock);
    clock.advance(Duration{10});
    auto resp = tcs->handle_preneg(req, clock, rng);
    clock.advance(Duration{10});
    s.finish_preneg(resp, clock, rng);
  }

  Device enroll(const Id& uid, const Password& pw, const fuzzy::Biometric& bio) {
    auto [req, st] = user_register_begin(uid, pw, bio, params, rng);
    return user_register_finish(st, tcs->register_user(req, rng), params);
  }
};

}  // namespace

TEST_CASE("system_init is deterministic and seeds differ") {
  Rng r1(5), r2(5), r3(6);
  auto [p1, n1] = system_init(ring::RingParams::paper(), r1);
  auto [p2, n2] = system_init(ring::RingParams::paper(), r2);
  auto [p3, n3] = system_init(ring::RingParams::paper(), r3);
  CHECK(p1.a == p2.a);
  CHECK_FALSE(p1.a == p3.a);
  const auto tail = p1.ring_params().tail_bound();
  for (auto c : p1.a.centered()) CHECK(std::abs(c) <= tail);
}

TEST_CASE("station registration") {
  World w(ring::RingParams::paper());
  Clock clock{Timestamp{0}};
  Ncc& ncc = *w.ncc;
  const Id a = make_id(1), b = make_id(2);
  const Timestamp T{5000};
  auto [ea, pa] = ncc.register_station(a, w.tcs->pk(), T, clock);
  auto [eb, pb] = ncc.register_station(b, w.sat->pk(), T, clock);
  CHECK(pa == pb);
  CHECK(ncc.lookup(a)->pk == w.tcs->pk());
  CHECK(ncc.lookup(a)->expiry == T);
  CHECK_FALSE(ncc.lookup(make_id(3)).has_value());
  CHECK_THROWS_AS(ncc.register_station(a, w.tcs->pk(), T, clock), std::invalid_argument);
  clock.set(Timestamp{5000});
  auto [ea2, pa2] = ncc.register_station(a, w.tcs->pk(), Timestamp{9000}, clock);
  CHECK(pa2 != pa);
}

TEST_CASE("registration and login") {
  World w;
  const Id uid = make_id(0xab);
  const auto bio = fuzzy::random_biometric(w.rng);
  auto [req, st] = user_register_begin(uid, "correct horse", bio, w.params, w.rng);
  CHECK(req.rpw == hash_fields({std::span(reinterpret_cast<const std::uint8_t*>("correct horse"), 13), st.sigma.bytes()}));
  CHECK(req.pk == st.pk);

  const auto resp = w.tcs->register_user(req, w.rng);
  const Device dev = user_register_finish(st, resp, w.params);
  const Id tid = resp.did ^ truncate_id(hash_fields({uid.bytes(), req.rpw.bytes()}));
  const auto* rec = w.tcs->user(tid);
  REQUIRE(rec != nullptr);
  CHECK(rec->pu == hash_fields({tid.bytes(), w.tcs->station_hpu().bytes()}));
  CHECK(tid != uid);

  auto sess = user_login(dev, uid, "correct horse", fuzzy::perturb(bio, 16, w.rng), w.params);
  CHECK(sess.tid() == tid);
  CHECK(sess.p() == rec->p);
  CHECK(sess.pu() == rec->pu);
  CHECK(sess.sk() == st.sk);

  CHECK_THROWS_WITH(user_login(dev, uid, "correct horsf", bio, w.params), "login failed");
  CHECK_THROWS_WITH(user_login(dev, make_id(0xac), "correct horse", bio, w.params), "login failed");
  CHECK_THROWS_WITH(user_login(dev, uid, "correct horse", fuzzy::perturb(bio, 99, w.rng), w.params), "login failed");
}

TEST_CASE("honest pre-negotiation, access and handover") {
  World w;
  w.preneg(*w.sat);
  w.preneg(*w.nsat);
  REQUIRE(w.sat->link().has_value());
  CHECK(w.sat->link()->hpu == w.tcs->station_hpu());
  CHECK(w.sat->link()->key == w.tcs->satellite_session(w.sat->id())->key);

  const Id uid = make_id(0x33);
  const auto bio = fuzzy::random_biometric(w.rng);
  const Device dev = w.enroll(uid, "pw", bio);
  auto sess = user_login(dev, uid, "pw", bio, w.params);

  auto req = sess.access_request(w.tcs->id(), w.tcs->pk(), w.clock, w.rng);
  w.clock.advance(Duration{10});
  auto [to_user, to_tcs] = w.sat->handle_access(req, w.clock);
  w.clock.advance(Duration{10});
  const Digest k_user = sess.finish_access(to_user, w.clock);
  const Digest k_tcs = w.tcs->finish_access(to_tcs, w.clock, w.rng);
  CHECK(k_user == k_tcs);

  auto hreq = sess.handover_request(w.nsat->id(), w.clock, w.rng);
  w.clock.advance(Duration{10});
  const auto hresp = w.nsat->handle_handover(hreq, w.clock);
  w.clock.advance(Duration{10});
  sess.finish_handover(hresp, w.clock);
  CHECK(sess.session_key() == k_user);
}

namespace {

Check check_of(const std::function<void()>& f) {
  try {
    f();
  } catch (const ProtocolError& e) {
    return e.check();
  }
  FAIL("no protocol error");
  return Check::kDecode;
}

struct Session {
  World w;
  Id uid = make_id(0x44);
  fuzzy::Biometric bio;
  Device dev;
  std::optional<UserSession> sess;

  Session() : bio(fuzzy::random_biometric(w.rng)), dev(w.enroll(uid, "pw", bio)) {
    w.preneg(*w.sat);
    w.preneg(*w.nsat);
    sess.emplace(user_login(dev, uid, "pw", bio, w.params));
  }
};

}  // namespace

TEST_CASE("freshness window edges") {
  Clock c{Timestamp{1000}};
  CHECK_NOTHROW(check_fresh(Timestamp{800}, c, Duration{200}));
  CHECK_NOTHROW(check_fresh(Timestamp{1000}, c, Duration{200}));
  CHECK_THROWS_WITH(check_fresh(Timestamp{799}, c, Duration{200}), "stale timestamp");
  CHECK_THROWS_WITH(check_fresh(Timestamp{1001}, c, Duration{200}), "timestamp in the future");
  CHECK_THROWS_AS(c.set(Timestamp{999}), std::logic_error);
}

TEST_CASE("timestamp encoding and identity truncation") {
  const auto b = timestamp_bytes(Timestamp{0x0102030405060708ull});
  CHECK(b[0] == 0x08);
  CHECK(b[7] == 0x01);
  for (std::size_t i = 8; i < b.size(); ++i) CHECK(b[i] == 0);
  const Digest d = hash_fields({b});
  const Id id = truncate_id(d);
  for (std::size_t i = 0; i < kIdBits; ++i) REQUIRE(id.bit(i) == d.bit(i));
}

TEST_CASE("stale access request is rejected before any lattice work") {
  Session s;
  const auto req = s.sess->access_request(s.w.tcs->id(), s.w.tcs->pk(), s.w.clock, s.w.rng);
  s.w.clock.advance(Duration{201});
  const auto muls = ring::mul_call_count();
  CHECK(check_of([&] { s.w.sat->handle_access(req, s.w.clock); }) == Check::kTimestamp);
  CHECK(ring::mul_call_count() == muls);
}

TEST_CASE("replayed responses are rejected as stale") {
  Session s;
  auto req = s.sess->access_request(s.w.tcs->id(), s.w.tcs->pk(), s.w.clock, s.w.rng);
  s.w.clock.advance(Duration{10});
  auto [to_user, to_tcs] = s.w.sat->handle_access(req, s.w.clock);
  s.w.clock.advance(Duration{10});
  s.sess->finish_access(to_user, s.w.clock);
  s.w.tcs->finish_access(to_tcs, s.w.clock, s.w.rng);
  s.w.clock.advance(Duration{500});
  CHECK(check_of([&] { s.sess->finish_access(to_user, s.w.clock); }) == Check::kTimestamp);
  CHECK(check_of([&] { s.w.tcs->finish_access(to_tcs, s.w.clock, s.w.rng); }) == Check::kTimestamp);
  CHECK(check_of([&] { s.w.sat->handle_access(req, s.w.clock); }) == Check::kTimestamp);
}

TEST_CASE("field tampering is caught by the matching check") {
  Session s;
  auto& w = s.w;
  auto req = s.sess->access_request(w.tcs->id(), w.tcs->pk(), w.clock, w.rng);
  w.clock.advance(Duration{10});

  auto bad = req;
  bad.tid.flip(3);
  CHECK(check_of([&] { w.sat->handle_access(bad, w.clock); }) == Check::kA4);
  bad = req;
  bad.a3.flip(0);
  CHECK(check_of([&] { w.sat->handle_access(bad, w.clock); }) == Check::kA4);
  bad = req;
  bad.sw.bits.flip(7);
  CHECK(check_of([&] { w.sat->handle_access(bad, w.clock); }) == Check::kA4);
  bad = req;
  bad.t3.ms -= 1;
  CHECK(check_of([&] { w.sat->handle_access(bad, w.clock); }) == Check::kA4);

  auto [to_user, to_tcs] = w.sat->handle_access(req, w.clock);
  w.clock.advance(Duration{10});
  auto fwd = to_tcs;
  fwd.hp.flip(9);
  CHECK(check_of([&] { Tcs copy = *w.tcs; copy.finish_access(fwd, w.clock, w.rng); }) == Check::kHp);
  fwd = to_tcs;
  fwd.tid.flip(1);
  CHECK(check_of([&] { Tcs copy = *w.tcs; copy.finish_access(fwd, w.clock, w.rng); }) == Check::kUnknownTid);
  auto resp = to_user;
  resp.a5.flip(200);
  CHECK(check_of([&] { UserSession copy = *s.sess; copy.finish_access(resp, w.clock); }) == Check::kA5);
}

TEST_CASE("pre-negotiation rejects a foreign DPK and a bad a2") {
  World w;
  auto req = w.sat->begin_preneg(w.clock);
  w.clock.advance(Duration{10});
  auto bad = req;
  bad.a1.flip(2);
  CHECK(check_of([&] { w.tcs->handle_preneg(bad, w.clock, w.rng); }) == Check::kA1);
  bad = req;
  bad.sat_id = make_id(0x99);
  CHECK(check_of([&] { w.tcs->handle_preneg(bad, w.clock, w.rng); }) == Check::kA1);

  auto resp = w.tcs->handle_preneg(req, w.clock, w.rng);
  w.clock.advance(Duration{10});
  auto bresp = resp;
  bresp.dcu.flip(4);
  CHECK(check_of([&] { Satellite copy = *w.sat; copy.finish_preneg(bresp, w.clock, w.rng); }) == Check::kA2);
  bresp = resp;
  bresp.pk_tcs = bresp.pk_tcs + ring::RingElement::constant(w.params.ring, 1);
  CHECK(check_of([&] { Satellite copy = *w.sat; copy.finish_preneg(bresp, w.clock, w.rng); }) == Check::kA2);
}

TEST_CASE("next satellite hash count") {
  Session s;
  auto& w = s.w;
  w.sat->handle_access(s.sess->access_request(w.tcs->id(), w.tcs->pk(), w.clock, w.rng), w.clock);
  auto hreq = s.sess->handover_request(w.nsat->id(), w.clock, w.rng);
  w.clock.advance(Duration{20});

  auto bad = hreq;
  bad.a6.flip(5);
  auto before = hash_call_count();
  CHECK(check_of([&] { w.nsat->handle_handover(bad, w.clock); }) == Check::kA6);
  CHECK(hash_call_count() - before == 3);

  before = hash_call_count();
  w.nsat->handle_handover(hreq, w.clock);
  CHECK(hash_call_count() - before == 4);

  bad = hreq;
  bad.nsat_id = w.sat->id();
  CHECK(check_of([&] { w.nsat->handle_handover(bad, w.clock); }) == Check::kA6);
  CHECK(check_of([&] { w.sat->handle_handover(hreq, w.clock); }) == Check::kA6);
}

TEST_CASE("handover response tampering and replay") {
  Session s;
  auto& w = s.w;
  auto hreq = s.sess->handover_request(w.nsat->id(), w.clock, w.rng);
  w.clock.advance(Duration{10});
  const auto hresp = w.nsat->handle_handover(hreq, w.clock);
  w.clock.advance(Duration{10});
  auto bad = hresp;
  bad.a7.flip(100);
  CHECK(check_of([&] { UserSession copy = *s.sess; copy.finish_handover(bad, w.clock); }) == Check::kA7);
  s.sess->finish_handover(hresp, w.clock);
  w.clock.advance(Duration{300});
  CHECK(check_of([&] { s.sess->finish_handover(hresp, w.clock); }) == Check::kTimestamp);
}

TEST_CASE("unlinked satellite refuses service") {
  World w;
  const Id uid = make_id(0x45);
  const auto bio = fuzzy::random_biometric(w.rng);
  const Device dev = w.enroll(uid, "pw", bio);
  auto sess = user_login(dev, uid, "pw", bio, w.params);
  const auto req = sess.access_request(w.tcs->id(), w.tcs->pk(), w.clock, w.rng);
  CHECK_THROWS_AS(w.sat->handle_access(req, w.clock), std::logic_error);
}

TEST_CASE("credential update keeps the session secrets and swaps the factors") {
  World w;
  const Id uid = make_id(0x46);
  const auto bio = fuzzy::random_biometric(w.rng);
  const auto bio_new = fuzzy::random_biometric(w.rng);
  const Device dev = w.enroll(uid, "old", bio);
  const auto before = user_login(dev, uid, "old", bio, w.params);
  const Device upd = update_credentials(dev, uid, "old", bio, "new", bio_new, w.params, w.rng);
  const auto after = user_login(upd, uid, "new", fuzzy::perturb(bio_new, 16, w.rng), w.params);
  CHECK(after.tid() == before.tid());
  CHECK(after.p() == before.p());
  CHECK(after.pu() == before.pu());
  CHECK(after.sk() == before.sk());
  CHECK_FALSE(upd.vault == dev.vault);
  CHECK_THROWS_WITH(user_login(upd, uid, "old", bio, w.params), "login failed");
  CHECK_THROWS_WITH(user_login(upd, uid, "new", bio, w.params), "login failed");
  CHECK_THROWS_WITH(user_login(upd, uid, "old", bio_new, w.params), "login failed");
  CHECK_THROWS_WITH(update_credentials(dev, uid, "wrong", bio, "x", bio_new, w.params, w.rng), "login failed");
}

TEST_CASE("login and update matrices at reduced scale") {
  const auto m = harness::login_matrix(ring::RingParams::robust(), 20, 5, 37);
  CHECK(m.correct_with_noise.all());
  CHECK(m.wrong_password.all());
  CHECK(m.wrong_identity.all());
  CHECK(m.wrong_biometric.all());
  CHECK(m.vault_tamper.all());
  const auto u = harness::update_matrix(ring::RingParams::robust(), 10, 5);
  CHECK(u.new_factors_accept.all());
  CHECK(u.old_factors_reject.all());
  CHECK(u.secrets_invariant.all());
  CHECK(u.wrong_old_untouched.all());
  CHECK(harness::preneg_agreement(ring::RingParams::robust(), 20, 5).all());
}
