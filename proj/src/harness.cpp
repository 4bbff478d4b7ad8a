#include "psaa/harness.hpp"

#include "psaa/hash.hpp"
#include "psaa/protocol.hpp"
#include "psaa/wire.hpp"

namespace psaa::harness {

using namespace psaa::protocol;

namespace {

Id counter_id(std::string_view label, std::uint64_t i) {
  std::array<std::uint8_t, 8> b{};
  for (int k = 0; k < 8; ++k) b[k] = static_cast<std::uint8_t>(i >> (8 * k));
  return truncate_id(hash_fields({std::span(reinterpret_cast<const std::uint8_t*>(label.data()), label.size()), b}));
}

bool login_ok(const Device& d, const Id& id, const Password& pw, const fuzzy::Biometric& bio, const SystemParams& p) {
  try {
    user_login(d, id, pw, bio, p);
    return true;
  } catch (const ProtocolError&) {
    return false;
  }
}

struct Setup {
  Rng rng;
  Clock clock{Timestamp{1'000'000}};
  std::pair<SystemParams, Ncc> init;
  SystemParams& params = init.first;
  Tcs tcs;
  Timestamp expiry{2'592'000'000};

  Setup(const ring::RingParams& profile, std::uint64_t seed, std::string_view label)
      : rng(Rng::derive(seed, label)),
        init(system_init(profile, rng)),
        tcs(params, counter_id("tcs", 0), kex::keygen(params.a, rng)) {
    tcs.install_credential(init.second.register_station(tcs.id(), tcs.pk(), expiry, clock).second, expiry);
  }

  Device enroll(const Id& id, const Password& pw, const fuzzy::Biometric& bio) {
    auto [req, st] = user_register_begin(id, pw, bio, params, rng);
    return user_register_finish(st, tcs.register_user(req, rng), params);
  }
};

}  // namespace

LoginMatrix login_matrix(const ring::RingParams& profile, std::size_t trials, std::uint64_t seed,
                         std::size_t vault_stride) {
  Setup s(profile, seed, "login-matrix");
  LoginMatrix m;
  std::optional<Device> first;
  Id first_id;
  Password first_pw;
  fuzzy::Biometric first_bio;
  for (std::size_t i = 0; i < trials; ++i) {
    const Id id = counter_id("user", i);
    const Password pw = "pw-" + std::to_string(i);
    const auto bio = fuzzy::random_biometric(s.rng);
    const Device d = s.enroll(id, pw, bio);
    const std::size_t flips = s.rng.uniform_below(fuzzy::kCorrectionRadius + 1);

    ++m.correct_with_noise.trials;
    m.correct_with_noise.passed += login_ok(d, id, pw, fuzzy::perturb(bio, flips, s.rng), s.params);
    ++m.wrong_password.trials;
    m.wrong_password.passed += !login_ok(d, id, pw + "x", bio, s.params);
    ++m.wrong_identity.trials;
    m.wrong_identity.passed += !login_ok(d, counter_id("other", i), pw, bio, s.params);
    ++m.wrong_biometric.trials;
    m.wrong_biometric.passed += !login_ok(d, id, pw, fuzzy::random_biometric(s.rng), s.params);
    if (!first) {
      first = d;
      first_id = id;
      first_pw = pw;
      first_bio = bio;
    }
  }
  if (first) {
    const auto frame = wire::encode_vault(first->vault);
    const std::size_t payload = wire::frame_payload_bits(frame);
    for (std::size_t bit = 0; bit < payload; bit += vault_stride) {
      auto tampered = frame;
      tampered[bit / 8] ^= static_cast<std::uint8_t>(1u << (bit % 8));
      Device d{wire::decode_vault(tampered, s.params.ring), first->pk};
      ++m.vault_tamper.trials;
      m.vault_tamper.passed += !login_ok(d, first_id, first_pw, first_bio, s.params);
    }
  }
  return m;
}

UpdateMatrix update_matrix(const ring::RingParams& profile, std::size_t trials, std::uint64_t seed) {
  Setup s(profile, seed, "update-matrix");
  UpdateMatrix m;
  for (std::size_t i = 0; i < trials; ++i) {
    const Id id = counter_id("user", i);
    const Password pw = "old-" + std::to_string(i);
    const Password pw_new = "new-" + std::to_string(i);
    const auto bio = fuzzy::random_biometric(s.rng);
    const auto bio_new = fuzzy::random_biometric(s.rng);
    const Device d = s.enroll(id, pw, bio);
    const auto before = user_login(d, id, pw, bio, s.params);

    const Device updated = update_credentials(d, id, pw, bio, pw_new, bio_new, s.params, s.rng);
    ++m.new_factors_accept.trials;
    m.new_factors_accept.passed += login_ok(updated, id, pw_new, fuzzy::perturb(bio_new, 8, s.rng), s.params);
    ++m.old_factors_reject.trials;
    m.old_factors_reject.passed += !login_ok(updated, id, pw, bio, s.params);

    ++m.secrets_invariant.trials;
    try {
      const auto after = user_login(updated, id, pw_new, bio_new, s.params);
      m.secrets_invariant.passed += after.tid() == before.tid() && after.p() == before.p() &&
                                    after.pu() == before.pu() && after.sk() == before.sk();
    } catch (const ProtocolError&) {
    }

    ++m.wrong_old_untouched.trials;
    const auto snapshot = wire::encode_vault(d.vault);
    bool threw = false;
    try {
      update_credentials(d, id, pw + "x", bio, pw_new, bio_new, s.params, s.rng);
    } catch (const ProtocolError&) {
      threw = true;
    }
    m.wrong_old_untouched.passed += threw && wire::encode_vault(d.vault) == snapshot;
  }
  return m;
}

Tally preneg_agreement(const ring::RingParams& profile, std::size_t trials, std::uint64_t seed) {
  Setup s(profile, seed, "preneg");
  Tally t;
  for (std::size_t i = 0; i < trials; ++i) {
    Satellite sat(s.params, counter_id("sat", i), kex::keygen(s.params.a, s.rng));
    sat.install_credential(s.init.second.register_station(sat.id(), sat.pk(), s.expiry, s.clock).second);
    const auto req = sat.begin_preneg(s.clock);
    s.clock.advance(Duration{10});
    ++t.trials;
    try {
      const auto resp = s.tcs.handle_preneg(req, s.clock, s.rng);
      s.clock.advance(Duration{10});
      sat.finish_preneg(resp, s.clock, s.rng);
      const auto session = s.tcs.satellite_session(sat.id());
      t.passed += session && sat.link() && session->key == sat.link()->key && sat.link()->hpu == s.tcs.station_hpu();
    } catch (const ProtocolError&) {
    }
    s.clock.advance(Duration{1000});
  }
  return t;
}

}  // namespace psaa::harness
