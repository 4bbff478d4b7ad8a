#pragma once

// Repeated-trial drivers shared by the command-line tool and the acceptance
// binary. Each returns tallies; none of them asserts.

#include <cstddef>
#include <cstdint>

#include "psaa/ring.hpp"

namespace psaa::harness {

struct Tally {
  std::size_t trials = 0;
  std::size_t passed = 0;
  bool all() const { return trials > 0 && passed == trials; }
};

struct LoginMatrix {
  Tally correct_with_noise;  // true factors, biometric within the radius
  Tally wrong_password;      // must fail
  Tally wrong_identity;      // must fail
  Tally wrong_biometric;     // beyond the radius, must fail
  Tally vault_tamper;        // one flipped vault bit, must fail
};

/// `trials` users; the vault sweep flips every `vault_stride`-th payload bit
/// of one enrolled vault.
LoginMatrix login_matrix(const ring::RingParams& profile, std::size_t trials, std::uint64_t seed,
                         std::size_t vault_stride = 1);

struct UpdateMatrix {
  Tally new_factors_accept;
  Tally old_factors_reject;
  Tally secrets_invariant;   // TID, p, pu, sk unchanged
  Tally wrong_old_untouched;  // failed update leaves the device byte-identical
};

UpdateMatrix update_matrix(const ring::RingParams& profile, std::size_t trials, std::uint64_t seed);

/// Satellite/TCS pre-negotiations whose k_{j-tcs} and HPU agree.
Tally preneg_agreement(const ring::RingParams& profile, std::size_t trials, std::uint64_t seed);

}  // namespace psaa::harness
