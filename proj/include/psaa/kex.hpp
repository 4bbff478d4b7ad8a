#pragma once

// Randomized-RLWE key agreement between two master key pairs.
//
// Both sides evaluate k = (pk_peer * sk_self + 2 te) * te + 2 re with a
// shared public ephemeral te and private fresh noise re. The initiator
// publishes Cha(k); both keep Mod2(k, Cha(k_initiator)).

#include <cstddef>
#include <cstdint>

#include "psaa/bits.hpp"
#include "psaa/recon.hpp"
#include "psaa/ring.hpp"
#include "psaa/rng.hpp"

namespace psaa::kex {

struct KeyPair {
  ring::RingElement pk;
  ring::RingElement sk;
  ring::RingElement se;
};

struct AgreementShare {
  ring::RingElement te;
  recon::SignalVector signal;
  recon::KeyString key;
};

/// pk = a * sk + 2 * se with fresh Gaussian sk, se.
KeyPair keygen(const ring::RingElement& a, Rng& rng);

/// (pk_peer * sk_self + 2 te) * te + 2 noise.
ring::RingElement agreement_value(const ring::RingElement& pk_peer, const ring::RingElement& sk_self,
                                  const ring::RingElement& te, const ring::RingElement& noise);

AgreementShare initiate(const ring::RingElement& pk_peer, const ring::RingElement& sk_self, Rng& rng);
/// initiate with caller-chosen ephemeral and noise.
AgreementShare initiate_with(const ring::RingElement& pk_peer, const ring::RingElement& sk_self,
                             const ring::RingElement& te, const ring::RingElement& re);

recon::KeyString respond(const ring::RingElement& pk_peer, const ring::RingElement& sk_self,
                         const ring::RingElement& te, const recon::SignalVector& signal, Rng& rng);
recon::KeyString respond_with(const ring::RingElement& pk_peer, const ring::RingElement& sk_self,
                              const ring::RingElement& te, const recon::SignalVector& signal,
                              const ring::RingElement& re);

/// 256-bit compression of an n-bit key string by h.
Digest kdf(const recon::KeyString& key);

/// Analytical noise model for one parameter set.
///
/// The initiator/responder difference is 2 (D * te) + 2 (re - re') with
/// D = se_peer * sk_self - se_self * sk_peer, whose coefficient variance is
/// 8 n^2 s^6 + 8 s^2 for sampler variance s^2. Disagreement is predicted by
/// treating the initiator residue r = (v + w (q-1)/2) mod q as uniform on
/// [q/4, 3q/4] and the difference as normal: a bit flips iff
/// floor((r + diff) / q) is odd.
struct NoiseBudget {
  double sampler_variance = 0;
  double difference_stddev = 0;
  double reconciliation_bound = 0;         // q/4 - 2
  double bound_violation_probability = 0;  // P(|diff| > q/4 - 2)
  double predicted_disagreement = 0;       // per coefficient
};

NoiseBudget noise_budget(const ring::RingParams& params);

struct DisagreementEstimate {
  std::size_t exchanges = 0;
  std::size_t coefficients = 0;
  std::size_t disagreements = 0;
  std::size_t exchanges_fully_agreeing = 0;
  double rate = 0;
  double ci_low = 0;
  double ci_high = 0;
  double max_abs_difference = 0;
};

/// Monte Carlo over `exchanges` fresh key pairs and agreements. The 95%
/// interval uses per-exchange rates as batch means, since coefficients
/// inside one exchange share te and the key pairs.
DisagreementEstimate measure_disagreement(const ring::RingParams& params, std::size_t exchanges, std::uint64_t seed);

}  // namespace psaa::kex
