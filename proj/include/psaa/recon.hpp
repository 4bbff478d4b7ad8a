#pragma once

// Error reconciliation: the characteristic function Cha and the auxiliary
// modular function Mod2, per coefficient and vectorized over ring elements.

#include <cstdint>

#include "psaa/bits.hpp"
#include "psaa/ring.hpp"

namespace psaa::recon {

/// One Cha bit per coefficient (the public signal).
struct SignalVector {
  BitVector bits;
  bool operator==(const SignalVector&) const = default;
};

/// One Mod2 bit per coefficient (the shared key material).
struct KeyString {
  BitVector bits;
  bool operator==(const KeyString&) const = default;
};

/// 1 iff |v| <= floor(q/4); v is a centered residue.
int cha(std::int64_t v, std::uint64_t q);

/// (v + w (q-1)/2) mod q mod 2, with v lifted to [0, q) first.
int mod2(std::int64_t v, int w, std::uint64_t q);

SignalVector cha_vec(const ring::RingElement& k);

/// Coefficient-wise mod2(centered(k)_i, w_i). Throws ring::ParamMismatch on
/// a length mismatch.
KeyString reconcile(const ring::RingElement& k, const SignalVector& w);

}  // namespace psaa::recon
