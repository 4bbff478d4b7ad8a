#pragma once

// Code-offset fuzzy extractor over 512-bit biometrics.
//
// The code is a binary BCH code of length 511 (GF(2^9)) correcting 16
// errors, extended by one overall-parity bit to 512. Gen picks a random
// codeword c and publishes offset = BIO ^ c together with a check digest
// binding c to the offset; the biometric key is h(c).

#include <cstddef>
#include <cstdint>
#include <optional>
#include <vector>

#include "psaa/bits.hpp"
#include "psaa/rng.hpp"

namespace psaa::fuzzy {

inline constexpr std::size_t kBiometricBits = 512;
inline constexpr std::size_t kCorrectionRadius = 16;

struct Biometric {
  BitVector bits;
  bool operator==(const Biometric&) const = default;
};

/// Public helper data v.
struct HelperData {
  BitVector offset;
  Digest check;
  bool operator==(const HelperData&) const = default;
};

struct BioExtract {
  Digest sigma;
  HelperData aux;
};

class BchCode {
 public:
  /// Narrow-sense primitive BCH code of length 2^m - 1 with designed
  /// distance 2t + 1. Only m = 9 has a built-in primitive polynomial.
  BchCode(unsigned m, unsigned t);

  std::size_t length() const { return length_; }
  std::size_t dimension() const { return length_ - (generator_.size() - 1); }
  unsigned correction_radius() const { return t_; }

  /// Systematic encoding: message bits occupy the top `dimension()` positions.
  BitVector encode(const BitVector& message) const;
  /// Nearest codeword when at most t positions differ; nullopt when the
  /// decoder detects more.
  std::optional<BitVector> decode(const BitVector& word) const;

 private:
  unsigned gf_mul(unsigned a, unsigned b) const;
  unsigned gf_inv(unsigned a) const;

  unsigned m_, t_;
  std::size_t length_;
  std::vector<unsigned> exp_, log_;
  std::vector<std::uint8_t> generator_;  // GF(2) coefficients, degree ascending
};

const BchCode& biometric_code();

BioExtract gen(const Biometric& bio, Rng& rng);
/// Recovers sigma when bio_star is within the correction radius of the
/// enrolled biometric; nullopt on decode or check failure.
std::optional<Digest> rep(const Biometric& bio_star, const HelperData& aux);

Biometric random_biometric(Rng& rng);
/// Copy of `bio` with exactly `flips` distinct positions inverted.
Biometric perturb(const Biometric& bio, std::size_t flips, Rng& rng);

}  // namespace psaa::fuzzy
