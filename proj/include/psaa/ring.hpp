#pragma once

// Arithmetic in R_q = Z_q[x]/(x^n + 1).
//
// Elements store canonical residues in [0, q); the centered view in
// [-(q-1)/2, (q-1)/2] is computed on demand. Multiplication runs through a
// negacyclic NTT, which is why q must satisfy q = 1 (mod 2n).

#include <cstddef>
#include <cstdint>
#include <map>
#include <memory>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "psaa/rng.hpp"

namespace psaa::ring {

struct RingParams {
  std::size_t n = 0;
  std::uint64_t q = 0;
  double beta = 0.0;
  std::string profile_name = "custom";

  /// n = 1024, q = 120833, beta = 2.6.
  static RingParams paper();
  /// Same n and beta; q is the smallest prime = 1 (mod 2n) above 2^41.
  static RingParams robust();

  /// Throws std::invalid_argument naming the violated constraint.
  void validate() const;

  /// ceil(log2 q): the per-coefficient wire width.
  unsigned coeff_bits() const;
  /// ceil(12 * beta): the Gaussian truncation bound.
  std::int64_t tail_bound() const;

  bool same_ring(const RingParams& o) const { return n == o.n && q == o.q && beta == o.beta; }
};

/// Reads `[name]` sections with n, q and beta keys from a plain-text profile
/// file. Every profile is validated.
std::map<std::string, RingParams> load_profiles(const std::string& path);

/// Built-in "paper" / "robust", or a section of `config_path` when given.
RingParams resolve_profile(std::string_view name, const std::optional<std::string>& config_path = std::nullopt);

bool is_prime(std::uint64_t v);
/// Smallest prime p > lower_bound with p = 1 (mod modulus_step).
std::uint64_t smallest_prime_congruent_one(std::uint64_t lower_bound, std::uint64_t modulus_step);

class ParamMismatch : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

class Ring;
using RingPtr = std::shared_ptr<const Ring>;

/// Precomputed context for one parameter set: NTT twiddles and the Gaussian
/// cumulative table. Immutable and shareable across threads.
class Ring {
 public:
  static RingPtr create(const RingParams& params);

  const RingParams& params() const { return params_; }
  std::size_t n() const { return params_.n; }
  std::uint64_t q() const { return params_.q; }

  void forward_ntt(std::span<std::uint64_t> a) const;
  void inverse_ntt(std::span<std::uint64_t> a) const;
  std::uint64_t mul_mod(std::uint64_t x, std::uint64_t y) const;

  /// Index into [-tail, tail] drawn by inverting the cumulative table.
  std::int64_t sample_gaussian_coeff(Rng& rng) const;

  explicit Ring(const RingParams& params);

 private:
  RingParams params_;
  std::vector<std::uint64_t> psi_rev_, psi_rev_shoup_;
  std::vector<std::uint64_t> psi_inv_rev_, psi_inv_rev_shoup_;
  std::uint64_t n_inv_ = 0, n_inv_shoup_ = 0;
  std::vector<std::uint64_t> gaussian_cdt_;
};

class RingElement {
 public:
  /// Every coefficient must already lie in [0, q).
  RingElement(RingPtr ring, std::vector<std::uint64_t> coeffs);

  static RingElement zero(RingPtr ring);
  static RingElement constant(RingPtr ring, std::int64_t value);
  static RingElement from_centered(RingPtr ring, std::span<const std::int64_t> values);
  /// Inverse of to_bytes; throws std::out_of_range when a field holds a value >= q.
  static RingElement from_bytes(RingPtr ring, std::span<const std::uint8_t> packed);

  const Ring& ring() const { return *ring_; }
  const RingPtr& ring_ptr() const { return ring_; }
  std::size_t size() const { return coeffs_.size(); }
  std::uint64_t operator[](std::size_t i) const { return coeffs_[i]; }
  std::span<const std::uint64_t> coeffs() const { return coeffs_; }

  std::int64_t centered(std::size_t i) const;
  std::vector<std::int64_t> centered() const;

  /// Canonical bit-packed form: coeff_bits() bits per coefficient, LSB first,
  /// coefficient 0 first. This is the only byte form fed to h.
  std::vector<std::uint8_t> to_bytes() const;

  bool operator==(const RingElement& o) const;

 private:
  RingPtr ring_;
  std::vector<std::uint64_t> coeffs_;
};

RingElement add(const RingElement& x, const RingElement& y);
RingElement sub(const RingElement& x, const RingElement& y);
RingElement scale(const RingElement& x, std::uint64_t factor);
/// Negacyclic product via NTT.
RingElement mul(const RingElement& x, const RingElement& y);

inline RingElement operator+(const RingElement& x, const RingElement& y) { return add(x, y); }
inline RingElement operator-(const RingElement& x, const RingElement& y) { return sub(x, y); }
inline RingElement operator*(const RingElement& x, const RingElement& y) { return mul(x, y); }

RingElement sample_gaussian(const RingPtr& ring, Rng& rng);
RingElement sample_uniform(const RingPtr& ring, Rng& rng);
/// H : {0,1}* -> R_q. SHAKE128 output read in ceil(coeff_bits / 8)-byte
/// candidates, masked to coeff_bits and rejection-sampled into [0, q).
RingElement hash_to_ring(const RingPtr& ring, std::span<const std::uint8_t> input);

/// Ring multiplications performed on the calling thread.
std::uint64_t mul_call_count();

}  // namespace psaa::ring
