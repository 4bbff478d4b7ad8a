#include "psaa/fuzzy.hpp"

#include <stdexcept>
#include <string_view>

#include "psaa/hash.hpp"

namespace psaa::fuzzy {

namespace {

std::span<const std::uint8_t> label(std::string_view s) {
  return {reinterpret_cast<const std::uint8_t*>(s.data()), s.size()};
}

BitVector extend_with_parity(const BitVector& codeword) {
  BitVector out(codeword.size() + 1);
  bool parity = false;
  for (std::size_t i = 0; i < codeword.size(); ++i) {
    out.set_bit(i, codeword.bit(i));
    parity ^= codeword.bit(i);
  }
  out.set_bit(codeword.size(), parity);
  return out;
}

Digest check_digest(const BitVector& codeword, const BitVector& offset) {
  return hash_fields({label("psaa-fe-check"), codeword.bytes(), offset.bytes()});
}

Digest key_digest(const BitVector& codeword) { return hash_fields({label("psaa-fe-key"), codeword.bytes()}); }

}  // namespace

BchCode::BchCode(unsigned m, unsigned t) : m_(m), t_(t), length_((std::size_t{1} << m) - 1) {
  if (m != 9) throw std::invalid_argument("only GF(2^9) is supported");
  constexpr unsigned kPrimitive = 0x211;  // x^9 + x^4 + 1
  const unsigned order = static_cast<unsigned>(length_);
  exp_.assign(2 * order, 0);
  log_.assign(order + 1, 0);
  unsigned x = 1;
  for (unsigned i = 0; i < order; ++i) {
    exp_[i] = x;
    log_[x] = i;
    x <<= 1;
    if (x & (1u << m)) x ^= kPrimitive;
  }
  for (unsigned i = order; i < 2 * order; ++i) exp_[i] = exp_[i - order];

  // g(x) = lcm of the minimal polynomials of alpha^1 .. alpha^2t.
  std::vector<bool> covered(order, false);
  generator_ = {1};
  for (unsigned i = 1; i <= 2 * t; ++i) {
    if (covered[i % order]) continue;
    std::vector<unsigned> minimal{1};
    unsigned e = i % order;
    do {
      covered[e] = true;
      // minimal *= (x + alpha^e)
      std::vector<unsigned> next(minimal.size() + 1, 0);
      for (std::size_t k = 0; k < minimal.size(); ++k) {
        next[k + 1] ^= minimal[k];
        next[k] ^= gf_mul(minimal[k], exp_[e]);
      }
      minimal = std::move(next);
      e = (2 * e) % order;
    } while (e != i % order);
    std::vector<std::uint8_t> product(generator_.size() + minimal.size() - 1, 0);
    for (std::size_t a = 0; a < generator_.size(); ++a) {
      if (!generator_[a]) continue;
      for (std::size_t b = 0; b < minimal.size(); ++b) {
        if (minimal[b] > 1) throw std::logic_error("minimal polynomial not binary");
        product[a + b] ^= static_cast<std::uint8_t>(minimal[b]);
      }
    }
    generator_ = std::move(product);
  }
}

unsigned BchCode::gf_mul(unsigned a, unsigned b) const {
  if (a == 0 || b == 0) return 0;
  return exp_[log_[a] + log_[b]];
}

unsigned BchCode::gf_inv(unsigned a) const { return exp_[(length_ - log_[a]) % length_]; }

BitVector BchCode::encode(const BitVector& message) const {
  const std::size_t k = dimension();
  const std::size_t parity_len = length_ - k;
  if (message.size() != k) throw std::invalid_argument("message length does not match code dimension");
  std::vector<std::uint8_t> rem(parity_len, 0);
  for (std::size_t i = k; i-- > 0;) {
    const std::uint8_t feedback = static_cast<std::uint8_t>(message.bit(i)) ^ rem[parity_len - 1];
    for (std::size_t j = parity_len - 1; j > 0; --j) rem[j] = rem[j - 1] ^ (feedback & generator_[j]);
    rem[0] = feedback & generator_[0];
  }
  BitVector out(length_);
  for (std::size_t j = 0; j < parity_len; ++j) out.set_bit(j, rem[j] != 0);
  for (std::size_t i = 0; i < k; ++i) out.set_bit(parity_len + i, message.bit(i));
  return out;
}

std::optional<BitVector> BchCode::decode(const BitVector& word) const {
  if (word.size() != length_) throw std::invalid_argument("word length does not match code length");
  const std::size_t order = length_;
  const unsigned two_t = 2 * t_;

  std::vector<unsigned> syndromes(two_t, 0);
  bool clean = true;
  for (unsigned j = 1; j <= two_t; ++j) {
    unsigned s = 0;
    for (std::size_t i = 0; i < length_; ++i) {
      if (word.bit(i)) s ^= exp_[(i * j) % order];
    }
    syndromes[j - 1] = s;
    clean = clean && s == 0;
  }
  if (clean) return word;

  // Berlekamp-Massey.
  std::vector<unsigned> locator(two_t + 1, 0), previous(two_t + 1, 0);
  locator[0] = previous[0] = 1;
  unsigned degree = 0, shift = 1, last_discrepancy = 1;
  for (unsigned step = 0; step < two_t; ++step) {
    unsigned d = syndromes[step];
    for (unsigned i = 1; i <= degree; ++i) d ^= gf_mul(locator[i], syndromes[step - i]);
    if (d == 0) {
      ++shift;
      continue;
    }
    const unsigned coef = gf_mul(d, gf_inv(last_discrepancy));
    std::vector<unsigned> updated = locator;
    for (std::size_t i = 0; i + shift <= two_t; ++i) updated[i + shift] ^= gf_mul(coef, previous[i]);
    if (2 * degree <= step) {
      previous = locator;
      degree = step + 1 - degree;
      last_discrepancy = d;
      shift = 1;
    } else {
      ++shift;
    }
    locator = std::move(updated);
  }
  if (degree > t_) return std::nullopt;

  // Chien search: position i is in error iff locator(alpha^-i) = 0.
  BitVector corrected = word;
  unsigned roots = 0;
  for (std::size_t i = 0; i < length_; ++i) {
    unsigned value = locator[0];
    for (unsigned k = 1; k <= degree; ++k) {
      if (locator[k] == 0) continue;
      value ^= exp_[(log_[locator[k]] + order - (i * k) % order) % order];
    }
    if (value == 0) {
      corrected.flip(i);
      ++roots;
    }
  }
  if (roots != degree) return std::nullopt;
  return corrected;
}

const BchCode& biometric_code() {
  static const BchCode code(9, static_cast<unsigned>(kCorrectionRadius));
  return code;
}

BioExtract gen(const Biometric& bio, Rng& rng) {
  if (bio.bits.size() != kBiometricBits) throw std::invalid_argument("biometric must be 512 bits");
  const BchCode& code = biometric_code();
  BitVector message(code.dimension());
  for (std::size_t i = 0; i < message.size(); ++i) message.set_bit(i, (rng.next_u64() & 1u) != 0);
  const BitVector codeword = extend_with_parity(code.encode(message));
  BitVector offset = bio.bits ^ codeword;
  const Digest check = check_digest(codeword, offset);
  return BioExtract{key_digest(codeword), HelperData{std::move(offset), check}};
}

std::optional<Digest> rep(const Biometric& bio_star, const HelperData& aux) {
  if (bio_star.bits.size() != kBiometricBits || aux.offset.size() != kBiometricBits) return std::nullopt;
  const BchCode& code = biometric_code();
  const BitVector noisy = bio_star.bits ^ aux.offset;
  const auto decoded = code.decode(BitVector::from_bytes(noisy.bytes(), code.length()));
  if (!decoded) return std::nullopt;
  const BitVector codeword = extend_with_parity(*decoded);
  if (check_digest(codeword, aux.offset) != aux.check) return std::nullopt;
  return key_digest(codeword);
}

Biometric random_biometric(Rng& rng) {
  std::vector<std::uint8_t> bytes(kBiometricBits / 8);
  rng.fill(bytes);
  return Biometric{BitVector::from_bytes(bytes, kBiometricBits)};
}

Biometric perturb(const Biometric& bio, std::size_t flips, Rng& rng) {
  if (flips > bio.bits.size()) throw std::invalid_argument("more flips than bits");
  // Partial Fisher-Yates picks distinct positions.
  std::vector<std::size_t> positions(bio.bits.size());
  for (std::size_t i = 0; i < positions.size(); ++i) positions[i] = i;
  Biometric out = bio;
  for (std::size_t i = 0; i < flips; ++i) {
    const std::size_t j = i + rng.uniform_below(positions.size() - i);
    std::swap(positions[i], positions[j]);
    out.bits.flip(positions[i]);
  }
  return out;
}

}  // namespace psaa::fuzzy
