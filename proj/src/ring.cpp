#include "psaa/ring.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <limits>

#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>

#include "psaa/bits.hpp"
#include "psaa/hash.hpp"

namespace psaa::ring {

namespace {

using u128 = unsigned __int128;

thread_local std::uint64_t g_mul_calls = 0;

std::uint64_t mulmod(std::uint64_t a, std::uint64_t b, std::uint64_t m) {
  return static_cast<std::uint64_t>(static_cast<u128>(a) * b % m);
}

std::uint64_t powmod(std::uint64_t base, std::uint64_t exp, std::uint64_t m) {
  std::uint64_t result = 1 % m;
  base %= m;
  while (exp != 0) {
    if (exp & 1u) result = mulmod(result, base, m);
    base = mulmod(base, base, m);
    exp >>= 1;
  }
  return result;
}

std::uint64_t shoup_precompute(std::uint64_t w, std::uint64_t q) {
  return static_cast<std::uint64_t>((static_cast<u128>(w) << 64) / q);
}

// a * w mod q with w' = floor(w 2^64 / q); requires q < 2^63.
inline std::uint64_t mul_shoup(std::uint64_t a, std::uint64_t w, std::uint64_t w_shoup, std::uint64_t q) {
  const auto hi = static_cast<std::uint64_t>((static_cast<u128>(a) * w_shoup) >> 64);
  std::uint64_t r = a * w - hi * q;
  return r >= q ? r - q : r;
}

std::size_t bit_reverse(std::size_t v, unsigned bits) {
  std::size_t r = 0;
  for (unsigned i = 0; i < bits; ++i) r |= ((v >> i) & 1u) << (bits - 1 - i);
  return r;
}

void check_same(const RingElement& x, const RingElement& y) {
  if (x.ring_ptr() != y.ring_ptr() && !x.ring().params().same_ring(y.ring().params()))
    throw ParamMismatch("ring elements belong to different parameter sets");
}

}  // namespace

RingParams RingParams::paper() { return RingParams{1024, 120833, 2.6, "paper"}; }

RingParams RingParams::robust() { return RingParams{1024, 2199023265793ULL, 2.6, "robust"}; }

void RingParams::validate() const {
  if (n < 2 || !std::has_single_bit(n)) throw std::invalid_argument("n must be a power of two");
  if (q < 3 || q % 2 == 0 || !is_prime(q)) throw std::invalid_argument("q must be an odd prime");
  if (q >= (std::uint64_t{1} << 62)) throw std::invalid_argument("q must be below 2^62");
  if (q % (2 * n) != 1) throw std::invalid_argument("q must satisfy q = 1 mod 2n");
  if (!(beta > 0.0) || !std::isfinite(beta)) throw std::invalid_argument("beta must be positive");
}

unsigned RingParams::coeff_bits() const { return static_cast<unsigned>(std::bit_width(q - 1)); }

std::int64_t RingParams::tail_bound() const { return static_cast<std::int64_t>(std::ceil(12.0 * beta)); }

std::map<std::string, RingParams> load_profiles(const std::string& path) {
  boost::property_tree::ptree tree;
  try {
    boost::property_tree::read_ini(path, tree);
  } catch (const boost::property_tree::ini_parser_error& e) {
    throw std::invalid_argument(std::string("cannot read profile file: ") + e.what());
  }
  std::map<std::string, RingParams> out;
  for (const auto& [section, body] : tree) {
    RingParams p;
    p.profile_name = section;
    try {
      p.n = body.get<std::size_t>("n");
      p.q = body.get<std::uint64_t>("q");
      p.beta = body.get<double>("beta");
    } catch (const boost::property_tree::ptree_error& e) {
      throw std::invalid_argument("profile [" + section + "]: " + e.what());
    }
    p.validate();
    out.emplace(section, p);
  }
  return out;
}

RingParams resolve_profile(std::string_view name, const std::optional<std::string>& config_path) {
  if (config_path) {
    auto profiles = load_profiles(*config_path);
    if (auto it = profiles.find(std::string(name)); it != profiles.end()) return it->second;
  }
  if (name == "paper") return RingParams::paper();
  if (name == "robust") return RingParams::robust();
  throw std::invalid_argument("unknown profile: " + std::string(name));
}

bool is_prime(std::uint64_t v) {
  if (v < 2) return false;
  for (std::uint64_t p : {2ULL, 3ULL, 5ULL, 7ULL, 11ULL, 13ULL, 17ULL, 19ULL, 23ULL, 29ULL, 31ULL, 37ULL}) {
    if (v % p == 0) return v == p;
  }
  std::uint64_t d = v - 1;
  int s = 0;
  while ((d & 1u) == 0) {
    d >>= 1;
    ++s;
  }
  // These bases are deterministic for all 64-bit inputs.
  for (std::uint64_t a : {2ULL, 3ULL, 5ULL, 7ULL, 11ULL, 13ULL, 17ULL, 19ULL, 23ULL, 29ULL, 31ULL, 37ULL}) {
    std::uint64_t x = powmod(a, d, v);
    if (x == 1 || x == v - 1) continue;
    bool composite = true;
    for (int r = 1; r < s; ++r) {
      x = mulmod(x, x, v);
      if (x == v - 1) {
        composite = false;
        break;
      }
    }
    if (composite) return false;
  }
  return true;
}

std::uint64_t smallest_prime_congruent_one(std::uint64_t lower_bound, std::uint64_t modulus_step) {
  std::uint64_t p = lower_bound - lower_bound % modulus_step + 1;
  while (p <= lower_bound || !is_prime(p)) p += modulus_step;
  return p;
}

RingPtr Ring::create(const RingParams& params) { return std::make_shared<const Ring>(params); }

Ring::Ring(const RingParams& params) : params_(params) {
  params_.validate();
  const std::uint64_t q = params_.q;
  const std::size_t n = params_.n;
  const auto log_n = static_cast<unsigned>(std::countr_zero(n));

  // psi: primitive 2n-th root of unity, i.e. psi^n = -1.
  std::uint64_t psi = 0;
  for (std::uint64_t g = 2; g < q; ++g) {
    const std::uint64_t cand = powmod(g, (q - 1) / (2 * n), q);
    if (powmod(cand, n, q) == q - 1) {
      psi = cand;
      break;
    }
  }
  const std::uint64_t psi_inv = powmod(psi, q - 2, q);

  psi_rev_.resize(n);
  psi_inv_rev_.resize(n);
  psi_rev_shoup_.resize(n);
  psi_inv_rev_shoup_.resize(n);
  for (std::size_t k = 0; k < n; ++k) {
    const std::size_t e = bit_reverse(k, log_n);
    psi_rev_[k] = powmod(psi, e, q);
    psi_inv_rev_[k] = powmod(psi_inv, e, q);
    psi_rev_shoup_[k] = shoup_precompute(psi_rev_[k], q);
    psi_inv_rev_shoup_[k] = shoup_precompute(psi_inv_rev_[k], q);
  }
  n_inv_ = powmod(n % q, q - 2, q);
  n_inv_shoup_ = shoup_precompute(n_inv_, q);

  const std::int64_t tail = params_.tail_bound();
  std::vector<long double> weights;
  long double total = 0;
  for (std::int64_t x = -tail; x <= tail; ++x) {
    const long double w = std::exp(-static_cast<long double>(x * x) / (2.0L * params_.beta * params_.beta));
    weights.push_back(w);
    total += w;
  }
  long double cumulative = 0;
  const long double scale = std::ldexp(1.0L, 64);
  for (std::size_t i = 0; i + 1 < weights.size(); ++i) {
    cumulative += weights[i] / total;
    const long double t = std::floor(cumulative * scale);
    gaussian_cdt_.push_back(t >= scale ? std::numeric_limits<std::uint64_t>::max() : static_cast<std::uint64_t>(t));
  }
}

void Ring::forward_ntt(std::span<std::uint64_t> a) const {
  const std::uint64_t q = params_.q;
  const std::size_t n = params_.n;
  std::size_t t = n;
  for (std::size_t m = 1; m < n; m <<= 1) {
    t >>= 1;
    for (std::size_t i = 0; i < m; ++i) {
      const std::size_t j1 = 2 * i * t;
      const std::uint64_t s = psi_rev_[m + i], s_shoup = psi_rev_shoup_[m + i];
      for (std::size_t j = j1; j < j1 + t; ++j) {
        const std::uint64_t u = a[j];
        const std::uint64_t v = mul_shoup(a[j + t], s, s_shoup, q);
        const std::uint64_t sum = u + v;
        a[j] = sum >= q ? sum - q : sum;
        a[j + t] = u >= v ? u - v : u + q - v;
      }
    }
  }
}

void Ring::inverse_ntt(std::span<std::uint64_t> a) const {
  const std::uint64_t q = params_.q;
  const std::size_t n = params_.n;
  std::size_t t = 1;
  for (std::size_t m = n; m > 1; m >>= 1) {
    std::size_t j1 = 0;
    const std::size_t half = m / 2;
    for (std::size_t i = 0; i < half; ++i) {
      const std::uint64_t s = psi_inv_rev_[half + i], s_shoup = psi_inv_rev_shoup_[half + i];
      for (std::size_t j = j1; j < j1 + t; ++j) {
        const std::uint64_t u = a[j];
        const std::uint64_t v = a[j + t];
        const std::uint64_t sum = u + v;
        a[j] = sum >= q ? sum - q : sum;
        a[j + t] = mul_shoup(u >= v ? u - v : u + q - v, s, s_shoup, q);
      }
      j1 += 2 * t;
    }
    t <<= 1;
  }
  for (auto& x : a) x = mul_shoup(x, n_inv_, n_inv_shoup_, q);
}

std::uint64_t Ring::mul_mod(std::uint64_t x, std::uint64_t y) const { return mulmod(x, y, params_.q); }

std::int64_t Ring::sample_gaussian_coeff(Rng& rng) const {
  const std::uint64_t u = rng.next_u64();
  const auto idx = std::upper_bound(gaussian_cdt_.begin(), gaussian_cdt_.end(), u) - gaussian_cdt_.begin();
  return static_cast<std::int64_t>(idx) - params_.tail_bound();
}

RingElement::RingElement(RingPtr ring, std::vector<std::uint64_t> coeffs) : ring_(std::move(ring)), coeffs_(std::move(coeffs)) {
  if (!ring_) throw std::invalid_argument("ring element needs a ring");
  if (coeffs_.size() != ring_->n()) throw ParamMismatch("coefficient count does not match n");
  for (auto c : coeffs_) {
    if (c >= ring_->q()) throw std::out_of_range("coefficient out of range [0, q)");
  }
}

RingElement RingElement::zero(RingPtr ring) {
  const std::size_t n = ring->n();
  return RingElement(std::move(ring), std::vector<std::uint64_t>(n, 0));
}

RingElement RingElement::constant(RingPtr ring, std::int64_t value) {
  std::vector<std::int64_t> v(ring->n(), 0);
  v[0] = value;
  return from_centered(std::move(ring), v);
}

RingElement RingElement::from_centered(RingPtr ring, std::span<const std::int64_t> values) {
  const auto q = static_cast<std::int64_t>(ring->q());
  std::vector<std::uint64_t> coeffs(values.size());
  for (std::size_t i = 0; i < values.size(); ++i) {
    std::int64_t r = values[i] % q;
    if (r < 0) r += q;
    coeffs[i] = static_cast<std::uint64_t>(r);
  }
  return RingElement(std::move(ring), std::move(coeffs));
}

RingElement RingElement::from_bytes(RingPtr ring, std::span<const std::uint8_t> packed) {
  const unsigned width = ring->params().coeff_bits();
  const std::size_t nbits = ring->n() * width;
  if (packed.size() * 8 < nbits) throw std::out_of_range("packed ring element too short");
  BitReader reader(packed, nbits);
  std::vector<std::uint64_t> coeffs(ring->n());
  for (auto& c : coeffs) c = reader.get(width);
  return RingElement(std::move(ring), std::move(coeffs));
}

std::int64_t RingElement::centered(std::size_t i) const {
  const std::uint64_t q = ring_->q();
  const std::uint64_t c = coeffs_[i];
  return c > (q - 1) / 2 ? static_cast<std::int64_t>(c) - static_cast<std::int64_t>(q) : static_cast<std::int64_t>(c);
}

std::vector<std::int64_t> RingElement::centered() const {
  std::vector<std::int64_t> out(coeffs_.size());
  for (std::size_t i = 0; i < coeffs_.size(); ++i) out[i] = centered(i);
  return out;
}

std::vector<std::uint8_t> RingElement::to_bytes() const {
  const unsigned width = ring_->params().coeff_bits();
  BitWriter writer;
  for (auto c : coeffs_) writer.put(c, width);
  return std::move(writer).take();
}

bool RingElement::operator==(const RingElement& o) const {
  return ring_->params().same_ring(o.ring_->params()) && coeffs_ == o.coeffs_;
}

RingElement add(const RingElement& x, const RingElement& y) {
  check_same(x, y);
  const std::uint64_t q = x.ring().q();
  std::vector<std::uint64_t> out(x.size());
  for (std::size_t i = 0; i < out.size(); ++i) {
    const std::uint64_t s = x[i] + y[i];
    out[i] = s >= q ? s - q : s;
  }
  return RingElement(x.ring_ptr(), std::move(out));
}

RingElement sub(const RingElement& x, const RingElement& y) {
  check_same(x, y);
  const std::uint64_t q = x.ring().q();
  std::vector<std::uint64_t> out(x.size());
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = x[i] >= y[i] ? x[i] - y[i] : x[i] + q - y[i];
  return RingElement(x.ring_ptr(), std::move(out));
}

RingElement scale(const RingElement& x, std::uint64_t factor) {
  const Ring& r = x.ring();
  const std::uint64_t f = factor % r.q();
  std::vector<std::uint64_t> out(x.size());
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = r.mul_mod(x[i], f);
  return RingElement(x.ring_ptr(), std::move(out));
}

RingElement mul(const RingElement& x, const RingElement& y) {
  check_same(x, y);
  ++g_mul_calls;
  const Ring& r = x.ring();
  std::vector<std::uint64_t> a(x.coeffs().begin(), x.coeffs().end());
  std::vector<std::uint64_t> b(y.coeffs().begin(), y.coeffs().end());
  r.forward_ntt(a);
  r.forward_ntt(b);
  for (std::size_t i = 0; i < a.size(); ++i) a[i] = r.mul_mod(a[i], b[i]);
  r.inverse_ntt(a);
  return RingElement(x.ring_ptr(), std::move(a));
}

RingElement sample_gaussian(const RingPtr& ring, Rng& rng) {
  std::vector<std::int64_t> v(ring->n());
  for (auto& c : v) c = ring->sample_gaussian_coeff(rng);
  return RingElement::from_centered(ring, v);
}

RingElement sample_uniform(const RingPtr& ring, Rng& rng) {
  std::vector<std::uint64_t> v(ring->n());
  for (auto& c : v) c = rng.uniform_below(ring->q());
  return RingElement(ring, std::move(v));
}

RingElement hash_to_ring(const RingPtr& ring, std::span<const std::uint8_t> input) {
  const unsigned width = ring->params().coeff_bits();
  const std::size_t chunk = (width + 7) / 8;
  const std::uint64_t mask = width >= 64 ? ~std::uint64_t{0} : (std::uint64_t{1} << width) - 1;
  const std::uint64_t q = ring->q();
  const std::size_t n = ring->n();

  std::vector<std::uint64_t> coeffs;
  coeffs.reserve(n);
  // Acceptance rate is q / 2^width >= 1/2, so 3n candidates almost always suffice.
  std::vector<std::uint8_t> stream(3 * n * chunk);
  shake128(input, stream);
  std::size_t pos = 0;
  while (coeffs.size() < n) {
    if (pos + chunk > stream.size()) {
      stream.resize(stream.size() * 2);
      shake128(input, stream);
    }
    std::uint64_t cand = 0;
    for (std::size_t b = 0; b < chunk; ++b) cand |= std::uint64_t{stream[pos + b]} << (8 * b);
    pos += chunk;
    cand &= mask;
    if (cand < q) coeffs.push_back(cand);
  }
  return RingElement(ring, std::move(coeffs));
}

std::uint64_t mul_call_count() { return g_mul_calls; }

}  // namespace psaa::ring
