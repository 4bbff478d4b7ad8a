#include <catch2/catch_amalgamated.hpp>

#include <boost/math/distributions/chi_squared.hpp>
#include <cmath>
#include <filesystem>
#include <fstream>

#include "psaa/ring.hpp"

using namespace psaa;
using namespace psaa::ring;

namespace {

// Negacyclic schoolbook product with centered-free 128-bit accumulation.
std::vector<std::uint64_t> schoolbook(const RingElement& x, const RingElement& y) {
  const std::size_t n = x.size();
  const std::uint64_t q = x.ring().q();
  std::vector<unsigned __int128> pos(n, 0), neg(n, 0);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n; ++j) {
      const auto prod = static_cast<unsigned __int128>(x[i]) * y[j];
      if (i + j < n) pos[i + j] += prod;
      else neg[i + j - n] += prod;
    }
  }
  std::vector<std::uint64_t> out(n);
  for (std::size_t k = 0; k < n; ++k) {
    const auto p = static_cast<std::uint64_t>(pos[k] % q), m = static_cast<std::uint64_t>(neg[k] % q);
    out[k] = (p + q - m) % q;
  }
  return out;
}

bool trial_division_prime(std::uint64_t v) {
  if (v < 2) return false;
  for (std::uint64_t d = 2; d * d <= v; ++d)
    if (v % d == 0) return false;
  return true;
}

RingParams with_n(std::size_t n) {
  RingParams p = RingParams::paper();
  p.n = n;
  return p;
}

}  // namespace

TEST_CASE("built-in profiles") {
  const auto paper = RingParams::paper();
  CHECK(paper.n == 1024);
  CHECK(paper.q == 120833);
  CHECK(paper.beta == 2.6);
  CHECK(paper.coeff_bits() == 17);
  CHECK(paper.tail_bound() == 32);
  CHECK(paper.q % 2048 == 1);

  const auto robust = RingParams::robust();
  CHECK(robust.n == 1024);
  CHECK(robust.coeff_bits() == 42);
  std::uint64_t oracle = (std::uint64_t{1} << 41) + 1;
  while (!trial_division_prime(oracle)) oracle += 2048;
  CHECK(robust.q == oracle);
  CHECK(robust.q == 2199023265793ull);
  CHECK(smallest_prime_congruent_one(std::uint64_t{1} << 41, 2048) == oracle);
}

TEST_CASE("primality agrees with trial division") {
  for (std::uint64_t v = 0; v < 20000; ++v) REQUIRE(is_prime(v) == trial_division_prime(v));
  CHECK(is_prime(2199023265793ull));
  CHECK_FALSE(is_prime(2199023265793ull * 3));
}

TEST_CASE("parameter validation names the violated constraint") {
  RingParams p = RingParams::paper();
  p.n = 1000;
  CHECK_THROWS_WITH(p.validate(), Catch::Matchers::ContainsSubstring("power of two"));
  p = RingParams::paper();
  p.q = 120832;
  CHECK_THROWS_AS(p.validate(), std::invalid_argument);
  p = RingParams::paper();
  p.q = 120847;  // prime, but not 1 mod 2048
  CHECK_THROWS_AS(p.validate(), std::invalid_argument);
  p = RingParams::paper();
  p.beta = -1;
  CHECK_THROWS_AS(p.validate(), std::invalid_argument);
}

TEST_CASE("fast multiply equals schoolbook") {
  for (std::size_t n : {16u, 64u, 1024u}) {
    const auto ring = Ring::create(with_n(n));
    Rng rng(100 + n);
    for (int i = 0; i < 1000; ++i) {
      const auto x = sample_uniform(ring, rng), y = sample_uniform(ring, rng);
      const auto fast = mul(x, y);
      const auto slow = schoolbook(x, y);
      REQUIRE(std::equal(fast.coeffs().begin(), fast.coeffs().end(), slow.begin()));
    }
  }
  const auto robust = Ring::create(RingParams::robust());
  Rng rng(7);
  for (int i = 0; i < 20; ++i) {
    const auto x = sample_uniform(robust, rng), y = sample_uniform(robust, rng);
    const auto fast = mul(x, y);
    const auto slow = schoolbook(x, y);
    REQUIRE(std::equal(fast.coeffs().begin(), fast.coeffs().end(), slow.begin()));
  }
}

TEST_CASE("ring axioms") {
  const auto ring = Ring::create(RingParams::paper());
  Rng rng(3);
  for (int i = 0; i < 50; ++i) {
    const auto a = sample_uniform(ring, rng), b = sample_uniform(ring, rng), c = sample_uniform(ring, rng);
    CHECK(a * b == b * a);
    CHECK((a * b) * c == a * (b * c));
    CHECK(a * (b + c) == a * b + a * c);
    CHECK(a + b - b == a);
    CHECK(a * RingElement::constant(ring, 1) == a);
    CHECK(scale(a, 2) == a + a);
  }
  std::vector<std::uint64_t> x(ring->n(), 0);
  x[1] = 1;
  RingElement acc = RingElement::constant(ring, 1);
  const RingElement xe(ring, x);
  for (std::size_t i = 0; i < ring->n(); ++i) acc = acc * xe;
  CHECK(acc == RingElement::constant(ring, -1));
}

TEST_CASE("NTT round trip") {
  const auto ring = Ring::create(RingParams::robust());
  Rng rng(4);
  const auto a = sample_uniform(ring, rng);
  std::vector<std::uint64_t> v(a.coeffs().begin(), a.coeffs().end());
  ring->forward_ntt(v);
  ring->inverse_ntt(v);
  CHECK(std::equal(v.begin(), v.end(), a.coeffs().begin()));
}

TEST_CASE("Gaussian sampler moments over one million draws") {
  const auto ring = Ring::create(RingParams::paper());
  Rng rng(2024);
  const double beta = ring->params().beta;
  const std::int64_t tail = ring->params().tail_bound();
  std::vector<std::size_t> counts(2 * tail + 1, 0);
  double sum = 0, sum_sq = 0;
  const std::size_t draws = 1'000'000;
  for (std::size_t i = 0; i < draws; ++i) {
    const auto x = ring->sample_gaussian_coeff(rng);
    REQUIRE(std::abs(x) <= tail);
    sum += static_cast<double>(x);
    sum_sq += static_cast<double>(x * x);
    ++counts[x + tail];
  }
  const double mean = sum / draws;
  const double sd = std::sqrt(sum_sq / draws - mean * mean);
  CHECK(std::abs(mean) <= 0.02);
  CHECK(std::abs(sd - beta) <= 0.02 * beta);

  // Goodness of fit against the discrete Gaussian, pooling tails below 5 expected.
  std::vector<double> pmf(counts.size());
  double total = 0;
  for (std::int64_t x = -tail; x <= tail; ++x) total += pmf[x + tail] = std::exp(-double(x * x) / (2 * beta * beta));
  double chi2 = 0, pooled_obs = 0, pooled_exp = 0;
  int cells = 0;
  for (std::size_t i = 0; i < counts.size(); ++i) {
    const double expected = pmf[i] / total * draws;
    if (expected < 5) {
      pooled_obs += counts[i];
      pooled_exp += expected;
      continue;
    }
    chi2 += (counts[i] - expected) * (counts[i] - expected) / expected;
    ++cells;
  }
  if (pooled_exp > 0) {
    chi2 += (pooled_obs - pooled_exp) * (pooled_obs - pooled_exp) / pooled_exp;
    ++cells;
  }
  const boost::math::chi_squared dist(cells - 1);
  CHECK(chi2 < boost::math::quantile(dist, 0.999));
}

TEST_CASE("packing round trip and range rejection") {
  for (const auto& params : {RingParams::paper(), RingParams::robust()}) {
    const auto ring = Ring::create(params);
    Rng rng(8);
    const auto a = sample_uniform(ring, rng);
    const auto bytes = a.to_bytes();
    CHECK(bytes.size() == (params.n * params.coeff_bits() + 7) / 8);
    CHECK(RingElement::from_bytes(ring, bytes) == a);
    auto bad = bytes;
    // Coefficient 0 set to all ones in its field, which is >= q for both profiles.
    for (unsigned b = 0; b < params.coeff_bits(); ++b) bad[b / 8] |= static_cast<std::uint8_t>(1u << (b % 8));
    CHECK_THROWS_AS(RingElement::from_bytes(ring, bad), std::out_of_range);
  }
}

TEST_CASE("centered view") {
  const auto ring = Ring::create(RingParams::paper());
  const std::vector<std::int64_t> vals(ring->n(), -60416);
  const auto e = RingElement::from_centered(ring, vals);
  CHECK(e[0] == 120833 - 60416);
  CHECK(e.centered(0) == -60416);
  CHECK(RingElement::constant(ring, 60416).centered(0) == 60416);
  CHECK_THROWS(RingElement(ring, std::vector<std::uint64_t>(ring->n(), 120833)));
}

TEST_CASE("hash to ring is deterministic and in range") {
  const auto ring = Ring::create(RingParams::robust());
  const std::vector<std::uint8_t> in1{1, 2, 3}, in2{1, 2, 4};
  const auto h1 = hash_to_ring(ring, in1);
  CHECK(h1 == hash_to_ring(ring, in1));
  CHECK_FALSE(h1 == hash_to_ring(ring, in2));
  for (auto c : h1.coeffs()) REQUIRE(c < ring->q());
}

TEST_CASE("mixing rings throws ParamMismatch") {
  const auto a = Ring::create(RingParams::paper());
  const auto b = Ring::create(RingParams::robust());
  Rng rng(1);
  CHECK_THROWS_AS(sample_uniform(a, rng) + sample_uniform(b, rng), ParamMismatch);
  CHECK_THROWS_AS(sample_uniform(a, rng) * sample_uniform(b, rng), ParamMismatch);
}

TEST_CASE("profile file loading") {
  const auto path = std::filesystem::temp_directory_path() / "psaa_profiles_test.ini";
  {
    std::ofstream out(path);
    out << "# comment\n[small]\nn = 64\nq = 120833\nbeta = 2.6\n\n[big]\nn = 1024\nq = 2199023265793\nbeta = 2.6\n";
  }
  const auto profiles = load_profiles(path.string());
  REQUIRE(profiles.size() == 2);
  CHECK(profiles.at("small").n == 64);
  CHECK(profiles.at("big").q == RingParams::robust().q);
  CHECK(resolve_profile("small", path.string()).n == 64);
  CHECK(resolve_profile("paper").q == 120833);
  CHECK_THROWS_AS(resolve_profile("nope"), std::invalid_argument);
  {
    std::ofstream out(path);
    out << "[bad]\nn = 1000\nq = 120833\nbeta = 2.6\n";
  }
  CHECK_THROWS_AS(load_profiles(path.string()), std::invalid_argument);
  std::filesystem::remove(path);
}

TEST_CASE("multiplication counter") {
  const auto ring = Ring::create(RingParams::paper());
  Rng rng(1);
  const auto a = sample_uniform(ring, rng);
  const auto before = mul_call_count();
  (void)(a * a);
  CHECK(mul_call_count() - before == 1);
}
