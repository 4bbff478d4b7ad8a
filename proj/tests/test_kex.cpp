#include <catch2/catch_amalgamated.hpp>

#include <boost/math/distributions/normal.hpp>
#include <cmath>

#include "psaa/kex.hpp"

using namespace psaa;
using namespace psaa::kex;

namespace {

// Numerical integration of the disagreement model: residue r uniform on
// [q/4, 3q/4], difference normal with the given deviation, a bit flips when
// floor((r + d) / q) is odd.
double integrated_disagreement(double q, double sd) {
  const boost::math::normal n(0, sd);
  const int steps = 4000;
  double acc = 0;
  for (int i = 0; i < steps; ++i) {
    const double r = q / 4 + (i + 0.5) * (q / 2) / steps;
    double p = 0;
    for (int k = -40; k <= 40; ++k) {
      if (k % 2 == 0) continue;
      // d in [k q - r, (k+1) q - r)
      p += boost::math::cdf(n, (k + 1) * q - r) - boost::math::cdf(n, k * q - r);
    }
    acc += p;
  }
  return acc / steps;
}

}  // namespace

TEST_CASE("keygen shape") {
  const auto ring = ring::Ring::create(ring::RingParams::robust());
  Rng rng(1);
  const auto a = ring::sample_uniform(ring, rng);
  const auto kp = keygen(a, rng);
  CHECK(kp.pk == a * kp.sk + kp.se + kp.se);
  for (auto v : kp.sk.centered()) REQUIRE(std::abs(v) <= ring->params().tail_bound());
}

TEST_CASE("agreement value follows its definition") {
  const auto ring = ring::Ring::create(ring::RingParams::paper());
  Rng rng(2);
  const auto pk = ring::sample_uniform(ring, rng);
  const auto sk = ring::sample_gaussian(ring, rng);
  const auto te = ring::sample_gaussian(ring, rng);
  const auto re = ring::sample_gaussian(ring, rng);
  CHECK(agreement_value(pk, sk, te, re) == (pk * sk + te + te) * te + re + re);
  const auto share = initiate_with(pk, sk, te, re);
  CHECK(share.signal == recon::cha_vec(agreement_value(pk, sk, te, re)));
  CHECK(share.key == recon::reconcile(agreement_value(pk, sk, te, re), share.signal));
}

TEST_CASE("robust profile agrees on every exchange") {
  const auto est = measure_disagreement(ring::RingParams::robust(), 10000, 31);
  CHECK(est.exchanges == 10000);
  CHECK(est.coefficients == 10000 * 1024);
  CHECK(est.disagreements == 0);
  CHECK(est.exchanges_fully_agreeing == 10000);
}

TEST_CASE("initiator and responder derive the same key on the robust profile") {
  const auto ring = ring::Ring::create(ring::RingParams::robust());
  Rng rng(3);
  const auto a = ring::sample_uniform(ring, rng);
  for (int i = 0; i < 200; ++i) {
    const auto alice = keygen(a, rng), bob = keygen(a, rng);
    const auto share = initiate(bob.pk, alice.sk, rng);
    const auto key = respond(alice.pk, bob.sk, share.te, share.signal, rng);
    REQUIRE(key == share.key);
    REQUIRE(kdf(key) == kdf(share.key));
  }
}

TEST_CASE("noise budget, paper profile") {
  const auto params = ring::RingParams::paper();
  const auto b = noise_budget(params);
  const double s2 = params.beta * params.beta;
  const double n = static_cast<double>(params.n);
  CHECK(b.sampler_variance == Catch::Approx(s2));
  CHECK(b.difference_stddev == Catch::Approx(std::sqrt(8 * n * n * s2 * s2 * s2 + 8 * s2)));
  CHECK(std::abs(b.difference_stddev - 50906) <= 1);
  CHECK(b.reconciliation_bound == Catch::Approx(params.q / 4.0 - 2));
  CHECK(std::abs(b.predicted_disagreement - integrated_disagreement(params.q, b.difference_stddev)) <= 1e-4);
  CHECK(std::abs(b.predicted_disagreement - 0.2613) <= 5e-4);
  CHECK(b.bound_violation_probability > 0.5);
}

TEST_CASE("noise budget, robust profile") {
  const auto b = noise_budget(ring::RingParams::robust());
  CHECK(b.bound_violation_probability < 1e-12);
  CHECK(b.predicted_disagreement < 1e-12);
}

TEST_CASE("measured paper-profile disagreement matches the model") {
  const auto params = ring::RingParams::paper();
  const auto est = measure_disagreement(params, 200, 17);
  CHECK(est.coefficients == 200 * 1024);
  CHECK(est.ci_low < est.rate);
  CHECK(est.rate < est.ci_high);
  const double predicted = noise_budget(params).predicted_disagreement;
  CHECK(est.ci_low <= predicted);
  CHECK(predicted <= est.ci_high);
}
