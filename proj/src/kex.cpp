#include "psaa/kex.hpp"

#include <algorithm>
#include <cmath>
#include <string_view>

#include <boost/math/distributions/students_t.hpp>

#include "psaa/hash.hpp"

namespace psaa::kex {

using ring::RingElement;

KeyPair keygen(const RingElement& a, Rng& rng) {
  RingElement sk = ring::sample_gaussian(a.ring_ptr(), rng);
  RingElement se = ring::sample_gaussian(a.ring_ptr(), rng);
  RingElement pk = a * sk + ring::scale(se, 2);
  return KeyPair{std::move(pk), std::move(sk), std::move(se)};
}

RingElement agreement_value(const RingElement& pk_peer, const RingElement& sk_self, const RingElement& te,
                            const RingElement& noise) {
  const RingElement two_te = ring::scale(te, 2);
  return (pk_peer * sk_self + two_te) * te + ring::scale(noise, 2);
}

AgreementShare initiate(const RingElement& pk_peer, const RingElement& sk_self, Rng& rng) {
  RingElement te = ring::sample_gaussian(pk_peer.ring_ptr(), rng);
  RingElement re = ring::sample_gaussian(pk_peer.ring_ptr(), rng);
  return initiate_with(pk_peer, sk_self, te, re);
}

AgreementShare initiate_with(const RingElement& pk_peer, const RingElement& sk_self, const RingElement& te,
                             const RingElement& re) {
  const RingElement k = agreement_value(pk_peer, sk_self, te, re);
  recon::SignalVector signal = recon::cha_vec(k);
  recon::KeyString key = recon::reconcile(k, signal);
  return AgreementShare{te, std::move(signal), std::move(key)};
}

recon::KeyString respond(const RingElement& pk_peer, const RingElement& sk_self, const RingElement& te,
                         const recon::SignalVector& signal, Rng& rng) {
  RingElement re = ring::sample_gaussian(pk_peer.ring_ptr(), rng);
  return respond_with(pk_peer, sk_self, te, signal, re);
}

recon::KeyString respond_with(const RingElement& pk_peer, const RingElement& sk_self, const RingElement& te,
                              const recon::SignalVector& signal, const RingElement& re) {
  if (signal.bits.size() != pk_peer.size()) throw ring::ParamMismatch("signal length does not match ring dimension");
  return recon::reconcile(agreement_value(pk_peer, sk_self, te, re), signal);
}

Digest kdf(const recon::KeyString& key) {
  static constexpr std::string_view kLabel = "psaa-kdf";
  const auto label = std::span(reinterpret_cast<const std::uint8_t*>(kLabel.data()), kLabel.size());
  return hash_fields({label, key.bits.bytes()});
}

namespace {

double normal_cdf(double x) { return 0.5 * std::erfc(-x / std::sqrt(2.0)); }

// P(floor((r + diff) / q) is odd) for diff ~ N(0, sd^2).
double odd_wrap_probability(double r, double q, double sd) {
  double p = 0;
  const int span = static_cast<int>(std::ceil(12.0 * sd / q)) + 2;
  for (int m = -span; m <= span; ++m) {
    if (m % 2 == 0) continue;
    p += normal_cdf(((m + 1) * q - r) / sd) - normal_cdf((m * q - r) / sd);
  }
  return p;
}

}  // namespace

NoiseBudget noise_budget(const ring::RingParams& params) {
  params.validate();
  NoiseBudget b;
  const std::int64_t tail = params.tail_bound();
  double total = 0, second = 0;
  for (std::int64_t x = -tail; x <= tail; ++x) {
    const double w = std::exp(-static_cast<double>(x * x) / (2.0 * params.beta * params.beta));
    total += w;
    second += w * static_cast<double>(x * x);
  }
  const double s2 = second / total;
  const double n = static_cast<double>(params.n);
  const double q = static_cast<double>(params.q);
  b.sampler_variance = s2;
  b.difference_stddev = std::sqrt(8.0 * n * n * s2 * s2 * s2 + 8.0 * s2);
  b.reconciliation_bound = q / 4.0 - 2.0;
  b.bound_violation_probability = 2.0 * normal_cdf(-b.reconciliation_bound / b.difference_stddev);

  // Simpson's rule over r in [q/4, 3q/4].
  constexpr int kSteps = 4096;
  const double lo = q / 4.0, hi = 3.0 * q / 4.0, step = (hi - lo) / kSteps;
  double acc = 0;
  for (int i = 0; i <= kSteps; ++i) {
    const double weight = (i == 0 || i == kSteps) ? 1.0 : (i % 2 == 1 ? 4.0 : 2.0);
    acc += weight * odd_wrap_probability(lo + i * step, q, b.difference_stddev);
  }
  b.predicted_disagreement = acc * step / 3.0 / (hi - lo);
  return b;
}

DisagreementEstimate measure_disagreement(const ring::RingParams& params, std::size_t exchanges, std::uint64_t seed) {
  const ring::RingPtr r = ring::Ring::create(params);
  DisagreementEstimate est;
  est.exchanges = exchanges;
  std::vector<double> rates;
  rates.reserve(exchanges);
  for (std::size_t t = 0; t < exchanges; ++t) {
    Rng rng = Rng::derive(seed, "recon-rate", t);
    const RingElement a = ring::sample_gaussian(r, rng);
    const KeyPair initiator = keygen(a, rng);
    const KeyPair responder = keygen(a, rng);
    const RingElement te = ring::sample_gaussian(r, rng);
    const RingElement re = ring::sample_gaussian(r, rng);
    const RingElement re_resp = ring::sample_gaussian(r, rng);

    const RingElement k_init = agreement_value(responder.pk, initiator.sk, te, re);
    const RingElement k_resp = agreement_value(initiator.pk, responder.sk, te, re_resp);
    const recon::SignalVector signal = recon::cha_vec(k_init);
    const recon::KeyString key_init = recon::reconcile(k_init, signal);
    const recon::KeyString key_resp = recon::reconcile(k_resp, signal);

    const std::size_t diff = key_init.bits.hamming_distance(key_resp.bits);
    const RingElement delta = k_init - k_resp;
    for (std::size_t i = 0; i < delta.size(); ++i)
      est.max_abs_difference = std::max(est.max_abs_difference, std::fabs(static_cast<double>(delta.centered(i))));
    est.disagreements += diff;
    est.coefficients += params.n;
    if (diff == 0) ++est.exchanges_fully_agreeing;
    rates.push_back(static_cast<double>(diff) / static_cast<double>(params.n));
  }
  if (exchanges == 0) return est;
  est.rate = static_cast<double>(est.disagreements) / static_cast<double>(est.coefficients);
  if (exchanges > 1) {
    double var = 0;
    for (double x : rates) var += (x - est.rate) * (x - est.rate);
    var /= static_cast<double>(exchanges - 1);
    const boost::math::students_t dist(static_cast<double>(exchanges - 1));
    const double half = boost::math::quantile(boost::math::complement(dist, 0.025)) *
                        std::sqrt(var / static_cast<double>(exchanges));
    est.ci_low = std::max(0.0, est.rate - half);
    est.ci_high = std::min(1.0, est.rate + half);
  } else {
    est.ci_low = 0;
    est.ci_high = 1;
  }
  if (est.disagreements == 0) {
    // Exact binomial upper limit when nothing was observed.
    est.ci_high = 1.0 - std::pow(0.025, 1.0 / static_cast<double>(est.coefficients));
  }
  return est;
}

}  // namespace psaa::kex
