#include "psaa/recon.hpp"

namespace psaa::recon {

int cha(std::int64_t v, std::uint64_t q) {
  const auto quarter = static_cast<std::int64_t>(q / 4);
  return (v >= -quarter && v <= quarter) ? 1 : 0;
}

int mod2(std::int64_t v, int w, std::uint64_t q) {
  const auto sq = static_cast<std::int64_t>(q);
  std::int64_t lifted = v % sq;
  if (lifted < 0) lifted += sq;
  const std::uint64_t half = (q - 1) / 2;
  const std::uint64_t sum = (static_cast<std::uint64_t>(lifted) + (w != 0 ? half : 0)) % q;
  return static_cast<int>(sum & 1u);
}

SignalVector cha_vec(const ring::RingElement& k) {
  const std::uint64_t q = k.ring().q();
  SignalVector out{BitVector(k.size())};
  for (std::size_t i = 0; i < k.size(); ++i) out.bits.set_bit(i, cha(k.centered(i), q) != 0);
  return out;
}

KeyString reconcile(const ring::RingElement& k, const SignalVector& w) {
  if (w.bits.size() != k.size()) throw ring::ParamMismatch("signal length does not match ring dimension");
  const std::uint64_t q = k.ring().q();
  KeyString out{BitVector(k.size())};
  for (std::size_t i = 0; i < k.size(); ++i) out.bits.set_bit(i, mod2(k.centered(i), w.bits.bit(i) ? 1 : 0, q) != 0);
  return out;
}

}  // namespace psaa::recon
