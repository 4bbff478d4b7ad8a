#include "psaa/rng.hpp"

#include <array>
#include <limits>

#include "psaa/hash.hpp"

namespace psaa {

Rng Rng::derive(std::uint64_t root, std::string_view label, std::uint64_t index) {
  std::array<std::uint8_t, 16> nums{};
  for (int i = 0; i < 8; ++i) {
    nums[i] = static_cast<std::uint8_t>(root >> (8 * i));
    nums[8 + i] = static_cast<std::uint8_t>(index >> (8 * i));
  }
  const auto label_bytes = std::span(reinterpret_cast<const std::uint8_t*>(label.data()), label.size());
  const Digest d = hash_fields({nums, label_bytes});
  std::uint64_t seed = 0;
  for (int i = 0; i < 8; ++i) seed |= std::uint64_t{d.bytes()[i]} << (8 * i);
  return Rng(seed);
}

std::uint64_t Rng::uniform_below(std::uint64_t bound) {
  // Discard the top slice that would bias the modulo.
  const std::uint64_t limit = std::numeric_limits<std::uint64_t>::max() - std::numeric_limits<std::uint64_t>::max() % bound;
  std::uint64_t x;
  do {
    x = engine_();
  } while (x >= limit);
  return x % bound;
}

void Rng::fill(std::span<std::uint8_t> out) {
  std::size_t i = 0;
  while (i < out.size()) {
    const std::uint64_t w = engine_();
    for (int b = 0; b < 8 && i < out.size(); ++b, ++i) out[i] = static_cast<std::uint8_t>(w >> (8 * b));
  }
}

}  // namespace psaa
