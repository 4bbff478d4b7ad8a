#pragma once

#include <cstdint>
#include <random>
#include <span>
#include <string_view>

namespace psaa {

/// Seedable deterministic random source. Every sampler in the toolkit draws
/// from one of these, so a run is a pure function of its root seed.
///
/// Only raw engine output is consumed (no std:: distributions), which keeps
/// streams identical across standard library implementations.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  /// Independent stream for (root, label, index), e.g. one per party or trial.
  static Rng derive(std::uint64_t root, std::string_view label, std::uint64_t index = 0);

  std::uint64_t next_u64() { return engine_(); }
  /// Uniform in [0, bound); bound > 0.
  std::uint64_t uniform_below(std::uint64_t bound);
  void fill(std::span<std::uint8_t> out);

 private:
  std::mt19937_64 engine_;
};

}  // namespace psaa
