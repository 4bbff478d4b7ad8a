#pragma once

// The system hash h : {0,1}* -> {0,1}^256 and the byte-level XOF behind
// H : {0,1}* -> R_q.
//
// Multi-argument hashes h(x1, ..., xk) absorb each argument as a 4-byte
// big-endian length followed by its canonical bytes, so argument boundaries
// are unambiguous.

#include <cstdint>
#include <initializer_list>
#include <span>
#include <vector>

#include "psaa/bits.hpp"

namespace psaa {

class Hasher {
 public:
  Hasher();
  ~Hasher();
  Hasher(const Hasher&) = delete;
  Hasher& operator=(const Hasher&) = delete;

  Hasher& absorb(std::span<const std::uint8_t> field);
  Digest finish();

 private:
  void* ctx_;
};

Digest hash_fields(std::initializer_list<std::span<const std::uint8_t>> fields);

/// SHAKE128 output of `out.size()` bytes. Shorter requests are prefixes of
/// longer ones, so callers may grow the request and re-squeeze.
void shake128(std::span<const std::uint8_t> input, std::span<std::uint8_t> out);

/// Iterated-hash expansion of `seed` to `nbits` bits:
/// h(seed, 0) || h(seed, 1) || ..., truncated.
BitVector expand_digest(const Digest& seed, std::size_t nbits);

/// Number of h evaluations performed on the calling thread.
std::uint64_t hash_call_count();

}  // namespace psaa
