#include "psaa/hash.hpp"

#include <openssl/evp.h>

#include <array>
#include <stdexcept>

namespace psaa {

namespace {
thread_local std::uint64_t g_hash_calls = 0;

void check(int ok, const char* what) {
  if (ok != 1) throw std::runtime_error(what);
}
}  // namespace

Hasher::Hasher() : ctx_(EVP_MD_CTX_new()) {
  if (ctx_ == nullptr) throw std::runtime_error("EVP_MD_CTX_new failed");
  check(EVP_DigestInit_ex(static_cast<EVP_MD_CTX*>(ctx_), EVP_sha256(), nullptr), "sha256 init");
}

Hasher::~Hasher() { EVP_MD_CTX_free(static_cast<EVP_MD_CTX*>(ctx_)); }

Hasher& Hasher::absorb(std::span<const std::uint8_t> field) {
  const auto len = static_cast<std::uint32_t>(field.size());
  const std::array<std::uint8_t, 4> prefix{static_cast<std::uint8_t>(len >> 24), static_cast<std::uint8_t>(len >> 16),
                                           static_cast<std::uint8_t>(len >> 8), static_cast<std::uint8_t>(len)};
  auto* ctx = static_cast<EVP_MD_CTX*>(ctx_);
  check(EVP_DigestUpdate(ctx, prefix.data(), prefix.size()), "sha256 update");
  if (!field.empty()) check(EVP_DigestUpdate(ctx, field.data(), field.size()), "sha256 update");
  return *this;
}

Digest Hasher::finish() {
  std::array<std::uint8_t, 32> out{};
  unsigned int len = 0;
  check(EVP_DigestFinal_ex(static_cast<EVP_MD_CTX*>(ctx_), out.data(), &len), "sha256 final");
  ++g_hash_calls;
  return Digest::from_bytes(out);
}

Digest hash_fields(std::initializer_list<std::span<const std::uint8_t>> fields) {
  Hasher hasher;
  for (auto f : fields) hasher.absorb(f);
  return hasher.finish();
}

void shake128(std::span<const std::uint8_t> input, std::span<std::uint8_t> out) {
  EVP_MD_CTX* ctx = EVP_MD_CTX_new();
  if (ctx == nullptr) throw std::runtime_error("EVP_MD_CTX_new failed");
  int ok = EVP_DigestInit_ex(ctx, EVP_shake128(), nullptr);
  if (ok == 1) ok = EVP_DigestUpdate(ctx, input.data(), input.size());
  if (ok == 1) ok = EVP_DigestFinalXOF(ctx, out.data(), out.size());
  EVP_MD_CTX_free(ctx);
  check(ok, "shake128");
}

BitVector expand_digest(const Digest& seed, std::size_t nbits) {
  std::vector<std::uint8_t> buf;
  buf.reserve((nbits + 255) / 256 * 32);
  for (std::uint32_t block = 0; buf.size() * 8 < nbits; ++block) {
    const std::array<std::uint8_t, 4> ctr{static_cast<std::uint8_t>(block >> 24), static_cast<std::uint8_t>(block >> 16),
                                          static_cast<std::uint8_t>(block >> 8), static_cast<std::uint8_t>(block)};
    const Digest d = hash_fields({seed.bytes(), ctr});
    buf.insert(buf.end(), d.bytes().begin(), d.bytes().end());
  }
  return BitVector::from_bytes(buf, nbits);
}

std::uint64_t hash_call_count() { return g_hash_calls; }

}  // namespace psaa
