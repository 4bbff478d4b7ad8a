#include "psaa/symwrap.hpp"

#include <openssl/evp.h>

#include <memory>
#include <stdexcept>
#include <string>

namespace psaa::symwrap {

namespace {

using CtxPtr = std::unique_ptr<EVP_CIPHER_CTX, decltype(&EVP_CIPHER_CTX_free)>;

const EVP_CIPHER* evp_cipher(Cipher c) {
  return c == Cipher::kAes256Gcm ? EVP_aes_256_gcm() : EVP_chacha20_poly1305();
}

CtxPtr make_ctx() {
  CtxPtr ctx(EVP_CIPHER_CTX_new(), &EVP_CIPHER_CTX_free);
  if (!ctx) throw std::runtime_error("EVP_CIPHER_CTX_new failed");
  return ctx;
}

}  // namespace

std::string_view cipher_name(Cipher c) {
  return c == Cipher::kAes256Gcm ? "aes-256-gcm" : "chacha20-poly1305";
}

Cipher cipher_from_name(std::string_view name) {
  if (name == "aes-256-gcm") return Cipher::kAes256Gcm;
  if (name == "chacha20-poly1305") return Cipher::kChaCha20Poly1305;
  throw std::invalid_argument("unknown cipher: " + std::string(name));
}

std::vector<std::uint8_t> seal(Cipher c, const Digest& key, std::span<const std::uint8_t> plaintext,
                               std::span<const std::uint8_t> aad, Rng& rng) {
  std::vector<std::uint8_t> out(kNonceBytes + plaintext.size() + kTagBytes);
  rng.fill(std::span(out).first(kNonceBytes));
  auto ctx = make_ctx();
  int len = 0;
  int ok = EVP_EncryptInit_ex(ctx.get(), evp_cipher(c), nullptr, nullptr, nullptr);
  if (ok == 1) ok = EVP_CIPHER_CTX_ctrl(ctx.get(), EVP_CTRL_AEAD_SET_IVLEN, kNonceBytes, nullptr);
  if (ok == 1) ok = EVP_EncryptInit_ex(ctx.get(), nullptr, nullptr, key.bytes().data(), out.data());
  if (ok == 1 && !aad.empty()) ok = EVP_EncryptUpdate(ctx.get(), nullptr, &len, aad.data(), static_cast<int>(aad.size()));
  if (ok == 1)
    ok = EVP_EncryptUpdate(ctx.get(), out.data() + kNonceBytes, &len, plaintext.data(),
                           static_cast<int>(plaintext.size()));
  if (ok == 1) ok = EVP_EncryptFinal_ex(ctx.get(), out.data() + kNonceBytes + len, &len);
  if (ok == 1)
    ok = EVP_CIPHER_CTX_ctrl(ctx.get(), EVP_CTRL_AEAD_GET_TAG, kTagBytes, out.data() + kNonceBytes + plaintext.size());
  if (ok != 1) throw std::runtime_error("symmetric seal failed");
  return out;
}

std::optional<std::vector<std::uint8_t>> open(Cipher c, const Digest& key, std::span<const std::uint8_t> frame,
                                              std::span<const std::uint8_t> aad) {
  if (frame.size() < kOverheadBytes) return std::nullopt;
  const std::size_t body = frame.size() - kOverheadBytes;
  std::vector<std::uint8_t> out(body);
  std::vector<std::uint8_t> tag(frame.end() - kTagBytes, frame.end());
  auto ctx = make_ctx();
  int len = 0;
  int ok = EVP_DecryptInit_ex(ctx.get(), evp_cipher(c), nullptr, nullptr, nullptr);
  if (ok == 1) ok = EVP_CIPHER_CTX_ctrl(ctx.get(), EVP_CTRL_AEAD_SET_IVLEN, kNonceBytes, nullptr);
  if (ok == 1) ok = EVP_DecryptInit_ex(ctx.get(), nullptr, nullptr, key.bytes().data(), frame.data());
  if (ok == 1 && !aad.empty()) ok = EVP_DecryptUpdate(ctx.get(), nullptr, &len, aad.data(), static_cast<int>(aad.size()));
  if (ok == 1)
    ok = EVP_DecryptUpdate(ctx.get(), out.data(), &len, frame.data() + kNonceBytes, static_cast<int>(body));
  if (ok == 1) ok = EVP_CIPHER_CTX_ctrl(ctx.get(), EVP_CTRL_AEAD_SET_TAG, kTagBytes, tag.data());
  if (ok == 1) ok = EVP_DecryptFinal_ex(ctx.get(), out.data() + len, &len);
  if (ok != 1) return std::nullopt;
  return out;
}

}  // namespace psaa::symwrap
