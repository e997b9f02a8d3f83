#pragma once

// SHA-1, SHA-256, HMAC and AES-256 (single block and GCM) on top of libcrypto.

#include <array>
#include <limits>
#include <memory>
#include <optional>

#include <openssl/evp.h>
#include <openssl/hmac.h>

#include "orbitkem/common/bytes.hpp"

namespace orbitkem::crypto {

enum class HashAlg { Sha1, Sha256 };

inline std::size_t digest_size(HashAlg alg) noexcept {
    return alg == HashAlg::Sha1 ? 20 : 32;
}

namespace detail {

inline const EVP_MD* evp_md(HashAlg alg) noexcept {
    return alg == HashAlg::Sha1 ? EVP_sha1() : EVP_sha256();
}

struct CipherCtxDeleter {
    void operator()(EVP_CIPHER_CTX* c) const noexcept { EVP_CIPHER_CTX_free(c); }
};
using CipherCtx = std::unique_ptr<EVP_CIPHER_CTX, CipherCtxDeleter>;

inline CipherCtx new_cipher_ctx() {
    CipherCtx ctx(EVP_CIPHER_CTX_new());
    if (!ctx) throw Error("EVP_CIPHER_CTX_new failed");
    return ctx;
}

inline int checked_len(std::size_t n) {
    if (n > static_cast<std::size_t>(std::numeric_limits<int>::max())) throw Error("buffer too large");
    return static_cast<int>(n);
}

} // namespace detail

inline Bytes hash(HashAlg alg, ByteView data) {
    Bytes out(digest_size(alg));
    unsigned int len = 0;
    if (EVP_Digest(data.data(), data.size(), out.data(), &len, detail::evp_md(alg), nullptr) != 1)
        throw Error("EVP_Digest failed");
    return out;
}

inline Bytes sha1(ByteView data) { return hash(HashAlg::Sha1, data); }
inline Bytes sha256(ByteView data) { return hash(HashAlg::Sha256, data); }

inline Bytes hmac(HashAlg alg, ByteView key, ByteView data) {
    Bytes out(digest_size(alg));
    unsigned int len = 0;
    // libcrypto rejects a null key pointer even for zero length.
    static const std::uint8_t empty = 0;
    const std::uint8_t* k = key.empty() ? &empty : key.data();
    if (!HMAC(detail::evp_md(alg), k, detail::checked_len(key.size()), data.data(), data.size(),
              out.data(), &len))
        throw Error("HMAC failed");
    return out;
}

inline Bytes hmac_sha1(ByteView key, ByteView data) { return hmac(HashAlg::Sha1, key, data); }
inline Bytes hmac_sha256(ByteView key, ByteView data) { return hmac(HashAlg::Sha256, key, data); }

using Aes256Key = std::array<std::uint8_t, 32>;
using AesBlock = std::array<std::uint8_t, 16>;

/// Raw AES-256 block encryption (ECB of exactly one block).
inline AesBlock aes256_encrypt_block(ByteView key, ByteView block) {
    if (key.size() != 32 || block.size() != 16) throw Error("aes256: bad key or block length");
    auto ctx = detail::new_cipher_ctx();
    AesBlock out{};
    int len = 0;
    if (EVP_EncryptInit_ex(ctx.get(), EVP_aes_256_ecb(), nullptr, key.data(), nullptr) != 1 ||
        EVP_CIPHER_CTX_set_padding(ctx.get(), 0) != 1 ||
        EVP_EncryptUpdate(ctx.get(), out.data(), &len, block.data(), 16) != 1)
        throw Error("aes256 block encryption failed");
    return out;
}

struct GcmSealed {
    Bytes ciphertext;
    std::array<std::uint8_t, 16> tag{};
};

inline GcmSealed aes256_gcm_seal(ByteView key, ByteView iv, ByteView plaintext, ByteView aad) {
    if (key.size() != 32) throw Error("aes256-gcm: key must be 32 bytes");
    if (iv.size() != 12) throw Error("aes256-gcm: iv must be 12 bytes");
    auto ctx = detail::new_cipher_ctx();
    GcmSealed out;
    out.ciphertext.resize(plaintext.size());
    int len = 0;
    if (EVP_EncryptInit_ex(ctx.get(), EVP_aes_256_gcm(), nullptr, key.data(), iv.data()) != 1)
        throw Error("aes256-gcm init failed");
    if (!aad.empty() &&
        EVP_EncryptUpdate(ctx.get(), nullptr, &len, aad.data(), detail::checked_len(aad.size())) != 1)
        throw Error("aes256-gcm aad failed");
    if (!plaintext.empty() &&
        EVP_EncryptUpdate(ctx.get(), out.ciphertext.data(), &len, plaintext.data(),
                          detail::checked_len(plaintext.size())) != 1)
        throw Error("aes256-gcm encrypt failed");
    if (EVP_EncryptFinal_ex(ctx.get(), out.ciphertext.data() + out.ciphertext.size(), &len) != 1 ||
        EVP_CIPHER_CTX_ctrl(ctx.get(), EVP_CTRL_GCM_GET_TAG, 16, out.tag.data()) != 1)
        throw Error("aes256-gcm finalize failed");
    return out;
}

/// Returns nullopt when the tag does not authenticate (ciphertext, aad) under (key, iv).
inline std::optional<Bytes> aes256_gcm_open(ByteView key, ByteView iv, ByteView ciphertext, ByteView aad,
                                            ByteView tag) {
    if (key.size() != 32) throw Error("aes256-gcm: key must be 32 bytes");
    if (iv.size() != 12) throw Error("aes256-gcm: iv must be 12 bytes");
    if (tag.size() != 16) return std::nullopt;
    auto ctx = detail::new_cipher_ctx();
    Bytes pt(ciphertext.size());
    int len = 0;
    if (EVP_DecryptInit_ex(ctx.get(), EVP_aes_256_gcm(), nullptr, key.data(), iv.data()) != 1)
        throw Error("aes256-gcm init failed");
    if (!aad.empty() &&
        EVP_DecryptUpdate(ctx.get(), nullptr, &len, aad.data(), detail::checked_len(aad.size())) != 1)
        throw Error("aes256-gcm aad failed");
    if (!ciphertext.empty() &&
        EVP_DecryptUpdate(ctx.get(), pt.data(), &len, ciphertext.data(),
                          detail::checked_len(ciphertext.size())) != 1)
        throw Error("aes256-gcm decrypt failed");
    std::array<std::uint8_t, 16> t{};
    std::copy(tag.begin(), tag.end(), t.begin());
    if (EVP_CIPHER_CTX_ctrl(ctx.get(), EVP_CTRL_GCM_SET_TAG, 16, t.data()) != 1)
        throw Error("aes256-gcm set tag failed");
    if (EVP_DecryptFinal_ex(ctx.get(), pt.data() + pt.size(), &len) != 1) {
        secure_zero(pt);
        return std::nullopt;
    }
    return pt;
}

} // namespace orbitkem::crypto
