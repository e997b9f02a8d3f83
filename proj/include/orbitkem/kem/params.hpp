#pragma once

#include <cstddef>
#include <cstdint>

#include "orbitkem/common/bytes.hpp"

namespace orbitkem::kem {

/// Kyber-512 (round 3) parameter set. Any other values are rejected by validate().
struct KemParams {
    int n = 256;
    int q = 3329;
    int k = 2;
    int eta1 = 3;
    int eta2 = 2;
    int du = 10;
    int dv = 4;

    constexpr std::size_t poly_bytes() const noexcept { return 12 * static_cast<std::size_t>(n) / 8; }
    constexpr std::size_t public_key_bytes() const noexcept { return poly_bytes() * k + 32; }
    constexpr std::size_t indcpa_secret_key_bytes() const noexcept { return poly_bytes() * k; }
    constexpr std::size_t secret_key_bytes() const noexcept {
        return indcpa_secret_key_bytes() + public_key_bytes() + 32 + 32;
    }
    constexpr std::size_t ciphertext_bytes() const noexcept {
        return static_cast<std::size_t>(du) * k * n / 8 + static_cast<std::size_t>(dv) * n / 8;
    }
    static constexpr std::size_t shared_secret_bytes() noexcept { return 32; }

    constexpr bool is_kyber512() const noexcept {
        return n == 256 && q == 3329 && k == 2 && eta1 == 3 && eta2 == 2 && du == 10 && dv == 4;
    }

    void validate() const {
        if (!is_kyber512()) throw Error("KemParams: only the Kyber-512 round-3 parameter set is supported");
    }
};

inline constexpr KemParams kyber512{};

inline constexpr int N = kyber512.n;
inline constexpr int Q = kyber512.q;
inline constexpr int K = kyber512.k;
inline constexpr std::size_t kPolyBytes = kyber512.poly_bytes();
inline constexpr std::size_t kPublicKeyBytes = kyber512.public_key_bytes();
inline constexpr std::size_t kSecretKeyBytes = kyber512.secret_key_bytes();
inline constexpr std::size_t kCiphertextBytes = kyber512.ciphertext_bytes();
inline constexpr std::size_t kSharedSecretBytes = KemParams::shared_secret_bytes();
inline constexpr std::size_t kSymBytes = 32;

static_assert(kPublicKeyBytes == 800);
static_assert(kSecretKeyBytes == 1632);
static_assert(kCiphertextBytes == 768);

} // namespace orbitkem::kem
