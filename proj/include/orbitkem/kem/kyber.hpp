#pragma once

// Kyber-512 (round 3, "standard" SHA-3 variant): the CPA-secure encryption core and the
// Fujisaki-Okamoto transform with implicit rejection.
//
// All randomness is injected: keygen takes d || z (64 bytes), encaps takes the 32-byte
// message seed. The RandomSource overloads draw exactly those bytes in that order, which is
// what the published KAT generator does.

#include <array>
#include <cstdint>

#include "orbitkem/common/bytes.hpp"
#include "orbitkem/crypto/keccak.hpp"
#include "orbitkem/kem/params.hpp"
#include "orbitkem/kem/ring.hpp"

namespace orbitkem::kem {

class KemError : public Error {
public:
    using Error::Error;
};

/// Fixed-size byte container that wipes itself on destruction.
template <std::size_t Size>
class SecretBytes {
public:
    static constexpr std::size_t size_bytes = Size;

    SecretBytes() = default;
    explicit SecretBytes(ByteView b) {
        if (b.size() != Size) throw KemError("SecretBytes: wrong length");
        std::copy(b.begin(), b.end(), bytes_.begin());
    }
    SecretBytes(const SecretBytes&) = default;
    SecretBytes& operator=(const SecretBytes&) = default;
    ~SecretBytes() { secure_zero(bytes_); }

    ByteView view() const noexcept { return bytes_; }
    std::span<std::uint8_t> span() noexcept { return bytes_; }
    const std::uint8_t* data() const noexcept { return bytes_.data(); }
    static constexpr std::size_t size() noexcept { return Size; }

    /// Constant-time comparison.
    friend bool operator==(const SecretBytes& a, const SecretBytes& b) noexcept {
        return ct_equal(a.bytes_, b.bytes_);
    }

private:
    std::array<std::uint8_t, Size> bytes_{};
};

using SharedSecret = SecretBytes<kSharedSecretBytes>;
using SecretKey = SecretBytes<kSecretKeyBytes>;
using PublicKey = std::array<std::uint8_t, kPublicKeyBytes>;

struct KemCiphertext {
    std::array<std::uint8_t, kCiphertextBytes> bytes{};

    static KemCiphertext from(ByteView b) {
        if (b.size() != kCiphertextBytes) throw KemError("ciphertext must be 768 bytes");
        KemCiphertext ct;
        std::copy(b.begin(), b.end(), ct.bytes.begin());
        return ct;
    }
    ByteView view() const noexcept { return bytes; }
    friend bool operator==(const KemCiphertext&, const KemCiphertext&) = default;
};

struct KemKeyPair {
    PublicKey public_key{};
    SecretKey secret_key;
};

struct EncapsResult {
    KemCiphertext ciphertext;
    SharedSecret shared_secret;
};

/// Source of injected randomness. Implementations throw on failure.
class RandomSource {
public:
    virtual ~RandomSource() = default;
    virtual void fill(std::span<std::uint8_t> out) = 0;
};

namespace detail {

using Matrix = std::array<RingVector, K>;

/// Uniform sampling of one NTT-domain element from SHAKE-128(rho || x || y): each 3-byte group
/// yields two 12-bit candidates, kept when < q.
inline RingElement sample_uniform(ByteView rho, std::uint8_t x, std::uint8_t y) {
    crypto::Shake128 xof;
    const std::uint8_t idx[2] = {x, y};
    xof.absorb(rho);
    xof.absorb(idx);
    RingElement r(Domain::Ntt);
    auto& c = r.mutable_coeffs();
    std::size_t ctr = 0;
    std::array<std::uint8_t, crypto::Shake128::rate> block{};
    while (ctr < N) {
        xof.squeeze(std::span<std::uint8_t>(block));
        for (std::size_t pos = 0; pos + 3 <= block.size() && ctr < N; pos += 3) {
            const std::uint16_t d1 = static_cast<std::uint16_t>(block[pos] | ((block[pos + 1] & 0x0F) << 8));
            const std::uint16_t d2 = static_cast<std::uint16_t>((block[pos + 1] >> 4) | (block[pos + 2] << 4));
            if (d1 < Q) c[ctr++] = d1;
            if (ctr < N && d2 < Q) c[ctr++] = d2;
        }
    }
    return r;
}

/// A[i][j] = Sample(rho, j, i); the transpose uses (i, j).
inline Matrix expand_matrix(ByteView rho, bool transposed) {
    Matrix a;
    for (int i = 0; i < K; ++i) {
        RingVector row(Domain::Ntt);
        for (int j = 0; j < K; ++j) {
            const auto ii = static_cast<std::uint8_t>(i), jj = static_cast<std::uint8_t>(j);
            row.set(j, transposed ? sample_uniform(rho, ii, jj) : sample_uniform(rho, jj, ii));
        }
        a[i] = row;
    }
    return a;
}

inline RingElement noise(ByteView seed, std::uint8_t nonce, int eta) {
    const std::uint8_t n[1] = {nonce};
    auto buf = crypto::shake256({seed, n}, 64 * static_cast<std::size_t>(eta));
    auto r = cbd_sample(buf, eta);
    secure_zero(buf);
    return r;
}

struct CpaKeys {
    PublicKey pk{};
    std::array<std::uint8_t, kPolyBytes * K> sk{};
};

inline CpaKeys cpa_keygen(ByteView d) {
    auto g = crypto::sha3_512(d);
    ByteView rho(g.data(), 32), sigma(g.data() + 32, 32);
    auto a = expand_matrix(rho, false);

    std::uint8_t nonce = 0;
    RingVector s(Domain::Coefficient), e(Domain::Coefficient);
    for (int i = 0; i < K; ++i) s.set(i, noise(sigma, nonce++, kyber512.eta1));
    for (int i = 0; i < K; ++i) e.set(i, noise(sigma, nonce++, kyber512.eta1));
    const RingVector s_hat = s.ntt();
    const RingVector e_hat = e.ntt();

    RingVector t_hat(Domain::Ntt);
    for (int i = 0; i < K; ++i) t_hat.set(i, dot(a[i], s_hat) + e_hat[i]);

    CpaKeys out;
    t_hat.encode(std::span<std::uint8_t>(out.pk.data(), kPolyBytes * K));
    std::copy(rho.begin(), rho.end(), out.pk.begin() + kPolyBytes * K);
    s_hat.encode(out.sk);
    secure_zero(g);
    return out;
}

inline KemCiphertext cpa_encrypt(ByteView pk, ByteView msg, ByteView coins) {
    const RingVector t_hat = RingVector::decode(pk.first(kPolyBytes * K), Domain::Ntt);
    const ByteView rho = pk.subspan(kPolyBytes * K, kSymBytes);
    const auto at = expand_matrix(rho, true);

    std::uint8_t nonce = 0;
    RingVector r(Domain::Coefficient), e1(Domain::Coefficient);
    for (int i = 0; i < K; ++i) r.set(i, noise(coins, nonce++, kyber512.eta1));
    for (int i = 0; i < K; ++i) e1.set(i, noise(coins, nonce++, kyber512.eta2));
    const RingElement e2 = noise(coins, nonce++, kyber512.eta2);
    const RingVector r_hat = r.ntt();

    KemCiphertext ct;
    const std::size_t u_bytes = static_cast<std::size_t>(kyber512.du) * N / 8;
    for (int i = 0; i < K; ++i) {
        const RingElement u = ntt_inverse(dot(at[i], r_hat)) + e1[i];
        auto packed = compress_poly(u, kyber512.du);
        std::copy(packed.begin(), packed.end(), ct.bytes.begin() + i * u_bytes);
    }
    const RingElement v = ntt_inverse(dot(t_hat, r_hat)) + e2 + poly_from_message(msg);
    auto packed = compress_poly(v, kyber512.dv);
    std::copy(packed.begin(), packed.end(), ct.bytes.begin() + K * u_bytes);
    return ct;
}

inline std::array<std::uint8_t, kSymBytes> cpa_decrypt(ByteView cpa_sk, ByteView ct) {
    const std::size_t u_bytes = static_cast<std::size_t>(kyber512.du) * N / 8;
    RingVector u(Domain::Coefficient);
    for (int i = 0; i < K; ++i) u.set(i, decompress_poly(ct.subspan(i * u_bytes, u_bytes), kyber512.du));
    const RingElement v = decompress_poly(ct.subspan(K * u_bytes), kyber512.dv);
    const RingVector s_hat = RingVector::decode(cpa_sk, Domain::Ntt);
    const RingElement w = v - ntt_inverse(dot(s_hat, u.ntt()));
    return poly_to_message(w);
}

} // namespace detail

/// Checks length and that every packed 12-bit coefficient is canonical.
inline void validate_public_key(ByteView pk) {
    if (pk.size() != kPublicKeyBytes) throw KemError("public key must be 800 bytes");
    try {
        (void)RingVector::decode(pk.first(kPolyBytes * K), Domain::Ntt);
    } catch (const Error&) {
        throw KemError("public key has a non-canonical coefficient encoding");
    }
}

/// Deterministic key generation from d || z.
inline KemKeyPair kem_keygen(ByteView seed) {
    if (seed.size() != 2 * kSymBytes) throw KemError("keygen seed must be 64 bytes");
    auto cpa = detail::cpa_keygen(seed.first(kSymBytes));
    KemKeyPair kp;
    kp.public_key = cpa.pk;
    auto sk = kp.secret_key.span();
    auto out = std::copy(cpa.sk.begin(), cpa.sk.end(), sk.begin());
    out = std::copy(cpa.pk.begin(), cpa.pk.end(), out);
    const auto hpk = crypto::sha3_256(cpa.pk);
    out = std::copy(hpk.begin(), hpk.end(), out);
    std::copy(seed.begin() + kSymBytes, seed.end(), out);
    secure_zero(cpa.sk);
    return kp;
}

inline KemKeyPair kem_keygen(RandomSource& rng) {
    std::array<std::uint8_t, 2 * kSymBytes> seed{};
    rng.fill(std::span<std::uint8_t>(seed.data(), kSymBytes));
    rng.fill(std::span<std::uint8_t>(seed.data() + kSymBytes, kSymBytes));
    auto kp = kem_keygen(seed);
    secure_zero(seed);
    return kp;
}

inline EncapsResult kem_encaps(ByteView pk, ByteView seed) {
    validate_public_key(pk);
    if (seed.size() != kSymBytes) throw KemError("encaps seed must be 32 bytes");
    auto m = crypto::sha3_256(seed);
    const auto hpk = crypto::sha3_256(pk);
    auto kr = crypto::sha3_512({m, hpk});
    EncapsResult res;
    res.ciphertext = detail::cpa_encrypt(pk, m, ByteView(kr.data() + kSymBytes, kSymBytes));
    const auto hct = crypto::sha3_256(res.ciphertext.view());
    auto ss = crypto::shake256({ByteView(kr.data(), kSymBytes), hct}, kSharedSecretBytes);
    res.shared_secret = SharedSecret(ss);
    secure_zero(m);
    secure_zero(kr);
    secure_zero(ss);
    return res;
}

inline EncapsResult kem_encaps(ByteView pk, RandomSource& rng) {
    std::array<std::uint8_t, kSymBytes> seed{};
    rng.fill(seed);
    auto res = kem_encaps(pk, seed);
    secure_zero(seed);
    return res;
}

/// Never signals failure for a well-sized ciphertext: an invalid one yields SHAKE256(z || H(ct)).
inline SharedSecret kem_decaps(ByteView sk, ByteView ct) {
    if (sk.size() != kSecretKeyBytes) throw KemError("secret key must be 1632 bytes");
    if (ct.size() != kCiphertextBytes) throw KemError("ciphertext must be 768 bytes");
    const ByteView cpa_sk = sk.first(kPolyBytes * K);
    const ByteView pk = sk.subspan(kPolyBytes * K, kPublicKeyBytes);
    const ByteView hpk = sk.subspan(kPolyBytes * K + kPublicKeyBytes, kSymBytes);
    const ByteView z = sk.subspan(kPolyBytes * K + kPublicKeyBytes + kSymBytes, kSymBytes);

    auto m = detail::cpa_decrypt(cpa_sk, ct);
    auto kr = crypto::sha3_512({m, hpk});
    const auto reencrypted = detail::cpa_encrypt(pk, m, ByteView(kr.data() + kSymBytes, kSymBytes));

    // Constant-time: compare in full, then select K' or z by mask.
    std::uint8_t diff = 0;
    for (std::size_t i = 0; i < kCiphertextBytes; ++i) diff |= reencrypted.bytes[i] ^ ct[i];
    const std::uint32_t mismatch = (0u - static_cast<std::uint32_t>(diff)) >> 31;
    const auto reject = static_cast<std::uint8_t>(0u - mismatch);
    std::array<std::uint8_t, kSymBytes> key{};
    for (std::size_t i = 0; i < kSymBytes; ++i)
        key[i] = static_cast<std::uint8_t>((kr[i] & ~reject) | (z[i] & reject));

    const auto hct = crypto::sha3_256(ct);
    auto ss = crypto::shake256({key, hct}, kSharedSecretBytes);
    SharedSecret out(ss);
    secure_zero(m);
    secure_zero(kr);
    secure_zero(key);
    secure_zero(ss);
    return out;
}

} // namespace orbitkem::kem
