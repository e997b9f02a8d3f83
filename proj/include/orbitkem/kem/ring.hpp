#pragma once

// Arithmetic in R_q = Z_q[X]/(X^256 + 1), q = 3329, plus the sampling, compression and
// byte encodings the KEM is built from.
//
// Coefficients are always kept canonical in [0, q). Each element carries a domain tag; mixing
// coefficient-domain and NTT-domain operands is rejected.

#include <array>
#include <cstdint>
#include <span>

#include "orbitkem/common/bytes.hpp"
#include "orbitkem/kem/params.hpp"

namespace orbitkem::kem {

enum class Domain : std::uint8_t { Coefficient, Ntt };

class DomainError : public Error {
public:
    using Error::Error;
};

namespace detail {

constexpr std::uint16_t reduce(std::int64_t x) noexcept {
    std::int64_t r = x % Q;
    return static_cast<std::uint16_t>(r < 0 ? r + Q : r);
}

constexpr std::uint16_t mulmod(std::uint32_t a, std::uint32_t b) noexcept {
    return static_cast<std::uint16_t>((a * b) % Q);
}

constexpr std::uint16_t powmod(std::uint32_t base, std::uint32_t exp) noexcept {
    std::uint32_t r = 1;
    base %= Q;
    while (exp) {
        if (exp & 1) r = (r * base) % Q;
        base = (base * base) % Q;
        exp >>= 1;
    }
    return static_cast<std::uint16_t>(r);
}

constexpr std::uint32_t bitrev7(std::uint32_t x) noexcept {
    std::uint32_t r = 0;
    for (int i = 0; i < 7; ++i) r |= ((x >> i) & 1u) << (6 - i);
    return r;
}

// 17 is a primitive 256th root of unity mod q.
inline constexpr std::uint32_t kRootOfUnity = 17;
inline constexpr std::uint16_t kInv128 = 3303;

inline constexpr auto ntt_zetas = [] {
    std::array<std::uint16_t, 128> z{};
    for (std::uint32_t i = 0; i < 128; ++i) z[i] = powmod(kRootOfUnity, bitrev7(i));
    return z;
}();

inline constexpr auto basemul_gammas = [] {
    std::array<std::uint16_t, 128> g{};
    for (std::uint32_t i = 0; i < 128; ++i) g[i] = powmod(kRootOfUnity, 2 * bitrev7(i) + 1);
    return g;
}();

static_assert(powmod(kRootOfUnity, 128) == Q - 1);
static_assert((128u * kInv128) % Q == 1);

} // namespace detail

class RingElement {
public:
    using Coeffs = std::array<std::uint16_t, N>;

    constexpr RingElement() noexcept = default;
    constexpr explicit RingElement(Domain d) noexcept : domain_(d) {}

    /// Reduces every input value into [0, q).
    static RingElement from_integers(std::span<const std::int32_t> values, Domain d = Domain::Coefficient) {
        if (values.size() != N) throw Error("RingElement: expected 256 coefficients");
        RingElement r(d);
        for (int i = 0; i < N; ++i) r.c_[i] = detail::reduce(values[i]);
        return r;
    }

    Domain domain() const noexcept { return domain_; }
    const Coeffs& coeffs() const noexcept { return c_; }
    std::uint16_t operator[](std::size_t i) const noexcept { return c_[i]; }

    /// Raw write access; callers must keep values canonical.
    Coeffs& mutable_coeffs() noexcept { return c_; }
    void set(std::size_t i, std::int64_t v) noexcept { c_[i] = detail::reduce(v); }
    void retag(Domain d) noexcept { domain_ = d; }

    friend bool operator==(const RingElement&, const RingElement&) = default;

    RingElement& operator+=(const RingElement& o) {
        require_same(o);
        for (int i = 0; i < N; ++i) c_[i] = static_cast<std::uint16_t>((c_[i] + o.c_[i]) % Q);
        return *this;
    }
    RingElement& operator-=(const RingElement& o) {
        require_same(o);
        for (int i = 0; i < N; ++i) c_[i] = static_cast<std::uint16_t>((c_[i] + Q - o.c_[i]) % Q);
        return *this;
    }
    friend RingElement operator+(RingElement a, const RingElement& b) { return a += b; }
    friend RingElement operator-(RingElement a, const RingElement& b) { return a -= b; }

private:
    void require_same(const RingElement& o) const {
        if (domain_ != o.domain_) throw DomainError("RingElement: operands in different domains");
    }

    Coeffs c_{};
    Domain domain_ = Domain::Coefficient;
};

inline RingElement ntt_forward(const RingElement& p) {
    if (p.domain() != Domain::Coefficient) throw DomainError("ntt_forward: input must be in coefficient domain");
    RingElement r = p;
    auto& f = r.mutable_coeffs();
    std::size_t k = 1;
    for (std::size_t len = 128; len >= 2; len /= 2) {
        for (std::size_t start = 0; start < N; start += 2 * len) {
            const std::uint32_t zeta = detail::ntt_zetas[k++];
            for (std::size_t j = start; j < start + len; ++j) {
                std::uint16_t t = detail::mulmod(zeta, f[j + len]);
                f[j + len] = static_cast<std::uint16_t>((f[j] + Q - t) % Q);
                f[j] = static_cast<std::uint16_t>((f[j] + t) % Q);
            }
        }
    }
    r.retag(Domain::Ntt);
    return r;
}

inline RingElement ntt_inverse(const RingElement& p) {
    if (p.domain() != Domain::Ntt) throw DomainError("ntt_inverse: input must be in NTT domain");
    RingElement r = p;
    auto& f = r.mutable_coeffs();
    std::size_t k = 127;
    for (std::size_t len = 2; len <= 128; len *= 2) {
        for (std::size_t start = 0; start < N; start += 2 * len) {
            const std::uint32_t zeta = detail::ntt_zetas[k--];
            for (std::size_t j = start; j < start + len; ++j) {
                std::uint16_t t = f[j];
                f[j] = static_cast<std::uint16_t>((t + f[j + len]) % Q);
                f[j + len] = detail::mulmod(zeta, (f[j + len] + Q - t) % Q);
            }
        }
    }
    for (auto& c : f) c = detail::mulmod(c, detail::kInv128);
    r.retag(Domain::Coefficient);
    return r;
}

/// Pointwise product in the NTT domain (degree-one base multiplications mod X^2 - gamma).
inline RingElement ntt_multiply(const RingElement& a, const RingElement& b) {
    if (a.domain() != Domain::Ntt || b.domain() != Domain::Ntt)
        throw DomainError("ntt_multiply: operands must be in NTT domain");
    RingElement r(Domain::Ntt);
    auto& c = r.mutable_coeffs();
    for (std::size_t i = 0; i < 128; ++i) {
        const std::uint64_t a0 = a[2 * i], a1 = a[2 * i + 1];
        const std::uint64_t b0 = b[2 * i], b1 = b[2 * i + 1];
        const std::uint64_t g = detail::basemul_gammas[i];
        c[2 * i] = static_cast<std::uint16_t>((a0 * b0 + (a1 * b1 % Q) * g) % Q);
        c[2 * i + 1] = static_cast<std::uint16_t>((a0 * b1 + a1 * b0) % Q);
    }
    return r;
}

/// Centered binomial sample: coefficient i = sum of eta bits minus sum of the next eta bits,
/// reading the buffer as a little-endian bit stream. Consumes exactly 64 * eta bytes.
inline RingElement cbd_sample(ByteView buf, int eta) {
    if (eta != 2 && eta != 3) throw Error("cbd_sample: eta must be 2 or 3");
    const std::size_t need = 64 * static_cast<std::size_t>(eta);
    if (buf.size() < need) throw Error("cbd_sample: insufficient input bytes");
    auto bit = [&](std::size_t idx) -> int { return (buf[idx / 8] >> (idx % 8)) & 1; };
    RingElement r(Domain::Coefficient);
    for (std::size_t i = 0; i < N; ++i) {
        int a = 0, b = 0;
        const std::size_t base = 2 * i * eta;
        for (int j = 0; j < eta; ++j) {
            a += bit(base + j);
            b += bit(base + eta + j);
        }
        r.set(i, a - b);
    }
    return r;
}

/// round(2^d * x / q) mod 2^d, rounding halves up.
constexpr std::uint16_t compress(std::uint16_t x, int d) noexcept {
    const std::uint32_t num = (static_cast<std::uint32_t>(x) << d) + Q / 2;
    return static_cast<std::uint16_t>((num / Q) & ((1u << d) - 1));
}

/// round(q * y / 2^d), rounding halves up.
constexpr std::uint16_t decompress(std::uint16_t y, int d) noexcept {
    return static_cast<std::uint16_t>((static_cast<std::uint32_t>(y) * Q + (1u << (d - 1))) >> d);
}

namespace detail {

/// Little-endian bit packing of 256 values of `bits` bits each.
inline void pack_bits(const std::array<std::uint16_t, N>& v, int bits, std::span<std::uint8_t> out) {
    std::uint32_t acc = 0;
    int nacc = 0;
    std::size_t o = 0;
    for (auto x : v) {
        acc |= static_cast<std::uint32_t>(x) << nacc;
        nacc += bits;
        while (nacc >= 8) {
            out[o++] = static_cast<std::uint8_t>(acc);
            acc >>= 8;
            nacc -= 8;
        }
    }
}

inline std::array<std::uint16_t, N> unpack_bits(ByteView in, int bits) {
    std::array<std::uint16_t, N> v{};
    std::uint32_t acc = 0;
    int nacc = 0;
    std::size_t i = 0;
    const std::uint32_t mask = (1u << bits) - 1;
    for (auto b : in) {
        acc |= static_cast<std::uint32_t>(b) << nacc;
        nacc += 8;
        while (nacc >= bits && i < N) {
            v[i++] = static_cast<std::uint16_t>(acc & mask);
            acc >>= bits;
            nacc -= bits;
        }
    }
    return v;
}

} // namespace detail

/// 12-bit packing, 384 bytes. The domain tag is not encoded.
inline void encode_poly(const RingElement& p, std::span<std::uint8_t> out) {
    if (out.size() != kPolyBytes) throw Error("encode_poly: output must be 384 bytes");
    detail::pack_bits(p.coeffs(), 12, out);
}

/// Inverse of encode_poly. Throws if any 12-bit value is >= q.
inline RingElement decode_poly(ByteView in, Domain d) {
    if (in.size() != kPolyBytes) throw Error("decode_poly: input must be 384 bytes");
    RingElement r(d);
    r.mutable_coeffs() = detail::unpack_bits(in, 12);
    for (auto c : r.coeffs())
        if (c >= Q) throw Error("decode_poly: non-canonical coefficient");
    return r;
}

inline Bytes compress_poly(const RingElement& p, int d) {
    std::array<std::uint16_t, N> v{};
    for (int i = 0; i < N; ++i) v[i] = compress(p[i], d);
    Bytes out(static_cast<std::size_t>(N) * d / 8);
    detail::pack_bits(v, d, out);
    return out;
}

inline RingElement decompress_poly(ByteView in, int d) {
    if (in.size() != static_cast<std::size_t>(N) * d / 8) throw Error("decompress_poly: bad length");
    auto v = detail::unpack_bits(in, d);
    RingElement r(Domain::Coefficient);
    for (int i = 0; i < N; ++i) r.mutable_coeffs()[i] = decompress(v[i], d);
    return r;
}

/// Message bit i becomes coefficient round(q/2) * bit.
inline RingElement poly_from_message(ByteView msg) {
    if (msg.size() != kSymBytes) throw Error("poly_from_message: message must be 32 bytes");
    RingElement r(Domain::Coefficient);
    for (int i = 0; i < N; ++i) r.mutable_coeffs()[i] = decompress((msg[i / 8] >> (i % 8)) & 1, 1);
    return r;
}

inline std::array<std::uint8_t, kSymBytes> poly_to_message(const RingElement& p) {
    std::array<std::uint8_t, kSymBytes> msg{};
    for (int i = 0; i < N; ++i) msg[i / 8] |= static_cast<std::uint8_t>(compress(p[i], 1) << (i % 8));
    return msg;
}

/// Module element of rank k; all entries share one domain.
class RingVector {
public:
    RingVector() = default;
    explicit RingVector(Domain d) {
        for (auto& e : elems_) e = RingElement(d);
    }

    Domain domain() const noexcept { return elems_[0].domain(); }
    const RingElement& operator[](std::size_t i) const noexcept { return elems_[i]; }

    void set(std::size_t i, const RingElement& e) {
        if (e.domain() != domain()) throw DomainError("RingVector: element domain differs from vector");
        elems_[i] = e;
    }

    friend bool operator==(const RingVector&, const RingVector&) = default;

    RingVector& operator+=(const RingVector& o) {
        for (int i = 0; i < K; ++i) elems_[i] += o.elems_[i];
        return *this;
    }

    RingVector ntt() const {
        RingVector r(Domain::Ntt);
        for (int i = 0; i < K; ++i) r.elems_[i] = ntt_forward(elems_[i]);
        return r;
    }
    RingVector inverse_ntt() const {
        RingVector r(Domain::Coefficient);
        for (int i = 0; i < K; ++i) r.elems_[i] = ntt_inverse(elems_[i]);
        return r;
    }

    /// Inner product in the NTT domain.
    friend RingElement dot(const RingVector& a, const RingVector& b) {
        RingElement acc(Domain::Ntt);
        for (int i = 0; i < K; ++i) acc += ntt_multiply(a.elems_[i], b.elems_[i]);
        return acc;
    }

    void encode(std::span<std::uint8_t> out) const {
        if (out.size() != kPolyBytes * K) throw Error("RingVector::encode: bad output length");
        for (int i = 0; i < K; ++i) encode_poly(elems_[i], out.subspan(i * kPolyBytes, kPolyBytes));
    }
    static RingVector decode(ByteView in, Domain d) {
        if (in.size() != kPolyBytes * K) throw Error("RingVector::decode: bad input length");
        RingVector r(d);
        for (int i = 0; i < K; ++i) r.elems_[i] = decode_poly(in.subspan(i * kPolyBytes, kPolyBytes), d);
        return r;
    }

private:
    std::array<RingElement, K> elems_{};
};

} // namespace orbitkem::kem
