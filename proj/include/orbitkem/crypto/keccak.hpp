#pragma once

// Keccak-f[1600] and the FIPS 202 instances used by the KEM:
// SHA3-256, SHA3-512, SHAKE-128 and SHAKE-256.

#include <array>
#include <cstdint>
#include <cstring>

#include "orbitkem/common/bytes.hpp"

namespace orbitkem::crypto {

namespace detail {

inline constexpr std::array<std::uint64_t, 24> keccak_round_constants = {
    0x0000000000000001ULL, 0x0000000000008082ULL, 0x800000000000808aULL,
    0x8000000080008000ULL, 0x000000000000808bULL, 0x0000000080000001ULL,
    0x8000000080008081ULL, 0x8000000000008009ULL, 0x000000000000008aULL,
    0x0000000000000088ULL, 0x0000000080008009ULL, 0x000000008000000aULL,
    0x000000008000808bULL, 0x800000000000008bULL, 0x8000000000008089ULL,
    0x8000000000008003ULL, 0x8000000000008002ULL, 0x8000000000000080ULL,
    0x000000000000800aULL, 0x800000008000000aULL, 0x8000000080008081ULL,
    0x8000000000008080ULL, 0x0000000080000001ULL, 0x8000000080008008ULL,
};

// rho offsets and pi lane order, following the lane walk (x, y) -> (y, 2x + 3y).
inline constexpr std::array<int, 24> keccak_rho = {
    1, 3, 6, 10, 15, 21, 28, 36, 45, 55, 2, 14, 27, 41, 56, 8, 25, 43, 62, 18, 39, 61, 20, 44,
};
inline constexpr std::array<int, 24> keccak_pi = {
    10, 7, 11, 17, 18, 3, 5, 16, 8, 21, 24, 4, 15, 23, 19, 13, 12, 2, 20, 14, 22, 9, 6, 1,
};

constexpr std::uint64_t rotl64(std::uint64_t x, int s) noexcept {
    return (x << s) | (x >> (64 - s));
}

inline void keccak_f1600(std::array<std::uint64_t, 25>& a) noexcept {
    for (int round = 0; round < 24; ++round) {
        std::uint64_t c[5];
        for (int x = 0; x < 5; ++x) c[x] = a[x] ^ a[x + 5] ^ a[x + 10] ^ a[x + 15] ^ a[x + 20];
        for (int x = 0; x < 5; ++x) {
            std::uint64_t d = c[(x + 4) % 5] ^ rotl64(c[(x + 1) % 5], 1);
            for (int y = 0; y < 25; y += 5) a[y + x] ^= d;
        }
        std::uint64_t t = a[1];
        for (int i = 0; i < 24; ++i) {
            int j = keccak_pi[i];
            std::uint64_t next = a[j];
            a[j] = rotl64(t, keccak_rho[i]);
            t = next;
        }
        for (int y = 0; y < 25; y += 5) {
            std::uint64_t row[5];
            for (int x = 0; x < 5; ++x) row[x] = a[y + x];
            for (int x = 0; x < 5; ++x) a[y + x] = row[x] ^ (~row[(x + 1) % 5] & row[(x + 2) % 5]);
        }
        a[0] ^= keccak_round_constants[round];
    }
}

} // namespace detail

/// Incremental Keccak sponge: absorb any number of times, then squeeze any number of times.
class KeccakSponge {
public:
    KeccakSponge(std::size_t rate_bytes, std::uint8_t domain_suffix) noexcept
        : rate_(rate_bytes), suffix_(domain_suffix) {}

    ~KeccakSponge() { wipe(); }
    KeccakSponge(const KeccakSponge&) = default;
    KeccakSponge& operator=(const KeccakSponge&) = default;

    void absorb(ByteView data) {
        if (squeezing_) throw Error("keccak: absorb after squeeze");
        for (auto b : data) {
            xor_byte(pos_, b);
            if (++pos_ == rate_) {
                detail::keccak_f1600(state_);
                pos_ = 0;
            }
        }
    }

    void squeeze(std::span<std::uint8_t> out) {
        if (!squeezing_) finalize();
        for (auto& b : out) {
            if (pos_ == rate_) {
                detail::keccak_f1600(state_);
                pos_ = 0;
            }
            b = get_byte(pos_++);
        }
    }

    Bytes squeeze(std::size_t n) {
        Bytes out(n);
        squeeze(std::span<std::uint8_t>(out));
        return out;
    }

private:
    void finalize() noexcept {
        xor_byte(pos_, suffix_);
        xor_byte(rate_ - 1, 0x80);
        detail::keccak_f1600(state_);
        pos_ = 0;
        squeezing_ = true;
    }

    void xor_byte(std::size_t i, std::uint8_t b) noexcept {
        state_[i / 8] ^= static_cast<std::uint64_t>(b) << (8 * (i % 8));
    }
    std::uint8_t get_byte(std::size_t i) const noexcept {
        return static_cast<std::uint8_t>(state_[i / 8] >> (8 * (i % 8)));
    }
    void wipe() noexcept {
        volatile std::uint64_t* p = state_.data();
        for (std::size_t i = 0; i < state_.size(); ++i) p[i] = 0;
    }

    std::array<std::uint64_t, 25> state_{};
    std::size_t rate_;
    std::size_t pos_ = 0;
    std::uint8_t suffix_;
    bool squeezing_ = false;
};

class Shake128 : public KeccakSponge {
public:
    static constexpr std::size_t rate = 168;
    Shake128() noexcept : KeccakSponge(rate, 0x1F) {}
};

class Shake256 : public KeccakSponge {
public:
    static constexpr std::size_t rate = 136;
    Shake256() noexcept : KeccakSponge(rate, 0x1F) {}
};

namespace detail {
template <std::size_t N>
std::array<std::uint8_t, N> sponge_digest(std::size_t rate, std::uint8_t suffix,
                                          std::initializer_list<ByteView> parts) {
    KeccakSponge s(rate, suffix);
    for (auto p : parts) s.absorb(p);
    std::array<std::uint8_t, N> out{};
    s.squeeze(std::span<std::uint8_t>(out));
    return out;
}
} // namespace detail

/// SHA3-256 over the concatenation of `parts`.
inline std::array<std::uint8_t, 32> sha3_256(std::initializer_list<ByteView> parts) {
    return detail::sponge_digest<32>(136, 0x06, parts);
}
inline std::array<std::uint8_t, 32> sha3_256(ByteView data) { return sha3_256({data}); }

inline std::array<std::uint8_t, 64> sha3_512(std::initializer_list<ByteView> parts) {
    return detail::sponge_digest<64>(72, 0x06, parts);
}
inline std::array<std::uint8_t, 64> sha3_512(ByteView data) { return sha3_512({data}); }

inline Bytes shake256(std::initializer_list<ByteView> parts, std::size_t out_len) {
    Shake256 s;
    for (auto p : parts) s.absorb(p);
    return s.squeeze(out_len);
}

inline Bytes shake128(std::initializer_list<ByteView> parts, std::size_t out_len) {
    Shake128 s;
    for (auto p : parts) s.absorb(p);
    return s.squeeze(out_len);
}

} // namespace orbitkem::crypto
