#pragma once

// XTEA block cipher as offered by libcsp. Key and block words are big-endian.

#include <array>
#include <cstdint>

#include "orbitkem/common/bytes.hpp"

namespace orbitkem::crypto {

using XteaKey = std::array<std::uint8_t, 16>;
using XteaBlock = std::array<std::uint8_t, 8>;

inline constexpr std::uint32_t xtea_delta = 0x9E3779B9u;

namespace detail {
inline std::array<std::uint32_t, 4> xtea_key_words(ByteView key) {
    if (key.size() != 16) throw Error("xtea: key must be 16 bytes");
    return {load_be32(key.data()), load_be32(key.data() + 4), load_be32(key.data() + 8),
            load_be32(key.data() + 12)};
}
} // namespace detail

inline XteaBlock xtea_encrypt_block(ByteView key, ByteView block, unsigned rounds = 32) {
    if (block.size() != 8) throw Error("xtea: block must be 8 bytes");
    auto k = detail::xtea_key_words(key);
    std::uint32_t v0 = load_be32(block.data());
    std::uint32_t v1 = load_be32(block.data() + 4);
    std::uint32_t sum = 0;
    for (unsigned i = 0; i < rounds; ++i) {
        v0 += (((v1 << 4) ^ (v1 >> 5)) + v1) ^ (sum + k[sum & 3]);
        sum += xtea_delta;
        v1 += (((v0 << 4) ^ (v0 >> 5)) + v0) ^ (sum + k[(sum >> 11) & 3]);
    }
    XteaBlock out{};
    store_be32(out.data(), v0);
    store_be32(out.data() + 4, v1);
    return out;
}

inline XteaBlock xtea_decrypt_block(ByteView key, ByteView block, unsigned rounds = 32) {
    if (block.size() != 8) throw Error("xtea: block must be 8 bytes");
    auto k = detail::xtea_key_words(key);
    std::uint32_t v0 = load_be32(block.data());
    std::uint32_t v1 = load_be32(block.data() + 4);
    std::uint32_t sum = xtea_delta * rounds;
    for (unsigned i = 0; i < rounds; ++i) {
        v1 -= (((v0 << 4) ^ (v0 >> 5)) + v0) ^ (sum + k[(sum >> 11) & 3]);
        sum -= xtea_delta;
        v0 -= (((v1 << 4) ^ (v1 >> 5)) + v1) ^ (sum + k[sum & 3]);
    }
    XteaBlock out{};
    store_be32(out.data(), v0);
    store_be32(out.data() + 4, v1);
    return out;
}

/// Unauthenticated XTEA-CTR. Counter block j of message `nonce` is BE32(nonce) || BE32(j).
/// Legacy mode: provides no integrity whatsoever.
inline Bytes xtea_ctr_crypt(ByteView key, std::uint32_t nonce, ByteView data) {
    Bytes out(data.begin(), data.end());
    std::uint8_t ctr[8];
    store_be32(ctr, nonce);
    for (std::size_t off = 0, j = 0; off < out.size(); off += 8, ++j) {
        store_be32(ctr + 4, static_cast<std::uint32_t>(j));
        auto ks = xtea_encrypt_block(key, ctr);
        for (std::size_t i = 0; i < 8 && off + i < out.size(); ++i) out[off + i] ^= ks[i];
    }
    return out;
}

} // namespace orbitkem::crypto
