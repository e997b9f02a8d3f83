#pragma once

// HKDF (RFC 5869) with HMAC-SHA256.

#include "orbitkem/crypto/primitives.hpp"

namespace orbitkem::crypto {

inline Bytes hkdf_extract(ByteView salt, ByteView ikm) {
    return hmac_sha256(salt, ikm);
}

inline Bytes hkdf_expand(ByteView prk, ByteView info, std::size_t length) {
    if (length > 255 * 32) throw Error("hkdf: output too long");
    Bytes okm;
    okm.reserve(length);
    Bytes block;
    for (std::uint8_t counter = 1; okm.size() < length; ++counter) {
        std::uint8_t c[1] = {counter};
        block = hmac_sha256(prk, concat({block, info, c}));
        auto take = std::min(block.size(), length - okm.size());
        okm.insert(okm.end(), block.begin(), block.begin() + static_cast<std::ptrdiff_t>(take));
    }
    secure_zero(block);
    return okm;
}

inline Bytes hkdf(ByteView salt, ByteView ikm, ByteView info, std::size_t length) {
    auto prk = hkdf_extract(salt, ikm);
    auto okm = hkdf_expand(prk, info, length);
    secure_zero(prk);
    return okm;
}

} // namespace orbitkem::crypto
