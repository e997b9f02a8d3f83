#pragma once

#include <array>
#include <cstdint>

#include "orbitkem/common/bytes.hpp"

namespace orbitkem::crypto {

namespace detail {
constexpr std::array<std::uint32_t, 256> make_crc32_table() {
    std::array<std::uint32_t, 256> table{};
    for (std::uint32_t i = 0; i < 256; ++i) {
        std::uint32_t c = i;
        for (int k = 0; k < 8; ++k) c = (c & 1) ? (0xEDB88320u ^ (c >> 1)) : (c >> 1);
        table[i] = c;
    }
    return table;
}
inline constexpr auto crc32_table = make_crc32_table();
} // namespace detail

/// CRC-32/IEEE: reflected polynomial 0xEDB88320, init and final XOR 0xFFFFFFFF.
class Crc32 {
public:
    void update(ByteView data) noexcept {
        for (auto b : data) state_ = detail::crc32_table[(state_ ^ b) & 0xFF] ^ (state_ >> 8);
    }
    std::uint32_t value() const noexcept { return state_ ^ 0xFFFFFFFFu; }

private:
    std::uint32_t state_ = 0xFFFFFFFFu;
};

inline std::uint32_t crc32(ByteView data) noexcept {
    Crc32 c;
    c.update(data);
    return c.value();
}

} // namespace orbitkem::crypto
