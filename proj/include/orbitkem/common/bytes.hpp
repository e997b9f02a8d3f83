#pragma once

#include <algorithm>
#include <array>
#include <cstddef>
#include <cstdint>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace orbitkem {

using Bytes = std::vector<std::uint8_t>;
using ByteView = std::span<const std::uint8_t>;

/// Base class for every error thrown by the library.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

inline Bytes to_bytes(std::string_view s) {
    return Bytes(s.begin(), s.end());
}

inline Bytes concat(std::initializer_list<ByteView> parts) {
    Bytes out;
    std::size_t n = 0;
    for (auto p : parts) n += p.size();
    out.reserve(n);
    for (auto p : parts) out.insert(out.end(), p.begin(), p.end());
    return out;
}

inline std::string to_hex(ByteView data, bool upper = false) {
    static constexpr char lower_digits[] = "0123456789abcdef";
    static constexpr char upper_digits[] = "0123456789ABCDEF";
    const char* digits = upper ? upper_digits : lower_digits;
    std::string out;
    out.reserve(data.size() * 2);
    for (auto b : data) {
        out.push_back(digits[b >> 4]);
        out.push_back(digits[b & 0xF]);
    }
    return out;
}

inline Bytes from_hex(std::string_view hex) {
    auto nibble = [](char c) -> int {
        if (c >= '0' && c <= '9') return c - '0';
        if (c >= 'a' && c <= 'f') return c - 'a' + 10;
        if (c >= 'A' && c <= 'F') return c - 'A' + 10;
        return -1;
    };
    if (hex.size() % 2 != 0) throw Error("hex string has odd length");
    Bytes out(hex.size() / 2);
    for (std::size_t i = 0; i < out.size(); ++i) {
        int hi = nibble(hex[2 * i]);
        int lo = nibble(hex[2 * i + 1]);
        if (hi < 0 || lo < 0) throw Error("invalid hex digit");
        out[i] = static_cast<std::uint8_t>((hi << 4) | lo);
    }
    return out;
}

/// Constant-time equality. Length is treated as public.
inline bool ct_equal(ByteView a, ByteView b) noexcept {
    if (a.size() != b.size()) return false;
    std::uint8_t diff = 0;
    for (std::size_t i = 0; i < a.size(); ++i) diff |= a[i] ^ b[i];
    return diff == 0;
}

/// Overwrite a buffer in a way the optimizer cannot elide.
inline void secure_zero(std::span<std::uint8_t> buf) noexcept {
    volatile std::uint8_t* p = buf.data();
    for (std::size_t i = 0; i < buf.size(); ++i) p[i] = 0;
}

inline void store_be16(std::uint8_t* p, std::uint16_t v) noexcept {
    p[0] = static_cast<std::uint8_t>(v >> 8);
    p[1] = static_cast<std::uint8_t>(v);
}

inline void store_be32(std::uint8_t* p, std::uint32_t v) noexcept {
    for (int i = 0; i < 4; ++i) p[i] = static_cast<std::uint8_t>(v >> (24 - 8 * i));
}

inline void store_be64(std::uint8_t* p, std::uint64_t v) noexcept {
    for (int i = 0; i < 8; ++i) p[i] = static_cast<std::uint8_t>(v >> (56 - 8 * i));
}

inline std::uint16_t load_be16(const std::uint8_t* p) noexcept {
    return static_cast<std::uint16_t>((p[0] << 8) | p[1]);
}

inline std::uint32_t load_be32(const std::uint8_t* p) noexcept {
    std::uint32_t v = 0;
    for (int i = 0; i < 4; ++i) v = (v << 8) | p[i];
    return v;
}

inline std::uint64_t load_be64(const std::uint8_t* p) noexcept {
    std::uint64_t v = 0;
    for (int i = 0; i < 8; ++i) v = (v << 8) | p[i];
    return v;
}

/// Appends big-endian integers and length-prefixed blobs.
class ByteWriter {
public:
    void u8(std::uint8_t v) { buf_.push_back(v); }
    void u16(std::uint16_t v) {
        std::uint8_t t[2];
        store_be16(t, v);
        raw(t);
    }
    void u32(std::uint32_t v) {
        std::uint8_t t[4];
        store_be32(t, v);
        raw(t);
    }
    void u64(std::uint64_t v) {
        std::uint8_t t[8];
        store_be64(t, v);
        raw(t);
    }
    void i64(std::int64_t v) { u64(static_cast<std::uint64_t>(v)); }
    void raw(ByteView data) { buf_.insert(buf_.end(), data.begin(), data.end()); }
    /// u32 length followed by the bytes.
    void blob(ByteView data) {
        u32(static_cast<std::uint32_t>(data.size()));
        raw(data);
    }

    const Bytes& bytes() const& noexcept { return buf_; }
    Bytes take() && noexcept { return std::move(buf_); }

private:
    Bytes buf_;
};

/// Bounds-checked reader matching ByteWriter.
class ByteReader {
public:
    explicit ByteReader(ByteView data) : data_(data) {}

    std::uint8_t u8() { return need(1)[0]; }
    std::uint16_t u16() { return load_be16(need(2).data()); }
    std::uint32_t u32() { return load_be32(need(4).data()); }
    std::uint64_t u64() { return load_be64(need(8).data()); }
    std::int64_t i64() { return static_cast<std::int64_t>(u64()); }
    ByteView raw(std::size_t n) { return need(n); }
    Bytes blob() {
        auto n = u32();
        auto v = need(n);
        return Bytes(v.begin(), v.end());
    }

    std::size_t remaining() const noexcept { return data_.size() - pos_; }
    bool done() const noexcept { return remaining() == 0; }

private:
    ByteView need(std::size_t n) {
        if (remaining() < n) throw Error("unexpected end of input");
        auto v = data_.subspan(pos_, n);
        pos_ += n;
        return v;
    }

    ByteView data_;
    std::size_t pos_ = 0;
};

} // namespace orbitkem
