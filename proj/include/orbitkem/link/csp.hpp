#pragma once

// CSP-style packets. Wire format:
//
//   4-byte big-endian header || payload || [4-byte CRC-32] || [4-byte HMAC tag]
//
// Header word, MSB first: priority:2 source:5 destination:5 dport:6 sport:6 reserved:4 flags:4.
// CRC and HMAC are both computed over the header bytes as transmitted followed by the payload
// (the HMAC may be switched to payload-only for strict libcsp emulation).

#include <array>
#include <cstdint>
#include <optional>
#include <sstream>
#include <string>

#include "orbitkem/common/bytes.hpp"
#include "orbitkem/crypto/crc32.hpp"
#include "orbitkem/crypto/primitives.hpp"

namespace orbitkem::link {

namespace flags {
inline constexpr std::uint8_t hmac = 0x08;
inline constexpr std::uint8_t xtea = 0x04;
inline constexpr std::uint8_t rdp = 0x02;
inline constexpr std::uint8_t crc = 0x01;
} // namespace flags

inline constexpr std::size_t kHeaderBytes = 4;
inline constexpr std::size_t kCrcBytes = 4;
inline constexpr std::size_t kHmacBytes = 4;
inline constexpr std::size_t kDefaultMtu = 200;
inline constexpr std::size_t kMinMtu = 32;
inline constexpr std::size_t kMaxMtu = 1024;

struct CspHeader {
    std::uint8_t priority = 0;          // 2 bits
    std::uint8_t source = 0;            // 5 bits
    std::uint8_t destination = 0;       // 5 bits
    std::uint8_t destination_port = 0;  // 6 bits
    std::uint8_t source_port = 0;       // 6 bits
    std::uint8_t flags = 0;             // 4 bits

    friend bool operator==(const CspHeader&, const CspHeader&) = default;
};

enum class LinkErrc { BadCrc, BadHmac, Truncated, FieldRange, PayloadTooLarge, MissingKey };

inline const char* to_string(LinkErrc e) noexcept {
    switch (e) {
    case LinkErrc::BadCrc: return "BadCrc";
    case LinkErrc::BadHmac: return "BadHmac";
    case LinkErrc::Truncated: return "Truncated";
    case LinkErrc::FieldRange: return "FieldRange";
    case LinkErrc::PayloadTooLarge: return "PayloadTooLarge";
    case LinkErrc::MissingKey: return "MissingKey";
    }
    return "?";
}

class LinkError : public Error {
public:
    LinkError(LinkErrc code, const std::string& what) : Error(what), code_(code) {}
    LinkErrc code() const noexcept { return code_; }

private:
    LinkErrc code_;
};

inline std::uint32_t pack_header(const CspHeader& h) {
    if (h.priority > 3 || h.source > 31 || h.destination > 31 || h.destination_port > 63 ||
        h.source_port > 63 || h.flags > 15)
        throw LinkError(LinkErrc::FieldRange, "csp header field out of range");
    return (std::uint32_t{h.priority} << 30) | (std::uint32_t{h.source} << 25) |
           (std::uint32_t{h.destination} << 20) | (std::uint32_t{h.destination_port} << 14) |
           (std::uint32_t{h.source_port} << 8) | std::uint32_t{h.flags};
}

/// Reserved bits are ignored.
inline CspHeader unpack_header(std::uint32_t w) noexcept {
    CspHeader h;
    h.priority = static_cast<std::uint8_t>((w >> 30) & 0x3);
    h.source = static_cast<std::uint8_t>((w >> 25) & 0x1F);
    h.destination = static_cast<std::uint8_t>((w >> 20) & 0x1F);
    h.destination_port = static_cast<std::uint8_t>((w >> 14) & 0x3F);
    h.source_port = static_cast<std::uint8_t>((w >> 8) & 0x3F);
    h.flags = static_cast<std::uint8_t>(w & 0xF);
    return h;
}

inline std::array<std::uint8_t, kHeaderBytes> header_bytes(const CspHeader& h) {
    std::array<std::uint8_t, kHeaderBytes> b{};
    store_be32(b.data(), pack_header(h));
    return b;
}

struct CspPacket {
    CspHeader header;
    /// Header exactly as transmitted; trailers are computed over these bytes.
    std::array<std::uint8_t, kHeaderBytes> raw_header{};
    Bytes payload;
    std::optional<std::uint32_t> crc;
    std::optional<std::array<std::uint8_t, kHmacBytes>> hmac;

    std::size_t wire_size() const noexcept {
        return kHeaderBytes + payload.size() + (crc ? kCrcBytes : 0) + (hmac ? kHmacBytes : 0);
    }

    Bytes encode() const {
        Bytes out;
        out.reserve(wire_size());
        out.insert(out.end(), raw_header.begin(), raw_header.end());
        out.insert(out.end(), payload.begin(), payload.end());
        if (crc) {
            std::uint8_t t[4];
            store_be32(t, *crc);
            out.insert(out.end(), t, t + 4);
        }
        if (hmac) out.insert(out.end(), hmac->begin(), hmac->end());
        return out;
    }

    /// Splits wire bytes according to the header flags; no trailer is checked here.
    static CspPacket decode(ByteView wire) {
        if (wire.size() < kHeaderBytes) throw LinkError(LinkErrc::Truncated, "packet shorter than csp header");
        CspPacket p;
        std::copy_n(wire.begin(), kHeaderBytes, p.raw_header.begin());
        p.header = unpack_header(load_be32(wire.data()));
        const std::size_t trailers = ((p.header.flags & flags::crc) ? kCrcBytes : 0) +
                                     ((p.header.flags & flags::hmac) ? kHmacBytes : 0);
        if (wire.size() < kHeaderBytes + trailers)
            throw LinkError(LinkErrc::Truncated, "packet too short for flagged trailers");
        const std::size_t payload_len = wire.size() - kHeaderBytes - trailers;
        auto body = wire.subspan(kHeaderBytes);
        p.payload.assign(body.begin(), body.begin() + static_cast<std::ptrdiff_t>(payload_len));
        std::size_t off = kHeaderBytes + payload_len;
        if (p.header.flags & flags::crc) {
            p.crc = load_be32(wire.data() + off);
            off += kCrcBytes;
        }
        if (p.header.flags & flags::hmac) {
            std::array<std::uint8_t, kHmacBytes> tag{};
            std::copy_n(wire.begin() + static_cast<std::ptrdiff_t>(off), kHmacBytes, tag.begin());
            p.hmac = tag;
        }
        return p;
    }
};

struct HmacSettings {
    crypto::HashAlg alg = crypto::HashAlg::Sha1;
    /// false reproduces libcsp exactly: tag over the payload only.
    bool covers_header = true;
};

struct SealOptions {
    std::size_t mtu = kDefaultMtu;
    bool crc = false;
    std::optional<Bytes> hmac_key;
    HmacSettings hmac;
};

struct VerifyOptions {
    std::optional<Bytes> hmac_key;
    HmacSettings hmac;
    /// Reject packets that lack the trailer (a flipped flag bit would otherwise strip it).
    bool require_crc = false;
    bool require_hmac = false;
};

namespace detail {

inline std::uint32_t packet_crc(ByteView raw_header, ByteView payload) {
    crypto::Crc32 c;
    c.update(raw_header);
    c.update(payload);
    return c.value();
}

inline std::array<std::uint8_t, kHmacBytes> packet_tag(ByteView key, const HmacSettings& s, ByteView raw_header,
                                                       ByteView payload) {
    auto mac = s.covers_header ? crypto::hmac(s.alg, key, concat({raw_header, payload}))
                               : crypto::hmac(s.alg, key, payload);
    std::array<std::uint8_t, kHmacBytes> tag{};
    std::copy_n(mac.begin(), kHmacBytes, tag.begin());
    return tag;
}

} // namespace detail

/// Appends the trailers selected by `opts` and sets the matching header flags.
inline CspPacket seal(CspHeader header, ByteView payload, const SealOptions& opts) {
    if (payload.size() > opts.mtu) throw LinkError(LinkErrc::PayloadTooLarge, "payload exceeds mtu");
    if (opts.crc) header.flags |= flags::crc;
    if (opts.hmac_key) header.flags |= flags::hmac;
    if ((header.flags & flags::hmac) && !opts.hmac_key)
        throw LinkError(LinkErrc::MissingKey, "hmac flag requested without key");
    CspPacket p;
    p.header = header;
    p.raw_header = header_bytes(header);
    p.payload.assign(payload.begin(), payload.end());
    if (header.flags & flags::crc) p.crc = detail::packet_crc(p.raw_header, p.payload);
    if (header.flags & flags::hmac) p.hmac = detail::packet_tag(*opts.hmac_key, opts.hmac, p.raw_header, p.payload);
    return p;
}

/// Returns the payload if every present (and every required) trailer validates.
inline const Bytes& verify(const CspPacket& p, const VerifyOptions& opts) {
    const bool has_crc = (p.header.flags & flags::crc) != 0;
    const bool has_hmac = (p.header.flags & flags::hmac) != 0;
    if (has_crc != p.crc.has_value() || has_hmac != p.hmac.has_value())
        throw LinkError(LinkErrc::Truncated, "trailers do not match header flags");
    if (opts.require_crc && !has_crc) throw LinkError(LinkErrc::BadCrc, "crc required but absent");
    if (has_crc && detail::packet_crc(p.raw_header, p.payload) != *p.crc)
        throw LinkError(LinkErrc::BadCrc, "crc mismatch");
    if (opts.require_hmac && !has_hmac) throw LinkError(LinkErrc::BadHmac, "hmac required but absent");
    if (has_hmac) {
        if (!opts.hmac_key) throw LinkError(LinkErrc::BadHmac, "hmac present but no key configured");
        auto expect = detail::packet_tag(*opts.hmac_key, opts.hmac, p.raw_header, p.payload);
        if (!ct_equal(expect, *p.hmac)) throw LinkError(LinkErrc::BadHmac, "hmac mismatch");
    }
    return p.payload;
}

/// Counters for packets seen by one receiver.
struct LinkStats {
    std::uint64_t accepted = 0;
    std::uint64_t bad_crc = 0;
    std::uint64_t bad_hmac = 0;
    std::uint64_t truncated = 0;

    std::uint64_t rejected() const noexcept { return bad_crc + bad_hmac + truncated; }

    void record(LinkErrc e) noexcept {
        switch (e) {
        case LinkErrc::BadCrc: ++bad_crc; break;
        case LinkErrc::BadHmac: ++bad_hmac; break;
        default: ++truncated; break;
        }
    }

    /// Decode and verify wire bytes, counting the outcome. nullopt on rejection.
    std::optional<CspPacket> accept(ByteView wire, const VerifyOptions& opts) {
        try {
            auto p = CspPacket::decode(wire);
            verify(p, opts);
            ++accepted;
            return p;
        } catch (const LinkError& e) {
            record(e.code());
            return std::nullopt;
        }
    }

    friend bool operator==(const LinkStats&, const LinkStats&) = default;
};

/// Human-readable field-by-field dump.
inline std::string describe(const CspPacket& p) {
    std::ostringstream os;
    const std::uint32_t w = load_be32(p.raw_header.data());
    os << "header      0x" << to_hex(p.raw_header) << "\n"
       << "  priority  " << int(p.header.priority) << "\n"
       << "  source    " << int(p.header.source) << "\n"
       << "  dest      " << int(p.header.destination) << "\n"
       << "  dport     " << int(p.header.destination_port) << "\n"
       << "  sport     " << int(p.header.source_port) << "\n"
       << "  reserved  " << ((w >> 4) & 0xF) << "\n"
       << "  flags     0x" << std::hex << int(p.header.flags) << std::dec << " ["
       << ((p.header.flags & flags::hmac) ? " HMAC" : "") << ((p.header.flags & flags::xtea) ? " XTEA" : "")
       << ((p.header.flags & flags::rdp) ? " RDP" : "") << ((p.header.flags & flags::crc) ? " CRC" : "") << " ]\n"
       << "payload     " << p.payload.size() << " bytes\n";
    if (p.crc) {
        std::uint8_t t[4];
        store_be32(t, *p.crc);
        os << "crc32       0x" << to_hex(ByteView(t, 4)) << "\n";
    }
    if (p.hmac) os << "hmac        " << to_hex(*p.hmac) << "\n";
    return os.str();
}

} // namespace orbitkem::link
