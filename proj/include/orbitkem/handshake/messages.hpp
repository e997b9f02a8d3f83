#pragma once

// Handshake messages as CSP payloads.
//
//   PkFragment / CtFragment  on their own ports:  fragment sub-header (transfer_id = session id) || chunk
//   control port:            kind:u8 || session_id:u16 || body
//     FragmentNack  body = object:u8 || total:u16 (0 = unknown) || count:u16 || count * index:u16
//     Confirm       body = 16-byte tag
//     ConfirmAck    body = empty

#include <array>
#include <cstdint>
#include <vector>

#include "orbitkem/common/bytes.hpp"
#include "orbitkem/link/fragment.hpp"

namespace orbitkem::handshake {

enum class MessageKind : std::uint8_t { PkFragment = 1, FragmentNack = 2, CtFragment = 3, Confirm = 4, ConfirmAck = 5 };

enum class ObjectKind : std::uint8_t { PublicKey = 1, Ciphertext = 2 };

inline const char* to_string(MessageKind k) noexcept {
    switch (k) {
    case MessageKind::PkFragment: return "PkFragment";
    case MessageKind::FragmentNack: return "FragmentNack";
    case MessageKind::CtFragment: return "CtFragment";
    case MessageKind::Confirm: return "Confirm";
    case MessageKind::ConfirmAck: return "ConfirmAck";
    }
    return "?";
}

struct Ports {
    std::uint8_t pk = 20;
    std::uint8_t ct = 21;
    std::uint8_t control = 22;
    std::uint8_t data = 23;

    friend bool operator==(const Ports&, const Ports&) = default;
};

inline constexpr std::size_t kConfirmTagBytes = 16;
inline constexpr std::size_t kControlPrefixBytes = 3;
inline constexpr std::size_t kNackFixedBytes = kControlPrefixBytes + 1 + 2 + 2;

class MessageError : public Error {
public:
    using Error::Error;
};

struct HandshakeMessage {
    MessageKind kind = MessageKind::ConfirmAck;
    std::uint16_t session_id = 0;
    link::Fragment fragment;                 // PkFragment, CtFragment
    ObjectKind object = ObjectKind::PublicKey;  // FragmentNack
    std::uint16_t total = 0;                 // FragmentNack; 0 when the receiver has seen nothing
    std::vector<std::uint16_t> missing;      // FragmentNack
    std::array<std::uint8_t, kConfirmTagBytes> tag{};  // Confirm

    friend bool operator==(const HandshakeMessage&, const HandshakeMessage&) = default;
};

inline std::uint8_t port_for(MessageKind k, const Ports& ports) noexcept {
    switch (k) {
    case MessageKind::PkFragment: return ports.pk;
    case MessageKind::CtFragment: return ports.ct;
    default: return ports.control;
    }
}

inline Bytes encode_payload(const HandshakeMessage& m) {
    if (m.kind == MessageKind::PkFragment || m.kind == MessageKind::CtFragment) {
        if (m.fragment.header.transfer_id != m.session_id) throw MessageError("fragment transfer id must equal session id");
        return link::encode_fragment(m.fragment);
    }
    ByteWriter w;
    w.u8(static_cast<std::uint8_t>(m.kind));
    w.u16(m.session_id);
    switch (m.kind) {
    case MessageKind::FragmentNack:
        w.u8(static_cast<std::uint8_t>(m.object));
        w.u16(m.total);
        w.u16(static_cast<std::uint16_t>(m.missing.size()));
        for (auto i : m.missing) w.u16(i);
        break;
    case MessageKind::Confirm: w.raw(m.tag); break;
    default: break;
    }
    return std::move(w).take();
}

/// Parses a payload received on `port`. Throws MessageError on anything malformed.
inline HandshakeMessage decode_payload(std::uint8_t port, ByteView payload, const Ports& ports) {
    HandshakeMessage m;
    try {
        if (port == ports.pk || port == ports.ct) {
            m.kind = port == ports.pk ? MessageKind::PkFragment : MessageKind::CtFragment;
            m.fragment = link::decode_fragment(payload);
            m.session_id = m.fragment.header.transfer_id;
            return m;
        }
        if (port != ports.control) throw MessageError("not a handshake port");
        ByteReader r(payload);
        const auto kind = r.u8();
        m.session_id = r.u16();
        switch (kind) {
        case static_cast<std::uint8_t>(MessageKind::FragmentNack): {
            m.kind = MessageKind::FragmentNack;
            const auto obj = r.u8();
            if (obj != 1 && obj != 2) throw MessageError("nack: unknown object");
            m.object = static_cast<ObjectKind>(obj);
            m.total = r.u16();
            const auto count = r.u16();
            for (std::uint16_t i = 0; i < count; ++i) m.missing.push_back(r.u16());
            break;
        }
        case static_cast<std::uint8_t>(MessageKind::Confirm): {
            m.kind = MessageKind::Confirm;
            auto t = r.raw(kConfirmTagBytes);
            std::copy(t.begin(), t.end(), m.tag.begin());
            break;
        }
        case static_cast<std::uint8_t>(MessageKind::ConfirmAck): m.kind = MessageKind::ConfirmAck; break;
        default: throw MessageError("unknown control message kind");
        }
        if (!r.done()) throw MessageError("trailing bytes in control message");
        return m;
    } catch (const MessageError&) {
        throw;
    } catch (const Error& e) {
        throw MessageError(e.what());
    }
}

/// Largest index list one NACK can carry within `mtu` payload bytes.
inline std::size_t nack_capacity(std::size_t mtu) noexcept {
    return mtu > kNackFixedBytes ? (mtu - kNackFixedBytes) / 2 : 0;
}

} // namespace orbitkem::handshake
