#pragma once

// Traffic protection derived from the KEM shared secret.
//
// derive_keys: HKDF-SHA256(salt = "orbitkem/v1", ikm = ss, info = context) -> 60 bytes split as
// aes_key(32) || iv_salt(12) || mac_key_legacy(16). The legacy XTEA key comes from a separate
// expansion with info = context || "/xtea", so the two modes never share key bytes.
//
// SecureFrame wire layout: BE64 sequence || ciphertext || 16-byte GCM tag.
// Nonce: iv_salt with its last 8 bytes XORed by BE64(sequence).

#include <array>
#include <cstdint>
#include <optional>

#include "orbitkem/common/bytes.hpp"
#include "orbitkem/crypto/hkdf.hpp"
#include "orbitkem/crypto/primitives.hpp"
#include "orbitkem/crypto/xtea.hpp"
#include "orbitkem/kem/kyber.hpp"

namespace orbitkem::session {

inline constexpr std::string_view kProtocolSalt = "orbitkem/v1";
inline constexpr std::string_view kGroundToSatellite = "GS\xE2\x86\x92SAT";  // "GS→SAT"
inline constexpr std::string_view kSatelliteToGround = "SAT\xE2\x86\x92GS";  // "SAT→GS"
inline constexpr std::size_t kTagBytes = 16;
inline constexpr std::size_t kSequenceBytes = 8;

enum class FrameErrc { NonceReuse, AuthFail, Replay, Malformed };

class FrameError : public Error {
public:
    FrameError(FrameErrc code, const std::string& what) : Error(what), code_(code) {}
    FrameErrc code() const noexcept { return code_; }

private:
    FrameErrc code_;
};

struct SessionKeys {
    std::array<std::uint8_t, 32> aes_key{};
    std::array<std::uint8_t, 12> iv_salt{};
    std::array<std::uint8_t, 16> mac_key_legacy{};

    ~SessionKeys() {
        secure_zero(aes_key);
        secure_zero(iv_salt);
        secure_zero(mac_key_legacy);
    }
    SessionKeys() = default;
    SessionKeys(const SessionKeys&) = default;
    SessionKeys& operator=(const SessionKeys&) = default;

    friend bool operator==(const SessionKeys&, const SessionKeys&) = default;
};

struct LegacyKeys {
    crypto::XteaKey xtea_key{};
    ~LegacyKeys() { secure_zero(xtea_key); }
    LegacyKeys() = default;
    LegacyKeys(const LegacyKeys&) = default;
    LegacyKeys& operator=(const LegacyKeys&) = default;
};

inline SessionKeys derive_keys(const kem::SharedSecret& ss, ByteView context) {
    auto okm = crypto::hkdf(to_bytes(kProtocolSalt), ss.view(), context, 60);
    SessionKeys k;
    std::copy_n(okm.begin(), 32, k.aes_key.begin());
    std::copy_n(okm.begin() + 32, 12, k.iv_salt.begin());
    std::copy_n(okm.begin() + 44, 16, k.mac_key_legacy.begin());
    secure_zero(okm);
    return k;
}

inline SessionKeys derive_keys(const kem::SharedSecret& ss, std::string_view context) {
    return derive_keys(ss, ByteView(reinterpret_cast<const std::uint8_t*>(context.data()), context.size()));
}

inline LegacyKeys derive_legacy_keys(const kem::SharedSecret& ss, std::string_view context) {
    auto info = to_bytes(context);
    const auto suffix = to_bytes("/xtea");
    info.insert(info.end(), suffix.begin(), suffix.end());
    auto okm = crypto::hkdf(to_bytes(kProtocolSalt), ss.view(), info, 16);
    LegacyKeys k;
    std::copy_n(okm.begin(), 16, k.xtea_key.begin());
    secure_zero(okm);
    return k;
}

inline std::array<std::uint8_t, 12> frame_nonce(const SessionKeys& keys, std::uint64_t sequence) {
    auto nonce = keys.iv_salt;
    for (int i = 0; i < 8; ++i) nonce[4 + i] ^= static_cast<std::uint8_t>(sequence >> (56 - 8 * i));
    return nonce;
}

struct SecureFrame {
    std::uint64_t sequence = 0;
    Bytes ciphertext;
    std::array<std::uint8_t, kTagBytes> auth_tag{};

    Bytes encode() const {
        ByteWriter w;
        w.u64(sequence);
        w.raw(ciphertext);
        w.raw(auth_tag);
        return std::move(w).take();
    }

    static SecureFrame decode(ByteView wire) {
        if (wire.size() < kSequenceBytes + kTagBytes) throw FrameError(FrameErrc::Malformed, "secure frame too short");
        SecureFrame f;
        f.sequence = load_be64(wire.data());
        f.ciphertext.assign(wire.begin() + kSequenceBytes, wire.end() - kTagBytes);
        std::copy(wire.end() - kTagBytes, wire.end(), f.auth_tag.begin());
        return f;
    }
};

/// AES-256-GCM encryption of one frame; no sequence bookkeeping.
inline SecureFrame encrypt_frame(const SessionKeys& keys, std::uint64_t sequence, ByteView plaintext, ByteView aad) {
    const auto nonce = frame_nonce(keys, sequence);
    auto sealed = crypto::aes256_gcm_seal(keys.aes_key, nonce, plaintext, aad);
    return {sequence, std::move(sealed.ciphertext), sealed.tag};
}

inline Bytes decrypt_frame(const SessionKeys& keys, const SecureFrame& frame, ByteView aad) {
    const auto nonce = frame_nonce(keys, frame.sequence);
    auto pt = crypto::aes256_gcm_open(keys.aes_key, nonce, frame.ciphertext, aad, frame.auth_tag);
    if (!pt) throw FrameError(FrameErrc::AuthFail, "secure frame failed authentication");
    return std::move(*pt);
}

/// Sending side of one direction. Refuses to reuse a sequence number.
class TxChannel {
public:
    explicit TxChannel(SessionKeys keys) : keys_(std::move(keys)) {}

    SecureFrame encrypt(std::uint64_t sequence, ByteView plaintext, ByteView aad) {
        if (last_ && sequence <= *last_) throw FrameError(FrameErrc::NonceReuse, "sequence number already used");
        auto f = encrypt_frame(keys_, sequence, plaintext, aad);
        last_ = sequence;
        return f;
    }
    SecureFrame encrypt_next(ByteView plaintext, ByteView aad) { return encrypt(last_ ? *last_ + 1 : 0, plaintext, aad); }

    const SessionKeys& keys() const noexcept { return keys_; }

private:
    SessionKeys keys_;
    std::optional<std::uint64_t> last_;
};

/// 64-entry sliding anti-replay window (RFC 4303 style).
class ReplayWindow {
public:
    static constexpr std::uint64_t kSize = 64;

    bool check(std::uint64_t seq) const noexcept {
        if (!any_) return true;
        if (seq > highest_) return true;
        const std::uint64_t offset = highest_ - seq;
        if (offset >= kSize) return false;
        return ((bitmap_ >> offset) & 1u) == 0;
    }

    void mark(std::uint64_t seq) noexcept {
        if (!any_) {
            any_ = true;
            highest_ = seq;
            bitmap_ = 1;
            return;
        }
        if (seq > highest_) {
            const std::uint64_t shift = seq - highest_;
            bitmap_ = shift >= kSize ? 0 : bitmap_ << shift;
            bitmap_ |= 1;
            highest_ = seq;
        } else {
            bitmap_ |= std::uint64_t{1} << (highest_ - seq);
        }
    }

private:
    bool any_ = false;
    std::uint64_t highest_ = 0;
    std::uint64_t bitmap_ = 0;
};

/// Receiving side of one direction.
class RxChannel {
public:
    explicit RxChannel(SessionKeys keys) : keys_(std::move(keys)) {}

    Bytes decrypt(const SecureFrame& f, ByteView aad) {
        if (!window_.check(f.sequence)) throw FrameError(FrameErrc::Replay, "sequence outside replay window or seen");
        auto pt = decrypt_frame(keys_, f, aad);
        window_.mark(f.sequence);
        return pt;
    }

private:
    SessionKeys keys_;
    ReplayWindow window_;
};

/// Legacy libcsp-style XTEA-CTR frame: BE64 sequence || ciphertext, no authentication.
inline Bytes legacy_encrypt_frame(const LegacyKeys& keys, std::uint64_t sequence, ByteView plaintext) {
    ByteWriter w;
    w.u64(sequence);
    w.raw(crypto::xtea_ctr_crypt(keys.xtea_key, static_cast<std::uint32_t>(sequence), plaintext));
    return std::move(w).take();
}

/// Never fails on well-sized input: tampering goes undetected.
inline Bytes legacy_decrypt_frame(const LegacyKeys& keys, ByteView wire) {
    if (wire.size() < kSequenceBytes) throw FrameError(FrameErrc::Malformed, "legacy frame too short");
    const auto seq = load_be64(wire.data());
    return crypto::xtea_ctr_crypt(keys.xtea_key, static_cast<std::uint32_t>(seq), wire.subspan(kSequenceBytes));
}

} // namespace orbitkem::session
