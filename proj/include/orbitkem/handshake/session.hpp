#pragma once

// One party of the KEM handshake, as a pure transition function over link events.
//
//   KeyHolder:    Idle -> TransferringPk -> AwaitingCt -> TransferringCt -> Confirming -> Established
//   Encapsulator: Idle -> TransferringPk -> TransferringCt -> Confirming -> Established
//   any state -> Failed(reason)
//
// The KeyHolder runs keygen at construction and decaps when the last ciphertext fragment
// arrives; the Encapsulator runs encaps when the last public-key fragment arrives. The receiver
// of an object drives retransmission with FragmentNack at pass opening and on stalled ticks.
//
// Key confirmation: KeyHolder sends Confirm(tag_own); the Encapsulator checks it, answers with
// its own Confirm; the KeyHolder checks that and answers ConfirmAck. Tags are
// HMAC-SHA256(ss, direction label || transcript)[0..16), with the label chosen by the sending site.
//
// The transcript is a hash chain h' = SHA3-256(h || port || BE16(len) || payload) over every
// public-key fragment then every ciphertext fragment, in index order (= first-send order).
// Retransmissions, NACKs and confirmations are not part of it, so loss cannot change it.

#include <array>
#include <cstdint>
#include <optional>
#include <variant>
#include <vector>

#include "orbitkem/common/bytes.hpp"
#include "orbitkem/crypto/keccak.hpp"
#include "orbitkem/crypto/primitives.hpp"
#include "orbitkem/handshake/messages.hpp"
#include "orbitkem/kem/kyber.hpp"
#include "orbitkem/link/csp.hpp"
#include "orbitkem/link/fragment.hpp"
#include "orbitkem/session/session_crypto.hpp"

namespace orbitkem::handshake {

using Micros = std::int64_t;
inline constexpr Micros kSecond = 1'000'000;
inline constexpr Micros kDay = 86'400 * kSecond;

enum class Role : std::uint8_t { KeyHolder = 1, Encapsulator = 2 };
enum class Site : std::uint8_t { Ground = 1, Satellite = 2 };

enum class State : std::uint8_t {
    Idle = 0,
    TransferringPk = 1,
    AwaitingCt = 2,
    TransferringCt = 3,
    Confirming = 4,
    Established = 5,
    Failed = 6,
};

enum class FailReason : std::uint8_t {
    None = 0,
    MaxRetriesExceeded = 1,
    HmacRejected = 2,
    ConfirmMismatch = 3,
    Timeout = 4,
    InvalidPeerKey = 5,
};

inline const char* to_string(Role r) noexcept { return r == Role::KeyHolder ? "KeyHolder" : "Encapsulator"; }
inline const char* to_string(Site s) noexcept { return s == Site::Ground ? "Ground" : "Satellite"; }

inline const char* to_string(State s) noexcept {
    switch (s) {
    case State::Idle: return "Idle";
    case State::TransferringPk: return "TransferringPk";
    case State::AwaitingCt: return "AwaitingCt";
    case State::TransferringCt: return "TransferringCt";
    case State::Confirming: return "Confirming";
    case State::Established: return "Established";
    case State::Failed: return "Failed";
    }
    return "?";
}

inline const char* to_string(FailReason r) noexcept {
    switch (r) {
    case FailReason::None: return "None";
    case FailReason::MaxRetriesExceeded: return "MaxRetriesExceeded";
    case FailReason::HmacRejected: return "HmacRejected";
    case FailReason::ConfirmMismatch: return "ConfirmMismatch";
    case FailReason::Timeout: return "Timeout";
    case FailReason::InvalidPeerKey: return "InvalidPeerKey";
    }
    return "?";
}

inline Site peer_of(Site s) noexcept { return s == Site::Ground ? Site::Satellite : Site::Ground; }

/// Label used by the party at `sender` when it computes its confirmation tag.
inline std::string_view direction_label(Site sender) noexcept {
    return sender == Site::Ground ? session::kGroundToSatellite : session::kSatelliteToGround;
}

class HandshakeError : public Error {
public:
    using Error::Error;
};

inline std::array<std::uint8_t, kConfirmTagBytes> confirm_tag(const kem::SharedSecret* ss,
                                                             ByteView transcript_hash, std::string_view label) {
    if (!ss) throw HandshakeError("confirm_tag: shared secret not set");
    if (transcript_hash.size() != 32) throw HandshakeError("confirm_tag: transcript hash must be 32 bytes");
    auto mac = crypto::hmac_sha256(ss->view(), concat({to_bytes(label), transcript_hash}));
    std::array<std::uint8_t, kConfirmTagBytes> tag{};
    std::copy_n(mac.begin(), kConfirmTagBytes, tag.begin());
    secure_zero(mac);
    return tag;
}

inline std::array<std::uint8_t, kConfirmTagBytes> confirm_tag(const kem::SharedSecret& ss,
                                                             ByteView transcript_hash, std::string_view label) {
    return confirm_tag(&ss, transcript_hash, label);
}

struct HandshakeConfig {
    Site site = Site::Ground;
    Role role = Role::KeyHolder;
    std::uint16_t session_id = 1;
    std::uint8_t ground_address = 1;
    std::uint8_t satellite_address = 10;
    std::uint8_t priority = 2;
    Ports ports;
    std::size_t mtu = link::kDefaultMtu;
    /// Pre-shared link authentication key: the trust root of the exchange.
    Bytes link_key;
    bool authenticate = true;
    bool crc = true;
    link::HmacSettings hmac;
    unsigned max_retries_per_pass = 8;
    unsigned hmac_reject_limit = 16;
    Micros start_us = 0;
    Micros timeout = 30 * kDay;

    std::uint8_t own_address() const noexcept { return site == Site::Ground ? ground_address : satellite_address; }
    std::uint8_t peer_address() const noexcept { return site == Site::Ground ? satellite_address : ground_address; }
    std::size_t chunk_size() const noexcept { return mtu - link::kFragmentHeaderBytes; }

    void validate() const {
        if (mtu < link::kMinMtu || mtu > link::kMaxMtu) throw HandshakeError("mtu must be within 32..1024");
        if (authenticate && link_key.size() < 16) throw HandshakeError("link key must be at least 16 bytes");
        if (ground_address == satellite_address) throw HandshakeError("ground and satellite addresses must differ");
    }

    link::SealOptions seal_options() const {
        link::SealOptions o;
        o.mtu = mtu;
        o.crc = crc;
        if (authenticate) o.hmac_key = link_key;
        o.hmac = hmac;
        return o;
    }
    link::VerifyOptions verify_options() const {
        link::VerifyOptions o;
        if (authenticate) o.hmac_key = link_key;
        o.hmac = hmac;
        o.require_crc = crc;
        o.require_hmac = authenticate;
        return o;
    }
};

struct PassOpened {};
struct PassClosed {};
struct Tick {
    Micros now = 0;
};
struct Incoming {
    Bytes wire;
};
using Event = std::variant<Incoming, PassOpened, PassClosed, Tick>;

struct Outbound {
    Bytes wire;
    std::uint8_t port = 0;
    MessageKind kind = MessageKind::ConfirmAck;
    bool retransmission = false;
    std::size_t payload_size = 0;

    friend bool operator==(const Outbound&, const Outbound&) = default;
};

struct SessionStats {
    std::uint64_t messages_accepted = 0;
    std::uint64_t discarded = 0;  // foreign address, wrong session, malformed
    std::uint64_t duplicates = 0;
    std::uint64_t integrity_conflicts = 0;
    std::uint64_t kem_operations = 0;
    std::uint64_t nacks_sent = 0;
    std::uint64_t retransmissions = 0;
    std::uint64_t confirms_sent = 0;

    friend bool operator==(const SessionStats&, const SessionStats&) = default;
};

class SnapshotError : public Error {
public:
    using Error::Error;
};

class HandshakeSession {
public:
    static constexpr std::uint8_t kSnapshotVersion = 1;

    static HandshakeSession key_holder(HandshakeConfig cfg, ByteView keygen_seed) {
        if (cfg.role != Role::KeyHolder) throw HandshakeError("key_holder: config role must be KeyHolder");
        HandshakeSession s(std::move(cfg));
        s.keys_ = kem::kem_keygen(keygen_seed);
        ++s.stats_.kem_operations;
        s.outgoing_.assign(s.keys_->public_key.begin(), s.keys_->public_key.end());
        s.retries_.assign(s.fragment_count(s.outgoing_.size()), 0);
        return s;
    }

    static HandshakeSession encapsulator(HandshakeConfig cfg, ByteView encaps_seed) {
        if (cfg.role != Role::Encapsulator) throw HandshakeError("encapsulator: config role must be Encapsulator");
        if (encaps_seed.size() != kem::kSymBytes) throw HandshakeError("encaps seed must be 32 bytes");
        HandshakeSession s(std::move(cfg));
        std::array<std::uint8_t, kem::kSymBytes> seed{};
        std::copy(encaps_seed.begin(), encaps_seed.end(), seed.begin());
        s.encaps_seed_ = seed;
        secure_zero(seed);
        return s;
    }

    /// Applies one event. Deterministic: no I/O, no clock, no ambient randomness.
    std::vector<Outbound> step(const Event& ev) {
        out_.clear();
        if (state_ != State::Failed) {
            std::visit([this](const auto& e) { on(e); }, ev);
        }
        if (!in_pass_) out_.clear();
        return std::move(out_);
    }

    const HandshakeConfig& config() const noexcept { return cfg_; }
    State state() const noexcept { return state_; }
    FailReason fail_reason() const noexcept { return reason_; }
    Role role() const noexcept { return cfg_.role; }
    Site site() const noexcept { return cfg_.site; }
    bool in_pass() const noexcept { return in_pass_; }
    const std::array<std::uint8_t, 32>& transcript_hash() const noexcept { return transcript_; }
    const link::LinkStats& link_stats() const noexcept { return link_; }
    const SessionStats& stats() const noexcept { return stats_; }
    const std::vector<std::uint8_t>& retry_counters() const noexcept { return retries_; }
    const link::Reassembler& incoming() const noexcept { return incoming_; }
    std::size_t fragments_sent() const noexcept { return sent_; }

    /// Set only once the session reached Confirming.
    const kem::SharedSecret* shared_secret() const noexcept { return ss_ ? &*ss_ : nullptr; }

    // Snapshot layout (all integers big-endian, blobs = u32 length || bytes):
    //   "OKHS" | version:u8 | body_len:u32 | body
    //   body = session_id:u16 role:u8 site:u8 state:u8 reason:u8 in_pass:u8 progress:u8
    //          passes_seen:u32 created_us:i64 transcript[32] consecutive_hmac:u32
    //          has_keys:u8 [pk[800] sk[1632]]  has_seed:u8 [seed[32]]
    //          outgoing:blob sent:u32 retries:blob incoming:reassembler
    //          has_pending:u8 [ss[32]]  has_ss:u8 [ss[32]]
    //          link stats 4*u64, session stats 8*u64
    Bytes snapshot() const {
        ByteWriter b;
        b.u16(cfg_.session_id);
        b.u8(static_cast<std::uint8_t>(cfg_.role));
        b.u8(static_cast<std::uint8_t>(cfg_.site));
        b.u8(static_cast<std::uint8_t>(state_));
        b.u8(static_cast<std::uint8_t>(reason_));
        b.u8(in_pass_ ? 1 : 0);
        b.u8(progress_ ? 1 : 0);
        b.u32(passes_seen_);
        b.i64(created_us_);
        b.raw(transcript_);
        b.u32(consecutive_hmac_failures_);
        b.u8(keys_ ? 1 : 0);
        if (keys_) {
            b.raw(keys_->public_key);
            b.raw(keys_->secret_key.view());
        }
        b.u8(encaps_seed_ ? 1 : 0);
        if (encaps_seed_) b.raw(*encaps_seed_);
        b.blob(outgoing_);
        b.u32(static_cast<std::uint32_t>(sent_));
        b.blob(retries_);
        incoming_.serialize(b);
        b.u8(pending_ss_ ? 1 : 0);
        if (pending_ss_) b.raw(pending_ss_->view());
        b.u8(ss_ ? 1 : 0);
        if (ss_) b.raw(ss_->view());
        for (auto v : {link_.accepted, link_.bad_crc, link_.bad_hmac, link_.truncated}) b.u64(v);
        for (auto v : {stats_.messages_accepted, stats_.discarded, stats_.duplicates, stats_.integrity_conflicts,
                       stats_.kem_operations, stats_.nacks_sent, stats_.retransmissions, stats_.confirms_sent})
            b.u64(v);

        ByteWriter w;
        w.raw(to_bytes("OKHS"));
        w.u8(kSnapshotVersion);
        w.blob(b.bytes());
        return std::move(w).take();
    }

    /// Rebuilds a session from snapshot(). The config must describe the same party.
    static HandshakeSession restore(ByteView blob, HandshakeConfig cfg) {
        try {
            ByteReader outer(blob);
            if (!ct_equal(outer.raw(4), to_bytes("OKHS"))) throw SnapshotError("snapshot: bad magic");
            if (outer.u8() != kSnapshotVersion) throw SnapshotError("snapshot: unsupported version");
            const Bytes body = outer.blob();
            if (!outer.done()) throw SnapshotError("snapshot: trailing bytes");
            ByteReader r(body);
            if (r.u16() != cfg.session_id) throw SnapshotError("snapshot: session id does not match config");
            if (r.u8() != static_cast<std::uint8_t>(cfg.role)) throw SnapshotError("snapshot: role does not match config");
            if (r.u8() != static_cast<std::uint8_t>(cfg.site)) throw SnapshotError("snapshot: site does not match config");
            HandshakeSession s(std::move(cfg));
            const auto st = r.u8();
            const auto reason = r.u8();
            if (st > static_cast<std::uint8_t>(State::Failed) || reason > static_cast<std::uint8_t>(FailReason::InvalidPeerKey))
                throw SnapshotError("snapshot: bad state");
            s.state_ = static_cast<State>(st);
            s.reason_ = static_cast<FailReason>(reason);
            s.in_pass_ = r.u8() != 0;
            s.progress_ = r.u8() != 0;
            s.passes_seen_ = r.u32();
            s.created_us_ = r.i64();
            auto t = r.raw(32);
            std::copy(t.begin(), t.end(), s.transcript_.begin());
            s.consecutive_hmac_failures_ = r.u32();
            if (r.u8()) {
                kem::KemKeyPair kp;
                auto pk = r.raw(kem::kPublicKeyBytes);
                std::copy(pk.begin(), pk.end(), kp.public_key.begin());
                kp.secret_key = kem::SecretKey(r.raw(kem::kSecretKeyBytes));
                s.keys_ = kp;
            }
            if (r.u8()) {
                std::array<std::uint8_t, kem::kSymBytes> seed{};
                auto v = r.raw(kem::kSymBytes);
                std::copy(v.begin(), v.end(), seed.begin());
                s.encaps_seed_ = seed;
            }
            s.outgoing_ = r.blob();
            s.sent_ = r.u32();
            s.retries_ = r.blob();
            s.incoming_ = link::Reassembler::deserialize(r);
            if (r.u8()) s.pending_ss_ = kem::SharedSecret(r.raw(kem::kSharedSecretBytes));
            if (r.u8()) s.ss_ = kem::SharedSecret(r.raw(kem::kSharedSecretBytes));
            s.link_.accepted = r.u64();
            s.link_.bad_crc = r.u64();
            s.link_.bad_hmac = r.u64();
            s.link_.truncated = r.u64();
            for (auto* v : {&s.stats_.messages_accepted, &s.stats_.discarded, &s.stats_.duplicates,
                            &s.stats_.integrity_conflicts, &s.stats_.kem_operations, &s.stats_.nacks_sent,
                            &s.stats_.retransmissions, &s.stats_.confirms_sent})
                *v = r.u64();
            if (!r.done()) throw SnapshotError("snapshot: trailing bytes in body");
            if (s.sent_ > s.fragment_count(s.outgoing_.size()) || s.retries_.size() != s.fragment_count(s.outgoing_.size()))
                throw SnapshotError("snapshot: inconsistent fragment bookkeeping");
            return s;
        } catch (const SnapshotError&) {
            throw;
        } catch (const Error& e) {
            throw SnapshotError(std::string("snapshot: ") + e.what());
        }
    }

private:
    explicit HandshakeSession(HandshakeConfig cfg) : cfg_(std::move(cfg)) {
        cfg_.validate();
        created_us_ = cfg_.start_us;
        ByteWriter w;
        w.raw(to_bytes("orbitkem/transcript/v1"));
        w.u16(cfg_.session_id);
        transcript_ = crypto::sha3_256(w.bytes());
    }

    bool is_key_holder() const noexcept { return cfg_.role == Role::KeyHolder; }
    ObjectKind outgoing_object() const noexcept {
        return is_key_holder() ? ObjectKind::PublicKey : ObjectKind::Ciphertext;
    }
    ObjectKind incoming_object() const noexcept {
        return is_key_holder() ? ObjectKind::Ciphertext : ObjectKind::PublicKey;
    }
    MessageKind outgoing_fragment_kind() const noexcept {
        return is_key_holder() ? MessageKind::PkFragment : MessageKind::CtFragment;
    }
    std::size_t fragment_count(std::size_t bytes) const noexcept {
        return (bytes + cfg_.chunk_size() - 1) / cfg_.chunk_size();
    }

    void fail(FailReason r) {
        state_ = State::Failed;
        reason_ = r;
        out_.clear();
    }

    void absorb(std::uint8_t port, ByteView payload) {
        ByteWriter w;
        w.raw(transcript_);
        w.u8(port);
        w.u16(static_cast<std::uint16_t>(payload.size()));
        w.raw(payload);
        transcript_ = crypto::sha3_256(w.bytes());
    }

    void emit(const HandshakeMessage& m, bool retransmission) {
        const auto port = port_for(m.kind, cfg_.ports);
        const auto payload = encode_payload(m);
        link::CspHeader h;
        h.priority = cfg_.priority;
        h.source = cfg_.own_address();
        h.destination = cfg_.peer_address();
        h.destination_port = port;
        h.source_port = port;
        auto pkt = link::seal(h, payload, cfg_.seal_options());
        out_.push_back({pkt.encode(), port, m.kind, retransmission, payload.size()});
    }

    HandshakeMessage fragment_message(std::size_t index) const {
        HandshakeMessage m;
        m.kind = outgoing_fragment_kind();
        m.session_id = cfg_.session_id;
        const std::size_t chunk = cfg_.chunk_size();
        const std::size_t off = index * chunk;
        const std::size_t len = std::min(chunk, outgoing_.size() - off);
        m.fragment.header = {cfg_.session_id, static_cast<std::uint16_t>(index),
                             static_cast<std::uint16_t>(fragment_count(outgoing_.size())),
                             static_cast<std::uint16_t>(len)};
        m.fragment.chunk.assign(outgoing_.begin() + static_cast<std::ptrdiff_t>(off),
                                outgoing_.begin() + static_cast<std::ptrdiff_t>(off + len));
        return m;
    }

    /// First transmission of every fragment not yet sent, in index order.
    void send_pending() {
        if (!in_pass_ || outgoing_.empty()) return;
        const std::size_t total = fragment_count(outgoing_.size());
        while (sent_ < total) {
            auto m = fragment_message(sent_);
            absorb(port_for(m.kind, cfg_.ports), encode_payload(m));
            emit(m, false);
            ++sent_;
        }
        if (is_key_holder() && state_ == State::TransferringPk) state_ = State::AwaitingCt;
    }

    void retransmit(std::uint16_t index) {
        if (index >= sent_) return;  // covered by send_pending
        if (retries_[index] >= cfg_.max_retries_per_pass) {
            fail(FailReason::MaxRetriesExceeded);
            return;
        }
        ++retries_[index];
        ++stats_.retransmissions;
        emit(fragment_message(index), true);
    }

    void send_nack() {
        HandshakeMessage m;
        m.kind = MessageKind::FragmentNack;
        m.session_id = cfg_.session_id;
        m.object = incoming_object();
        m.total = incoming_.total().value_or(0);
        const auto missing = incoming_.missing();
        const std::size_t cap = nack_capacity(cfg_.mtu);
        if (missing.empty()) {
            emit(m, false);
            ++stats_.nacks_sent;
            return;
        }
        for (std::size_t off = 0; off < missing.size(); off += cap) {
            const auto end = std::min(missing.size(), off + cap);
            m.missing.assign(missing.begin() + static_cast<std::ptrdiff_t>(off),
                             missing.begin() + static_cast<std::ptrdiff_t>(end));
            emit(m, false);
            ++stats_.nacks_sent;
        }
    }

    void send_confirm() {
        HandshakeMessage m;
        m.kind = MessageKind::Confirm;
        m.session_id = cfg_.session_id;
        m.tag = confirm_tag(ss_ ? &*ss_ : &*pending_ss_, transcript_, direction_label(cfg_.site));
        emit(m, stats_.confirms_sent > 0);
        ++stats_.confirms_sent;
    }

    void send_confirm_ack() {
        HandshakeMessage m;
        m.kind = MessageKind::ConfirmAck;
        m.session_id = cfg_.session_id;
        emit(m, false);
    }

    bool receiving() const noexcept {
        if (is_key_holder()) return state_ == State::AwaitingCt || state_ == State::TransferringCt;
        return state_ == State::Idle || state_ == State::TransferringPk;
    }

    void on(const PassOpened&) {
        // Anything still missing from an earlier pass is re-requested right away: a partial
        // object, the ciphertext the KeyHolder is waiting for, or a public key that never came.
        const bool waiting = receiving() && !incoming_.complete() &&
                             (incoming_.received() > 0 || state_ == State::AwaitingCt || passes_seen_ > 0);
        in_pass_ = true;
        progress_ = true;  // grace: the first tick of a pass never NACKs
        ++passes_seen_;
        std::fill(retries_.begin(), retries_.end(), std::uint8_t{0});
        if (is_key_holder() && state_ == State::Idle) state_ = State::TransferringPk;
        send_pending();
        if (waiting) send_nack();
        if (state_ == State::Confirming) send_confirm();
    }

    void on(const PassClosed&) { in_pass_ = false; }

    void on(const Tick& t) {
        if (t.now - created_us_ >= cfg_.timeout) {
            fail(FailReason::Timeout);
            return;
        }
        if (!in_pass_) return;
        if (receiving() && !progress_) send_nack();
        if (state_ == State::Confirming) send_confirm();
        progress_ = false;
    }

    void on(const Incoming& in) {
        const auto bad_hmac_before = link_.bad_hmac;
        auto pkt = link_.accept(in.wire, cfg_.verify_options());
        if (!pkt) {
            if (link_.bad_hmac != bad_hmac_before && ++consecutive_hmac_failures_ >= cfg_.hmac_reject_limit)
                fail(FailReason::HmacRejected);
            return;
        }
        consecutive_hmac_failures_ = 0;
        if (pkt->header.source != cfg_.peer_address() || pkt->header.destination != cfg_.own_address()) {
            ++stats_.discarded;
            return;
        }
        HandshakeMessage m;
        try {
            m = decode_payload(pkt->header.destination_port, pkt->payload, cfg_.ports);
        } catch (const MessageError&) {
            ++stats_.discarded;
            return;
        }
        if (m.session_id != cfg_.session_id) {
            ++stats_.discarded;
            return;
        }
        ++stats_.messages_accepted;
        switch (m.kind) {
        case MessageKind::PkFragment:
        case MessageKind::CtFragment: on_fragment(m, pkt->header.destination_port); break;
        case MessageKind::FragmentNack: on_nack(m); break;
        case MessageKind::Confirm: on_confirm(m); break;
        case MessageKind::ConfirmAck:
            if (!is_key_holder() && state_ == State::Confirming) state_ = State::Established;
            break;
        }
    }

    void on_fragment(const HandshakeMessage& m, std::uint8_t port) {
        const bool expected = is_key_holder() ? m.kind == MessageKind::CtFragment : m.kind == MessageKind::PkFragment;
        if (!expected || !receiving()) {
            ++stats_.duplicates;  // late copy of an object already consumed
            return;
        }
        try {
            if (incoming_.add(m.fragment) == link::Reassembler::AddResult::Duplicate) {
                ++stats_.duplicates;
                return;
            }
        } catch (const link::IntegrityConflict&) {
            ++stats_.integrity_conflicts;
            return;
        } catch (const link::FragmentError&) {
            ++stats_.discarded;
            return;
        }
        progress_ = true;
        if (is_key_holder()) {
            if (state_ == State::AwaitingCt) state_ = State::TransferringCt;
        } else if (state_ == State::Idle) {
            state_ = State::TransferringPk;
        }
        if (incoming_.complete()) on_object_complete(port);
    }

    void on_object_complete(std::uint8_t port) {
        for (const auto& [idx, chunk] : incoming_.chunks()) {
            link::Fragment f;
            f.header = {cfg_.session_id, idx, *incoming_.total(), static_cast<std::uint16_t>(chunk.size())};
            f.chunk = chunk;
            absorb(port, link::encode_fragment(f));
        }
        const Bytes object = incoming_.payload();
        ++stats_.kem_operations;
        if (is_key_holder()) {
            if (object.size() != kem::kCiphertextBytes) {
                fail(FailReason::InvalidPeerKey);
                return;
            }
            ss_ = kem::kem_decaps(keys_->secret_key.view(), object);
            state_ = State::Confirming;
            send_confirm();
        } else {
            try {
                auto res = kem::kem_encaps(object, *encaps_seed_);
                pending_ss_ = res.shared_secret;
                outgoing_.assign(res.ciphertext.bytes.begin(), res.ciphertext.bytes.end());
            } catch (const kem::KemError&) {
                fail(FailReason::InvalidPeerKey);
                return;
            }
            secure_zero(*encaps_seed_);
            encaps_seed_.reset();
            retries_.assign(fragment_count(outgoing_.size()), 0);
            sent_ = 0;
            state_ = State::TransferringCt;
            send_pending();
        }
    }

    void on_nack(const HandshakeMessage& m) {
        if (m.object != outgoing_object() || outgoing_.empty()) return;
        if (m.total == 0) {
            for (std::size_t i = 0; i < sent_ && state_ != State::Failed; ++i) retransmit(static_cast<std::uint16_t>(i));
        } else {
            for (auto idx : m.missing) {
                if (state_ == State::Failed) break;
                retransmit(idx);
            }
        }
        send_pending();
    }

    void on_confirm(const HandshakeMessage& m) {
        const auto label = direction_label(peer_of(cfg_.site));
        if (is_key_holder()) {
            if (state_ != State::Confirming && state_ != State::Established) return;
            if (!ct_equal(confirm_tag(&*ss_, transcript_, label), m.tag)) {
                fail(FailReason::ConfirmMismatch);
                return;
            }
            state_ = State::Established;
            send_confirm_ack();
            return;
        }
        if (state_ != State::TransferringCt && state_ != State::Confirming && state_ != State::Established) return;
        const kem::SharedSecret* candidate = ss_ ? &*ss_ : pending_ss_ ? &*pending_ss_ : nullptr;
        if (!candidate) return;
        if (!ct_equal(confirm_tag(candidate, transcript_, label), m.tag)) {
            fail(FailReason::ConfirmMismatch);
            return;
        }
        if (state_ == State::TransferringCt) {
            ss_ = *pending_ss_;
            pending_ss_.reset();
            state_ = State::Confirming;
        }
        if (state_ != State::Established) send_confirm();
    }

    HandshakeConfig cfg_;
    State state_ = State::Idle;
    FailReason reason_ = FailReason::None;
    bool in_pass_ = false;
    bool progress_ = false;
    std::uint32_t passes_seen_ = 0;
    Micros created_us_ = 0;
    std::array<std::uint8_t, 32> transcript_{};
    std::uint32_t consecutive_hmac_failures_ = 0;

    std::optional<kem::KemKeyPair> keys_;
    std::optional<std::array<std::uint8_t, kem::kSymBytes>> encaps_seed_;
    Bytes outgoing_;
    std::size_t sent_ = 0;
    std::vector<std::uint8_t> retries_;
    link::Reassembler incoming_;
    std::optional<kem::SharedSecret> pending_ss_;
    std::optional<kem::SharedSecret> ss_;

    link::LinkStats link_;
    SessionStats stats_;
    std::vector<Outbound> out_;
};

/// Functional form: (session, event) -> (session', outbound).
inline std::pair<HandshakeSession, std::vector<Outbound>> step(HandshakeSession s, const Event& ev) {
    auto out = s.step(ev);
    return {std::move(s), std::move(out)};
}

} // namespace orbitkem::handshake
