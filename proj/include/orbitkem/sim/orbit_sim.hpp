#pragma once

// Discrete-event model of the ground-satellite link.
//
// Visibility is a fixed periodic window [k*period + offset, k*period + offset + duration).
// One half-duplex channel is shared by both directions: a packet starts when the channel is
// free, occupies it for serialization + turnaround, and is delivered at the end of that span.
// All randomness comes from one mt19937_64 stream, drawn in a fixed order per packet:
// loss, then corruption, then (if corrupted) byte index and XOR mask.

#include <cmath>
#include <cstdint>
#include <functional>
#include <map>
#include <optional>
#include <queue>
#include <random>
#include <tuple>
#include <vector>

#include "orbitkem/common/bytes.hpp"
#include "orbitkem/crypto/keccak.hpp"
#include "orbitkem/handshake/accounting.hpp"
#include "orbitkem/handshake/session.hpp"
#include "orbitkem/session/session_crypto.hpp"

namespace orbitkem::sim {

using handshake::Micros;
using handshake::kSecond;
using handshake::kDay;
using handshake::Direction;
using handshake::Outcome;
using handshake::TraceEvent;

inline constexpr Micros kMillisecond = 1'000;

class SimError : public Error {
public:
    using Error::Error;
};

struct PassSchedule {
    Micros period = 5700 * kSecond;
    Micros duration = 480 * kSecond;
    Micros offset = 0;

    void validate() const {
        if (period <= 0 || duration <= 0) throw SimError("pass schedule: period and duration must be positive");
        if (duration >= period) throw SimError("pass schedule: duration must be shorter than the period");
        if (offset < 0) throw SimError("pass schedule: offset must be non-negative");
    }

    double passes_per_day() const noexcept { return static_cast<double>(kDay) / static_cast<double>(period); }
};

struct Window {
    Micros open = 0;
    Micros close = 0;
    std::uint32_t index = 0;

    bool contains(Micros t) const noexcept { return t >= open && t < close; }
    friend bool operator==(const Window&, const Window&) = default;
};

inline Window window_number(const PassSchedule& s, std::uint32_t k) {
    const Micros open = static_cast<Micros>(k) * s.period + s.offset;
    return {open, open + s.duration, k};
}

/// Windows intersected with [0, horizon). A window straddling the horizon is clipped.
inline std::vector<Window> windows(const PassSchedule& s, Micros horizon) {
    s.validate();
    if (horizon <= 0) throw SimError("windows: horizon must be positive");
    std::vector<Window> out;
    for (std::uint32_t k = 0;; ++k) {
        auto w = window_number(s, k);
        if (w.open >= horizon) break;
        w.close = std::min(w.close, horizon);
        out.push_back(w);
    }
    return out;
}

/// The window containing t, if any.
inline std::optional<Window> window_at(const PassSchedule& s, Micros t) {
    if (t < s.offset) return std::nullopt;
    const auto k = static_cast<std::uint32_t>((t - s.offset) / s.period);
    auto w = window_number(s, k);
    if (w.contains(t)) return w;
    return std::nullopt;
}

struct LinkModel {
    std::uint64_t data_rate = 9600;  // bit/s
    double loss_prob = 0.0;
    double corrupt_prob = 0.0;
    Micros turnaround = 20 * kMillisecond;
    std::uint64_t rng_seed = 1;

    void validate() const {
        if (data_rate == 0) throw SimError("link: data rate must be positive");
        if (!(loss_prob >= 0.0 && loss_prob < 1.0)) throw SimError("link: loss probability must be in [0,1)");
        if (!(corrupt_prob >= 0.0 && corrupt_prob < 1.0)) throw SimError("link: corruption probability must be in [0,1)");
        if (turnaround < 0) throw SimError("link: turnaround must be non-negative");
    }

    Micros serialization(std::size_t bytes) const noexcept {
        const auto bits_us = static_cast<std::uint64_t>(bytes) * 8u * 1'000'000u;
        return static_cast<Micros>((bits_us + data_rate - 1) / data_rate);
    }
};

struct TransmitResult {
    Outcome outcome = Outcome::Delivered;
    Micros deliver_us = 0;
    Bytes wire;  // as received; empty when lost or out of window
};

/// The seeded channel. Every stochastic choice of a simulation flows through here.
class Channel {
public:
    explicit Channel(LinkModel link) : link_(link), rng_(link.rng_seed) { link_.validate(); }

    /// Uniform in [0, 1) from the top 53 bits; identical on every platform.
    double uniform() { return static_cast<double>(rng_() >> 11) * 0x1.0p-53; }

    std::size_t below(std::size_t n) { return static_cast<std::size_t>(uniform() * static_cast<double>(n)); }

    TransmitResult transmit(const PassSchedule& s, Micros t_send, ByteView packet) {
        if (t_send < 0) throw SimError("transmit: negative send time");
        TransmitResult r;
        r.deliver_us = t_send + link_.serialization(packet.size()) + link_.turnaround;
        const auto w = window_at(s, t_send);
        if (!w || r.deliver_us >= w->close) {
            r.outcome = Outcome::OutOfWindow;
            return r;
        }
        if (uniform() < link_.loss_prob) {
            r.outcome = Outcome::Lost;
            return r;
        }
        r.wire.assign(packet.begin(), packet.end());
        if (uniform() < link_.corrupt_prob && !r.wire.empty()) {
            const auto idx = below(r.wire.size());
            const auto mask = static_cast<std::uint8_t>(1 + below(255));
            r.wire[idx] ^= mask;
            r.outcome = Outcome::Corrupted;
            return r;
        }
        r.outcome = Outcome::Delivered;
        return r;
    }

    const LinkModel& link() const noexcept { return link_; }

private:
    LinkModel link_;
    std::mt19937_64 rng_;
};

/// Packets to hand to the receiver in place of `wire`: {} drops, {wire, wire} duplicates.
using Adversary = std::function<std::vector<Bytes>(const TraceEvent&, ByteView wire)>;

struct ExchangeConfig {
    PassSchedule schedule;
    LinkModel link;
    std::size_t mtu = 200;
    handshake::Role ground_role = handshake::Role::KeyHolder;
    std::uint16_t session_id = 1;
    std::uint8_t ground_address = 1;
    std::uint8_t satellite_address = 10;
    handshake::Ports ports;
    /// Pre-shared link key; empty selects the deterministic demo key for this seed.
    Bytes link_key;
    bool authenticate = true;
    bool crc = true;
    link::HmacSettings hmac;
    unsigned max_retries_per_pass = 8;
    Micros tick = 5 * kSecond;
    Micros timeout = 30 * kDay;
    /// Stop after this many windows have opened; 0 = bounded only by the timeout.
    std::uint32_t max_passes = 0;
    /// Snapshot both sessions at PassClosed and restore them at the next PassOpened.
    bool persist_between_passes = false;
    std::size_t app_frames = 4;
    Adversary adversary;

    handshake::HandshakeConfig party(handshake::Site site) const {
        handshake::HandshakeConfig c;
        c.site = site;
        const bool ground = site == handshake::Site::Ground;
        const auto other = ground_role == handshake::Role::KeyHolder ? handshake::Role::Encapsulator
                                                                    : handshake::Role::KeyHolder;
        c.role = ground ? ground_role : other;
        c.session_id = session_id;
        c.ground_address = ground_address;
        c.satellite_address = satellite_address;
        c.ports = ports;
        c.mtu = mtu;
        c.link_key = effective_link_key();
        c.authenticate = authenticate;
        c.crc = crc;
        c.hmac = hmac;
        c.max_retries_per_pass = max_retries_per_pass;
        c.start_us = 0;
        c.timeout = timeout;
        return c;
    }

    Bytes effective_link_key() const {
        if (!link_key.empty()) return link_key;
        return derive_seed("orbitkem/sim/link-key", 32);
    }
    Bytes keygen_seed() const { return derive_seed("orbitkem/sim/keygen", 64); }
    Bytes encaps_seed() const { return derive_seed("orbitkem/sim/encaps", 32); }

    Bytes derive_seed(std::string_view label, std::size_t len) const {
        std::uint8_t s[8];
        store_be64(s, link.rng_seed);
        return crypto::shake256({to_bytes(label), ByteView(s, 8)}, len);
    }
};

enum class ExchangeStatus { Established, Failed, HorizonExhausted };

inline const char* to_string(ExchangeStatus s) noexcept {
    switch (s) {
    case ExchangeStatus::Established: return "Established";
    case ExchangeStatus::Failed: return "Failed";
    case ExchangeStatus::HorizonExhausted: return "HorizonExhausted";
    }
    return "?";
}

struct ExchangeResult {
    ExchangeStatus status = ExchangeStatus::HorizonExhausted;
    handshake::HandshakeSession ground;
    handshake::HandshakeSession satellite;
    std::vector<TraceEvent> trace;
    handshake::AccountingReport report;
    std::uint32_t passes_elapsed = 0;  // windows opened up to completion
    Micros finished_us = 0;
    bool secrets_equal = false;
    bool confirm_tags_match = false;
    std::size_t app_frames_ok = 0;
};

namespace detail {

enum class EventKind : std::uint8_t { PassOpen = 0, Deliver = 1, Tick = 2, PassClose = 3 };

struct Scheduled {
    Micros t = 0;
    std::uint8_t target = 0;  // 0 = ground, 1 = satellite
    EventKind kind = EventKind::Tick;
    std::uint64_t seq = 0;
    Bytes wire;

    auto key() const noexcept { return std::tuple(t, target, static_cast<int>(kind), seq); }
    bool operator>(const Scheduled& o) const noexcept { return key() > o.key(); }
};

/// AES-GCM frames over the established key, ground to satellite, on the data port.
inline std::size_t exchange_app_frames(const ExchangeConfig& cfg, const kem::SharedSecret& g,
                                       const kem::SharedSecret& s, std::size_t n) {
    session::TxChannel tx(session::derive_keys(g, session::kGroundToSatellite));
    session::RxChannel rx(session::derive_keys(s, session::kGroundToSatellite));
    const auto hc = cfg.party(handshake::Site::Ground);
    std::size_t ok = 0;
    for (std::size_t i = 0; i < n; ++i) {
        link::CspHeader h;
        h.priority = 2;
        h.source = cfg.ground_address;
        h.destination = cfg.satellite_address;
        h.destination_port = cfg.ports.data;
        h.source_port = cfg.ports.data;
        h.flags = (cfg.crc ? link::flags::crc : 0) | (cfg.authenticate ? link::flags::hmac : 0);
        const auto raw = link::header_bytes(h);
        const auto text = to_bytes("telecommand frame " + std::to_string(i));
        const auto frame = tx.encrypt_next(text, raw).encode();
        if (frame.size() > cfg.mtu) continue;
        const auto pkt = link::seal(h, frame, hc.seal_options());
        try {
            const auto got = link::CspPacket::decode(pkt.encode());
            const auto& payload = link::verify(got, hc.verify_options());
            if (rx.decrypt(session::SecureFrame::decode(payload), got.raw_header) == text) ++ok;
        } catch (const Error&) {
        }
    }
    return ok;
}

} // namespace detail

inline ExchangeResult run_exchange(const ExchangeConfig& cfg) {
    using namespace handshake;
    cfg.schedule.validate();
    Channel channel(cfg.link);

    auto make = [&](Site site) {
        auto c = cfg.party(site);
        return c.role == Role::KeyHolder ? HandshakeSession::key_holder(c, cfg.keygen_seed())
                                         : HandshakeSession::encapsulator(c, cfg.encaps_seed());
    };
    std::vector<HandshakeSession> parties{make(Site::Ground), make(Site::Satellite)};
    std::vector<Bytes> snapshots(2);

    std::priority_queue<detail::Scheduled, std::vector<detail::Scheduled>, std::greater<>> queue;
    std::uint64_t seq = 0;
    auto push = [&](Micros t, std::uint8_t target, detail::EventKind k, Bytes wire = {}) {
        queue.push({t, target, k, seq++, std::move(wire)});
    };

    std::vector<TraceEvent> trace;
    Micros channel_free = 0;
    std::uint32_t passes_opened = 0;
    std::optional<Window> current;

    auto schedule_pass = [&](std::uint32_t k) {
        const auto w = window_number(cfg.schedule, k);
        if (w.open - cfg.schedule.offset >= cfg.timeout + cfg.schedule.period) return;
        for (std::uint8_t p = 0; p < 2; ++p) push(w.open, p, detail::EventKind::PassOpen);
        for (Micros t = w.open + cfg.tick; t < w.close; t += cfg.tick)
            for (std::uint8_t p = 0; p < 2; ++p) push(t, p, detail::EventKind::Tick);
        for (std::uint8_t p = 0; p < 2; ++p) push(w.close, p, detail::EventKind::PassClose);
    };

    auto send = [&](std::uint8_t from, Micros now, std::vector<Outbound>&& out) {
        for (auto& o : out) {
            const Micros start = std::max(now, channel_free);
            auto r = channel.transmit(cfg.schedule, start, o.wire);
            // A packet started inside a window holds the channel even if it cannot finish in time.
            if (window_at(cfg.schedule, start)) channel_free = r.deliver_us;
            TraceEvent ev;
            ev.t_us = start;
            ev.dir = from == 0 ? Direction::Uplink : Direction::Downlink;
            ev.size = o.wire.size();
            ev.payload_size = o.payload_size;
            ev.port = o.port;
            ev.kind = o.kind;
            ev.retransmission = o.retransmission;
            ev.outcome = r.outcome;
            ev.deliver_us = r.deliver_us;
            ev.pass_index = current ? current->index : 0;
            ev.wire = r.wire;
            if (r.outcome == Outcome::Delivered || r.outcome == Outcome::Corrupted) {
                const auto to = static_cast<std::uint8_t>(1 - from);
                if (cfg.adversary) {
                    for (auto& w : cfg.adversary(ev, r.wire)) push(r.deliver_us, to, detail::EventKind::Deliver, std::move(w));
                } else {
                    push(r.deliver_us, to, detail::EventKind::Deliver, std::move(r.wire));
                }
            }
            trace.push_back(std::move(ev));
        }
    };

    auto finished = [&] {
        return (parties[0].state() == State::Established && parties[1].state() == State::Established) ||
               parties[0].state() == State::Failed || parties[1].state() == State::Failed;
    };

    schedule_pass(0);
    Micros now = 0;
    while (!queue.empty() && !finished()) {
        auto ev = queue.top();
        queue.pop();
        now = ev.t;
        auto& party = parties[ev.target];
        switch (ev.kind) {
        case detail::EventKind::PassOpen:
            if (ev.target == 0) {
                if (cfg.max_passes && passes_opened >= cfg.max_passes) {
                    while (!queue.empty()) queue.pop();
                    continue;
                }
                ++passes_opened;
                current = window_at(cfg.schedule, ev.t);
                channel_free = std::max(channel_free, ev.t);
                schedule_pass(current->index + 1);
            }
            if (cfg.persist_between_passes && !snapshots[ev.target].empty()) {
                party = HandshakeSession::restore(snapshots[ev.target], party.config());
                snapshots[ev.target].clear();
            }
            send(ev.target, now, party.step(PassOpened{}));
            break;
        case detail::EventKind::Tick: send(ev.target, now, party.step(Tick{now})); break;
        case detail::EventKind::Deliver: send(ev.target, now, party.step(Incoming{std::move(ev.wire)})); break;
        case detail::EventKind::PassClose:
            send(ev.target, now, party.step(PassClosed{}));
            if (cfg.persist_between_passes) snapshots[ev.target] = party.snapshot();
            if (ev.target == 1) current.reset();
            break;
        }
    }

    ExchangeResult res{ExchangeStatus::HorizonExhausted, std::move(parties[0]), std::move(parties[1]), std::move(trace), {}, passes_opened, now};
    res.report = bytes_over_air(res.trace);
    if (res.ground.state() == State::Failed || res.satellite.state() == State::Failed) {
        res.status = ExchangeStatus::Failed;
    } else if (res.ground.state() == State::Established && res.satellite.state() == State::Established) {
        const auto* g = res.ground.shared_secret();
        const auto* s = res.satellite.shared_secret();
        res.secrets_equal = g && s && *g == *s;
        if (!res.secrets_equal) throw SimError("run_exchange: established sessions disagree on the shared secret");
        res.confirm_tags_match =
            res.ground.transcript_hash() == res.satellite.transcript_hash() &&
            confirm_tag(*g, res.ground.transcript_hash(), direction_label(Site::Ground)) ==
                confirm_tag(*s, res.satellite.transcript_hash(), direction_label(Site::Ground)) &&
            confirm_tag(*g, res.ground.transcript_hash(), direction_label(Site::Satellite)) ==
                confirm_tag(*s, res.satellite.transcript_hash(), direction_label(Site::Satellite));
        res.app_frames_ok = detail::exchange_app_frames(cfg, *g, *s, cfg.app_frames);
        res.status = ExchangeStatus::Established;
    }
    return res;
}

} // namespace orbitkem::sim
