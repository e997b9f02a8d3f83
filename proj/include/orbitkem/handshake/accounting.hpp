#pragma once

// Per-packet trace records and the link budget report derived from them.

#include <cstdint>
#include <set>
#include <span>

#include "orbitkem/common/bytes.hpp"
#include "orbitkem/handshake/messages.hpp"

namespace orbitkem::handshake {

enum class Direction : std::uint8_t { Uplink, Downlink };  // ground->satellite, satellite->ground
enum class Outcome : std::uint8_t { Delivered, Lost, Corrupted, OutOfWindow };

inline const char* to_string(Direction d) noexcept { return d == Direction::Uplink ? "up" : "down"; }

inline const char* to_string(Outcome o) noexcept {
    switch (o) {
    case Outcome::Delivered: return "delivered";
    case Outcome::Lost: return "lost";
    case Outcome::Corrupted: return "corrupted";
    case Outcome::OutOfWindow: return "out-of-window";
    }
    return "?";
}

/// One sent packet and what the channel did with it.
struct TraceEvent {
    std::int64_t t_us = 0;           // start of transmission
    Direction dir = Direction::Uplink;
    std::size_t size = 0;            // wire bytes
    std::size_t payload_size = 0;    // CSP payload bytes
    std::uint8_t port = 0;
    MessageKind kind = MessageKind::ConfirmAck;
    bool retransmission = false;
    Outcome outcome = Outcome::Delivered;
    std::int64_t deliver_us = 0;
    std::uint32_t pass_index = 0;
    Bytes wire;                      // bytes as received (after corruption); empty unless delivered/corrupted

    friend bool operator==(const TraceEvent&, const TraceEvent&) = default;
};

struct AccountingReport {
    std::uint64_t uplink_bytes = 0;
    std::uint64_t downlink_bytes = 0;
    std::uint64_t uplink_payload_bytes = 0;
    std::uint64_t downlink_payload_bytes = 0;
    std::uint64_t packets = 0;
    std::uint64_t uplink_packets = 0;
    std::uint64_t downlink_packets = 0;
    std::uint64_t retransmissions = 0;
    std::uint64_t passes_used = 0;  // distinct passes with at least one transmission
    std::uint64_t pk_fragments = 0;  // first transmissions only
    std::uint64_t ct_fragments = 0;
    std::uint64_t nacks = 0;
    std::uint64_t confirms = 0;
    std::uint64_t delivered = 0;
    std::uint64_t lost = 0;
    std::uint64_t corrupted = 0;
    std::uint64_t out_of_window = 0;

    friend bool operator==(const AccountingReport&, const AccountingReport&) = default;
};

inline AccountingReport bytes_over_air(std::span<const TraceEvent> trace) {
    AccountingReport r;
    std::set<std::uint32_t> passes;
    for (const auto& e : trace) {
        ++r.packets;
        passes.insert(e.pass_index);
        if (e.dir == Direction::Uplink) {
            ++r.uplink_packets;
            r.uplink_bytes += e.size;
            r.uplink_payload_bytes += e.payload_size;
        } else {
            ++r.downlink_packets;
            r.downlink_bytes += e.size;
            r.downlink_payload_bytes += e.payload_size;
        }
        if (e.retransmission) ++r.retransmissions;
        if (!e.retransmission && e.kind == MessageKind::PkFragment) ++r.pk_fragments;
        if (!e.retransmission && e.kind == MessageKind::CtFragment) ++r.ct_fragments;
        if (e.kind == MessageKind::FragmentNack) ++r.nacks;
        if (e.kind == MessageKind::Confirm) ++r.confirms;
        switch (e.outcome) {
        case Outcome::Delivered: ++r.delivered; break;
        case Outcome::Lost: ++r.lost; break;
        case Outcome::Corrupted: ++r.corrupted; break;
        case Outcome::OutOfWindow: ++r.out_of_window; break;
        }
    }
    r.passes_used = passes.size();
    return r;
}

} // namespace orbitkem::handshake
