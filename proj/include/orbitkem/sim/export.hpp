#pragma once

// JSON views of simulation output. One trace record per line (NDJSON).

#include <ostream>
#include <string>

#include <json.hpp>

#include "orbitkem/sim/orbit_sim.hpp"

namespace orbitkem::sim {

inline nlohmann::json to_json(const TraceEvent& e) {
    return {{"t_us", e.t_us},
            {"dir", handshake::to_string(e.dir)},
            {"size", e.size},
            {"outcome", handshake::to_string(e.outcome)},
            {"port", e.port},
            {"kind", handshake::to_string(e.kind)},
            {"retx", e.retransmission},
            {"deliver_us", e.deliver_us},
            {"pass", e.pass_index}};
}

inline std::string trace_ndjson(const std::vector<TraceEvent>& trace) {
    std::string out;
    for (const auto& e : trace) {
        out += to_json(e).dump();
        out += '\n';
    }
    return out;
}

inline nlohmann::json to_json(const handshake::AccountingReport& r) {
    return {{"uplink_bytes", r.uplink_bytes},
            {"downlink_bytes", r.downlink_bytes},
            {"uplink_payload_bytes", r.uplink_payload_bytes},
            {"downlink_payload_bytes", r.downlink_payload_bytes},
            {"packets", r.packets},
            {"uplink_packets", r.uplink_packets},
            {"downlink_packets", r.downlink_packets},
            {"retransmissions", r.retransmissions},
            {"passes_used", r.passes_used},
            {"pk_fragments", r.pk_fragments},
            {"ct_fragments", r.ct_fragments},
            {"nacks", r.nacks},
            {"confirms", r.confirms},
            {"delivered", r.delivered},
            {"lost", r.lost},
            {"corrupted", r.corrupted},
            {"out_of_window", r.out_of_window}};
}

inline nlohmann::json to_json(const ExchangeResult& r) {
    auto party = [](const handshake::HandshakeSession& s) {
        return nlohmann::json{{"role", handshake::to_string(s.role())},
                              {"state", handshake::to_string(s.state())},
                              {"fail_reason", handshake::to_string(s.fail_reason())},
                              {"transcript", to_hex(s.transcript_hash())},
                              {"messages_accepted", s.stats().messages_accepted},
                              {"duplicates", s.stats().duplicates},
                              {"kem_operations", s.stats().kem_operations},
                              {"link_rejected", s.link_stats().rejected()}};
    };
    return {{"status", to_string(r.status)},
            {"established", r.status == ExchangeStatus::Established},
            {"passes_elapsed", r.passes_elapsed},
            {"finished_us", r.finished_us},
            {"secrets_equal", r.secrets_equal},
            {"confirm_tags_match", r.confirm_tags_match},
            {"app_frames_ok", r.app_frames_ok},
            {"ground", party(r.ground)},
            {"satellite", party(r.satellite)},
            {"accounting", to_json(r.report)},
            {"model_note", "simulated link model output, not a flight measurement"}};
}

} // namespace orbitkem::sim
