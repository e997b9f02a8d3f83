#pragma once

// The verbs behind the orbitkem tool. Each returns a process exit code:
// 0 success, 1 functional failure, 2 usage or input error.

#include <fstream>
#include <iomanip>
#include <map>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "orbitkem/cli/bench.hpp"
#include "orbitkem/cli/keystore.hpp"
#include "orbitkem/cli/run_config.hpp"
#include "orbitkem/kem/kat.hpp"
#include "orbitkem/link/csp.hpp"
#include "orbitkem/sim/export.hpp"

#ifndef ORBITKEM_VERSION
#define ORBITKEM_VERSION "0.0.0"
#endif

namespace orbitkem::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitFailure = 1;
inline constexpr int kExitUsage = 2;

inline nlohmann::json report_header(std::string_view command, const RunConfig& cfg) {
    return {{"tool", "orbitkem"}, {"version", ORBITKEM_VERSION}, {"command", command}, {"config", cfg.to_json()}};
}

/// Writes to cfg.output when set, else to `out`.
inline void emit(const RunConfig& cfg, std::ostream& out, const std::string& text) {
    if (cfg.output.empty()) {
        out << text;
        return;
    }
    std::ofstream f(cfg.output, std::ios::binary);
    if (!f) throw UsageError("cannot write output file '" + cfg.output + "'");
    f << text;
}

struct KatOptions {
    std::string path;
    bool verbose = false;
};

inline int cmd_kat(const KatOptions& opt, std::ostream& out, std::ostream& err) {
    std::ifstream in(opt.path);
    if (!in) {
        err << "kat: cannot open '" << opt.path << "'\n";
        return kExitUsage;
    }
    std::vector<kem::KatVector> vectors;
    try {
        vectors = kem::parse_kat_file(in);
    } catch (const kem::KatFormatError& e) {
        err << "kat: " << e.what() << "\n";
        return kExitUsage;
    }
    std::size_t failed = 0;
    for (const auto& v : vectors) {
        const auto r = kem::run_kat_vector(v);
        if (!r.pass()) {
            ++failed;
            out << "vector " << v.count << ": FAIL" << (r.pk ? "" : " pk") << (r.sk ? "" : " sk") << (r.ct ? "" : " ct")
                << (r.ss ? "" : " ss") << (r.decaps ? "" : " decaps") << "\n";
        } else if (opt.verbose) {
            out << "vector " << v.count << ": pass\n";
        }
    }
    out << "kat: " << (vectors.size() - failed) << "/" << vectors.size() << " vectors pass\n";
    return failed ? kExitFailure : kExitOk;
}

struct SweepSummary {
    std::size_t runs = 0;
    std::size_t established = 0;
    std::map<std::uint32_t, std::size_t> pass_histogram;
    std::vector<nlohmann::json> results;
};

inline SweepSummary run_sweep(const RunConfig& cfg, const std::string& trace_path = {}) {
    SweepSummary s;
    std::ofstream trace;
    if (!trace_path.empty()) {
        trace.open(trace_path, std::ios::binary);
        if (!trace) throw UsageError("cannot write trace file '" + trace_path + "'");
    }
    for (std::uint64_t i = 0; i < cfg.seeds; ++i) {
        const auto seed = cfg.seed + i;
        const auto res = sim::run_exchange(cfg.exchange_config(seed));
        ++s.runs;
        if (res.status == sim::ExchangeStatus::Established) {
            ++s.established;
            ++s.pass_histogram[res.passes_elapsed];
        }
        auto j = sim::to_json(res);
        j["seed"] = seed;
        s.results.push_back(std::move(j));
        if (trace) trace << sim::trace_ndjson(res.trace);
    }
    return s;
}

inline int cmd_exchange(const RunConfig& cfg, const std::string& trace_path, std::ostream& out) {
    cfg.validate();
    const auto s = run_sweep(cfg, trace_path);
    std::string text;
    if (cfg.format == "json") {
        auto rep = report_header("exchange", cfg);
        nlohmann::json hist = nlohmann::json::object();
        for (const auto& [p, n] : s.pass_histogram) hist[std::to_string(p)] = n;
        rep["runs"] = s.runs;
        rep["established"] = s.established;
        rep["success_rate"] = s.runs ? static_cast<double>(s.established) / static_cast<double>(s.runs) : 0.0;
        rep["pass_histogram"] = hist;
        rep["results"] = s.results;
        text = rep.dump(2) + "\n";
    } else {
        std::ostringstream os;
        os << "seed,status,passes_elapsed,finished_us,uplink_bytes,downlink_bytes,packets,retransmissions,pk_fragments,"
              "ct_fragments\n";
        for (const auto& r : s.results) {
            const auto& a = r["accounting"];
            os << r["seed"] << "," << r["status"].get<std::string>() << "," << r["passes_elapsed"] << ","
               << r["finished_us"] << "," << a["uplink_bytes"] << "," << a["downlink_bytes"] << "," << a["packets"]
               << "," << a["retransmissions"] << "," << a["pk_fragments"] << "," << a["ct_fragments"] << "\n";
        }
        text = os.str();
    }
    emit(cfg, out, text);
    return s.established == s.runs ? kExitOk : kExitFailure;
}

inline int cmd_keystore(const RunConfig& cfg, const std::vector<std::uint64_t>& ns, std::ostream& out) {
    std::vector<KeystoreRow> rows;
    for (auto n : ns) rows.push_back(keystore(n));  // throws KeystoreError on n == 0
    std::string text;
    if (cfg.format == "json") {
        auto rep = report_header("keystore", cfg);
        rep["symmetric_key_bytes"] = kSymmetricKeyBytes;
        rep["keypair_bytes"] = kKeypairBytes;
        rep["rows"] = nlohmann::json::array();
        for (const auto& r : rows)
            rep["rows"].push_back({{"n", r.n},
                                   {"pairwise_keys", r.pairwise_keys},
                                   {"symmetric_storage_bytes", r.symmetric_storage_bytes},
                                   {"keypairs", r.keypairs},
                                   {"pk_keys", r.pk_keys},
                                   {"pk_storage_bytes", r.pk_storage_bytes}});
        text = rep.dump(2) + "\n";
    } else {
        std::ostringstream os;
        os << "n,pairwise_keys,symmetric_storage_bytes,keypairs,pk_keys,pk_storage_bytes\n";
        for (const auto& r : rows)
            os << r.n << "," << r.pairwise_keys << "," << r.symmetric_storage_bytes << "," << r.keypairs << ","
               << r.pk_keys << "," << r.pk_storage_bytes << "\n";
        text = os.str();
    }
    emit(cfg, out, text);
    return kExitOk;
}

inline int cmd_bench(const RunConfig& cfg, const std::vector<std::string>& ops, std::size_t iterations,
                     std::ostream& out) {
    const auto rep = run_bench(ops, iterations);
    std::string text;
    if (cfg.format == "json") {
        auto j = report_header("bench", cfg);
        j["requested_iterations"] = rep.requested_iterations;
        j["iterations"] = rep.iterations;
        j["environment"] = rep.environment;
        j["timing_note"] = "informational wall-clock timings on the build host";
        j["rows"] = nlohmann::json::array();
        for (const auto& r : rep.rows)
            j["rows"].push_back({{"name", r.name},
                                 {"iterations", r.iterations},
                                 {"median_ns", r.median_ns},
                                 {"mean_ns", r.mean_ns},
                                 {"p95_ns", r.p95_ns},
                                 {"bytes_processed", r.bytes_processed}});
        if (auto ratio = rep.decaps_encaps_ratio()) j["decaps_encaps_ratio"] = *ratio;
        text = j.dump(2) + "\n";
    } else {
        std::ostringstream os;
        os << "name,iterations,median_ns,mean_ns,p95_ns,bytes_processed\n";
        for (const auto& r : rep.rows)
            os << r.name << "," << r.iterations << "," << std::fixed << std::setprecision(1) << r.median_ns << ","
               << r.mean_ns << "," << r.p95_ns << "," << r.bytes_processed << "\n";
        text = os.str();
    }
    emit(cfg, out, text);
    return kExitOk;
}

struct DumpOptions {
    std::string hex;
    std::string hmac_key_hex;
    bool require_crc = false;
};

/// Prints the fields of one wire packet and the status of its trailers.
inline int cmd_dump_packet(const DumpOptions& opt, std::ostream& out, std::ostream& err) {
    Bytes wire;
    try {
        wire = from_hex(opt.hex);
    } catch (const Error& e) {
        err << "dump-packet: " << e.what() << "\n";
        return kExitUsage;
    }
    link::CspPacket p;
    try {
        p = link::CspPacket::decode(wire);
    } catch (const link::LinkError& e) {
        out << "decode: " << e.what() << "\n";
        return kExitFailure;
    }
    out << link::describe(p);
    link::VerifyOptions vo;
    vo.require_crc = opt.require_crc;
    if (!opt.hmac_key_hex.empty()) {
        try {
            vo.hmac_key = from_hex(opt.hmac_key_hex);
        } catch (const Error& e) {
            err << "dump-packet: " << e.what() << "\n";
            return kExitUsage;
        }
    }
    if ((p.header.flags & link::flags::hmac) && !vo.hmac_key) {
        // Without the key only the CRC can be checked.
        if (p.crc && link::detail::packet_crc(p.raw_header, p.payload) != *p.crc) {
            out << "verify      FAIL (crc mismatch)\n";
            return kExitFailure;
        }
        out << "verify      crc " << (p.crc ? "ok" : "absent") << ", hmac not checked (no key)\n";
        return kExitOk;
    }
    try {
        link::verify(p, vo);
        out << "verify      ok\n";
        return kExitOk;
    } catch (const link::LinkError& e) {
        out << "verify      FAIL (" << e.what() << ")\n";
        return kExitFailure;
    }
}

} // namespace orbitkem::cli
