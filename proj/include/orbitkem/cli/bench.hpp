#pragma once

// Wall-clock micro-benchmarks of the primitives used on the link. Numbers are informational.

#include <algorithm>
#include <cmath>
#include <chrono>
#include <functional>
#include <numeric>
#include <optional>
#include <string>
#include <thread>
#include <vector>

#include <sys/utsname.h>

#include "orbitkem/common/bytes.hpp"
#include "orbitkem/crypto/xtea.hpp"
#include "orbitkem/kem/kyber.hpp"
#include "orbitkem/link/csp.hpp"
#include "orbitkem/session/session_crypto.hpp"

namespace orbitkem::cli {

inline constexpr std::size_t kMinBenchIterations = 100;

class BenchError : public Error {
public:
    using Error::Error;
};

struct BenchRow {
    std::string name;
    std::size_t iterations = 0;
    double median_ns = 0;
    double mean_ns = 0;
    double p95_ns = 0;
    std::size_t bytes_processed = 0;  // per iteration
};

struct BenchReport {
    std::size_t requested_iterations = 0;
    std::size_t iterations = 0;
    std::vector<BenchRow> rows;
    std::string environment;

    const BenchRow* find(std::string_view name) const {
        for (const auto& r : rows)
            if (r.name == name) return &r;
        return nullptr;
    }

    /// Cost of the KeyHolder's decaps relative to the Encapsulator's encaps.
    std::optional<double> decaps_encaps_ratio() const {
        const auto* d = find("kem_decaps");
        const auto* e = find("kem_encaps");
        if (!d || !e || e->median_ns <= 0) return std::nullopt;
        return d->median_ns / e->median_ns;
    }
};

inline std::string environment_description() {
    std::string out;
    utsname u{};
    if (uname(&u) == 0) out += std::string(u.sysname) + " " + u.release + " " + u.machine;
#if defined(__clang__)
    out += ", clang " __clang_version__;
#elif defined(__GNUC__)
    out += ", gcc " __VERSION__;
#endif
    out += ", " + std::to_string(std::thread::hardware_concurrency()) + " hw threads";
#ifdef NDEBUG
    out += ", optimized build";
#else
    out += ", debug build";
#endif
    return out;
}

inline BenchRow measure(std::string name, std::size_t iterations, std::size_t bytes, const std::function<void()>& fn) {
    using clock = std::chrono::steady_clock;
    std::vector<double> samples;
    samples.reserve(iterations);
    fn();  // warm-up
    for (std::size_t i = 0; i < iterations; ++i) {
        const auto t0 = clock::now();
        fn();
        const auto t1 = clock::now();
        samples.push_back(std::chrono::duration<double, std::nano>(t1 - t0).count());
    }
    std::sort(samples.begin(), samples.end());
    BenchRow r;
    r.name = std::move(name);
    r.iterations = iterations;
    const std::size_t n = samples.size();
    r.median_ns = n % 2 ? samples[n / 2] : (samples[n / 2 - 1] + samples[n / 2]) / 2;
    r.mean_ns = std::accumulate(samples.begin(), samples.end(), 0.0) / static_cast<double>(n);
    r.p95_ns = samples[std::min(n - 1, static_cast<std::size_t>(std::ceil(0.95 * static_cast<double>(n))) - 1)];
    r.bytes_processed = bytes;
    return r;
}

inline const std::vector<std::string>& bench_op_names() {
    static const std::vector<std::string> names{
        "kem_keygen", "kem_encaps",   "kem_decaps",    "csp_seal",        "csp_verify",        "gcm_seal_frame",
        "gcm_open_frame", "xtea_block", "xtea_ctr_frame", "hkdf_session_keys", "sha3_256_1k"};
    return names;
}

/// `ops` empty or {"all"} runs everything. Unknown names throw before any timing starts.
inline BenchReport run_bench(const std::vector<std::string>& ops, std::size_t iterations) {
    if (iterations == 0) throw BenchError("bench: iterations must be at least 1");
    std::vector<std::string> selected;
    const auto& all = bench_op_names();
    if (ops.empty() || (ops.size() == 1 && ops[0] == "all")) {
        selected = all;
    } else {
        for (const auto& o : ops) {
            if (std::find(all.begin(), all.end(), o) == all.end()) throw BenchError("bench: unknown op '" + o + "'");
            selected.push_back(o);
        }
    }

    BenchReport rep;
    rep.requested_iterations = iterations;
    rep.iterations = std::max(iterations, kMinBenchIterations);
    rep.environment = environment_description();

    Bytes seed64(64), seed32(32);
    for (std::size_t i = 0; i < 64; ++i) seed64[i] = static_cast<std::uint8_t>(i);
    for (std::size_t i = 0; i < 32; ++i) seed32[i] = static_cast<std::uint8_t>(0xA0 + i);
    const auto kp = kem::kem_keygen(seed64);
    const auto enc = kem::kem_encaps(kp.public_key, seed32);
    kem::SharedSecret ss = enc.shared_secret;

    const Bytes link_key(32, 0x5C);
    link::SealOptions so;
    so.crc = true;
    so.hmac_key = link_key;
    link::VerifyOptions vo;
    vo.hmac_key = link_key;
    link::CspHeader h{2, 1, 10, 20, 20, 0};
    const Bytes payload(192, 0x42);
    const auto sealed = link::seal(h, payload, so);

    const auto keys = session::derive_keys(ss, session::kGroundToSatellite);
    const auto aad = link::header_bytes(h);
    const Bytes frame_pt(160, 0x33);
    const auto frame = session::encrypt_frame(keys, 7, frame_pt, aad);
    const auto legacy = session::derive_legacy_keys(ss, session::kGroundToSatellite);
    const crypto::XteaBlock blk{};
    const Bytes kilobyte(1024, 0x61);

    volatile std::uint8_t sink = 0;
    std::uint64_t seq = 0;
    for (const auto& op : selected) {
        std::function<void()> fn;
        std::size_t bytes = 0;
        if (op == "kem_keygen") {
            bytes = kem::kPublicKeyBytes + kem::kSecretKeyBytes;
            fn = [&] { sink = sink ^ kem::kem_keygen(seed64).public_key[0]; };
        } else if (op == "kem_encaps") {
            bytes = kem::kCiphertextBytes;
            fn = [&] { sink = sink ^ kem::kem_encaps(kp.public_key, seed32).ciphertext.bytes[0]; };
        } else if (op == "kem_decaps") {
            bytes = kem::kCiphertextBytes;
            fn = [&] { sink = sink ^ kem::kem_decaps(kp.secret_key.view(), enc.ciphertext.view()).data()[0]; };
        } else if (op == "csp_seal") {
            bytes = payload.size();
            fn = [&] { sink = sink ^ link::seal(h, payload, so).raw_header[0]; };
        } else if (op == "csp_verify") {
            bytes = payload.size();
            fn = [&] { sink = sink ^ link::verify(sealed, vo)[0]; };
        } else if (op == "gcm_seal_frame") {
            bytes = frame_pt.size();
            fn = [&] { sink = sink ^ session::encrypt_frame(keys, ++seq, frame_pt, aad).auth_tag[0]; };
        } else if (op == "gcm_open_frame") {
            bytes = frame_pt.size();
            fn = [&] { sink = sink ^ session::decrypt_frame(keys, frame, aad)[0]; };
        } else if (op == "xtea_block") {
            bytes = 8;
            fn = [&] { sink = sink ^ crypto::xtea_encrypt_block(legacy.xtea_key, blk)[0]; };
        } else if (op == "xtea_ctr_frame") {
            bytes = frame_pt.size();
            fn = [&] { sink = sink ^ session::legacy_encrypt_frame(legacy, ++seq, frame_pt)[8]; };
        } else if (op == "hkdf_session_keys") {
            bytes = 60;
            fn = [&] { sink = sink ^ session::derive_keys(ss, session::kGroundToSatellite).aes_key[0]; };
        } else if (op == "sha3_256_1k") {
            bytes = kilobyte.size();
            fn = [&] { sink = sink ^ crypto::sha3_256(kilobyte)[0]; };
        }
        rep.rows.push_back(measure(op, rep.iterations, bytes, fn));
    }
    (void)sink;
    return rep;
}

} // namespace orbitkem::cli
