#pragma once

// Known-answer-test support: the NIST AES-256 CTR_DRBG used by the reference KAT generator,
// a parser for its request/response (.rsp) files and a per-vector runner.

#include <istream>
#include <optional>
#include <string>
#include <vector>

#include "orbitkem/common/bytes.hpp"
#include "orbitkem/crypto/primitives.hpp"
#include "orbitkem/kem/kyber.hpp"

namespace orbitkem::kem {

/// AES-256 CTR_DRBG without derivation function or prediction resistance, as used by
/// the NIST PQC KAT generator (randombytes_init / randombytes).
class NistDrbg final : public RandomSource {
public:
    explicit NistDrbg(ByteView entropy48) {
        if (entropy48.size() != 48) throw Error("NistDrbg: entropy input must be 48 bytes");
        update(entropy48);
    }
    ~NistDrbg() override {
        secure_zero(key_);
        secure_zero(v_);
    }

    void fill(std::span<std::uint8_t> out) override {
        std::size_t off = 0;
        while (off < out.size()) {
            increment_v();
            auto block = crypto::aes256_encrypt_block(key_, v_);
            const std::size_t take = std::min<std::size_t>(16, out.size() - off);
            std::copy_n(block.begin(), take, out.begin() + static_cast<std::ptrdiff_t>(off));
            off += take;
        }
        update({});
    }

    Bytes generate(std::size_t n) {
        Bytes out(n);
        fill(out);
        return out;
    }

private:
    void increment_v() noexcept {
        for (int j = 15; j >= 0; --j) {
            if (v_[j] == 0xFF) {
                v_[j] = 0;
            } else {
                ++v_[j];
                break;
            }
        }
    }

    void update(ByteView provided) {
        std::array<std::uint8_t, 48> temp{};
        for (int i = 0; i < 3; ++i) {
            increment_v();
            auto block = crypto::aes256_encrypt_block(key_, v_);
            std::copy(block.begin(), block.end(), temp.begin() + 16 * i);
        }
        if (!provided.empty())
            for (std::size_t i = 0; i < 48; ++i) temp[i] ^= provided[i];
        std::copy_n(temp.begin(), 32, key_.begin());
        std::copy_n(temp.begin() + 32, 16, v_.begin());
        secure_zero(temp);
    }

    std::array<std::uint8_t, 32> key_{};
    std::array<std::uint8_t, 16> v_{};
};

class KatFormatError : public Error {
public:
    using Error::Error;
};

struct KatVector {
    int count = -1;
    Bytes seed, pk, sk, ct, ss;
};

/// Parses `key = hex` records separated by blank lines. Lines starting with '#' are ignored.
inline std::vector<KatVector> parse_kat_file(std::istream& in) {
    std::vector<KatVector> out;
    std::optional<KatVector> cur;
    std::string line;
    int lineno = 0;
    auto flush = [&] {
        if (!cur) return;
        if (cur->count < 0 || cur->seed.empty() || cur->pk.empty() || cur->sk.empty() || cur->ct.empty() ||
            cur->ss.empty())
            throw KatFormatError("incomplete KAT record ending before line " + std::to_string(lineno));
        out.push_back(std::move(*cur));
        cur.reset();
    };
    while (std::getline(in, line)) {
        ++lineno;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) {
            flush();
            continue;
        }
        if (line[0] == '#') continue;
        const auto eq = line.find('=');
        if (eq == std::string::npos) throw KatFormatError("line " + std::to_string(lineno) + ": expected key = value");
        auto trim = [](std::string s) {
            const auto b = s.find_first_not_of(" \t");
            const auto e = s.find_last_not_of(" \t");
            return b == std::string::npos ? std::string{} : s.substr(b, e - b + 1);
        };
        const std::string key = trim(line.substr(0, eq));
        const std::string value = trim(line.substr(eq + 1));
        if (!cur) cur.emplace();
        try {
            if (key == "count") cur->count = std::stoi(value);
            else if (key == "seed") cur->seed = from_hex(value);
            else if (key == "pk") cur->pk = from_hex(value);
            else if (key == "sk") cur->sk = from_hex(value);
            else if (key == "ct") cur->ct = from_hex(value);
            else if (key == "ss") cur->ss = from_hex(value);
            else throw KatFormatError("line " + std::to_string(lineno) + ": unknown field '" + key + "'");
        } catch (const KatFormatError&) {
            throw;
        } catch (const std::exception& e) {
            throw KatFormatError("line " + std::to_string(lineno) + ": " + e.what());
        }
    }
    flush();
    if (out.empty()) throw KatFormatError("no KAT vectors found");
    return out;
}

struct KatResult {
    int count = -1;
    bool pk = false, sk = false, ct = false, ss = false, decaps = false;
    bool pass() const noexcept { return pk && sk && ct && ss && decaps; }
};

/// Replays the reference generator: DRBG(seed), keygen, encaps, decaps.
inline KatResult run_kat_vector(const KatVector& v) {
    KatResult r;
    r.count = v.count;
    NistDrbg drbg(v.seed);
    auto kp = kem_keygen(drbg);
    auto enc = kem_encaps(kp.public_key, drbg);
    auto dec = kem_decaps(kp.secret_key.view(), enc.ciphertext.view());
    r.pk = ct_equal(kp.public_key, v.pk);
    r.sk = ct_equal(kp.secret_key.view(), v.sk);
    r.ct = ct_equal(enc.ciphertext.view(), v.ct);
    r.ss = ct_equal(enc.shared_secret.view(), v.ss);
    // Decapsulation of the published ciphertext with the published key.
    if (v.sk.size() == kSecretKeyBytes && v.ct.size() == kCiphertextBytes)
        r.decaps = ct_equal(kem_decaps(v.sk, v.ct).view(), v.ss) && dec == enc.shared_secret;
    return r;
}

} // namespace orbitkem::kem
